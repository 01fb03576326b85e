"""Exception taxonomy shared across the package.

Two families matter for the CLI exit codes: :class:`DataError` (bad or
inconsistent input data, exit code 1) and :class:`EstimationError` /
:class:`UsageError` (estimation failures and caller mistakes, exit code 2).
"""

from __future__ import annotations


class OwnchainsError(Exception):
    """Base class for all package-specific errors."""


class DataError(OwnchainsError):
    """Input data violates a documented precondition (exit code 1)."""


class ParseError(DataError):
    """A file could not be parsed; carries the offending row number."""


class SchemaError(DataError):
    """A required column or key is missing from an input table."""


class CoverageError(DataError):
    """Required rows (e.g. country pairs) are missing from an input table."""


class ValidationError(DataError):
    """A scalar input is outside its documented domain."""


class UsageError(OwnchainsError):
    """The caller passed an unknown mode/spec (exit code 2)."""


class SpecError(UsageError):
    """A regression spec is inconsistent with the requested operation."""


class EstimationError(OwnchainsError):
    """An estimator failed to converge or cannot be run (exit code 2)."""


class EmptyModelError(EstimationError):
    """All outcomes are zero; there is nothing to fit."""


class InferenceError(EstimationError):
    """Clustered inference is impossible (e.g. a single cluster)."""


class NormalizationError(EstimationError):
    """A recovered-cost normalization is unusable downstream."""


class PredictionError(EstimationError):
    """Prediction requested for a fixed-effect level absent from the fit."""


class ConventionError(EstimationError):
    """A quantity has the wrong sign for the adopted cost convention."""


class ParameterError(UsageError):
    """Structural-model parameters violate their ordering constraints."""


class DomainError(UsageError):
    """A mathematical operation was called outside its domain
    (e.g. a composite cost over an empty candidate set)."""


class ConfigError(UsageError):
    """A simulation/world configuration is invalid."""


class StructuralError(DataError):
    """A control hierarchy is not the tree it is required to be."""
