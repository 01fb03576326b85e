"""Poisson pseudo-maximum-likelihood with high-dimensional fixed effects.

Fits count models by iteratively reweighted least squares, absorbing fixed
effects through weighted alternating-projection demeaning instead of dummy
expansion. Supports offsets, cluster-robust covariance, recovery of the
absorbed fixed-effect values, and the two estimation stages built on top:
dyad-cost extraction from fixed effects and the bilateral cost regression.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
import pandas as pd

from .errors import (CoverageError, DataError, EmptyModelError, EstimationError,
                     InferenceError, NormalizationError, ParameterError,
                     PredictionError, SchemaError)

DEFAULT_FLOOR = 0.01
COLLINEARITY_RTOL = 1e-7


@dataclass(frozen=True)
class RegressionSpec:
    """What to estimate: outcome, slope regressors, absorbed fixed-effect
    factors, optional log-scale offset column, optional cluster column."""

    outcome: str
    regressors: tuple[str, ...]
    fixed_effects: tuple[str, ...] = ()
    offset: str | None = None
    cluster: str | None = None
    deviance_tol: float = 1e-9
    demean_tol: float = 1e-10
    max_iterations: int = 100

    def __post_init__(self) -> None:
        if len(set(self.regressors)) != len(self.regressors):
            raise ParameterError("duplicate regressor names")
        overlap = set(self.regressors) & set(self.fixed_effects)
        if overlap:
            raise ParameterError(f"columns listed both as regressors and fixed effects: {sorted(overlap)}")


@dataclass
class PpmlFit:
    """Converged fit: coefficients with their covariance, recovered
    fixed-effect values, and fit diagnostics.

    Arrays prefixed with an underscore hold the retained estimation sample
    (after separation and collinearity drops) for prediction/inference.
    """

    spec: RegressionSpec
    coefficients: dict[str, float]
    se: dict[str, float]
    covariance: pd.DataFrame
    fixed_effect_values: dict[str, dict[str, float]]
    deviance: float
    n_obs: int
    n_clusters: int | None
    iterations: int
    dropped_separated: int
    dropped_collinear: tuple[str, ...]
    _retained: pd.DataFrame = field(repr=False)
    _mu: np.ndarray = field(repr=False)
    _x_demeaned: np.ndarray = field(repr=False)
    _x_names: tuple[str, ...] = field(repr=False)

    def fitted_values(self) -> pd.Series:
        """Fitted means for the retained rows, indexed like the input frame."""
        return pd.Series(self._mu, index=self._retained.index, name="mu")

    def score_residuals(self) -> pd.DataFrame:
        """Per-row score contributions (y − μ)·x̃ for the retained regressors."""
        y = self._retained[self.spec.outcome].to_numpy(dtype=float)
        scores = (y - self._mu)[:, None] * self._x_demeaned
        return pd.DataFrame(scores, index=self._retained.index, columns=list(self._x_names))

    def predict(self, newdata: pd.DataFrame, unseen: str = "error") -> pd.Series:
        """Expected counts for new rows under the fitted model.

        Rows must carry every retained regressor and the offset column if
        one was used. A fixed-effect level absent from the fit has no
        estimated value: with `unseen="error"` it raises PredictionError;
        with `unseen="reference"` it contributes 0 to the linear index.
        Fixed-effect columns missing entirely from `newdata` follow the
        same policy (reference ⇒ the whole factor contributes 0).
        """
        if unseen not in ("error", "reference"):
            raise ParameterError(f"unknown unseen-level policy {unseen!r}")
        missing = [c for c in self._x_names if c not in newdata.columns]
        if missing:
            raise SchemaError(f"predict: missing regressor columns {missing}")
        eta = np.zeros(len(newdata))
        for name in self._x_names:
            eta += self.coefficients[name] * newdata[name].to_numpy(dtype=float)
        if self.spec.offset is not None:
            if self.spec.offset not in newdata.columns:
                raise SchemaError(f"predict: missing offset column {self.spec.offset!r}")
            eta += newdata[self.spec.offset].to_numpy(dtype=float)
        for factor in self.spec.fixed_effects:
            if factor not in newdata.columns:
                if unseen == "reference":
                    continue
                raise SchemaError(f"predict: missing fixed-effect column {factor!r}")
            values = self.fixed_effect_values[factor]
            levels = newdata[factor].astype(str)
            unknown = sorted(set(levels) - set(values))
            if unknown and unseen == "error":
                raise PredictionError(f"predict: unseen levels for {factor!r}: {unknown[:10]}")
            eta += levels.map(values).fillna(0.0).to_numpy(dtype=float)
        return pd.Series(np.exp(eta), index=newdata.index, name="mu_hat")


def poisson_deviance(y: np.ndarray, mu: np.ndarray) -> float:
    """2·Σ[y·ln(y/μ) − (y − μ)], with the y=0 term taken as μ."""
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.where(y > 0, y * np.log(np.where(y > 0, y, 1.0) / mu), 0.0)
    return float(2.0 * np.sum(term - (y - mu)))


def _factor_codes(frame: pd.DataFrame, factors: Iterable[str]) -> list[tuple[str, np.ndarray, np.ndarray]]:
    """(name, codes, sorted level labels) per factor; labels as strings."""
    out = []
    for factor in factors:
        if factor not in frame.columns:
            raise SchemaError(f"fixed-effect column {factor!r} not in data")
        labels, codes = np.unique(frame[factor].astype(str).to_numpy(), return_inverse=True)
        out.append((factor, codes.astype(np.int64), labels))
    return out


def _demean(mat: np.ndarray, weights: np.ndarray,
            factors: list[tuple[str, np.ndarray, np.ndarray]],
            tol: float, max_sweeps: int = 100_000) -> np.ndarray:
    """Project columns of `mat` off the weighted span of the factor dummies
    by alternating within-group demeaning until the update stalls."""
    if not factors:
        return mat.copy()
    out = mat.copy()
    group_w = [np.bincount(codes, weights=weights, minlength=len(labels))
               for _, codes, labels in factors]
    for _ in range(max_sweeps):
        delta = 0.0
        for (name, codes, labels), sw in zip(factors, group_w):
            if np.any(sw <= 0):
                raise EstimationError(f"fixed-effect factor {name!r} has a zero-weight level")
            for col in range(out.shape[1]):
                sums = np.bincount(codes, weights=weights * out[:, col], minlength=len(labels))
                means = sums / sw
                out[:, col] -= means[codes]
                delta = max(delta, float(np.max(np.abs(means))) if means.size else 0.0)
        if delta < tol:
            break
    else:
        raise EstimationError("fixed-effect demeaning did not converge")
    return out


def _drop_collinear(x: np.ndarray, names: list[str],
                    factors: list[tuple[str, np.ndarray, np.ndarray]],
                    demean_tol: float) -> tuple[np.ndarray, list[str], list[str]]:
    """Keep-first Gram–Schmidt screen on the (unit-weight) demeaned design.

    A column whose residual against earlier kept columns (and the
    fixed-effect span) is negligible relative to its original scale is
    redundant and is dropped by name.
    """
    if x.shape[1] == 0:
        return x, names, []
    ones = np.ones(x.shape[0])
    xd = _demean(x, ones, factors, demean_tol)
    kept_idx: list[int] = []
    basis: list[np.ndarray] = []
    dropped: list[str] = []
    for j in range(xd.shape[1]):
        v = xd[:, j].copy()
        scale = np.linalg.norm(x[:, j])
        if scale == 0:
            scale = 1.0
        for b in basis:
            v -= (b @ v) * b
        norm = np.linalg.norm(v)
        if norm <= COLLINEARITY_RTOL * scale:
            dropped.append(names[j])
            continue
        kept_idx.append(j)
        basis.append(v / norm)
    return x[:, kept_idx], [names[j] for j in kept_idx], dropped


def drop_separated(frame: pd.DataFrame, outcome: str,
                   fixed_effects: tuple[str, ...]) -> tuple[pd.DataFrame, int]:
    """Remove rows in fixed-effect groups whose outcome is identically zero.

    Such a group's effect diverges to −∞; its rows carry no information and
    destabilize the iterations. Dropping repeats across factors until no
    group is all-zero.
    """
    if not fixed_effects:
        return frame, 0
    current = frame
    dropped = 0
    changed = True
    while changed and len(current):
        changed = False
        for factor in fixed_effects:
            totals = current.groupby(current[factor].astype(str))[outcome].transform("sum")
            keep = totals > 0
            n_bad = int((~keep).sum())
            if n_bad:
                current = current.loc[keep]
                dropped += n_bad
                changed = True
    return current, dropped


def fit_ppml(data: pd.DataFrame, spec: RegressionSpec) -> PpmlFit:
    """Estimate the Poisson model given by `spec` on `data`.

    The mean is exp(offset + x'β + Σ fixed effects). Fitting runs
    iteratively reweighted least squares: each round demeans the working
    response and regressors within fixed-effect groups under the current
    weights, solves the weighted least-squares step, and applies
    step-halving whenever the deviance would rise. Without fixed effects an
    intercept is included automatically.
    """
    needed = [spec.outcome, *spec.regressors, *spec.fixed_effects]
    if spec.offset is not None:
        needed.append(spec.offset)
    if spec.cluster is not None:
        needed.append(spec.cluster)
    missing = [c for c in needed if c not in data.columns]
    if missing:
        raise SchemaError(f"estimation data is missing columns: {missing}")
    if data.empty:
        raise EmptyModelError("no rows to estimate on")

    work = data.copy()
    y_raw = work[spec.outcome].to_numpy(dtype=float)
    if np.any(~np.isfinite(y_raw)) or np.any(y_raw < 0):
        raise DataError(f"outcome {spec.outcome!r} must be finite and non-negative")
    work, n_separated = drop_separated(work, spec.outcome, spec.fixed_effects)
    if work.empty:
        raise EmptyModelError("every row was dropped as separated")
    y = work[spec.outcome].to_numpy(dtype=float)
    if float(y.sum()) <= 0:
        raise EmptyModelError("outcome is identically zero")

    factors = _factor_codes(work, spec.fixed_effects)
    names = list(spec.regressors)
    if not factors:
        names = ["intercept", *names]
        work = work.assign(intercept=1.0)
    x_full = work[names].to_numpy(dtype=float)
    if np.any(~np.isfinite(x_full)):
        raise DataError("regressors contain non-finite values")
    x, names, dropped_collinear = _drop_collinear(x_full, names, factors, spec.demean_tol)
    offset = (work[spec.offset].to_numpy(dtype=float) if spec.offset is not None
              else np.zeros(len(work)))
    if np.any(~np.isfinite(offset)):
        raise DataError("offset contains non-finite values")

    n, p = x.shape
    eta = np.log(y + 0.5 * float(y.mean()))
    mu = np.exp(eta)
    dev = poisson_deviance(y, mu)
    beta = np.zeros(p)
    x_dm = np.zeros_like(x)
    converged = False
    iterations = 0

    for iterations in range(1, spec.max_iterations + 1):
        z = eta + (y - mu) / mu - offset
        stacked = _demean(np.column_stack([z, x]) if p else z[:, None],
                          mu, factors, spec.demean_tol)
        z_dm = stacked[:, 0]
        x_dm = stacked[:, 1:]
        if p:
            xtw = x_dm.T * mu
            gram = xtw @ x_dm
            try:
                beta_new = np.linalg.solve(gram, xtw @ z_dm)
            except np.linalg.LinAlgError as exc:
                raise EstimationError(f"normal equations are singular: {exc}") from exc
            eta_new = z + offset - (z_dm - x_dm @ beta_new)
        else:
            beta_new = beta
            eta_new = z + offset - z_dm
        mu_new = np.exp(np.clip(eta_new, -500.0, 500.0))
        dev_new = poisson_deviance(y, mu_new)
        # The starting point lies outside the model space, so only from the
        # second step onward is the deviance required not to increase.
        halvings = 0
        while (iterations > 1 and
               (not math.isfinite(dev_new) or dev_new > dev + 1e-12 * abs(dev))
               and halvings < 60):
            eta_new = 0.5 * (eta_new + eta)
            mu_new = np.exp(np.clip(eta_new, -500.0, 500.0))
            dev_new = poisson_deviance(y, mu_new)
            halvings += 1
        eta, mu, beta = eta_new, mu_new, beta_new
        if iterations > 1 and abs(dev_new - dev) / (abs(dev_new) + 0.1) < spec.deviance_tol:
            dev = dev_new
            converged = True
            break
        dev = dev_new
    if not converged:
        raise EstimationError(f"no convergence in {spec.max_iterations} iterations "
                              f"(deviance {dev:.6g})")

    fe_values = _recover_fixed_effects(eta - offset - (x @ beta if p else 0.0), factors)
    coefficients = {name: float(b) for name, b in zip(names, beta)}

    cov, se, n_clusters = _covariance(spec, work, y, mu, x_dm, names)
    return PpmlFit(
        spec=spec, coefficients=coefficients, se=se, covariance=cov,
        fixed_effect_values=fe_values, deviance=dev, n_obs=n,
        n_clusters=n_clusters, iterations=iterations,
        dropped_separated=n_separated, dropped_collinear=tuple(dropped_collinear),
        _retained=work, _mu=mu, _x_demeaned=x_dm, _x_names=tuple(names))


def _recover_fixed_effects(alpha: np.ndarray,
                           factors: list[tuple[str, np.ndarray, np.ndarray]],
                           tol: float = 1e-10, max_rounds: int = 100_000
                           ) -> dict[str, dict[str, float]]:
    """Split the absorbed part of the linear predictor into per-factor values.

    Gauss–Seidel on group means of the residual. The decomposition is only
    identified up to constants, so the first factor absorbs the overall
    level and every later factor is pinned to zero at its lexicographically
    first level.
    """
    if not factors:
        return {}
    parts = [np.zeros(len(labels)) for _, _, labels in factors]
    resid = alpha.copy()
    for _ in range(max_rounds):
        biggest = 0.0
        for part, (_, codes, labels) in zip(parts, factors):
            sums = np.bincount(codes, weights=resid, minlength=len(labels))
            cnts = np.bincount(codes, minlength=len(labels))
            means = sums / cnts
            part += means
            resid -= means[codes]
            biggest = max(biggest, float(np.max(np.abs(means))))
        if biggest < tol:
            break
    else:
        raise EstimationError("fixed-effect recovery did not converge")
    for k in range(1, len(factors)):
        pin = parts[k][0]
        parts[k] -= pin
        parts[0] += pin
    return {name: {str(label): float(v) for label, v in zip(labels, part)}
            for part, (name, _, labels) in zip(parts, factors)}


def _covariance(spec: RegressionSpec, work: pd.DataFrame, y: np.ndarray,
                mu: np.ndarray, x_dm: np.ndarray, names: list[str]
                ) -> tuple[pd.DataFrame, dict[str, float], int | None]:
    """Coefficient covariance: classical inverse information, or the
    cluster-robust sandwich with the G/(G−1) small-sample factor."""
    p = x_dm.shape[1]
    if p == 0:
        empty = pd.DataFrame(index=[], columns=[])
        return empty, {}, None
    bread_inv = np.linalg.inv(x_dm.T @ (x_dm * mu[:, None]))
    if spec.cluster is None:
        cov = bread_inv
        n_clusters = None
    else:
        codes, labels_n = pd.factorize(work[spec.cluster].astype(str))
        n_clusters = len(labels_n)
        if n_clusters < 2:
            raise InferenceError(
                f"cluster column {spec.cluster!r} has {n_clusters} cluster(s); "
                "at least 2 are required for a clustered covariance")
        scores = (y - mu)[:, None] * x_dm
        group_scores = np.zeros((n_clusters, p))
        np.add.at(group_scores, codes, scores)
        meat = group_scores.T @ group_scores
        cov = bread_inv @ meat @ bread_inv * (n_clusters / (n_clusters - 1))
    cov_df = pd.DataFrame(cov, index=names, columns=names)
    se = {name: float(math.sqrt(cov[i, i])) for i, name in enumerate(names)}
    return cov_df, se, n_clusters


def cluster_se(fit: PpmlFit, cluster: str | pd.Series) -> tuple[pd.DataFrame, dict[str, float]]:
    """Cluster-robust covariance and standard errors for a converged fit.

    `cluster` is a column name in the estimation data or a series aligned
    with its index. The sandwich uses fixed-effect-projected regressors at
    the converged weights and the G/(G−1) small-sample factor.
    """
    if isinstance(cluster, str):
        if cluster not in fit._retained.columns:
            raise SchemaError(f"cluster column {cluster!r} not in the estimation data")
        keys = fit._retained[cluster]
    else:
        keys = cluster.reindex(fit._retained.index)
        if keys.isna().any():
            raise SchemaError("cluster series does not cover every retained row")
    p = fit._x_demeaned.shape[1]
    if p == 0:
        raise InferenceError("fit has no regressors to compute a covariance for")
    y = fit._retained[fit.spec.outcome].to_numpy(dtype=float)
    codes, labels = pd.factorize(keys.astype(str))
    n_clusters = len(labels)
    if n_clusters < 2:
        raise InferenceError(f"found {n_clusters} cluster(s); at least 2 are required")
    x_dm = fit._x_demeaned
    bread_inv = np.linalg.inv(x_dm.T @ (x_dm * fit._mu[:, None]))
    scores = (y - fit._mu)[:, None] * x_dm
    group_scores = np.zeros((n_clusters, p))
    np.add.at(group_scores, codes, scores)
    cov = bread_inv @ (group_scores.T @ group_scores) @ bread_inv * (n_clusters / (n_clusters - 1))
    names = list(fit._x_names)
    cov_df = pd.DataFrame(cov, index=names, columns=names)
    se = {name: float(math.sqrt(cov[i, i])) for i, name in enumerate(names)}
    return cov_df, se


@dataclass(frozen=True)
class CostTable:
    """Dyad-level monitoring costs recovered from origin×destination fixed
    effects, plus how they were normalized."""

    table: pd.DataFrame
    normalization: str
    shift: float
    reference: tuple[str, str] | None
    floor: float

    def lookup(self) -> dict[tuple[str, str], float]:
        return {(r.iso_i, r.iso_j): float(r.c_hat) for r in self.table.itertuples(index=False)}


def recover_cij(fit: PpmlFit, normalization: str = "shift",
                floor: float = DEFAULT_FLOOR,
                reference: tuple[str, str] | str | None = None,
                factor: str | None = None) -> CostTable:
    """Extract per-dyad costs from the origin×destination fixed effects of a
    triangular fit.

    With the middleman-stage offset in place, the dyad fixed effect equals
    the dyad's composite cost, so costs are read off directly. Levels are
    only identified jointly with the overall scale, so the table is
    normalized: `shift` raises every value (never lowers) so the minimum
    sits at `floor`; `reference` re-centers on a chosen dyad instead.
    """
    if normalization not in ("shift", "reference"):
        raise ParameterError(f"unknown normalization {normalization!r}")
    if factor is None:
        if not fit.spec.fixed_effects:
            raise ParameterError("fit has no fixed effects to read costs from")
        factor = fit.spec.fixed_effects[0]
    if factor not in fit.fixed_effect_values:
        raise ParameterError(f"fit has no fixed-effect factor {factor!r}")
    gammas = fit.fixed_effect_values[factor]
    rows = []
    for key in sorted(gammas):
        parts = key.split(":")
        if len(parts) != 2:
            raise ParameterError(f"dyad fixed-effect level {key!r} is not of the form 'ISO:ISO'")
        rows.append({"iso_i": parts[0], "iso_j": parts[1], "c_hat": gammas[key]})
    table = pd.DataFrame.from_records(rows)

    shift = 0.0
    ref_pair: tuple[str, str] | None = None
    if normalization == "shift":
        if not floor > 0:
            raise ParameterError(f"floor must be positive, got {floor}")
        low = float(table["c_hat"].min())
        shift = max(0.0, floor - low)
        table["c_hat"] = table["c_hat"] + shift
    else:
        if reference is None:
            raise ParameterError("reference normalization needs a reference dyad")
        if isinstance(reference, str):
            bits = reference.split(":")
            if len(bits) != 2:
                raise ParameterError(f"reference dyad {reference!r} is not of the form 'ISO:ISO'")
            ref_pair = (bits[0], bits[1])
        else:
            ref_pair = (reference[0], reference[1])
        match = table[(table["iso_i"] == ref_pair[0]) & (table["iso_j"] == ref_pair[1])]
        if match.empty:
            raise ParameterError(f"reference dyad {ref_pair} not present in the fixed effects")
        table["c_hat"] = table["c_hat"] - float(match["c_hat"].iloc[0])
    table = table.sort_values(["iso_i", "iso_j"], ignore_index=True)
    return CostTable(table=table, normalization=normalization, shift=shift,
                     reference=ref_pair, floor=floor)


@dataclass(frozen=True)
class BilateralResult:
    """Second-stage fit of counts on the square root of recovered costs."""

    fit: PpmlFit
    theta_hat: float | None

    @property
    def theta_se(self) -> float | None:
        if self.theta_hat is None:
            return None
        return self.fit.se.get("sqrt_c")


def fit_bilateral(design: pd.DataFrame, cost: CostTable | Mapping[tuple[str, str], float],
                  deviance_tol: float = 1e-9) -> BilateralResult:
    """Regress dyad counts on √cost with origin and destination fixed
    effects, clustering at the dyad level.

    `cost` is a recovered cost table or any (origin, destination) → cost
    mapping. Every positive-count dyad must have a cost; negative costs
    (possible under the reference normalization) leave no valid square
    root and are rejected.
    """
    for col in ("iso_i", "iso_j", "count"):
        if col not in design.columns:
            raise SchemaError(f"bilateral design is missing column {col!r}")
    if isinstance(cost, CostTable):
        lookup = cost.lookup()
        norm_label = cost.normalization
    else:
        lookup = dict(cost)
        norm_label = "external"
    merged = design.copy()
    keys = list(zip(merged["iso_i"], merged["iso_j"]))
    have = [k in lookup for k in keys]
    uncovered = sorted({k for k, ok, cnt in zip(keys, have, merged["count"]) if cnt > 0 and not ok})
    if uncovered:
        raise CoverageError(
            "positive-count dyads with no recovered cost: "
            + ", ".join(f"({i},{j})" for i, j in uncovered[:20])
            + (" ..." if len(uncovered) > 20 else ""))
    merged = merged.loc[have].reset_index(drop=True)
    c_vals = np.array([lookup[k] for k in zip(merged["iso_i"], merged["iso_j"])])
    if np.any(c_vals < 0):
        bad = int(np.sum(c_vals < 0))
        raise NormalizationError(
            f"{bad} recovered costs are negative under the {norm_label!r} "
            "normalization; re-normalize (shift) before the bilateral stage")
    merged["sqrt_c"] = np.sqrt(c_vals)
    if "dyad" not in merged.columns:
        merged["dyad"] = merged["iso_i"] + ":" + merged["iso_j"]
    spec = RegressionSpec(outcome="count", regressors=("sqrt_c",),
                          fixed_effects=("iso_i", "iso_j"), cluster="dyad",
                          deviance_tol=deviance_tol)
    fit = fit_ppml(merged, spec)
    if "sqrt_c" in fit.dropped_collinear:
        warnings.warn("sqrt_c is collinear with the fixed effects; "
                      "cost elasticity is not identified", stacklevel=2)
        return BilateralResult(fit=fit, theta_hat=None)
    return BilateralResult(fit=fit, theta_hat=-fit.coefficients["sqrt_c"])
