"""Corporate control networks, ownership chains, gravity frictions, and
monitoring-cost estimation.

The library identifies control networks in firm-level equity data, extracts
cross-border ownership chains and their country-level counts, assembles
gravity friction regressors, estimates Poisson models with absorbed fixed
effects and clustered inference, recovers dyad-level monitoring costs from
fixed effects, implements the underlying delegation-of-monitoring theory,
and ships a simulator that validates the whole pipeline by parameter
recovery.
"""

from .chains import (ATTRIBUTION_MODES, DYADIC_MODES, OwnershipChain, corpus_chains,
                     count_dyadic, count_triadic, enumerate_chains, filter_networks,
                     summary_tables)
from .errors import (ConfigError, ConventionError, CoverageError, DataError,
                     DomainError, EmptyModelError, EstimationError, InferenceError,
                     NormalizationError, OwnchainsError, ParameterError, ParseError,
                     PredictionError, SchemaError, SpecError, StructuralError,
                     UsageError, ValidationError)
from .frictions import (CountryRecord, build_dyad_design, build_dyad_table,
                        build_triad_design, load_countries, load_dyads, overlap_hours)
from .graph import (ControlAssignment, ControlNetwork, EquityEdge, EquityGraph, Firm,
                    ValidationReport, control_set, export_network_dot, load_equity_graph,
                    load_edges, load_firms, parse_network_dot, ultimate_parents,
                    validate_graph, write_edges_csv, write_firms_csv, write_networks_csv)
from .ppml import (BilateralResult, CostTable, PpmlFit, RegressionSpec, cluster_se,
                   drop_separated, fit_bilateral, fit_ppml, poisson_deviance,
                   recover_cij)
from .recovery import RecoveryReport, recovery_summary, run_recovery
from .structural import (AuctionConfig, CostStructure, Equilibrium, GameParams,
                         PayoffProfile, SimOutput, World, WorldConfig, auction_win_prob,
                         build_world, equilibrium, expected_payoffs, load_world_config,
                         middleman_choice_prob, multilateral_cost, sim_to_equity_graph,
                         simulate_world, value_with_multilateral_cost)

__version__ = "0.1.0"

__all__ = [
    "ATTRIBUTION_MODES", "DYADIC_MODES", "OwnershipChain", "corpus_chains",
    "count_dyadic", "count_triadic", "enumerate_chains", "filter_networks",
    "summary_tables",
    "ConfigError", "ConventionError", "CoverageError", "DataError", "DomainError",
    "EmptyModelError", "EstimationError", "InferenceError", "NormalizationError",
    "OwnchainsError", "ParameterError", "ParseError", "PredictionError",
    "SchemaError", "SpecError", "StructuralError", "UsageError", "ValidationError",
    "CountryRecord", "build_dyad_design", "build_dyad_table", "build_triad_design",
    "load_countries", "load_dyads", "overlap_hours",
    "ControlAssignment", "ControlNetwork", "EquityEdge", "EquityGraph", "Firm",
    "ValidationReport", "control_set", "export_network_dot", "load_equity_graph",
    "load_edges", "load_firms", "parse_network_dot", "ultimate_parents",
    "validate_graph", "write_edges_csv", "write_firms_csv", "write_networks_csv",
    "BilateralResult", "CostTable", "PpmlFit", "RegressionSpec", "cluster_se",
    "drop_separated", "fit_bilateral", "fit_ppml", "poisson_deviance", "recover_cij",
    "RecoveryReport", "recovery_summary", "run_recovery",
    "AuctionConfig", "CostStructure", "Equilibrium", "GameParams", "PayoffProfile",
    "SimOutput", "World", "WorldConfig", "auction_win_prob", "build_world",
    "equilibrium", "expected_payoffs", "load_world_config", "middleman_choice_prob",
    "multilateral_cost", "sim_to_equity_graph", "simulate_world",
    "value_with_multilateral_cost",
]
