"""Command-line pipeline orchestrator.

Subcommands compose the library end to end: graph validation, control
identification, chain extraction, counting, friction/design assembly, the
three estimation stages, the prediction grid, the world simulator, and the
full simulate-and-recover loop. Every subcommand is a pure function of its
inputs, flags, and seed; artifacts are CSV (UTF-8, LF, headers) and JSON
with numbers at 12 significant digits.

Exit codes: 0 success; 1 bad input data; 2 usage or estimation failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from . import chains as chains_mod
from . import frictions as frictions_mod
from . import graph as graph_mod
from .errors import DataError, EstimationError, OwnchainsError, UsageError
from .io import write_csv, write_json
from .ppml import PpmlFit, RegressionSpec, fit_bilateral, fit_ppml, recover_cij
from .recovery import TRIANGULAR_REGRESSORS, run_recovery
from .structural import WorldConfig, load_world_config, sim_to_equity_graph, simulate_world

BIGRAVITY_MODES = ("direct_all", "direct_complex", "parent_subsidiary", "middleman_final")
DYAD_SIDE_CONTROLS = ("log_dist", "contig", "comlang", "colony", "legal", "rta", "home")
ATTRIBUTION_FLAG = {"last": "last_middleman", "all": "all_middlemen"}


# ---------------------------------------------------------------------------
# Argument plumbing
# ---------------------------------------------------------------------------

def _seed_value(text: str) -> int:
    value = int(text)
    if not (0 <= value < 2 ** 64):
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _thread_count(text: str) -> int:
    value = int(text)
    if value < 1:
        raise ValueError(f"expected a positive integer, got {text}")
    return value


# argparse uses the converter's __name__ in its error messages.
_seed_value.__name__ = "seed"
_thread_count.__name__ = "thread count"


def _add_graph_inputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--firms", required=True, help="firms.csv (firm_id,country,sector)")
    p.add_argument("--edges", required=True, help="edges.csv (shareholder_id,target_id,share_pct)")


def _add_friction_inputs(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--countries", required=required,
                   help="countries.csv (iso2,utc_offset,profit_tax,labour_cost)")
    p.add_argument("--dyads", required=required,
                   help="dyads.csv (iso_o,iso_d,dist_km,contig,comlang,colony,legal,rta[,cli_index])")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None,
                   help="output directory (default: $OWNCHAINS_OUT or the working directory)")
    p.add_argument("--threads", type=_thread_count, default=1,
                   help="worker threads permitted internally (execution is deterministic)")


def _add_filters(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sector-filter", default=None, metavar="EXPR",
                   help="restrict chains by 2-digit sectors, e.g. "
                        "'parent=31,32&middleman=52&final=52'")


def _out_dir(args: argparse.Namespace) -> Path:
    root = args.out or os.environ.get("OWNCHAINS_OUT") or "."
    path = Path(root)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _parse_sector_filter(expr: str | None) -> dict[str, set[str] | None]:
    roles: dict[str, set[str] | None] = {"parent": None, "middleman": None, "final": None}
    if expr is None:
        return roles
    for clause in expr.split("&"):
        if "=" not in clause:
            raise UsageError(f"bad sector filter clause {clause!r}; expected role=code[,code...]")
        role, _, codes = clause.partition("=")
        role = role.strip()
        if role not in roles:
            raise UsageError(f"unknown sector filter role {role!r}; expected parent/middleman/final")
        values = {c.strip() for c in codes.split(",") if c.strip()}
        if not values:
            raise UsageError(f"sector filter role {role!r} lists no sector codes")
        roles[role] = values
    return roles


def _load_corpus(args: argparse.Namespace):
    graph = graph_mod.load_equity_graph(args.firms, args.edges)
    networks = graph_mod.ultimate_parents(graph)
    roles = _parse_sector_filter(getattr(args, "sector_filter", None))
    if any(v is not None for v in roles.values()):
        networks = chains_mod.filter_networks(
            networks, graph, parent_sectors=roles["parent"],
            middleman_sectors=roles["middleman"], final_sectors=roles["final"])
    return graph, networks


def _corpus_countries(graph, networks) -> list[str]:
    seen: set[str] = set()
    for net in networks:
        seen.add(graph.country(net.parent))
        seen.update(graph.country(a.subsidiary) for a in net.assignments)
    return sorted(seen)


def _world_config(args: argparse.Namespace) -> WorldConfig:
    config = load_world_config(args.config) if args.config else WorldConfig()
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    return config


def _say(path: Path) -> None:
    print(f"wrote {path}")


# ---------------------------------------------------------------------------
# Estimation plumbing
# ---------------------------------------------------------------------------

def _fit_payload(fit: PpmlFit) -> dict:
    names = list(fit.covariance.columns)
    return {
        "coefficients": fit.coefficients,
        "se": fit.se,
        "vcov": {"names": names, "matrix": [[float(v) for v in row]
                                            for row in fit.covariance.to_numpy()]},
        "fixed_effects": fit.fixed_effect_values,
        "diagnostics": {
            "deviance": fit.deviance,
            "iterations": fit.iterations,
            "n_obs": fit.n_obs,
            "n_clusters": fit.n_clusters,
        },
        "drop_report": {
            "separated_rows": fit.dropped_separated,
            "collinear_regressors": list(fit.dropped_collinear),
        },
        "spec": {
            "outcome": fit.spec.outcome,
            "regressors": list(fit.spec.regressors),
            "fixed_effects": list(fit.spec.fixed_effects),
            "offset": fit.spec.offset,
            "cluster": fit.spec.cluster,
            "deviance_tol": fit.spec.deviance_tol,
            "demean_tol": fit.spec.demean_tol,
            "max_iterations": fit.spec.max_iterations,
        },
    }


def _sided(sides) -> tuple[str, ...]:
    return tuple(f"{c}_{s}" for s in sides for c in ("wh",) + DYAD_SIDE_CONTROLS)


def _triangular_inputs(args, graph, networks):
    countries = frictions_mod.load_countries(args.countries)
    dyads = frictions_mod.load_dyads(args.dyads)
    dyad_table = frictions_mod.build_dyad_table(countries, dyads)
    attribution = ATTRIBUTION_FLAG[args.attribution]
    triads = chains_mod.count_triadic(networks, graph, attribution=attribution)
    corpus = _corpus_countries(graph, networks)
    return dyad_table, triads, corpus


def _fit_structural_triangular(args, graph, networks):
    dyad_table, triads, corpus = _triangular_inputs(args, graph, networks)
    design = frictions_mod.build_triad_design(
        triads, dyad_table, candidate_countries=corpus, include_ij_controls=False)
    spec = RegressionSpec(
        outcome="m_ikj", regressors=_sided(("ik", "kj")),
        fixed_effects=("dyad_ij",), offset="ln_m_ij", cluster="dyad_ij")
    fit = fit_ppml(design, spec)
    reference = None
    if args.normalization == "reference":
        factor = fit.fixed_effect_values["dyad_ij"]
        reference = sorted(factor)[0]
    cost = recover_cij(fit, normalization=args.normalization, reference=reference)
    return dyad_table, fit, cost


def _write_cij(cost, out: Path) -> Path:
    path = out / "cij.csv"
    rows = [[r.iso_i, r.iso_j, r.c_hat, cost.normalization]
            for r in cost.table.itertuples(index=False)]
    write_csv(path, ["iso_i", "iso_j", "c_hat", "normalization"], rows)
    return path


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    graph = graph_mod.load_equity_graph(args.firms, args.edges)
    report = graph_mod.validate_graph(graph)
    out = _out_dir(args)
    payload = {"ok": report.ok,
               "violations": [{"kind": v.kind, "subject": v.subject, "message": v.message}
                              for v in report.violations]}
    path = out / "validation.json"
    write_json(path, payload)
    _say(path)
    if not report.ok:
        for v in report.violations:
            print(f"violation [{v.kind}] {v.subject}: {v.message}", file=sys.stderr)
        print(f"validation failed with {len(report.violations)} violation(s)", file=sys.stderr)
        return 1
    print("graph valid")
    return 0


def cmd_identify(args) -> int:
    _, networks = _load_corpus(args)
    out = _out_dir(args)
    path = out / "networks.csv"
    graph_mod.write_networks_csv(networks, path)
    _say(path)
    print(f"identified {len(networks)} control network(s)")
    return 0


def cmd_chains(args) -> int:
    graph, networks = _load_corpus(args)
    out = _out_dir(args)
    chains_path = out / "chains.csv"
    chains_mod.write_chains_csv(networks, graph, chains_path)
    _say(chains_path)
    table1, table2 = chains_mod.summary_tables(networks, graph)
    for name, df in (("table1.csv", table1), ("table2.csv", table2)):
        path = out / name
        chains_mod.write_table_csv(df, path)
        _say(path)
    return 0


def cmd_counts(args) -> int:
    graph, networks = _load_corpus(args)
    out = _out_dir(args)
    frames = [chains_mod.count_dyadic(networks, graph, mode=mode)
              for mode in chains_mod.DYADIC_MODES]
    dyadic_path = out / "counts_dyadic.csv"
    chains_mod.write_counts_dyadic_csv(frames, dyadic_path)
    _say(dyadic_path)
    triads = chains_mod.count_triadic(networks, graph,
                                      attribution=ATTRIBUTION_FLAG[args.attribution])
    triadic_path = out / "counts_triadic.csv"
    chains_mod.write_counts_triadic_csv(triads, triadic_path)
    _say(triadic_path)
    return 0


def cmd_frictions(args) -> int:
    countries = frictions_mod.load_countries(args.countries)
    dyads = frictions_mod.load_dyads(args.dyads)
    dyad_table = frictions_mod.build_dyad_table(countries, dyads)
    out = _out_dir(args)
    path = out / "frictions.csv"
    frictions_mod.write_design_csv(dyad_table, path)
    _say(path)
    if args.firms and args.edges:
        graph, networks = _load_corpus(args)
        corpus = _corpus_countries(graph, networks)
        counts = chains_mod.count_dyadic(networks, graph, mode="final_all")
        bi = frictions_mod.build_dyad_design(counts, dyad_table, corpus)
        bi_path = out / "design_bilateral.csv"
        frictions_mod.write_design_csv(bi, bi_path)
        _say(bi_path)
        triads = chains_mod.count_triadic(networks, graph,
                                          attribution=ATTRIBUTION_FLAG[args.attribution])
        tri = frictions_mod.build_triad_design(
            triads, dyad_table, candidate_countries=corpus,
            include_ij_controls=True, include_interaction=args.interaction)
        tri_path = out / "design_triangular.csv"
        frictions_mod.write_design_csv(tri, tri_path)
        _say(tri_path)
    return 0


def cmd_estimate_motivating(args) -> int:
    graph, networks = _load_corpus(args)
    countries = frictions_mod.load_countries(args.countries)
    dyads = frictions_mod.load_dyads(args.dyads)
    dyad_table = frictions_mod.build_dyad_table(countries, dyads)
    corpus = _corpus_countries(graph, networks)
    out = _out_dir(args)

    bigravity: dict[str, dict] = {}
    for mode in BIGRAVITY_MODES:
        counts = chains_mod.count_dyadic(networks, graph, mode=mode)
        design = frictions_mod.build_dyad_design(counts, dyad_table, corpus)
        spec = RegressionSpec(outcome="count",
                              regressors=("wh",) + DYAD_SIDE_CONTROLS,
                              fixed_effects=("iso_i", "iso_j"), cluster="iso_i")
        try:
            fit = fit_ppml(design, spec)
        except EstimationError as exc:
            raise EstimationError(f"bilateral gravity, mode {mode}: {exc}") from exc
        bigravity[mode] = _fit_payload(fit)
    bi_path = out / "estimates_bigravity.json"
    write_json(bi_path, bigravity)
    _say(bi_path)

    triads = chains_mod.count_triadic(networks, graph,
                                      attribution=ATTRIBUTION_FLAG[args.attribution])
    design = frictions_mod.build_triad_design(
        triads, dyad_table, candidate_countries=corpus,
        include_ij_controls=True, include_interaction=args.interaction)
    regressors = _sided(("ik", "kj", "ij"))
    if args.interaction:
        regressors = ("wh_ij_x_wh_kj",) + regressors
    spec = RegressionSpec(outcome="m_ikj", regressors=regressors,
                          fixed_effects=("iso_i", "iso_k", "iso_j"), cluster="dyad_ij")
    try:
        fit = fit_ppml(design, spec)
    except EstimationError as exc:
        raise EstimationError(f"triangular gravity: {exc}") from exc
    tri_path = out / "estimates_trigravity.json"
    write_json(tri_path, _fit_payload(fit))
    _say(tri_path)
    return 0


def cmd_estimate_triangular(args) -> int:
    graph, networks = _load_corpus(args)
    _, fit, cost = _fit_structural_triangular(args, graph, networks)
    out = _out_dir(args)
    path = out / "estimates_triangular.json"
    payload = _fit_payload(fit)
    payload["cost_normalization"] = {"policy": cost.normalization, "shift": cost.shift,
                                     "floor": cost.floor,
                                     "reference": list(cost.reference) if cost.reference else None}
    write_json(path, payload)
    _say(path)
    _say(_write_cij(cost, out))
    return 0


def cmd_estimate_bilateral(args) -> int:
    graph, networks = _load_corpus(args)
    dyad_table, tri_fit, cost = _fit_structural_triangular(args, graph, networks)
    corpus = _corpus_countries(graph, networks)
    counts = chains_mod.count_dyadic(networks, graph, mode="final_all")
    design = frictions_mod.build_dyad_design(counts, dyad_table, corpus)
    result = fit_bilateral(design, cost)
    out = _out_dir(args)
    payload = _fit_payload(result.fit)
    payload["theta_hat"] = result.theta_hat
    payload["theta_se"] = result.theta_se
    payload["cost_normalization"] = {"policy": cost.normalization, "shift": cost.shift}
    path = out / "estimates_bilateral.json"
    write_json(path, payload)
    _say(path)
    _say(_write_cij(cost, out))
    return 0


def cmd_grid(args) -> int:
    graph, networks = _load_corpus(args)
    countries = frictions_mod.load_countries(args.countries)
    dyads = frictions_mod.load_dyads(args.dyads)
    dyad_table = frictions_mod.build_dyad_table(countries, dyads)
    corpus = _corpus_countries(graph, networks)
    triads = chains_mod.count_triadic(networks, graph,
                                      attribution=ATTRIBUTION_FLAG[args.attribution])
    design = frictions_mod.build_triad_design(
        triads, dyad_table, candidate_countries=corpus,
        include_ij_controls=True, include_interaction=True)
    regressors = ("wh_ij_x_wh_kj",) + _sided(("ik", "kj", "ij"))
    spec = RegressionSpec(outcome="m_ikj", regressors=regressors,
                          fixed_effects=("iso_i", "iso_k", "iso_j"), cluster="dyad_ij")
    fit = fit_ppml(design, spec)

    lattice = np.arange(0.0, frictions_mod.DEFAULT_WORKDAY + 0.5, 1.0)
    base = {name: float(design[name].mean()) for name in regressors
            if name in design.columns}
    rows = []
    for wh_ij in lattice:
        for wh_kj in lattice:
            row = dict(base)
            row["wh_ij"] = float(wh_ij)
            row["wh_kj"] = float(wh_kj)
            row["wh_ij_x_wh_kj"] = float(wh_ij * wh_kj)
            rows.append(row)
    grid_df = pd.DataFrame.from_records(rows)
    mu = fit.predict(grid_df, unseen="reference")
    out = _out_dir(args)
    path = out / "grid.csv"
    write_csv(path, ["wh_ij", "wh_kj", "mu_hat"],
              zip(grid_df["wh_ij"], grid_df["wh_kj"], mu))
    _say(path)
    return 0


def cmd_simulate(args) -> int:
    config = _world_config(args)
    sim = simulate_world(config)
    out = _out_dir(args)

    chains_path = out / "sim_chains.csv"
    write_csv(chains_path, ["parent_id", "iso_i", "iso_k", "iso_j"],
              ((r.parent_id, r.iso_i, r.iso_k, r.iso_j)
               for r in sim.records.itertuples(index=False)))
    _say(chains_path)
    truth_path = out / "sim_truth.json"
    write_json(truth_path, sim.truth)
    _say(truth_path)

    graph = sim_to_equity_graph(sim)
    firms_path = out / "firms.csv"
    graph_mod.write_firms_csv(graph, firms_path)
    _say(firms_path)
    edges_path = out / "edges.csv"
    graph_mod.write_edges_csv(graph, edges_path)
    _say(edges_path)

    world = sim.world
    countries_path = out / "countries.csv"
    cdf = world.countries_df()
    write_csv(countries_path, list(cdf.columns), cdf.itertuples(index=False))
    _say(countries_path)
    dyads_path = out / "dyads.csv"
    ddf = world.dyads_df()
    write_csv(dyads_path, list(ddf.columns), ddf.itertuples(index=False))
    _say(dyads_path)
    return 0


def cmd_recover(args) -> int:
    config = _world_config(args)
    report = run_recovery(config)
    out = _out_dir(args)

    report_path = out / "recovery_report.json"
    write_json(report_path, report.to_json_dict())
    _say(report_path)
    truth_path = out / "sim_truth.json"
    write_json(truth_path, report.sim.truth)
    _say(truth_path)
    cost = report.cost
    tri_path = out / "estimates_triangular.json"
    tri_payload = _fit_payload(report.triangular_fit)
    tri_payload["cost_normalization"] = {
        "policy": cost.normalization, "shift": cost.shift, "floor": cost.floor,
        "reference": list(cost.reference) if cost.reference else None}
    write_json(tri_path, tri_payload)
    _say(tri_path)
    bi_path = out / "estimates_bilateral.json"
    payload = _fit_payload(report.bilateral.fit)
    payload["theta_hat"] = report.theta_hat
    payload["theta_se"] = report.theta_se
    payload["cost_normalization"] = {"policy": cost.normalization, "shift": cost.shift}
    write_json(bi_path, payload)
    _say(bi_path)
    _say(_write_cij(report.cost, out))

    for name in TRIANGULAR_REGRESSORS:
        stats = report.coefficients[name]
        print(f"{name}: estimate {stats['estimate']:.6f} (se {stats['se']:.6f}), "
              f"truth {stats['truth']:.6f}, z {stats['z']:+.3f}")
    print(f"corr(c_hat, c_true) = {report.corr_c:.6f}")
    theta = "n/a" if report.theta_hat is None else f"{report.theta_hat:.6f}"
    print(f"theta_hat = {theta} (truth {report.theta_true:.6f})")
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ownchains",
        description="Corporate control networks, cross-border ownership chains, "
                    "gravity frictions, and monitoring-cost estimation.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    p = sub.add_parser("validate", help="check an equity graph's invariants")
    _add_graph_inputs(p)
    _add_common(p)
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("identify", help="identify control networks (networks.csv)")
    _add_graph_inputs(p)
    _add_filters(p)
    _add_common(p)
    p.set_defaults(handler=cmd_identify)

    p = sub.add_parser("chains", help="extract chains and summary tables")
    _add_graph_inputs(p)
    _add_filters(p)
    _add_common(p)
    p.set_defaults(handler=cmd_chains)

    p = sub.add_parser("counts", help="dyadic and triadic chain counts")
    _add_graph_inputs(p)
    _add_filters(p)
    p.add_argument("--attribution", choices=("last", "all"), default="last",
                   help="middleman attribution for triadic counts")
    _add_common(p)
    p.set_defaults(handler=cmd_counts)

    p = sub.add_parser("frictions", help="dyad regressor table and design matrices")
    _add_friction_inputs(p)
    p.add_argument("--firms", default=None, help="optional firms.csv to also build designs")
    p.add_argument("--edges", default=None, help="optional edges.csv to also build designs")
    _add_filters(p)
    p.add_argument("--attribution", choices=("last", "all"), default="last")
    p.add_argument("--interaction", action="store_true",
                   help="include the wh_ij × wh_kj interaction column")
    _add_common(p)
    p.set_defaults(handler=cmd_frictions)

    p = sub.add_parser("estimate-motivating",
                       help="bilateral gravity per counting mode and triangular gravity")
    _add_graph_inputs(p)
    _add_friction_inputs(p)
    _add_filters(p)
    p.add_argument("--attribution", choices=("last", "all"), default="last")
    p.add_argument("--interaction", action="store_true",
                   help="add the wh_ij × wh_kj interaction to the triangular model")
    _add_common(p)
    p.set_defaults(handler=cmd_estimate_motivating)

    p = sub.add_parser("estimate-triangular",
                       help="dyad-fixed-effect triangular model and recovered costs (cij.csv)")
    _add_graph_inputs(p)
    _add_friction_inputs(p)
    _add_filters(p)
    p.add_argument("--attribution", choices=("last", "all"), default="last")
    p.add_argument("--normalization", choices=("reference", "shift"), default="shift",
                   help="cost normalization: shift-to-positive floor or reference dyad")
    _add_common(p)
    p.set_defaults(handler=cmd_estimate_triangular)

    p = sub.add_parser("estimate-bilateral",
                       help="final-count gravity on the recovered costs (theta)")
    _add_graph_inputs(p)
    _add_friction_inputs(p)
    _add_filters(p)
    p.add_argument("--attribution", choices=("last", "all"), default="last")
    p.add_argument("--normalization", choices=("reference", "shift"), default="shift")
    _add_common(p)
    p.set_defaults(handler=cmd_estimate_bilateral)

    p = sub.add_parser("grid", help="prediction surface over the wh_ij × wh_kj lattice")
    _add_graph_inputs(p)
    _add_friction_inputs(p)
    _add_filters(p)
    p.add_argument("--attribution", choices=("last", "all"), default="last")
    _add_common(p)
    p.set_defaults(handler=cmd_grid)

    p = sub.add_parser("simulate", help="generate a synthetic world's chain data")
    p.add_argument("--config", default=None, help="world.toml configuration file")
    p.add_argument("--seed", type=_seed_value, default=None, help="override the config seed")
    _add_common(p)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("recover", help="simulate, re-estimate, and report parameter recovery")
    p.add_argument("--config", default=None, help="world.toml configuration file")
    p.add_argument("--seed", type=_seed_value, default=None, help="override the config seed")
    _add_common(p)
    p.set_defaults(handler=cmd_recover)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OwnchainsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
