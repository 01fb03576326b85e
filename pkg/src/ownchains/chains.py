"""Ownership chains and their dyadic/triadic aggregation.

A chain is the path from an ultimate parent down to one leaf subsidiary of
its control tree. Interior subsidiaries on a chain are middlemen; the leaf
is the final subsidiary. Counts aggregated here are the outcomes of the
gravity regressions downstream.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import pandas as pd

from .errors import StructuralError, UsageError
from .graph import ControlNetwork, EquityGraph, Firm
from .io import write_csv

DYADIC_MODES = ("direct_all", "direct_complex", "parent_subsidiary", "middleman_final", "final_all")
ATTRIBUTION_MODES = ("last_middleman", "all_middlemen")


@dataclass(frozen=True)
class OwnershipChain:
    """Ordered parent→…→final path with the parallel country list."""

    firms: tuple[str, ...]
    countries: tuple[str, ...]

    @property
    def n_subsidiaries(self) -> int:
        return len(self.firms) - 1

    @property
    def n_middlemen(self) -> int:
        return len(self.firms) - 2

    @property
    def middlemen(self) -> tuple[str, ...]:
        return self.firms[1:-1]

    @property
    def foreign_countries_crossed(self) -> int:
        parent_country = self.countries[0]
        return len({c for c in self.countries if c != parent_country})


def _firm_table(firms: dict[str, Firm] | EquityGraph) -> dict[str, Firm]:
    return firms.firms if isinstance(firms, EquityGraph) else firms


def _children_map(network: ControlNetwork) -> dict[str, list[str]]:
    """Controller → sorted subsidiaries, validating the tree structure."""
    children: dict[str, list[str]] = {}
    seen: set[str] = set()
    for a in network.assignments:
        if a.subsidiary in seen:
            raise StructuralError(f"subsidiary {a.subsidiary} has two assignments under {network.parent}")
        seen.add(a.subsidiary)
        children.setdefault(a.controller, []).append(a.subsidiary)
    known = seen | {network.parent}
    for a in network.assignments:
        if a.controller not in known:
            raise StructuralError(f"controller {a.controller} of {a.subsidiary} is outside the network")
    for v in children.values():
        v.sort()
    # reachability from the parent (also rules out controller cycles)
    reached: set[str] = set()
    stack = [network.parent]
    while stack:
        node = stack.pop()
        for child in children.get(node, ()):
            if child not in reached:
                reached.add(child)
                stack.append(child)
    if reached != seen:
        unreachable = sorted(seen - reached)
        raise StructuralError(f"assignments not reachable from parent {network.parent}: {unreachable}")
    return children


def enumerate_chains(network: ControlNetwork, firms: dict[str, Firm] | EquityGraph) -> list[OwnershipChain]:
    """One chain per leaf subsidiary, sharing prefixes along the control tree."""
    table = _firm_table(firms)
    children = _children_map(network)
    chains: list[OwnershipChain] = []
    path = [network.parent]

    def descend(node: str) -> None:
        kids = children.get(node, ())
        if not kids and node != network.parent:
            ids = tuple(path)
            chains.append(OwnershipChain(ids, tuple(table[f].country for f in ids)))
            return
        for child in kids:
            path.append(child)
            descend(child)
            path.pop()

    descend(network.parent)
    return chains


def corpus_chains(networks: list[ControlNetwork],
                  firms: dict[str, Firm] | EquityGraph) -> list[OwnershipChain]:
    """All chains of a corpus, in deterministic (parent, path) order."""
    out: list[OwnershipChain] = []
    for net in sorted(networks, key=lambda n: n.parent):
        out.extend(enumerate_chains(net, firms))
    return out


def count_dyadic(networks: list[ControlNetwork], firms: dict[str, Firm] | EquityGraph,
                 mode: str = "final_all") -> pd.DataFrame:
    """Country-pair link counts under one of five counting modes.

    direct_all / direct_complex count hierarchy edges by (controller country,
    subsidiary country), the complex variant restricted to networks with a
    level ≥ 2 assignment; parent_subsidiary counts every assignment by
    (parent country, subsidiary country); middleman_final counts, for every
    middleman and every subsidiary strictly below it, (middleman country,
    subsidiary country); final_all counts leaf subsidiaries by (parent
    country, leaf country) over all chains.
    """
    if mode not in DYADIC_MODES:
        raise UsageError(f"unknown dyadic count mode {mode!r}; expected one of {', '.join(DYADIC_MODES)}")
    table = _firm_table(firms)
    counts: dict[tuple[str, str], int] = {}

    def bump(o: str, d: str) -> None:
        counts[(o, d)] = counts.get((o, d), 0) + 1

    for net in networks:
        if mode in ("direct_all", "direct_complex"):
            if mode == "direct_complex" and not net.is_complex:
                continue
            for a in net.assignments:
                bump(table[a.controller].country, table[a.subsidiary].country)
        elif mode == "parent_subsidiary":
            parent_country = table[net.parent].country
            for a in net.assignments:
                bump(parent_country, table[a.subsidiary].country)
        elif mode == "middleman_final":
            children: dict[str, list[str]] = {}
            for a in net.assignments:
                children.setdefault(a.controller, []).append(a.subsidiary)
            for middleman in sorted(children):
                if middleman == net.parent:
                    continue
                mid_country = table[middleman].country
                stack = list(children[middleman])
                while stack:
                    below = stack.pop()
                    bump(mid_country, table[below].country)
                    stack.extend(children.get(below, ()))
        else:  # final_all
            parent_country = table[net.parent].country
            for chain in enumerate_chains(net, table):
                bump(parent_country, chain.countries[-1])

    rows = [(o, d, c, mode) for (o, d), c in sorted(counts.items())]
    return pd.DataFrame(rows, columns=["iso_i", "iso_j", "count", "mode"])


def count_triadic(networks: list[ControlNetwork], firms: dict[str, Firm] | EquityGraph,
                  attribution: str = "last_middleman") -> pd.DataFrame:
    """(parent country, middleman country, final country) chain counts.

    Only chains with at least one middleman contribute. Under
    `last_middleman` the attributed country is that of the final
    subsidiary's immediate controller; under `all_middlemen` each distinct
    middleman country on the chain contributes one unit. The dyad total
    m_ij accumulates consistently, so Σ_k m_ikj = m_ij holds exactly.
    """
    if attribution not in ATTRIBUTION_MODES:
        raise UsageError(f"unknown attribution {attribution!r}; expected one of {', '.join(ATTRIBUTION_MODES)}")
    table = _firm_table(firms)
    triads: dict[tuple[str, str, str], int] = {}
    for chain in corpus_chains(networks, table):
        if chain.n_middlemen < 1:
            continue
        i, j = chain.countries[0], chain.countries[-1]
        if attribution == "last_middleman":
            ks = [chain.countries[-2]]
        else:
            ks = sorted({table[m].country for m in chain.middlemen})
        for k in ks:
            key = (i, k, j)
            triads[key] = triads.get(key, 0) + 1

    dyad_totals: dict[tuple[str, str], int] = {}
    for (i, k, j), c in triads.items():
        dyad_totals[(i, j)] = dyad_totals.get((i, j), 0) + c

    rows = []
    for (i, k, j), c in sorted(triads.items()):
        m_ij = dyad_totals[(i, j)]
        rows.append((i, k, j, c, m_ij, c / m_ij))
    return pd.DataFrame(rows, columns=["iso_i", "iso_k", "iso_j", "m_ikj", "m_ij", "share"])


def summary_tables(networks: list[ControlNetwork],
                   firms: dict[str, Firm] | EquityGraph) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Country-role distribution and the chain-extension matrix.

    The first table counts, per country, distinct parents, subsidiaries and
    middlemen with percentage shares. The second cross-tabulates chains by
    subsidiary count (rows 1–6, "7+" pooled) and foreign countries crossed
    (column 0 labelled domestic), with explicit margins.
    """
    table = _firm_table(firms)
    parents_by_country: dict[str, set[str]] = {}
    subs_by_country: dict[str, set[str]] = {}
    mids_by_country: dict[str, set[str]] = {}
    for net in networks:
        parents_by_country.setdefault(table[net.parent].country, set()).add(net.parent)
        with_children = {a.controller for a in net.assignments} - {net.parent}
        for a in net.assignments:
            subs_by_country.setdefault(table[a.subsidiary].country, set()).add(a.subsidiary)
        for m in with_children:
            mids_by_country.setdefault(table[m].country, set()).add(m)

    all_countries = sorted(set(parents_by_country) | set(subs_by_country) | set(mids_by_country))
    tot_p = sum(len(v) for v in parents_by_country.values())
    tot_s = sum(len(v) for v in subs_by_country.values())
    tot_m = sum(len(v) for v in mids_by_country.values())
    t1_rows = []
    for c in all_countries:
        np_ = len(parents_by_country.get(c, ()))
        ns = len(subs_by_country.get(c, ()))
        nm = len(mids_by_country.get(c, ()))
        t1_rows.append((c, np_, 100.0 * np_ / tot_p if tot_p else 0.0,
                        ns, 100.0 * ns / tot_s if tot_s else 0.0,
                        nm, 100.0 * nm / tot_m if tot_m else 0.0))
    table1 = pd.DataFrame(t1_rows, columns=[
        "country", "n_parents", "pct_parents", "n_subsidiaries", "pct_subsidiaries",
        "n_middlemen", "pct_middlemen"])

    chains = corpus_chains(networks, table)
    max_crossed = max((c.foreign_countries_crossed for c in chains), default=0)
    cell: dict[tuple[int, int], int] = {}
    for c in chains:
        r = min(c.n_subsidiaries, 7)
        cell[(r, c.foreign_countries_crossed)] = cell.get((r, c.foreign_countries_crossed), 0) + 1
    row_labels = [str(r) for r in range(1, 7)] + ["7+"]
    col_labels = ["domestic"] + [f"foreign_{c}" for c in range(1, max_crossed + 1)]
    t2_rows = []
    col_totals = [0] * (max_crossed + 1)
    for r_idx, label in zip(range(1, 8), row_labels):
        vals = [cell.get((r_idx, c), 0) for c in range(0, max_crossed + 1)]
        for c, v in enumerate(vals):
            col_totals[c] += v
        t2_rows.append([label] + vals + [sum(vals)])
    t2_rows.append(["total"] + col_totals + [sum(col_totals)])
    table2 = pd.DataFrame(t2_rows, columns=["n_subsidiaries"] + col_labels + ["total"])
    return table1, table2


def _parse_sector_set(firm: Firm, allowed: set[str] | None,
                      missing: set[str]) -> bool:
    if allowed is None:
        return True
    if firm.sector is None:
        missing.add(firm.id)
        return False
    return firm.sector[:2] in allowed


def filter_networks(networks: list[ControlNetwork], firms: dict[str, Firm] | EquityGraph,
                    parent_sectors: set[str] | None = None,
                    middleman_sectors: set[str] | None = None,
                    final_sectors: set[str] | None = None) -> list[ControlNetwork]:
    """Restrict a corpus to chains whose roles match the sector predicates.

    A chain is kept when the parent's sector is in `parent_sectors`, every
    middleman's sector is in `middleman_sectors`, and the final subsidiary's
    sector is in `final_sectors` (each predicate optional). Networks are
    rebuilt from the union of kept chains and dropped when empty, so a
    parent-only predicate keeps or drops whole networks. Firms lacking
    sector data where a predicate needs it are treated as non-matching and
    reported in a data-coverage warning.
    """
    table = _firm_table(firms)
    missing: set[str] = set()
    kept_networks: list[ControlNetwork] = []
    for net in networks:
        if not _parse_sector_set(table[net.parent], parent_sectors, missing):
            continue
        kept_firms: set[str] = set()
        for chain in enumerate_chains(net, table):
            if not _parse_sector_set(table[chain.firms[-1]], final_sectors, missing):
                continue
            if not all(_parse_sector_set(table[m], middleman_sectors, missing)
                       for m in chain.middlemen):
                continue
            kept_firms.update(chain.firms[1:])
        if not kept_firms:
            continue
        assignments = [a for a in net.assignments if a.subsidiary in kept_firms]
        is_multinational = any(table[a.subsidiary].country != table[net.parent].country
                               for a in assignments)
        is_complex = any(a.level >= 2 for a in assignments)
        kept_networks.append(ControlNetwork(net.parent, assignments, is_multinational, is_complex))
    if missing:
        shown = sorted(missing)
        tail = f", … ({len(shown) - 10} more)" if len(shown) > 10 else ""
        warnings.warn(
            "sector filter: missing sector data treated as non-matching for "
            f"{len(shown)} firm(s): " + ", ".join(shown[:10]) + tail, stacklevel=2)
    return kept_networks


def write_chains_csv(networks: list[ControlNetwork], firms: dict[str, Firm] | EquityGraph,
                     path: str | Path) -> None:
    """Write `chains.csv` (parent_id,final_id,path,countries,n_middlemen,foreign_crossed)."""
    rows = []
    for chain in corpus_chains(networks, firms):
        rows.append([chain.firms[0], chain.firms[-1], "|".join(chain.firms),
                     "|".join(chain.countries), chain.n_middlemen, chain.foreign_countries_crossed])
    write_csv(path, ["parent_id", "final_id", "path", "countries", "n_middlemen", "foreign_crossed"], rows)


def write_counts_dyadic_csv(frames: list[pd.DataFrame], path: str | Path) -> None:
    """Write `counts_dyadic.csv` (iso_i,iso_j,count,mode), stacking the given modes."""
    rows = []
    for df in frames:
        for rec in df.itertuples(index=False):
            rows.append([rec.iso_i, rec.iso_j, rec.count, rec.mode])
    write_csv(path, ["iso_i", "iso_j", "count", "mode"], rows)


def write_counts_triadic_csv(df: pd.DataFrame, path: str | Path) -> None:
    """Write `counts_triadic.csv` (iso_i,iso_k,iso_j,m_ikj,m_ij,share)."""
    rows = [[r.iso_i, r.iso_k, r.iso_j, r.m_ikj, r.m_ij, r.share]
            for r in df.itertuples(index=False)]
    write_csv(path, ["iso_i", "iso_k", "iso_j", "m_ikj", "m_ij", "share"], rows)


def write_table_csv(df: pd.DataFrame, path: str | Path) -> None:
    write_csv(path, list(df.columns), df.itertuples(index=False))
