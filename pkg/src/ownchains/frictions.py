"""Country-pair regressors: working-hours overlap, distance, dummies, ratios.

Builds the dyadic friction table from the country and dyad input files and
assembles the dyadic/triadic regression designs, materializing the zero
cells Poisson estimation needs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import CoverageError, DataError, SchemaError, ValidationError
from .io import parse_float_field, read_csv_rows, write_csv

DEFAULT_WORKDAY = 10.0
MIN_UTC_OFFSET = -12.0
MAX_UTC_OFFSET = 14.0
DYAD_SEP = ":"

CORE_DYAD_REGRESSORS = ("log_dist", "contig", "comlang", "colony", "legal", "rta", "home")
OPTIONAL_DYAD_REGRESSORS = ("cli_index", "ct_ratio", "lc_ratio")


@dataclass(frozen=True)
class CountryRecord:
    """One country: ISO alpha-2 code, UTC offset in hours, optional levels of
    profit tax (percent) and labour cost (index)."""

    iso2: str
    utc_offset: float
    profit_tax: float | None = None
    labour_cost: float | None = None

    def __post_init__(self) -> None:
        if not self.iso2:
            raise ValidationError("empty country code")
        if not (MIN_UTC_OFFSET <= self.utc_offset <= MAX_UTC_OFFSET):
            raise ValidationError(
                f"{self.iso2}: utc_offset {self.utc_offset} outside [{MIN_UTC_OFFSET}, {MAX_UTC_OFFSET}]")
        if self.profit_tax is not None and not self.profit_tax > 0:
            raise ValidationError(f"{self.iso2}: profit_tax must be > 0")
        if self.labour_cost is not None and not self.labour_cost > 0:
            raise ValidationError(f"{self.iso2}: labour_cost must be > 0")


def overlap_hours(offset_a: float, offset_b: float, workday: float = DEFAULT_WORKDAY) -> float:
    """Hours per day two countries' offices are simultaneously open.

    Office windows have identical local placement and length `workday`, so
    the overlap is max(0, workday − d) with d the cyclic distance between
    UTC offsets: d = min(m, 24 − m), m = |offset_a − offset_b| mod 24.
    Symmetric, equal to `workday` when offsets coincide.
    """
    for off in (offset_a, offset_b):
        if not (MIN_UTC_OFFSET <= off <= MAX_UTC_OFFSET):
            raise ValidationError(f"utc offset {off} outside [{MIN_UTC_OFFSET}, {MAX_UTC_OFFSET}]")
    if not (0.0 < workday <= 24.0):
        raise ValidationError(f"workday {workday} outside (0, 24]")
    m = abs(offset_a - offset_b) % 24.0
    d = min(m, 24.0 - m)
    return max(0.0, workday - d)


def load_countries(path: str | Path) -> dict[str, CountryRecord]:
    """Read `countries.csv` (iso2,utc_offset,profit_tax,labour_cost); the two
    level columns may be blank."""
    rows = read_csv_rows(path, ["iso2", "utc_offset", "profit_tax", "labour_cost"])
    out: dict[str, CountryRecord] = {}
    for i, row in enumerate(rows, start=2):
        iso = row["iso2"].strip()
        if not iso:
            raise DataError(f"{path}: row {i}: empty iso2")
        if iso in out:
            raise DataError(f"{path}: row {i}: duplicate country {iso}")
        offset = parse_float_field(row["utc_offset"], path, i, "utc_offset")
        ct = row["profit_tax"].strip()
        lc = row["labour_cost"].strip()
        out[iso] = CountryRecord(
            iso, offset,
            parse_float_field(ct, path, i, "profit_tax") if ct else None,
            parse_float_field(lc, path, i, "labour_cost") if lc else None)
    return out


def load_dyads(path: str | Path) -> pd.DataFrame:
    """Read `dyads.csv` (iso_o,iso_d,dist_km,contig,comlang,colony,legal,rta,cli_index).

    cli_index is an optional column; blank cells in optional numeric columns
    become NaN (flagged, never imputed).
    """
    required = ["iso_o", "iso_d", "dist_km", "contig", "comlang", "colony", "legal", "rta"]
    rows = read_csv_rows(path, required)
    has_cli = bool(rows) and "cli_index" in rows[0]
    recs = []
    for i, row in enumerate(rows, start=2):
        rec = {"iso_o": row["iso_o"].strip(), "iso_d": row["iso_d"].strip()}
        rec["dist_km"] = parse_float_field(row["dist_km"], path, i, "dist_km")
        for col in ("contig", "comlang", "colony", "legal", "rta"):
            raw = row[col].strip()
            rec[col] = parse_float_field(raw, path, i, col) if raw else math.nan
        if has_cli:
            raw = row["cli_index"].strip()
            rec["cli_index"] = parse_float_field(raw, path, i, "cli_index") if raw else math.nan
        else:
            rec["cli_index"] = math.nan
        recs.append(rec)
    return pd.DataFrame.from_records(recs)


def build_dyad_table(countries: dict[str, CountryRecord], dyads: pd.DataFrame,
                     workday: float = DEFAULT_WORKDAY) -> pd.DataFrame:
    """Assemble per-dyad regressors from country attributes and raw dyad data.

    Computes wh from UTC offsets, log distance, the home dummy, and the
    destination/origin tax and labour-cost ratios where levels exist.
    Missing optional values stay NaN. Rows keep the input's (iso_o, iso_d)
    universe; home rows must carry the supplied internal distance.
    """
    unknown = sorted({c for c in pd.concat([dyads["iso_o"], dyads["iso_d"]]).unique()
                      if c not in countries})
    if unknown:
        raise CoverageError(f"dyad table references countries missing from the country file: "
                            f"{', '.join(unknown)}")
    rows = []
    for rec in dyads.itertuples(index=False):
        o, d = rec.iso_o, rec.iso_d
        if not rec.dist_km > 0:
            raise DataError(f"dyad ({o}, {d}): dist_km must be positive, got {rec.dist_km}")
        co, cd = countries[o], countries[d]
        ct_ratio = (cd.profit_tax / co.profit_tax
                    if co.profit_tax is not None and cd.profit_tax is not None else math.nan)
        lc_ratio = (cd.labour_cost / co.labour_cost
                    if co.labour_cost is not None and cd.labour_cost is not None else math.nan)
        rows.append({
            "iso_o": o, "iso_d": d,
            "wh": overlap_hours(co.utc_offset, cd.utc_offset, workday),
            "log_dist": math.log(rec.dist_km),
            "contig": rec.contig, "comlang": rec.comlang, "colony": rec.colony,
            "legal": rec.legal, "rta": rec.rta,
            "home": 1.0 if o == d else 0.0,
            "cli_index": rec.cli_index,
            "ct_ratio": ct_ratio, "lc_ratio": lc_ratio,
        })
    table = pd.DataFrame.from_records(rows)
    return table.sort_values(["iso_o", "iso_d"], ignore_index=True)


def _dyad_lookup(dyad_table: pd.DataFrame) -> dict[tuple[str, str], dict]:
    lookup: dict[tuple[str, str], dict] = {}
    for rec in dyad_table.to_dict("records"):
        lookup[(rec["iso_o"], rec["iso_d"])] = rec
    return lookup


def _resolve(lookup: dict, pairs: list[tuple[str, str]], columns: tuple[str, ...],
             label: str) -> None:
    """Raise CoverageError listing dyads that are absent or NaN in used columns."""
    missing = sorted({p for p in pairs if p not in lookup})
    if missing:
        raise CoverageError(
            f"{label}: dyads missing from the friction table: "
            + ", ".join(f"({o},{d})" for o, d in missing[:20])
            + (" ..." if len(missing) > 20 else ""))
    bad = sorted({p for p in pairs
                  if any(not math.isfinite(lookup[p][c]) for c in columns)})
    if bad:
        raise CoverageError(
            f"{label}: dyads with missing values in required regressors {columns}: "
            + ", ".join(f"({o},{d})" for o, d in bad[:20])
            + (" ..." if len(bad) > 20 else ""))


def build_dyad_design(counts: pd.DataFrame, dyad_table: pd.DataFrame,
                      corpus_countries: list[str],
                      extra_regressors: tuple[str, ...] = ()) -> pd.DataFrame:
    """Bilateral gravity design: the full origin×destination grid over the
    corpus countries with zero counts materialized.

    Core regressors (wh + controls + home) must be present and finite for
    every grid cell; requested extras (cli_index, ct_ratio, lc_ratio) drop
    incomplete rows with a warning.
    """
    for col in extra_regressors:
        if col not in OPTIONAL_DYAD_REGRESSORS:
            raise SchemaError(f"unknown extra regressor {col!r}; "
                              f"choose from {OPTIONAL_DYAD_REGRESSORS}")
    lookup = _dyad_lookup(dyad_table)
    grid = [(i, j) for i in corpus_countries for j in corpus_countries]
    core = ("wh",) + CORE_DYAD_REGRESSORS
    _resolve(lookup, grid, ("wh", "log_dist", "contig", "comlang", "colony", "legal", "rta"),
             "bilateral design")
    observed = {(r.iso_i, r.iso_j): int(r.count) for r in counts.itertuples(index=False)}
    rows = []
    for i, j in grid:
        rec = lookup[(i, j)]
        row = {"iso_i": i, "iso_j": j, "dyad": f"{i}{DYAD_SEP}{j}",
               "count": observed.get((i, j), 0)}
        for c in core:
            row[c] = rec[c]
        for c in extra_regressors:
            row[c] = rec[c]
        rows.append(row)
    design = pd.DataFrame.from_records(rows)
    if extra_regressors:
        incomplete = design[list(extra_regressors)].isna().any(axis=1)
        if incomplete.any():
            warnings.warn(
                f"bilateral design: dropped {int(incomplete.sum())} rows with missing "
                f"values in optional regressors {extra_regressors}", stacklevel=2)
            design = design.loc[~incomplete].reset_index(drop=True)
    return design.sort_values(["iso_i", "iso_j"], ignore_index=True)


def build_triad_design(triads: pd.DataFrame, dyad_table: pd.DataFrame,
                       candidate_countries: list[str] | None = None,
                       include_ij_controls: bool = True,
                       include_interaction: bool = False,
                       extra_regressors: tuple[str, ...] = ()) -> pd.DataFrame:
    """Triangular design over (origin i, middleman k, destination j).

    Rows are the observed (i, j) dyads crossed with the full candidate-k
    set (zero outcomes materialized; Poisson needs them), carrying the
    ik-side and kj-side regressors, optionally the ij-side controls and the
    wh_ij × wh_kj interaction, the ln m_ij offset, and the i×j cluster key.
    Sorted by (i, k, j).
    """
    if candidate_countries is None:
        candidate_countries = sorted(set(triads["iso_i"]) | set(triads["iso_k"]) | set(triads["iso_j"]))
    lookup = _dyad_lookup(dyad_table)

    dyad_m: dict[tuple[str, str], int] = {}
    cell: dict[tuple[str, str, str], int] = {}
    for r in triads.itertuples(index=False):
        cell[(r.iso_i, r.iso_k, r.iso_j)] = int(r.m_ikj)
        dyad_m[(r.iso_i, r.iso_j)] = int(r.m_ij)
    observed_dyads = sorted(dyad_m)

    needed_pairs = set()
    for i, j in observed_dyads:
        needed_pairs.add((i, j))
        for k in candidate_countries:
            needed_pairs.add((i, k))
            needed_pairs.add((k, j))
    core = ("wh", "log_dist", "contig", "comlang", "colony", "legal", "rta", "home")
    _resolve(lookup, sorted(needed_pairs),
             ("wh", "log_dist", "contig", "comlang", "colony", "legal", "rta"),
             "triangular design")

    rows = []
    for i, j in observed_dyads:
        m_ij = dyad_m[(i, j)]
        rec_ij = lookup[(i, j)]
        for k in candidate_countries:
            rec_ik = lookup[(i, k)]
            rec_kj = lookup[(k, j)]
            row = {"iso_i": i, "iso_k": k, "iso_j": j,
                   "dyad_ij": f"{i}{DYAD_SEP}{j}",
                   "m_ikj": cell.get((i, k, j), 0),
                   "m_ij": m_ij, "ln_m_ij": math.log(m_ij)}
            for c in core:
                row[f"{c}_ik"] = rec_ik[c]
                row[f"{c}_kj"] = rec_kj[c]
            for c in extra_regressors:
                row[f"{c}_ik"] = rec_ik[c]
                row[f"{c}_kj"] = rec_kj[c]
            if include_ij_controls:
                for c in core:
                    row[f"{c}_ij"] = rec_ij[c]
                for c in extra_regressors:
                    row[f"{c}_ij"] = rec_ij[c]
            if include_interaction:
                if not include_ij_controls:
                    row["wh_ij"] = rec_ij["wh"]
                row["wh_ij_x_wh_kj"] = rec_ij["wh"] * rec_kj["wh"]
            rows.append(row)
    design = pd.DataFrame.from_records(rows)
    if extra_regressors:
        extra_cols = [c for c in design.columns
                      if any(c.startswith(e) for e in extra_regressors)]
        incomplete = design[extra_cols].isna().any(axis=1)
        if incomplete.any():
            warnings.warn(
                f"triangular design: dropped {int(incomplete.sum())} rows with missing "
                f"values in optional regressors {extra_regressors}", stacklevel=2)
            design = design.loc[~incomplete].reset_index(drop=True)
    return design.sort_values(["iso_i", "iso_k", "iso_j"], ignore_index=True)


def write_design_csv(design: pd.DataFrame, path: str | Path) -> None:
    write_csv(path, list(design.columns), design.itertuples(index=False))
