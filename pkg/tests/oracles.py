"""Independent reference implementations used to cross-check the package.

Every function here is written against the mathematical definition of the
quantity it computes, deliberately using a different algorithm from the
library (ordered sweeps instead of worklists, explicit dummy matrices
instead of alternating-projection demeaning, minute enumeration instead of
modular arithmetic, Monte Carlo instead of closed forms). Tests compare the
two routes; neither side imports the other's internals.
"""
from __future__ import annotations

import math

import numpy as np
import pandas as pd

MAJORITY = 50.0
EPS = 1e-9


# ---------------------------------------------------------------------------
# Control identification: ordered-sweep monotone fixed point
# ---------------------------------------------------------------------------

def sweep_control_set(firms: list[str], edges: list[tuple[str, str, float]],
                      candidate: str, order: list[str]) -> frozenset[str]:
    """Least fixed point of majority accretion, computed by full sweeps.

    Repeatedly walks `order`; a firm joins the set when the candidate plus
    current members jointly hold strictly more than a 50% stake in it.
    The operator is monotone, so any processing order reaches the same
    fixed point — that invariance is exactly what tests exploit.
    """
    in_shares: dict[str, list[tuple[str, float]]] = {f: [] for f in firms}
    for holder, target, share in edges:
        in_shares[target].append((holder, share))
    members: set[str] = set()
    coalition: set[str] = {candidate}
    changed = True
    while changed:
        changed = False
        for f in order:
            if f in members:
                continue
            total = sum(sh for h, sh in in_shares[f] if h in coalition)
            if total > MAJORITY + EPS:
                members.add(f)
                coalition.add(f)
                changed = True
    return frozenset(members)


def sweep_ultimate_parents(firms: list[str], edges: list[tuple[str, str, float]],
                           order: list[str]) -> dict[str, frozenset[str]]:
    """Parent → controlled-set mapping from the sweep fixed point.

    A firm qualifies as an ultimate parent when it controls at least one
    firm and appears in no firm's controlled set.
    """
    sets = {f: sweep_control_set(firms, edges, f, order) for f in firms}
    controlled: set[str] = set()
    for s in sets.values():
        controlled |= s
    return {f: s for f, s in sets.items() if s and f not in controlled}


# ---------------------------------------------------------------------------
# Chain recount: brute-force path enumeration over assignment edges
# ---------------------------------------------------------------------------

def recount_chains(parent: str, assignment_edges: list[tuple[str, str]]) -> list[tuple[str, ...]]:
    """All root-to-leaf paths of the (controller → subsidiary) tree."""
    children: dict[str, list[str]] = {}
    for controller, subsidiary in assignment_edges:
        children.setdefault(controller, []).append(subsidiary)
    for v in children.values():
        v.sort()
    paths: list[tuple[str, ...]] = []

    def walk(node: str, prefix: tuple[str, ...]) -> None:
        path = prefix + (node,)
        kids = children.get(node, [])
        if not kids and node != parent:
            paths.append(path)
        for kid in kids:
            walk(kid, path)

    walk(parent, ())
    return paths


# ---------------------------------------------------------------------------
# Poisson regression: explicit-dummy Newton–Raphson with clustered errors
# ---------------------------------------------------------------------------

def drop_separated_rows(df: pd.DataFrame, outcome: str, factors: list[str]) -> pd.DataFrame:
    """Remove rows of factor levels whose outcome total is zero, to a fixed point."""
    out = df
    while True:
        keep = pd.Series(True, index=out.index)
        for f in factors:
            keep &= out.groupby(f)[outcome].transform("sum") > 0
        if keep.all():
            return out
        out = out[keep]


def dummy_design(df: pd.DataFrame, regressors: list[str], factors: list[str]) -> tuple[np.ndarray, list[str]]:
    """Continuous columns plus explicit one-hot factor dummies.

    The first factor enters with every level (it absorbs the intercept);
    later factors drop their first level. With no factors an intercept
    column is prepended instead.
    """
    cols: list[np.ndarray] = []
    names: list[str] = []
    if not factors:
        cols.append(np.ones(len(df)))
        names.append("const")
    for r in regressors:
        cols.append(df[r].to_numpy(dtype=float))
        names.append(r)
    for idx, f in enumerate(factors):
        levels = sorted(df[f].astype(str).unique())
        keep = levels if idx == 0 else levels[1:]
        vals = df[f].astype(str).to_numpy()
        for lv in keep:
            cols.append((vals == lv).astype(float))
            names.append(f"{f}={lv}")
    return np.column_stack(cols), names


def newton_poisson(y: np.ndarray, X: np.ndarray, offset: np.ndarray | None = None,
                   tol: float = 1e-12, max_iter: int = 200) -> np.ndarray:
    """Poisson maximum likelihood by damped Newton–Raphson on the score."""
    n, p = X.shape
    off = np.zeros(n) if offset is None else offset
    beta = np.zeros(p)

    def neg_loglik(b: np.ndarray) -> float:
        eta = X @ b + off
        return float(np.sum(np.exp(eta) - y * eta))

    nll = neg_loglik(beta)
    for _ in range(max_iter):
        mu = np.exp(X @ beta + off)
        grad = X.T @ (y - mu)
        hess = (X * mu[:, None]).T @ X
        step = np.linalg.solve(hess + 1e-12 * np.eye(p), grad)
        scale = 1.0
        for _ in range(60):
            cand = beta + scale * step
            nll_cand = neg_loglik(cand)
            if nll_cand <= nll + 1e-12:
                break
            scale *= 0.5
        beta = beta + scale * step
        nll = neg_loglik(beta)
        if np.max(np.abs(grad)) < tol * (1.0 + float(np.abs(y).sum())):
            break
    return beta


def clustered_vcov(y: np.ndarray, X: np.ndarray, beta: np.ndarray,
                   clusters: np.ndarray, offset: np.ndarray | None = None) -> np.ndarray:
    """Cluster sandwich for a Poisson fit on an explicit design matrix."""
    n, p = X.shape
    off = np.zeros(n) if offset is None else offset
    mu = np.exp(X @ beta + off)
    bread = np.linalg.inv((X * mu[:, None]).T @ X)
    scores = X * (y - mu)[:, None]
    codes, uniq = pd.factorize(clusters)
    g = len(uniq)
    meat = np.zeros((p, p))
    for gi in range(g):
        s = scores[codes == gi].sum(axis=0)
        meat += np.outer(s, s)
    return bread @ meat @ bread * (g / (g - 1))


# ---------------------------------------------------------------------------
# Wage optimisation: grid plus golden-section refinement
# ---------------------------------------------------------------------------

def wage_search(a: float, b: float, e: float, c: float) -> tuple[float, float]:
    """Maximize a + (1 − c/w)·b − w over w by direct search.

    Returns (argmax wage, maximum value) to ~1e-10 in the wage. Written
    without using the closed-form optimum so it can validate it.
    """
    def value(w: float) -> float:
        return a + (1.0 - c / w) * b - w

    if c == 0.0:
        return 0.0, a + b
    lo = max(e, 1e-9)
    hi = max(b, lo * 2.0) + 1.0
    grid = np.linspace(lo, hi, 20001)
    vals = a + (1.0 - c / grid) * b - grid
    k = int(np.argmax(vals))
    left = grid[max(k - 1, 0)]
    right = grid[min(k + 1, len(grid) - 1)]
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = right - phi * (right - left)
    x2 = left + phi * (right - left)
    f1, f2 = value(x1), value(x2)
    while right - left > 1e-12:
        if f1 < f2:
            left, x1, f1 = x1, x2, f2
            x2 = left + phi * (right - left)
            f2 = value(x2)
        else:
            right, x2, f2 = x2, x1, f1
            x1 = right - phi * (right - left)
            f1 = value(x1)
    w = 0.5 * (left + right)
    return w, value(w)


# ---------------------------------------------------------------------------
# Office overlap: minute enumeration on the 24h circle
# ---------------------------------------------------------------------------

def overlap_by_minutes(offset_a: float, offset_b: float, workday: float = 10.0) -> float:
    """Shared open time computed by intersecting per-minute opening sets.

    Each office opens at local 09:00 for `workday` hours; converting to UTC
    minutes modulo one day and intersecting gives the overlap. Exact for
    offsets and workdays on a 0.25-hour grid.
    """
    day = 24 * 60

    def open_minutes(offset: float) -> set[int]:
        start = round((9.0 - offset) * 60)
        length = round(workday * 60)
        return {(start + t) % day for t in range(length)}

    shared = open_minutes(offset_a) & open_minutes(offset_b)
    return len(shared) / 60.0


# ---------------------------------------------------------------------------
# Monte Carlo checks for the discrete-choice and auction probabilities
# ---------------------------------------------------------------------------

def mc_route_choice(route_costs: np.ndarray, n_draws: int, seed: int) -> np.ndarray:
    """Frequency each route attains the highest Gumbel-perturbed −cost."""
    rng = np.random.default_rng(seed)
    gumbels = rng.gumbel(size=(n_draws, len(route_costs)))
    picks = np.argmax(-route_costs[None, :] + gumbels, axis=1)
    return np.bincount(picks, minlength=len(route_costs)) / n_draws


def mc_auction_winner(m: np.ndarray, mu: np.ndarray, sigma: float,
                      handicap: np.ndarray, n_draws: int, seed: int) -> np.ndarray:
    """Frequency each origin wins when fielding m_i independent bidders.

    Every bidder's score is mu_i + sigma·Gumbel − handicap_i and the origin
    of the single best bidder wins; no max-stability shortcut is used.
    """
    rng = np.random.default_rng(seed)
    n_origins = len(m)
    wins = np.zeros(n_origins)
    chunk = 20000
    done = 0
    while done < n_draws:
        t = min(chunk, n_draws - done)
        best_val = np.full(t, -np.inf)
        best_origin = np.zeros(t, dtype=int)
        for i in range(n_origins):
            g = rng.gumbel(size=(t, int(m[i])))
            v = mu[i] + sigma * g.max(axis=1) - handicap[i]
            better = v > best_val
            best_val[better] = v[better]
            best_origin[better] = i
        wins += np.bincount(best_origin, minlength=n_origins)
        done += t
    return wins / n_draws


def binomial_band(p: np.ndarray, n: int, k: float = 3.0) -> np.ndarray:
    """Half-width of a k-standard-error band for a frequency estimate."""
    return k * np.sqrt(np.maximum(p * (1.0 - p), 1e-12) / n)
