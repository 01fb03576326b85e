"""Monitoring-delegation theory and the synthetic-world simulator.

Implements the parent–subsidiary inspection game with endogenous wage, the
composite (multi-location) monitoring cost, the middleman-location choice
probabilities, the auction for control of a target firm, and a simulator
that generates cross-border chain microdata from known parameters so the
whole estimation pipeline can be validated end to end.

Sign convention: the composite cost is C_ij = −ln Σ_ℓ exp(−(δ_iℓ + δ_ℓj)),
which is positive for positive per-link costs and admits the √C term in the
parent's valuation. Recovered dyad effects therefore estimate +C_ij.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np
import pandas as pd
from scipy.special import logsumexp

from .errors import (ConfigError, ConventionError, CoverageError, DomainError,
                     ParameterError, ValidationError)
from .frictions import CountryRecord, build_dyad_table, load_dyads

EPSILON_SCALE = 1.0  # scale of the location-choice Gumbel noise (normalization)
EARTH_RADIUS_KM = 6371.0
CROSS_DISTANCE_FLOOR_KM = 150.0


# ---------------------------------------------------------------------------
# Inspection game
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GameParams:
    """Primitives of the parent–manager inspection game.

    a: parent's standalone value added; b: subsidiary value under effort;
    w: wage; e: manager's effort cost; c: parent's monitoring cost.
    Requires b ≥ w ≥ e ≥ c ≥ 0.
    """

    a: float
    b: float
    w: float
    e: float
    c: float

    def __post_init__(self) -> None:
        checks = [("c >= 0", self.c >= 0), ("e >= c", self.e >= self.c),
                  ("w >= e", self.w >= self.e), ("b >= w", self.b >= self.w)]
        for label, ok in checks:
            if not ok:
                raise ParameterError(f"inspection game requires {label} "
                                     f"(a={self.a}, b={self.b}, w={self.w}, e={self.e}, c={self.c})")


@dataclass(frozen=True)
class PayoffProfile:
    """Expected payoffs of each pure strategy against the opponent's mix."""

    parent_trust: float
    parent_monitor: float
    subsidiary_work: float
    subsidiary_shirk: float


@dataclass(frozen=True)
class Equilibrium:
    """Mixed-strategy equilibrium of the game at the optimal wage.

    x_star: probability the manager works; q_star: probability the parent
    trusts; w_star: wage chosen by the parent; v: parent's expected value.
    """

    x_star: float
    q_star: float
    w_star: float
    v: float


def expected_payoffs(params: GameParams, work_prob: float, trust_prob: float) -> PayoffProfile:
    """Expected payoff of each pure strategy given the opponent's mixing.

    The parent's strategies face a manager who works with probability
    `work_prob`; the manager's strategies face a parent who trusts with
    probability `trust_prob`. Cell payoffs: (Trust, Work) → (a+b−w, w−e);
    (Trust, Shirk) → (a−w, w); (Monitor, Work) → (a+b−w−c, w−e);
    (Monitor, Shirk) → (a−c, 0).
    """
    for name, p in (("work_prob", work_prob), ("trust_prob", trust_prob)):
        if not (0.0 <= p <= 1.0):
            raise ParameterError(f"{name} must lie in [0, 1], got {p}")
    a, b, w, e, c = params.a, params.b, params.w, params.e, params.c
    x = work_prob
    return PayoffProfile(
        parent_trust=x * (a + b - w) + (1 - x) * (a - w),
        parent_monitor=x * (a + b - w - c) + (1 - x) * (a - c),
        subsidiary_work=w - e,
        subsidiary_shirk=trust_prob * w)


def equilibrium(a: float, b: float, e: float, c: float) -> Equilibrium:
    """Solve the game with the wage set by the parent.

    At a wage w the manager works with probability x(w) = 1 − c/w and the
    parent trusts with probability q(w) = 1 − e/w; the parent's expected
    value a + x(w)·b − w is maximized at w* = √(b·c), giving
    v = a + b − 2√(b·c). When c = 0 monitoring is free, the wage collapses
    to zero and both probabilities take their limit value 1.
    """
    root = math.sqrt(b * c) if b * c >= 0 else math.nan
    checks = [("c >= 0", c >= 0), ("e >= c", e >= c), ("b >= e", b >= e),
              ("sqrt(b*c) >= e", root >= e), ("sqrt(b*c) <= b", root <= b)]
    for label, ok in checks:
        if not ok:
            raise ParameterError(f"equilibrium requires {label} (a={a}, b={b}, e={e}, c={c})")
    if c == 0.0:
        return Equilibrium(x_star=1.0, q_star=1.0, w_star=0.0, v=a + b)
    w_star = root
    return Equilibrium(
        x_star=1.0 - c / w_star,
        q_star=1.0 - e / w_star,
        w_star=w_star,
        v=a + b - 2.0 * root)


# ---------------------------------------------------------------------------
# Composite costs and choice probabilities
# ---------------------------------------------------------------------------

def multilateral_cost(delta_to_mid, delta_from_mid) -> float:
    """Composite cost of monitoring a target given all candidate middleman
    locations: −ln Σ_ℓ exp(−(δ_iℓ + δ_ℓj)).

    Lower than any single route's total cost; adding a candidate can only
    lower it. An infinite per-link cost removes that candidate. The two
    arrays are aligned by candidate.
    """
    to_mid = np.asarray(delta_to_mid, dtype=float)
    from_mid = np.asarray(delta_from_mid, dtype=float)
    if to_mid.shape != from_mid.shape:
        raise ParameterError(f"candidate arrays differ in shape: {to_mid.shape} vs {from_mid.shape}")
    if to_mid.size == 0:
        raise DomainError("composite cost needs at least one candidate middleman country")
    if np.any(np.isnan(to_mid)) or np.any(np.isnan(from_mid)):
        raise ValidationError("per-link costs must not be NaN")
    totals = to_mid + from_mid
    return float(-logsumexp(-totals))


@dataclass(frozen=True)
class CostStructure:
    """Per-link cost matrices over a common country list.

    delta_ik[i, k]: cost for a parent in country i to delegate to a
    middleman in k. delta_kj[k, j]: cost for that middleman to monitor a
    target in j. The location-choice noise is Gumbel with scale fixed at 1.
    """

    countries: tuple[str, ...]
    delta_ik: np.ndarray = field(repr=False)
    delta_kj: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        n = len(self.countries)
        for name, mat in (("delta_ik", self.delta_ik), ("delta_kj", self.delta_kj)):
            if mat.shape != (n, n):
                raise ParameterError(f"{name} must be {n}x{n}, got {mat.shape}")
            if np.any(np.isnan(mat)) or np.any(mat < 0):
                raise ValidationError(f"{name} must be non-negative and not NaN")

    def index(self, iso: str) -> int:
        try:
            return self.countries.index(iso)
        except ValueError:
            raise CoverageError(f"country {iso!r} not in the cost structure") from None

    def route_totals(self, origin: str, dest: str) -> np.ndarray:
        i, j = self.index(origin), self.index(dest)
        return self.delta_ik[i, :] + self.delta_kj[:, j]

    def composite_cost(self, origin: str, dest: str) -> float:
        return multilateral_cost(self.delta_ik[self.index(origin), :],
                                 self.delta_kj[:, self.index(dest)])


def middleman_choice_prob(costs: CostStructure, origin: str, dest: str) -> pd.Series:
    """Probability the chain from `origin` to `dest` routes via each
    candidate middleman country: the softmax of minus the route totals,
    computed with a max shift for stability."""
    totals = costs.route_totals(origin, dest)
    z = -totals
    z = z - np.max(z)
    weights = np.exp(z)
    probs = weights / weights.sum()
    return pd.Series(probs, index=list(costs.countries), name="prob")


@dataclass(frozen=True)
class AuctionConfig:
    """Bidder structure of the control auction: parents per country m_i,
    productivity-draw location μ_i, common Gumbel scale σ, and the value b
    of a controlled subsidiary."""

    m: dict[str, int]
    mu: dict[str, float]
    sigma: float
    b: float

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be > 0, got {self.sigma}")
        if self.b < 0:
            raise ParameterError(f"b must be >= 0, got {self.b}")
        if set(self.m) != set(self.mu):
            raise ParameterError("m and mu must cover the same countries")
        for iso, count in self.m.items():
            if count != int(count) or count < 1:
                raise ParameterError(f"m[{iso!r}] must be an integer >= 1, got {count}")

    @property
    def theta(self) -> float:
        """Elasticity of auction odds to √cost: 2√b/σ."""
        return 2.0 * math.sqrt(self.b) / self.sigma


def auction_win_prob(costs_to_dest: Mapping[str, float], config: AuctionConfig) -> pd.Series:
    """Probability each origin country wins the auction for a target,
    given every origin's composite cost to the target's country.

    π_i ∝ m_i · exp((μ_i − 2√(b·C_ij))/σ). Costs must be non-negative for
    the square root to exist; a negative cost means the normalization
    upstream was wrong.
    """
    countries = sorted(config.m)
    missing = [iso for iso in countries if iso not in costs_to_dest]
    if missing:
        raise CoverageError(f"no composite cost for origins: {missing}")
    c = np.array([costs_to_dest[iso] for iso in countries], dtype=float)
    if np.any(c < 0):
        bad = [iso for iso, v in zip(countries, c) if v < 0]
        raise ConventionError(
            f"negative composite cost for {bad}; costs must be normalized to be "
            "non-negative before the auction stage")
    m = np.array([config.m[iso] for iso in countries], dtype=float)
    mu = np.array([config.mu[iso] for iso in countries], dtype=float)
    s = np.log(m) + (mu - 2.0 * np.sqrt(config.b * c)) / config.sigma
    s = s - np.max(s)
    weights = np.exp(s)
    return pd.Series(weights / weights.sum(), index=countries, name="prob")


def value_with_multilateral_cost(a: float, b: float, c_ij: float) -> float:
    """Parent's valuation of a target when monitoring runs through the best
    mix of middleman locations: a + b − 2√(b·C_ij)."""
    if b < 0:
        raise ParameterError(f"b must be >= 0, got {b}")
    if c_ij < 0:
        raise ConventionError(f"composite cost must be >= 0, got {c_ij}; "
                              "check the cost normalization")
    return a + b - 2.0 * math.sqrt(b * c_ij)


# ---------------------------------------------------------------------------
# Synthetic world
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WorldConfig:
    """Everything needed to generate a synthetic world and its chain data.

    Geography (UTC offsets, coordinates, distances) is drawn from `seed`;
    per-link costs are affine in the working-hours overlap and log distance,
    clamped at zero; auctions run per target slot in every destination.
    """

    n_countries: int = 15
    targets_per_destination: int = 2000
    seed: int = 12345
    workday: float = 10.0
    # auction block
    b: float = 4.0
    sigma: float = 2.0
    mu: float = 0.0
    m_min: int = 50
    m_max: int = 200
    # delegation (parent→middleman) cost block
    d0_ik: float = 0.0
    d1_wh_ik: float = 0.08
    d2_logdist_ik: float = 0.35
    # monitoring (middleman→target) cost block
    d0_kj: float = 0.0
    d1_wh_kj: float = 0.12
    d2_logdist_kj: float = 0.45

    def __post_init__(self) -> None:
        checks = [
            ("n_countries >= 1", self.n_countries >= 1),
            ("targets_per_destination >= 1", self.targets_per_destination >= 1),
            ("seed >= 0", self.seed >= 0),
            ("0 < workday <= 24", 0 < self.workday <= 24),
            ("b > 0", self.b > 0),
            ("sigma > 0", self.sigma > 0),
            ("1 <= m_min <= m_max", 1 <= self.m_min <= self.m_max),
        ]
        for label, ok in checks:
            if not ok:
                raise ConfigError(f"world config requires {label}")

    @property
    def theta(self) -> float:
        return 2.0 * math.sqrt(self.b) / self.sigma


_TOML_SCALARS = {
    "n_countries": int, "targets_per_destination": int, "seed": int, "workday": float,
}
_TOML_SECTIONS = {
    "auction": {"b": float, "sigma": float, "mu": float, "m_min": int, "m_max": int},
    "delegation": {"d0": float, "d1_wh": float, "d2_logdist": float},
    "monitoring": {"d0": float, "d1_wh": float, "d2_logdist": float},
}
_SECTION_FIELD = {
    ("auction", "b"): "b", ("auction", "sigma"): "sigma", ("auction", "mu"): "mu",
    ("auction", "m_min"): "m_min", ("auction", "m_max"): "m_max",
    ("delegation", "d0"): "d0_ik", ("delegation", "d1_wh"): "d1_wh_ik",
    ("delegation", "d2_logdist"): "d2_logdist_ik",
    ("monitoring", "d0"): "d0_kj", ("monitoring", "d1_wh"): "d1_wh_kj",
    ("monitoring", "d2_logdist"): "d2_logdist_kj",
}


def load_world_config(path: str | Path) -> WorldConfig:
    """Read a `world.toml` file; unknown keys are rejected, missing keys take
    the documented defaults."""
    import tomli
    with open(path, "rb") as fh:
        try:
            raw = tomli.load(fh)
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: invalid TOML: {exc}") from exc
    kwargs: dict = {}
    for key, value in raw.items():
        if key in _TOML_SCALARS:
            kwargs[key] = _TOML_SCALARS[key](value)
        elif key in _TOML_SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"{path}: [{key}] must be a section")
            for sub, subval in value.items():
                if sub not in _TOML_SECTIONS[key]:
                    raise ConfigError(f"{path}: unknown key {key}.{sub}")
                kwargs[_SECTION_FIELD[(key, sub)]] = _TOML_SECTIONS[key][sub](subval)
        else:
            raise ConfigError(f"{path}: unknown key {key!r}")
    return WorldConfig(**kwargs)


def _haversine_km(lat: np.ndarray, lon: np.ndarray) -> np.ndarray:
    """Great-circle distance matrix in km over coordinate vectors."""
    phi = np.radians(lat)
    lam = np.radians(lon)
    dphi = phi[:, None] - phi[None, :]
    dlam = lam[:, None] - lam[None, :]
    h = np.sin(dphi / 2.0) ** 2 + np.cos(phi)[:, None] * np.cos(phi)[None, :] * np.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))


def _overlap_matrix(offsets: np.ndarray, workday: float) -> np.ndarray:
    m = np.abs(offsets[:, None] - offsets[None, :]) % 24.0
    d = np.minimum(m, 24.0 - m)
    return np.maximum(0.0, workday - d)


def _iso_codes(n: int) -> list[str]:
    if n > 26 * 26:
        raise ConfigError(f"at most {26 * 26} synthetic countries are supported, got {n}")
    return [chr(65 + i // 26) + chr(65 + i % 26) for i in range(n)]


@dataclass
class World:
    """A realized synthetic world: geography, frictions, costs, auction."""

    config: WorldConfig
    iso: tuple[str, ...]
    utc_offsets: np.ndarray = field(repr=False)
    lat: np.ndarray = field(repr=False)
    lon: np.ndarray = field(repr=False)
    dist_km: np.ndarray = field(repr=False)
    wh: np.ndarray = field(repr=False)
    m: np.ndarray = field(repr=False)
    mu: np.ndarray = field(repr=False)
    costs: CostStructure = field(repr=False)
    c_matrix: np.ndarray = field(repr=False)
    s_j: np.ndarray = field(repr=False)

    @property
    def theta(self) -> float:
        return self.config.theta

    @property
    def auction(self) -> AuctionConfig:
        return AuctionConfig(
            m={iso: int(v) for iso, v in zip(self.iso, self.m)},
            mu={iso: float(v) for iso, v in zip(self.iso, self.mu)},
            sigma=self.config.sigma, b=self.config.b)

    def c_table(self) -> pd.DataFrame:
        rows = [{"iso_i": oi, "iso_j": dj, "c_true": float(self.c_matrix[i, j])}
                for i, oi in enumerate(self.iso) for j, dj in enumerate(self.iso)]
        return pd.DataFrame.from_records(rows)

    def countries_df(self) -> pd.DataFrame:
        return pd.DataFrame({
            "iso2": list(self.iso),
            "utc_offset": self.utc_offsets,
            "profit_tax": [math.nan] * len(self.iso),
            "labour_cost": [math.nan] * len(self.iso),
        })

    def dyads_df(self) -> pd.DataFrame:
        rows = []
        for i, oi in enumerate(self.iso):
            for j, dj in enumerate(self.iso):
                rows.append({"iso_o": oi, "iso_d": dj, "dist_km": float(self.dist_km[i, j]),
                             "contig": 0.0, "comlang": 0.0, "colony": 0.0,
                             "legal": 0.0, "rta": 0.0, "cli_index": math.nan})
        return pd.DataFrame.from_records(rows)

    def dyad_table(self) -> pd.DataFrame:
        countries = {iso: CountryRecord(iso, float(off))
                     for iso, off in zip(self.iso, self.utc_offsets)}
        return build_dyad_table(countries, self.dyads_df(), workday=self.config.workday)


def build_world(config: WorldConfig) -> World:
    """Draw the synthetic geography and derive frictions, costs, and auction
    fundamentals. Deterministic in `config.seed`.

    UTC offsets sit on a quarter-hour grid; longitudes track offsets (15° per
    hour) with jitter so overlap and distance correlate without being
    collinear. Per-link costs fall with overlap and rise with log distance.
    Composite costs must come out strictly positive, and monitoring must be
    costlier than delegation on average, or the config is rejected.
    """
    ss = np.random.SeedSequence(config.seed)
    geo_seed = ss.spawn(1)[0]
    rng = np.random.default_rng(geo_seed)
    n = config.n_countries
    iso = _iso_codes(n)

    grid = np.arange(-11.0, 13.0 + 1e-9, 0.25)
    offsets = rng.choice(grid, size=n)
    lon = offsets * 15.0 + rng.uniform(-5.0, 5.0, size=n)
    lon = (lon + 180.0) % 360.0 - 180.0
    lat = rng.uniform(-50.0, 55.0, size=n)
    internal = rng.uniform(80.0, 400.0, size=n)
    m = rng.integers(config.m_min, config.m_max + 1, size=n)
    mu = np.full(n, config.mu, dtype=float)

    dist = _haversine_km(lat, lon)
    off_diag = ~np.eye(n, dtype=bool)
    dist[off_diag] = np.maximum(dist[off_diag], CROSS_DISTANCE_FLOOR_KM)
    np.fill_diagonal(dist, internal)

    wh = _overlap_matrix(offsets, config.workday)
    log_dist = np.log(dist)
    delta_ik = np.maximum(0.0, config.d0_ik - config.d1_wh_ik * wh + config.d2_logdist_ik * log_dist)
    delta_kj = np.maximum(0.0, config.d0_kj - config.d1_wh_kj * wh + config.d2_logdist_kj * log_dist)
    if float(delta_kj.mean()) < float(delta_ik.mean()):
        raise ConfigError(
            f"monitoring costs must exceed delegation costs on average: "
            f"mean delta_kj={delta_kj.mean():.4f} < mean delta_ik={delta_ik.mean():.4f}")

    # totals[i, k, j] = delta_ik[i, k] + delta_kj[k, j]
    totals = delta_ik[:, :, None] + delta_kj[None, :, :]
    c_matrix = -logsumexp(-totals, axis=1)
    if np.any(c_matrix <= 0):
        i, j = np.unravel_index(int(np.argmin(c_matrix)), c_matrix.shape)
        raise ConfigError(
            f"composite cost is not strictly positive at dyad ({iso[i]}, {iso[j]}): "
            f"C={c_matrix[i, j]:.4f}; adjust the cost generator coefficients")

    s_j = np.sum(m[:, None] * np.exp((mu[:, None] - 2.0 * np.sqrt(config.b * c_matrix)) / config.sigma),
                 axis=0)
    costs = CostStructure(countries=tuple(iso), delta_ik=delta_ik, delta_kj=delta_kj)
    return World(config=config, iso=tuple(iso), utc_offsets=offsets, lat=lat, lon=lon,
                 dist_km=dist, wh=wh, m=m, mu=mu, costs=costs, c_matrix=c_matrix, s_j=s_j)


@dataclass
class SimOutput:
    """Simulated chain microdata plus the generating truth."""

    world: World
    records: pd.DataFrame = field(repr=False)  # parent_id, iso_i, iso_k, iso_j, slot
    truth: dict = field(repr=False)


def simulate_world(config: WorldConfig) -> SimOutput:
    """Run the control auctions and location choices for every target slot.

    Per destination country j (its own random substream), for each of the
    `targets_per_destination` slots: each origin's best parent valuation is
    drawn in one shot via the Gumbel max property (location μ_i + σ·ln m_i,
    scale σ) net of 2√(b·C_ij); the winning origin's middleman country is
    the Gumbel-perturbed argmin of the per-link cost totals; the winning
    parent index is uniform among the origin's parents. The two stochastic
    stages deliberately draw actual perturbations rather than sampling the
    closed-form probabilities, so the closed forms can be tested against
    the simulation.
    """
    world = build_world(config)
    n = len(world.iso)
    t_slots = config.targets_per_destination
    ss = np.random.SeedSequence(config.seed)
    children = ss.spawn(1 + n)  # child 0 regenerates geography; 1..n drive destinations
    locs = world.mu + config.sigma * np.log(world.m)

    frames = []
    for j in range(n):
        rng = np.random.default_rng(children[1 + j])
        gumbels = rng.gumbel(0.0, 1.0, size=(t_slots, n))
        handicap = 2.0 * np.sqrt(config.b * world.c_matrix[:, j])
        values = locs[None, :] + config.sigma * gumbels - handicap[None, :]
        winner = np.argmax(values, axis=1)

        eps = rng.gumbel(0.0, 1.0, size=(t_slots, n))
        route = world.costs.delta_ik[winner, :] + world.costs.delta_kj[:, j][None, :]
        k_idx = np.argmax(-route + EPSILON_SCALE * eps, axis=1)

        u = rng.random(t_slots)
        parent_idx = np.floor(u * world.m[winner]).astype(np.int64)

        iso = np.array(world.iso)
        frames.append(pd.DataFrame({
            "parent_id": [f"P_{iso[w]}_{p}" for w, p in zip(winner, parent_idx)],
            "iso_i": iso[winner],
            "iso_k": iso[k_idx],
            "iso_j": iso[np.full(t_slots, j)],
            "slot": np.arange(t_slots, dtype=np.int64),
        }))
    records = pd.concat(frames, ignore_index=True)

    truth = {
        "beta": config.d1_wh_ik,
        "rho": config.d1_wh_kj,
        "theta": config.theta,
        "triangular_coefficients": {
            "wh_ik": config.d1_wh_ik,
            "wh_kj": config.d1_wh_kj,
            "log_dist_ik": -config.d2_logdist_ik,
            "log_dist_kj": -config.d2_logdist_kj,
        },
        "m": {iso: int(v) for iso, v in zip(world.iso, world.m)},
        "mu": {iso: float(v) for iso, v in zip(world.iso, world.mu)},
        "c_true": [{"iso_i": oi, "iso_j": dj, "c": float(world.c_matrix[i, j])}
                   for i, oi in enumerate(world.iso) for j, dj in enumerate(world.iso)],
        "s_j": {iso: float(v) for iso, v in zip(world.iso, world.s_j)},
        "config": asdict(config),
    }
    return SimOutput(world=world, records=records, truth=truth)


def sim_to_equity_graph(sim: SimOutput):
    """Materialize the simulated chains as an equity graph.

    Each record becomes parent →(100%) middleman →(100%) target, with the
    middleman incorporated in the chosen middleman country; firm ids encode
    the destination and slot so they are unique and reproducible.
    """
    from .graph import EquityEdge, EquityGraph, Firm

    firms: dict[str, Firm] = {}
    edges: list[EquityEdge] = []
    for rec in sim.records.itertuples(index=False):
        if rec.parent_id not in firms:
            firms[rec.parent_id] = Firm(rec.parent_id, rec.iso_i)
        mid_id = f"M_{rec.iso_j}_{rec.slot}"
        fin_id = f"F_{rec.iso_j}_{rec.slot}"
        firms[mid_id] = Firm(mid_id, rec.iso_k)
        firms[fin_id] = Firm(fin_id, rec.iso_j)
        edges.append(EquityEdge(rec.parent_id, mid_id, 100.0))
        edges.append(EquityEdge(mid_id, fin_id, 100.0))
    return EquityGraph(firms, edges)
