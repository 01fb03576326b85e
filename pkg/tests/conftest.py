"""Shared fixtures: random graph generation and a small simulated corpus."""
from __future__ import annotations

import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ownchains import (
    EquityEdge,
    EquityGraph,
    Firm,
    WorldConfig,
    simulate_world,
)

COUNTRY_POOL = ["US", "DE", "FR", "NL", "GB", "JP", "CN", "BR"]
SECTOR_POOL = [None, "31", "52", "64", "70"]


def random_equity_graph(rng: random.Random, max_firms: int = 30) -> EquityGraph:
    """A random graph whose per-target share sums never exceed 100.

    Sizes skew small (geometric-ish) so the corpus covers many topologies;
    shares are allocated by carving each firm's incoming 100% budget into a
    random number of stakes, some of which go unassigned.
    """
    n = 1 + min(max_firms - 1, int(rng.expovariate(1 / 6.0)))
    firms = [
        Firm(f"F{i:02d}", rng.choice(COUNTRY_POOL), rng.choice(SECTOR_POOL))
        for i in range(n)
    ]
    ids = [f.id for f in firms]
    edges: list[EquityEdge] = []
    for target in ids:
        if rng.random() < 0.15:
            continue  # firm with no shareholders at all
        budget = 100.0
        holders = rng.sample([i for i in ids if i != target],
                             k=min(rng.randint(1, 4), n - 1)) if n > 1 else []
        for holder in holders:
            if budget <= 1.0:
                break
            share = round(rng.uniform(1.0, budget), 4)
            # sometimes deliberately park a stake at exactly the majority line
            if rng.random() < 0.05 and budget >= 50.0:
                share = 50.0
            edges.append(EquityEdge(holder, target, share))
            budget -= share
    return EquityGraph({f.id: f for f in firms}, edges)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240817)


@pytest.fixture(scope="session")
def small_world_config() -> WorldConfig:
    return WorldConfig(n_countries=6, targets_per_destination=300, seed=11,
                       m_min=30, m_max=80)


@pytest.fixture(scope="session")
def small_sim(small_world_config):
    return simulate_world(small_world_config)


@pytest.fixture(scope="session")
def sim_artifacts(tmp_path_factory, small_world_config):
    """One simulated corpus written to disk for CLI-level tests."""
    out = tmp_path_factory.mktemp("simout")
    from ownchains.cli import main

    cfg = out / "world.toml"
    cfg.write_text(
        "n_countries = 6\n"
        "targets_per_destination = 300\n"
        "seed = 11\n\n"
        "[auction]\nm_min = 30\nm_max = 80\n"
    )
    rc = main(["simulate", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    return out
