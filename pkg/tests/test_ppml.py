"""Poisson estimator with absorbed fixed effects: closed forms, oracle
agreement, robust errors, cost recovery, and the two-step elasticity fit."""
from __future__ import annotations

import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ownchains import (
    CoverageError,
    EmptyModelError,
    EstimationError,
    InferenceError,
    NormalizationError,
    ParameterError,
    PredictionError,
    RegressionSpec,
    cluster_se,
    drop_separated,
    fit_bilateral,
    fit_ppml,
    poisson_deviance,
    recover_cij,
)
from oracles import (
    clustered_vcov,
    drop_separated_rows,
    dummy_design,
    newton_poisson,
)


def rng(seed=0):
    return np.random.default_rng(seed)


def random_instance(seed, n_max=200, with_cluster=True):
    """A Poisson data set with two continuous regressors and two factors."""
    r = rng(seed)
    n = int(r.integers(40, n_max + 1))
    g1 = r.integers(0, max(2, n // 12), size=n)
    g2 = r.integers(0, max(2, n // 15), size=n)
    x1 = r.normal(size=n)
    x2 = r.normal(size=n)
    eta = 0.4 * x1 - 0.7 * x2 + 0.3 * g1 % 1.7 - 0.2 * (g2 % 3)
    y = r.poisson(np.exp(eta - eta.mean()))
    df = pd.DataFrame({
        "y": y.astype(float), "x1": x1, "x2": x2,
        "f1": [f"a{v}" for v in g1], "f2": [f"b{v}" for v in g2],
    })
    if with_cluster:
        df["cl"] = [f"c{v % 7}" for v in g1]
    return df


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def test_intercept_only_returns_log_mean():
    y = np.array([0.0, 1.0, 2.0, 5.0])
    df = pd.DataFrame({"y": y})
    fit = fit_ppml(df, RegressionSpec("y", ()))
    assert abs(fit.coefficients["intercept"] - math.log(2.0)) < 1e-10
    assert fit.n_obs == 4


def test_binary_regressor_log_ratio():
    df = pd.DataFrame({"y": [1.0, 3.0, 4.0, 16.0], "x": [0.0, 0.0, 1.0, 1.0]})
    fit = fit_ppml(df, RegressionSpec("y", ("x",)))
    assert abs(fit.coefficients["x"] - math.log(10.0 / 2.0)) < 1e-10
    assert abs(fit.coefficients["intercept"] - math.log(2.0)) < 1e-10


def test_single_fixed_effect_equals_group_log_means():
    df = pd.DataFrame({"y": [1.0, 3.0, 10.0, 30.0],
                       "g": ["a", "a", "b", "b"]})
    fit = fit_ppml(df, RegressionSpec("y", (), fixed_effects=("g",)))
    fe = fit.fixed_effect_values["g"]
    assert abs(fe["a"] - math.log(2.0)) < 1e-7
    assert abs(fe["b"] - math.log(20.0)) < 1e-7


def test_fitted_totals_match_observed_in_fe_model():
    df = random_instance(3)
    fit = fit_ppml(df, RegressionSpec("y", ("x1", "x2"), fixed_effects=("f1", "f2")))
    kept, _ = drop_separated(df, "y", ("f1", "f2"))
    mu = fit.fitted_values()
    assert math.isclose(float(mu.sum()), float(kept["y"].sum()), rel_tol=1e-9)
    # per-level totals match too (score orthogonality of the dummies)
    joined = kept.assign(mu=mu.to_numpy())
    for f in ("f1", "f2"):
        per = joined.groupby(f)[["y", "mu"]].sum()
        assert np.allclose(per["y"], per["mu"], rtol=1e-8)


def test_outcome_scaling_invariance_small():
    df = random_instance(11)
    spec = RegressionSpec("y", ("x1", "x2"), fixed_effects=("f1",))
    base = fit_ppml(df, spec)
    scaled = fit_ppml(df.assign(y=df["y"] * 7.0), spec)
    for k in ("x1", "x2"):
        assert abs(base.coefficients[k] - scaled.coefficients[k]) < 1e-8


# ---------------------------------------------------------------------------
# Dummy-matrix Newton oracle
# ---------------------------------------------------------------------------

def oracle_fit(df, regressors, factors, offset=None, cluster=None):
    kept = drop_separated_rows(df, "y", list(factors))
    X, names = dummy_design(kept, list(regressors), list(factors))
    off = kept[offset].to_numpy(dtype=float) if offset else None
    beta = newton_poisson(kept["y"].to_numpy(dtype=float), X, off)
    out = dict(zip(names, beta))
    if cluster is None:
        return kept, out, None
    V = clustered_vcov(kept["y"].to_numpy(dtype=float), X, beta,
                       kept[cluster].to_numpy(), off)
    se = {nm: math.sqrt(V[i, i]) for i, nm in enumerate(names)}
    return kept, out, se


def test_two_factor_fit_matches_dummy_newton():
    df = random_instance(21)
    fit = fit_ppml(df, RegressionSpec("y", ("x1", "x2"),
                                      fixed_effects=("f1", "f2"), cluster="cl"))
    _, beta, se = oracle_fit(df, ("x1", "x2"), ("f1", "f2"), cluster="cl")
    for k in ("x1", "x2"):
        assert abs(fit.coefficients[k] - beta[k]) < 1e-7
        assert abs(fit.se[k] - se[k]) < 1e-7


def test_offset_fit_matches_dummy_newton():
    df = random_instance(33)
    df["off"] = np.log1p(np.arange(len(df)) % 5 + 1.0)
    fit = fit_ppml(df, RegressionSpec("y", ("x1",), fixed_effects=("f1",),
                                      offset="off"))
    _, beta, _ = oracle_fit(df, ("x1",), ("f1",), offset="off")
    assert abs(fit.coefficients["x1"] - beta["x1"]) < 1e-7


def test_drop_separated_matches_oracle():
    df = random_instance(5)
    got, n_dropped = drop_separated(df, "y", ("f1", "f2"))
    want = drop_separated_rows(df, "y", ["f1", "f2"])
    assert got.index.tolist() == want.index.tolist()
    assert n_dropped == len(df) - len(want)
    # idempotent
    again, _ = drop_separated(got, "y", ("f1", "f2"))
    assert again.index.tolist() == got.index.tolist()


# ---------------------------------------------------------------------------
# Robust errors
# ---------------------------------------------------------------------------

def test_cluster_se_invariant_to_within_cluster_duplication():
    # duplicating every row within its cluster doubles the information in
    # the classical sense but leaves the cluster sandwich unchanged
    df = random_instance(8)
    spec = RegressionSpec("y", ("x1", "x2"), fixed_effects=("f1",), cluster="cl")
    base = fit_ppml(df, spec)
    doubled = fit_ppml(pd.concat([df, df], ignore_index=True), spec)
    for k in ("x1", "x2"):
        assert abs(base.coefficients[k] - doubled.coefficients[k]) < 1e-8
        assert abs(base.se[k] - doubled.se[k]) < 1e-8


def test_cluster_se_helper_matches_fit():
    df = random_instance(13)
    fit = fit_ppml(df, RegressionSpec("y", ("x1",), fixed_effects=("f1",),
                                      cluster="cl"))
    _, se = cluster_se(fit, "cl")
    assert abs(se["x1"] - fit.se["x1"]) < 1e-12


def test_single_cluster_rejected():
    df = random_instance(2)
    df["one"] = "same"
    with pytest.raises(InferenceError):
        fit_ppml(df, RegressionSpec("y", ("x1",), cluster="one"))


# ---------------------------------------------------------------------------
# Degenerate inputs
# ---------------------------------------------------------------------------

def test_all_zero_outcome_rejected():
    df = pd.DataFrame({"y": [0.0, 0.0], "x": [0.0, 1.0]})
    with pytest.raises(EmptyModelError):
        fit_ppml(df, RegressionSpec("y", ("x",)))


def test_separated_levels_dropped_and_reported():
    df = pd.DataFrame({
        "y": [2.0, 3.0, 0.0, 0.0, 1.0],
        "x": [0.1, 0.2, 0.3, 0.4, 0.5],
        "g": ["a", "a", "dead", "dead", "b"],
    })
    fit = fit_ppml(df, RegressionSpec("y", ("x",), fixed_effects=("g",)))
    assert fit.dropped_separated == 2
    assert fit.n_obs == 3
    assert "dead" not in fit.fixed_effect_values["g"]


def test_collinear_regressor_dropped_keep_first():
    df = random_instance(4, with_cluster=False)
    df["x3"] = 2.0 * df["x1"] - 1.0 * df["x2"]
    fit = fit_ppml(df, RegressionSpec("y", ("x1", "x2", "x3")))
    assert fit.dropped_collinear == ("x3",)
    assert "x3" not in fit.coefficients
    ref = fit_ppml(df, RegressionSpec("y", ("x1", "x2")))
    assert abs(fit.coefficients["x1"] - ref.coefficients["x1"]) < 1e-10


def test_regressor_collinear_with_fixed_effect_dropped():
    df = random_instance(6, with_cluster=False)
    level_value = {lv: i * 0.5 for i, lv in enumerate(sorted(df["f1"].unique()))}
    df["xfe"] = df["f1"].map(level_value)
    fit = fit_ppml(df, RegressionSpec("y", ("x1", "xfe"), fixed_effects=("f1",)))
    assert fit.dropped_collinear == ("xfe",)


def test_negative_outcome_rejected():
    df = pd.DataFrame({"y": [1.0, -1.0], "x": [0.0, 1.0]})
    with pytest.raises(Exception, match="negative"):
        fit_ppml(df, RegressionSpec("y", ("x",)))


def test_spec_validation():
    with pytest.raises(ParameterError):
        RegressionSpec("y", ("x", "x"))
    with pytest.raises(ParameterError):
        RegressionSpec("y", ("x",), fixed_effects=("x",))


# ---------------------------------------------------------------------------
# Properties
# ---------------------------------------------------------------------------

@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=25, deadline=None)
def test_score_orthogonality(seed):
    df = random_instance(seed, n_max=120, with_cluster=False)
    fit = fit_ppml(df, RegressionSpec("y", ("x1", "x2"), fixed_effects=("f1",)))
    score = fit.score_residuals().sum(axis=0)
    scale = float(fit.fitted_values().sum())
    assert np.all(np.abs(score) <= 1e-6 * max(scale, 1.0))


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=15, deadline=None)
def test_deviance_equals_final_fit(seed):
    df = random_instance(seed, n_max=100, with_cluster=False)
    fit = fit_ppml(df, RegressionSpec("y", ("x1",), fixed_effects=("f1",)))
    kept, _ = drop_separated(df, "y", ("f1",))
    dev = poisson_deviance(kept["y"].to_numpy(dtype=float),
                           fit.fitted_values().to_numpy())
    assert math.isclose(dev, fit.deviance, rel_tol=1e-9, abs_tol=1e-9)


# ---------------------------------------------------------------------------
# Prediction
# ---------------------------------------------------------------------------

def test_predict_matches_fitted():
    df = random_instance(17, with_cluster=False)
    fit = fit_ppml(df, RegressionSpec("y", ("x1", "x2"), fixed_effects=("f1",)))
    kept, _ = drop_separated(df, "y", ("f1",))
    pred = fit.predict(kept)
    assert np.allclose(pred, fit.fitted_values(), rtol=1e-10)


def test_predict_unseen_level_policies():
    df = pd.DataFrame({"y": [1.0, 2.0, 3.0, 6.0],
                       "x": [0.0, 1.0, 0.0, 1.0],
                       "g": ["a", "a", "b", "b"]})
    fit = fit_ppml(df, RegressionSpec("y", ("x",), fixed_effects=("g",)))
    new = pd.DataFrame({"x": [0.0], "g": ["zz"]})
    with pytest.raises(PredictionError):
        fit.predict(new, unseen="error")
    # reference policy: the unseen level contributes no fixed-effect term
    got = float(fit.predict(new, unseen="reference").iloc[0])
    assert math.isclose(got, 1.0, rel_tol=1e-9)  # exp(0·β + 0)… intercept-free
    # a frame without the factor column entirely gets the same treatment
    bare = fit.predict(pd.DataFrame({"x": [0.0]}), unseen="reference")
    assert math.isclose(float(bare.iloc[0]), got, rel_tol=1e-12)


# ---------------------------------------------------------------------------
# Dyad-cost recovery from fixed effects
# ---------------------------------------------------------------------------

def cost_fixture():
    # group means 4, 0.5, 3 → fixed effects ln4, ln0.5 (negative), ln3
    return pd.DataFrame({
        "m_ikj": [5.0, 3.0, 0.4, 0.6, 4.0, 2.0],
        "dyad_ij": ["US:DE", "US:DE", "US:JP", "US:JP", "DE:JP", "DE:JP"],
    })


def test_recover_cij_shift_normalization():
    df = cost_fixture()
    fit = fit_ppml(df, RegressionSpec("m_ikj", (), fixed_effects=("dyad_ij",)))
    table = recover_cij(fit, normalization="shift", floor=0.01)
    vals = table.table.set_index(["iso_i", "iso_j"])["c_hat"]
    raw = {("US", "DE"): math.log(4.0), ("US", "JP"): math.log(0.5),
           ("DE", "JP"): math.log(3.0)}
    shift = 0.01 - min(raw.values())  # raises the negative minimum to the floor
    for key, r in raw.items():
        assert math.isclose(vals.loc[key], r + shift, rel_tol=1e-6)
    assert math.isclose(table.shift, shift, rel_tol=1e-6)
    assert table.normalization == "shift"
    assert math.isclose(table.lookup()[("US", "DE")], raw[("US", "DE")] + shift,
                        rel_tol=1e-6)
    assert min(vals) == pytest.approx(0.01, abs=1e-8)


def test_recover_cij_shift_noop_when_already_positive():
    df = cost_fixture()
    df["m_ikj"] = df["m_ikj"] * 10.0  # all log group means comfortably > 0.01
    fit = fit_ppml(df, RegressionSpec("m_ikj", (), fixed_effects=("dyad_ij",)))
    table = recover_cij(fit, normalization="shift")
    assert table.shift == 0.0


def test_recover_cij_reference_normalization():
    df = cost_fixture()
    fit = fit_ppml(df, RegressionSpec("m_ikj", (), fixed_effects=("dyad_ij",)))
    table = recover_cij(fit, normalization="reference", reference=("US", "JP"))
    vals = table.table.set_index(["iso_i", "iso_j"])["c_hat"]
    assert math.isclose(vals.loc[("US", "JP")], 0.0, abs_tol=1e-12)
    assert math.isclose(vals.loc[("US", "DE")], math.log(4.0) - math.log(0.5),
                        rel_tol=1e-6)
    with pytest.raises(ParameterError):
        recover_cij(fit, normalization="reference", reference=("XX", "YY"))
    with pytest.raises(ParameterError):
        recover_cij(fit, normalization="reference")


# ---------------------------------------------------------------------------
# Two-step elasticity fit
# ---------------------------------------------------------------------------

def bilateral_fixture(theta=1.5, seed=7, n_countries=8):
    r = rng(seed)
    iso = [f"C{i}" for i in range(n_countries)]
    c = {}
    rows = []
    for i in iso:
        for j in iso:
            cost = float(r.uniform(0.2, 3.0))
            c[(i, j)] = cost
            lam = math.exp(2.0 - theta * math.sqrt(cost)
                           + 0.3 * (hash(i) % 5) / 5.0 + 0.2 * (hash(j) % 7) / 7.0)
            rows.append({"iso_i": i, "iso_j": j, "dyad": f"{i}:{j}",
                         "count": float(r.poisson(lam))})
    design = pd.DataFrame(rows)
    return design, c


def test_fit_bilateral_recovers_theta():
    design, c = bilateral_fixture(theta=1.5)
    res = fit_bilateral(design, c)
    assert res.theta_hat == pytest.approx(1.5, abs=3.0 * res.theta_se)
    # the reported elasticity is the negated regression coefficient
    assert math.isclose(res.theta_hat, -res.fit.coefficients["sqrt_c"],
                        rel_tol=1e-12)


def test_fit_bilateral_negative_cost_rejected():
    design, c = bilateral_fixture()
    c[("C0", "C1")] = -0.2
    with pytest.raises(NormalizationError):
        fit_bilateral(design, c)


def test_fit_bilateral_missing_cost_for_positive_count():
    design, c = bilateral_fixture()
    key = next(k for k in c if design.loc[(design.iso_i == k[0]) &
                                          (design.iso_j == k[1]), "count"].iloc[0] > 0)
    del c[key]
    with pytest.raises(CoverageError):
        fit_bilateral(design, c)


def test_fit_bilateral_accepts_cost_table_object():
    # three dyads saturate the two fixed-effect factors, so the cost term is
    # collinear: the fit must warn and report an unidentified elasticity
    df = cost_fixture()
    fe_fit = fit_ppml(df, RegressionSpec("m_ikj", (), fixed_effects=("dyad_ij",)))
    table = recover_cij(fe_fit, normalization="shift")
    design = pd.DataFrame({
        "iso_i": ["US", "US", "DE"], "iso_j": ["DE", "JP", "JP"],
        "dyad": ["US:DE", "US:JP", "DE:JP"], "count": [4.0, 1.0, 3.0],
    })
    with pytest.warns(UserWarning, match="collinear"):
        res = fit_bilateral(design, table)
    assert res.fit.n_obs == 3
    assert res.theta_hat is None and res.theta_se is None
