import numpy as np
import pytest

from rbdm.core import build_linear_growth, diffuse_linear_growth
from rbdm.diagnostics import rank_events, split_rhat, summarize
from rbdm.gibbs import ChainOutput, HyperParams, run_gibbs
from rbdm.kalman import VarianceSequences, ffbs_sample, kalman_filter
from rbdm.synthetic import generate_synthetic

from conftest import CPI_LEVEL_WEIGHTS, EAI_LEVEL_WEIGHTS, monthly


def fake_chain(theta, omega_y=None, omega_theta=None):
    theta = np.asarray(theta, float)
    S, T1, n = theta.shape
    T = T1 - 1
    return ChainOutput(
        theta=theta,
        omega_y=np.ones((S, T)) if omega_y is None else np.asarray(omega_y, float),
        omega_theta=np.ones((S, T, n)) if omega_theta is None else np.asarray(omega_theta, float),
        lambda_y=np.ones(S), lambda_theta=np.ones((S, n)), rho_y=np.ones(S),
        rho_theta=np.ones((S, n)), hyper=HyperParams())


@pytest.fixture
def series():
    return monthly([1.0, 2.0, 2.5, 4.0, 5.5, 6.0])


def test_unit_weights_flag_nothing(series, rng):
    chain = fake_chain(rng.normal(size=(50, 7, 2)))
    s = summarize(chain, series, 0.95, 0.5)
    assert s.events == []


def test_table_value_flagged_as_level_break(series):
    om = np.ones((4, 6, 2))
    om[:, 3, 0] = 0.07095877
    s = summarize(fake_chain(np.zeros((4, 7, 2)), omega_theta=om), series)
    assert len(s.events) == 1
    ev = s.events[0]
    assert ev.kind == "level break" and ev.rank == 1
    assert ev.timestamp == "1980-04" and ev.t == 4
    assert ev.omega_mean == pytest.approx(0.07095877)


def test_degenerate_chain_collapses_intervals(series):
    path = np.arange(14, dtype=float).reshape(7, 2)
    s = summarize(fake_chain(np.repeat(path[None], 30, axis=0)), series)
    np.testing.assert_allclose(s.level_lo, s.level_mean)
    np.testing.assert_allclose(s.level_hi, s.level_mean)
    np.testing.assert_allclose(s.slope_hi, s.slope_mean)
    np.testing.assert_allclose(s.level_mean, path[1:, 0])


def test_interval_contains_mean_and_widens(series, rng):
    chain = fake_chain(rng.normal(size=(400, 7, 2)))
    prev = None
    for level in (0.5, 0.8, 0.95, 0.99):
        s = summarize(chain, series, level)
        assert np.all(s.level_lo <= s.level_mean) and np.all(s.level_mean <= s.level_hi)
        width = np.r_[s.level_hi - s.level_lo, s.slope_hi - s.slope_lo]
        if prev is not None:
            assert np.all(width > prev)
        prev = width


def test_residuals_use_posterior_mean(series, rng):
    theta = rng.normal(size=(20, 7, 2))
    s = summarize(fake_chain(theta), series)
    np.testing.assert_allclose(s.residuals, series.values - theta[:, 1:, 0].mean(0))


def test_every_family_reported(series):
    om_y = np.ones((3, 6))
    om_y[:, 2] = 0.1
    om_t = np.ones((3, 6, 2))
    om_t[:, 2, 0] = 0.2
    om_t[:, 5, 1] = 0.3
    s = summarize(fake_chain(np.zeros((3, 7, 2)), om_y, om_t), series)
    kinds = {(e.kind, e.t) for e in s.events}
    assert kinds == {("observational outlier", 3), ("level break", 3), ("slope break", 6)}


def test_summarize_rejects_bad_input(series):
    chain = fake_chain(np.zeros((3, 7, 2)))
    with pytest.raises(ValueError):
        summarize(fake_chain(np.zeros((0, 7, 2))), series)
    with pytest.raises(ValueError):
        summarize(chain, series, level=1.0)
    with pytest.raises(ValueError):
        summarize(chain, series, threshold=0.0)


def test_rank_events_ties_and_truncation(series):
    om = np.ones((2, 6, 2))
    om[:, [1, 4], 0] = 0.3   # tie: earlier timestamp first
    om[:, 2, 0] = 0.1
    s = summarize(fake_chain(np.zeros((2, 7, 2)), omega_theta=om), series)
    ranked = rank_events(s, 3)["level"]
    assert [r.t for r in ranked] == [3, 2, 5]
    assert [r.rank for r in ranked] == [1, 2, 3]
    assert len(rank_events(s, 50)["level"]) == 6
    assert rank_events(s, 1)["level"][0].omega_mean == pytest.approx(0.1)
    with pytest.raises(ValueError):
        rank_events(s, 0)


def test_noise_free_residuals_vanish():
    T = 30
    spec = build_linear_growth((1.0, 0.05), np.eye(2) * 1e4)
    y = 1.0 + 0.05 * np.arange(1, T + 1) + 0.002 * np.arange(1, T + 1) ** 2
    s = monthly(y)
    v = VarianceSequences.constant(T, 1e-14, [1e-6, 1e-6])
    filt = kalman_filter(spec, y, v)
    rng = np.random.default_rng(0)
    theta = np.stack([ffbs_sample(filt, spec, rng) for _ in range(50)])
    summary = summarize(fake_chain(theta), s)
    assert np.max(np.abs(summary.residuals)) < 1e-6


def test_reported_weights_all_below_default_threshold():
    values = list(CPI_LEVEL_WEIGHTS.values()) + list(EAI_LEVEL_WEIGHTS.values())
    assert len(values) == 26
    assert max(values) == pytest.approx(0.4912573)
    assert all(v < 0.5 for v in values)


def test_table_shaped_ranking(rng):
    # weights shaped like the CPI table: twelve low months in a long series
    T = 60
    means = np.ones(T)
    low = rng.choice(T, 12, replace=False)
    means[low] = sorted(CPI_LEVEL_WEIGHTS.values())
    om = np.ones((2, T, 2))
    om[:, :, 0] = means
    s = summarize(fake_chain(np.zeros((2, T + 1, 2)), omega_theta=om),
                  monthly(np.arange(T, dtype=float)))
    top = rank_events(s, 12)["level"]
    assert sorted(r.t - 1 for r in top) == sorted(low)
    assert top[0].omega_mean == pytest.approx(0.07095877)
    assert all(r.flagged for r in top)


def test_split_rhat():
    rng = np.random.default_rng(1)
    assert split_rhat([rng.normal(size=4000)]) == pytest.approx(1.0, abs=0.01)
    drift = np.r_[rng.normal(size=500), rng.normal(size=500) + 5]
    assert split_rhat([drift]) > 1.5


@pytest.mark.slow
def test_level_shift_found_by_rank():
    hits = 0
    for seed in range(20):
        s, truth = generate_synthetic("level-shift", 120, seed=seed)
        out = run_gibbs(diffuse_linear_growth(s), s,
                        HyperParams(n_iter=3000, n_burn=1000, seed=1000 + seed))
        top = rank_events(summarize(out, s), 1)["level"][0]
        hits += top.t == truth["t_star"]
    assert hits >= 19
