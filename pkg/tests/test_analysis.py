import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import jcsearch.analysis as analysis
from jcsearch.analysis import (
    RwaPrediction,
    ScalingFit,
    find_peak,
    fit_sqrt_scaling,
    leakage_profile,
    max_rwa_deviation,
    per_sector_rwa,
    rwa_probabilities,
    scaling_study,
    sector_averaged_rwa,
    sweep_levels,
)
from jcsearch.dynamics import ProbabilityTrace, run_search
from jcsearch.errors import InvalidConfiguration, InvalidState, NoPeak, ScalingFailure
from jcsearch.model import PhotonDistribution, SearchConfig


def ideal_trace(N, times, j=1, s=2, lam=1.0):
    pred = RwaPrediction.from_levels(N, lam)
    c2, s2 = rwa_probabilities(pred, times)
    P = np.zeros((len(times), N))
    P[:, j - 1], P[:, s - 1] = c2, s2
    return ProbabilityTrace(np.asarray(times, float), P, P.sum(axis=1), j, s, pred.tau)


def test_rwa_prediction_numbers():
    pred = RwaPrediction.from_levels(50)
    assert pred.Omega == pytest.approx(1 / math.sqrt(50))
    assert pred.tau == pytest.approx(math.pi / 2 * math.sqrt(50))
    assert pred.tau == pytest.approx(11.107207345, rel=1e-10)
    assert pred.period == pytest.approx(4 * pred.tau)
    assert RwaPrediction.from_levels(50, 2.0).tau == pytest.approx(pred.tau / 2)


def test_rwa_endpoints():
    pred = RwaPrediction.from_levels(50)
    assert rwa_probabilities(pred, 0.0) == (1.0, 0.0)
    c2, s2 = rwa_probabilities(pred, pred.tau)
    assert c2 == pytest.approx(0, abs=1e-15) and s2 == pytest.approx(1)


@settings(max_examples=200)
@given(st.integers(2, 10**6), st.floats(0.01, 100), st.floats(0, 1e6))
def test_rwa_sum_is_one(N, lam, t):
    c2, s2 = rwa_probabilities(RwaPrediction.from_levels(N, lam), t)
    assert c2 + s2 == 1.0


@settings(max_examples=100)
@given(st.integers(0, 40), st.floats(0, 1e4))
def test_per_sector_norm(k, t):
    cfg = SearchConfig.create(10, 2, 7, 1e3)
    bj, bs = per_sector_rwa(cfg, k, t)
    assert abs(bj) ** 2 + abs(bs) ** 2 == pytest.approx(1, abs=1e-15)


def test_per_sector_vacuum_rabi():
    cfg = SearchConfig.create(10, 2, 7, 1e3)
    assert per_sector_rwa(cfg, 3, 0.0) == (1.0, 0.0)
    half_period = math.pi / (cfg.omega0 / 2)  # |b_s|^2 = sin^2(omega0 t / 2) returns to 0
    bj, bs = per_sector_rwa(cfg, 0, half_period)
    assert abs(bs) < 1e-14 and abs(bj) == pytest.approx(1)
    bj, bs = per_sector_rwa(cfg, 0, half_period / 2)
    assert abs(bs) == pytest.approx(1)
    with pytest.raises(InvalidConfiguration):
        per_sector_rwa(cfg, -1, 0.0)


def test_sector_average_single_photon_number():
    cfg = SearchConfig.create(10, 2, 7, 1e3, photons=PhotonDistribution.uniform(3, 3))
    t = np.linspace(0, 100, 7)
    assert np.allclose(sector_averaged_rwa(cfg, t), np.abs(per_sector_rwa(cfg, 3, t)[1]) ** 2)


def test_find_peak_on_analytic_trace():
    t_peak, p_peak = find_peak(ideal_trace(50, np.linspace(0, 25, 2001)), 2)
    assert t_peak == pytest.approx(11.107207345, abs=1e-5)
    assert p_peak == pytest.approx(1.0, abs=1e-9)


def test_find_peak_flat_trace():
    trace = ideal_trace(50, np.linspace(0, 25, 100))
    trace.P[:] = 0.0
    with pytest.raises(NoPeak):
        find_peak(trace, 2)


def test_find_peak_empty_trace():
    empty = ProbabilityTrace(np.zeros(0), np.zeros((0, 3)), np.zeros(0), 1, 2, 1.0)
    with pytest.raises(InvalidState):
        find_peak(empty, 2)


@pytest.mark.parametrize("n", [40, 80, 160])
def test_peak_error_shrinks_with_sampling(n):
    # coarse, unaligned grid: the parabolic vertex still lands within O(dt^2)
    tau = RwaPrediction.from_levels(50).tau
    times = np.linspace(0.0, 2.3 * tau, n)
    t_peak, p_peak = find_peak(ideal_trace(50, times), 2)
    dt = times[1]
    assert abs(t_peak - tau) < 0.1 * dt**2
    assert 1 - 1e-3 * dt**2 < p_peak <= 1 + 1e-3 * dt**2


def test_peak_with_uneven_spacing():
    tau = RwaPrediction.from_levels(50).tau
    times = np.sort(np.concatenate([np.linspace(0, tau - 0.3, 30), [tau + 0.1, tau + 0.7, 2 * tau]]))
    t_peak, _ = find_peak(ideal_trace(50, times), 2)
    assert t_peak == pytest.approx(tau, abs=0.05)


def test_peak_on_last_sample_unrefined():
    times = np.linspace(0, 10, 50)
    trace = ideal_trace(50, times)
    t_peak, p_peak = find_peak(trace, 2)
    assert t_peak == times[-1] and p_peak == trace.P_s[-1]


def test_leakage_zero_for_ideal():
    trace = ideal_trace(50, np.linspace(0, 25, 500))
    cfg = SearchConfig.create(50, 1, 2, 1e4)
    assert leakage_profile(trace, cfg) == 0.0


def test_leakage_needs_full_window():
    trace = ideal_trace(50, np.linspace(0, 5, 50))
    with pytest.raises(InvalidState):
        leakage_profile(trace, SearchConfig.create(50, 1, 2, 1e4))


def test_rwa_deviation_zero_for_ideal():
    trace = ideal_trace(50, np.linspace(0, 25, 500))
    assert max_rwa_deviation(trace, RwaPrediction.from_levels(50)) < 1e-15


@pytest.mark.parametrize("lam", [1.0, 2.0, 0.3])
def test_fit_on_perfect_points(lam):
    Ns = [10, 20, 30, 50, 80]
    fit = fit_sqrt_scaling([(N, RwaPrediction.from_levels(N, lam).tau) for N in Ns])
    assert isinstance(fit, ScalingFit)
    assert fit.slope == pytest.approx(math.pi / (2 * lam), rel=1e-12)
    assert fit.intercept == pytest.approx(0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1, abs=1e-12)


def test_doubling_lambda_halves_slope():
    Ns = [10, 20, 30, 50, 80]
    one = fit_sqrt_scaling([(N, RwaPrediction.from_levels(N, 1.0).tau) for N in Ns])
    two = fit_sqrt_scaling([(N, RwaPrediction.from_levels(N, 2.0).tau) for N in Ns])
    assert two.slope == pytest.approx(one.slope / 2, rel=1e-12)


def test_fit_needs_five_points():
    with pytest.raises(InvalidConfiguration):
        fit_sqrt_scaling([(N, 1.0) for N in (2, 3, 4, 5)])


@pytest.mark.parametrize("N, j, s", [(2, 1, 2), (3, 1, 2), (10, 2, 7), (50, 10, 34), (80, 16, 54)])
def test_sweep_levels(N, j, s):
    assert sweep_levels(N) == (j, s)


def test_scaling_study_reports_every_failure(monkeypatch):
    calls = []

    def fake(cfg, t_end=None, **kwargs):
        calls.append(cfg.N)
        trace = ideal_trace(cfg.N, np.linspace(0, t_end, 400), cfg.j, cfg.s)
        if cfg.N in (20, 80):
            trace.P[:] = 0.0
        return trace

    monkeypatch.setattr(analysis, "run_search", fake)
    with pytest.raises(ScalingFailure) as info:
        scaling_study([10, 20, 30, 50, 80], 1e4)
    assert calls == [10, 20, 30, 50, 80]
    assert info.value.failed == [20, 80]
    assert [N for N, _ in info.value.points] == [10, 30, 50]


def test_scaling_study_on_ideal_runs(monkeypatch):
    monkeypatch.setattr(analysis, "run_search",
                        lambda cfg, t_end=None, **kw: ideal_trace(cfg.N, np.linspace(0, t_end, 4001), cfg.j, cfg.s))
    fit = scaling_study([10, 20, 30, 50, 80], 1e4)
    assert fit.slope == pytest.approx(math.pi / 2, rel=1e-5)
    assert fit.r_squared > 0.99999


def test_rwa_deviation_falls_with_delta_when_resolved():
    # a well-separated resonance: N=4, j=1, s=3, vacuum field
    devs = []
    for delta in (1e2, 1e3, 1e4):
        cfg = SearchConfig.create(4, 1, 3, delta, photons=PhotonDistribution.uniform(0, 0))
        devs.append(max_rwa_deviation(run_search(cfg), RwaPrediction.from_config(cfg)))
    assert devs[0] > devs[1] > devs[2]
    assert devs[1] < 1e-3


def test_positive_control_peak():
    cfg = SearchConfig.create(4, 1, 3, 1e3, photons=PhotonDistribution.uniform(0, 0))
    trace = run_search(cfg)
    t_peak, p_peak = find_peak(trace, 3)
    assert abs(t_peak / cfg.tau - 1) < 0.02 and p_peak >= 0.98
    assert leakage_profile(trace, cfg) < 1e-3


# exact-eigendecomposition values for N=50, j=10, s=32, photons uniform on 0..9
ORACLE_MAX_LEAKAGE = {5e3: 0.8080, 1e4: 0.8611}


@pytest.mark.parametrize("delta", sorted(ORACLE_MAX_LEAKAGE))
def test_leakage_matches_dense_oracle(delta, fifty_level_trace):
    cfg, trace = fifty_level_trace(delta)
    assert leakage_profile(trace, cfg) == pytest.approx(ORACLE_MAX_LEAKAGE[delta], abs=5e-4)


@pytest.mark.long
def test_leakage_drops_at_large_delta(fifty_level_trace):
    low_cfg, low = fifty_level_trace(1e4)
    cfg, trace = fifty_level_trace(1e6, 1.1)
    high = leakage_profile(trace, cfg)
    assert high == pytest.approx(0.0038, abs=5e-4)
    assert high < leakage_profile(low, low_cfg)
