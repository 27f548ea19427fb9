"""Acceptance gate: one PASS/FAIL line per criterion, printed in the summary.

Heavy runs are shared through fixtures so each configuration is integrated once.
"""
import math
from unittest import mock

import numpy as np
import pytest

import jcsearch.analysis as analysis
from conftest import ACCEPTANCE_LINES
from jcsearch.analysis import (
    RwaPrediction,
    find_peak,
    leakage_profile,
    max_rwa_deviation,
    rwa_probabilities,
    scaling_study,
)
from jcsearch.cli import oracle_config, snapshot_steps
from jcsearch.dynamics import AmplitudeField, integrate, rhs, run_search
from jcsearch.errors import NoPeak, ScalingFailure
from jcsearch.model import (
    PhotonDistribution,
    SearchConfig,
    default_dt,
    transition_probability_matrix,
)
from jcsearch.oracle import EMISSION, channel_sum, closed_form_element, compare_with_dynamics

FRACTIONS = (0.0, 0.25, 0.5, 0.75, 1.0)


def record(name, ok, detail):
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    assert ok, f"{name}: {detail}"


def _peak(trace, s):
    try:
        return find_peak(trace, s)
    except NoPeak:
        return None


@pytest.fixture(scope="module")
def snapshot_run():
    cfg = SearchConfig.create(50, 10, 32, 4e4)
    nsteps, snap = snapshot_steps(FRACTIONS, cfg.tau, default_dt(cfg))
    grid = np.union1d(np.arange(0, nsteps + 1, max(1, nsteps // 2000)), snap)
    trace = run_search(cfg, t_end=cfg.tau, dt=cfg.tau / nsteps, sample_steps=grid)
    rows = [int(np.searchsorted(grid, k)) for k in snap]
    return cfg, trace, rows


@pytest.fixture(scope="module")
def scaling_run():
    """The scaling study, with every trace it produces kept for the hygiene check."""
    traces = []

    def keep(*args, **kwargs):
        traces.append(run_search(*args, **kwargs))
        return traces[-1]

    with mock.patch.object(analysis, "run_search", side_effect=keep):
        try:
            outcome = scaling_study([10, 20, 30, 50, 80], 1e4, lam=1.0)
        except ScalingFailure as exc:
            outcome = exc
    return outcome, traces


def photons_with_mean(mean):
    lo = math.floor(mean)
    frac = mean - lo
    if frac == 0:
        return PhotonDistribution.uniform(lo, lo)
    return PhotonDistribution.from_weights([1 - frac, frac], n_min=lo)


def test_coupling_closure():
    rng = np.random.default_rng(20240101)
    worst, worst_elements = 0.0, 0.0
    for _ in range(100):
        N = int(rng.integers(2, 201))
        mean = float(rng.uniform(0, 50))
        lam = float(rng.uniform(0.1, 10))
        cfg = SearchConfig.create(N, 1, 2, 1e3, lam=lam, photons=photons_with_mean(mean))
        worst = max(worst, abs(transition_probability_matrix(cfg).sum() - 1))
        # same sum rebuilt from individual squared matrix elements
        total = 0.0
        for m, w in zip(cfg.photons.photon_numbers, cfg.photons.weights):
            m = int(m)
            total += w * sum(closed_form_element(cfg, i, m, n)
                             for i in range(1, N + 1) for n in (m - 1, m + 1) if n >= 0)
        worst_elements = max(worst_elements, abs(total / lam**2 - 1))
    record("1 coupling closure", max(worst, worst_elements) <= 1e-12,
           f"max |sum_i P_ji - 1| = {worst:.2e} (elements {worst_elements:.2e}) over 100 configs, tol 1e-12")


def test_oracle_equivalence():
    res = compare_with_dynamics(oracle_config(4, 3, 1e3))
    record("2 oracle equivalence", res.max_deviation <= 1e-6 and res.times.size == 10,
           f"max amplitude deviation {res.max_deviation:.2e} at 10 times in (0, tau], tol 1e-6")


def test_fifty_level_peak(fifty_level_trace):
    cfg, trace = fifty_level_trace(1e4)
    peak = _peak(trace, cfg.s)
    if peak is None:
        record("3a delta=1e4 first peak", False,
               f"no sample of P_s exceeds 0.5 (max {trace.P_s.max():.4f}); need p_peak >= 0.95 within 5% of tau")
    t_peak, p_peak = peak
    rel = abs(t_peak / cfg.tau - 1)
    record("3a delta=1e4 first peak", p_peak >= 0.95 and rel <= 0.05,
           f"p_peak = {p_peak:.4f} at t/tau = {t_peak / cfg.tau:.4f}; need >= 0.95 within 5%")


def test_fifty_level_rwa_deviation(fifty_level_trace):
    devs = {}
    for delta in (5e3, 1e4):
        cfg, trace = fifty_level_trace(delta)
        devs[delta] = max_rwa_deviation(trace, RwaPrediction.from_config(cfg))
    record("3b RWA deviation falls with delta", devs[5e3] > devs[1e4],
           f"{devs[5e3]:.4f} at 5e3 vs {devs[1e4]:.4f} at 1e4; need strictly greater")


@pytest.mark.long
def test_fifty_level_large_delta(fifty_level_trace):
    cfg, trace = fifty_level_trace(1e6, 1.1)
    peak = _peak(trace, cfg.s)
    if peak is None:
        record("3c delta=1e6 first peak", False, f"no peak (max P_s {trace.P_s.max():.4f})")
    t_peak, p_peak = peak
    rel = abs(t_peak / cfg.tau - 1)
    record("3c delta=1e6 first peak", p_peak >= 0.98 and rel <= 0.02,
           f"p_peak = {p_peak:.4f} at t/tau = {t_peak / cfg.tau:.4f}; need >= 0.98 within 2%")


def test_fifty_level_snapshots(snapshot_run):
    cfg, trace, rows = snapshot_run
    p_tau = trace.P_s[rows[-1]]
    leak = leakage_profile(trace, cfg)
    outside = max(trace.leakage[r] for r in rows)
    ok = p_tau >= 0.9 and leak <= 0.1 and outside <= 0.1
    record("4 delta=4e4 snapshots", ok,
           f"P_s(tau) = {p_tau:.4f} (>= 0.9), max leakage on [0, tau] = {leak:.4f} (<= 0.1), "
           f"max outside at fractions = {outside:.4f} (<= 0.1)")


def test_sqrt_scaling(scaling_run):
    outcome, _ = scaling_run
    if isinstance(outcome, ScalingFailure):
        record("5 sqrt(N) scaling", False,
               f"no resonant peak for N = {outcome.failed}; peaks found {outcome.points}")
    fit = outcome
    rel = abs(fit.slope / (math.pi / 2) - 1)
    record("5 sqrt(N) scaling", rel <= 0.05 and fit.r_squared >= 0.999,
           f"slope = {fit.slope:.4f} ({rel:.1%} from pi/2, tol 5%), r^2 = {fit.r_squared:.5f} (>= 0.999)")


def test_norm_drift(fifty_level_trace, snapshot_run, scaling_run):
    traces = [fifty_level_trace(5e3)[1], fifty_level_trace(1e4)[1], snapshot_run[1]] + scaling_run[1]
    drift = max(float(np.max(np.abs(t.norm - 1))) for t in traces)
    record("6a norm drift", drift <= 1e-8, f"max |norm - 1| = {drift:.2e} over {len(traces)} runs, tol 1e-8")


def test_rk4_order():
    cfg = SearchConfig.create(4, 1, 3, 1e3, photons=PhotonDistribution.uniform(0, 2), fock_pad=0)
    b0 = AmplitudeField.initial(cfg).b
    dt = default_dt(cfg, 4.0)
    finals = [integrate(cfg, b0, cfg.tau, dt=dt / 2**i, sample_every=10**9, store_amplitudes=True)
              .amplitudes[-1] for i in range(3)]
    ratio = np.max(np.abs(finals[0] - finals[2])) / np.max(np.abs(finals[1] - finals[2]))
    record("6b RK4 order", abs(ratio / 16 - 1) <= 0.25,
           f"error ratio under step halving = {ratio:.2f}; need 16 +- 25%")


def test_property_suite():
    rng = np.random.default_rng(7)
    cfg = SearchConfig.create(10, 2, 7, 1e3, photons=PhotonDistribution.uniform(0, 4))
    shape = (cfg.N, len(cfg.photon_numbers))
    lin = 0.0
    for _ in range(50):
        b1, b2 = (rng.normal(size=shape) + 1j * rng.normal(size=shape) for _ in range(2))
        a, c = rng.normal(size=2) + 1j * rng.normal(size=2)
        t = float(rng.uniform(0, 100))
        lhs = rhs(cfg, t, a * b1 + c * b2)
        ref = a * rhs(cfg, t, b1) + c * rhs(cfg, t, b2)
        lin = max(lin, float(np.max(np.abs(lhs - ref)) / np.max(np.abs(ref))))

    t = rng.uniform(0, 1e4, size=10000)
    c2, s2 = rwa_probabilities(RwaPrediction.from_levels(50), t)
    rwa = float(np.max(np.abs(c2 + s2 - 1)))

    chan = 0.0
    for N in (2, 5, 10):
        c = SearchConfig.create(N, 1, 2, 1e3)
        for m in range(6):
            expect = c.omega0**2 / 4 * (N * (m + 1) + m)
            chan = max(chan, abs(channel_sum(c, m, EMISSION) / expect - 1))
    ok = lin <= 1e-14 and rwa == 0.0 and chan <= 1e-13
    record("7 property suite", ok,
           f"rhs linearity rel err {lin:.1e}, RWA sum err {rwa:.1e}, channel-sum rel err {chan:.1e}")
