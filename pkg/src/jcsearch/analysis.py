"""Two-mode (rotating-wave) predictions and trace diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import ProbabilityTrace, run_search
from .errors import InvalidConfiguration, InvalidState, NoPeak, ScalingFailure
from .model import PhotonDistribution, SearchConfig, default_dt

PEAK_THRESHOLD = 0.5


@dataclass(frozen=True)
class RwaPrediction:
    """Harmonic exchange ``P_s = sin^2(Omega t)`` with ``Omega = lam / sqrt(N)``."""

    Omega: float
    period: float
    tau: float

    @classmethod
    def from_levels(cls, N: int, lam: float = 1.0) -> "RwaPrediction":
        Omega = lam / math.sqrt(N)
        period = 2.0 * math.pi / Omega
        return cls(Omega=Omega, period=period, tau=period / 4.0)

    @classmethod
    def from_config(cls, cfg: SearchConfig) -> "RwaPrediction":
        return cls.from_levels(cfg.N, cfg.lam)


def rwa_probabilities(pred: RwaPrediction, t):
    """``(cos^2(Omega t), sin^2(Omega t))``; accepts scalar or array ``t``."""
    phase = pred.Omega * np.asarray(t, dtype=float)
    c2 = np.cos(phase) ** 2
    return c2, 1.0 - c2


def per_sector_rwa(cfg: SearchConfig, k: int, t):
    """Resonant pair ``(b_jk, b_{s,k+1})`` for a start with ``k`` photons."""
    if k < 0:
        raise InvalidConfiguration("photon number must be non-negative")
    phase = 0.5 * cfg.omega0 * math.sqrt(k + 1.0) * np.asarray(t, dtype=float)
    return np.cos(phase), -1j * np.sin(phase)


def sector_averaged_rwa(cfg: SearchConfig, t) -> np.ndarray:
    """``sum_k p(k) |b_{s,k+1}|^2`` from the per-sector two-mode solutions.

    Unlike :func:`rwa_probabilities` this keeps the spread of Rabi
    frequencies over photon numbers.
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for k, w in zip(cfg.photons.photon_numbers, cfg.photons.weights):
        out = out + w * np.abs(per_sector_rwa(cfg, int(k), t)[1]) ** 2
    return out


def _vertex(t3, p3):
    """Vertex of the parabola through three samples (spacing need not be uniform)."""
    A, B, C = np.polyfit(t3 - t3[1], p3, 2)
    if A >= 0:
        return t3[1], p3[1]
    shift = -B / (2.0 * A)
    if not t3[0] - t3[1] <= shift <= t3[2] - t3[1]:
        return t3[1], p3[1]
    return t3[1] + shift, C - B * B / (4.0 * A)


def find_peak(trace: ProbabilityTrace, level: int, threshold: float = PEAK_THRESHOLD) -> tuple:
    """First local maximum of ``P_level`` above ``threshold``, sub-sample refined.

    Raises :class:`NoPeak` when the series never exceeds the threshold.
    A maximum on the final sample is returned unrefined.
    """
    if len(trace) == 0:
        raise InvalidState("empty trace")
    t = trace.times
    p = trace.level(level)
    above = np.flatnonzero(p > threshold)
    if above.size == 0:
        raise NoPeak(f"P_{level} never exceeds {threshold} (max {p.max():.4g})")
    i = int(above[0])
    n = p.size
    while i + 1 < n and p[i + 1] >= p[i]:
        i += 1
    if i == n - 1 or i == 0:
        return float(t[i]), float(p[i])
    tv, pv = _vertex(t[i - 1 : i + 2], p[i - 1 : i + 2])
    return float(tv), float(pv)


def leakage_profile(trace: ProbabilityTrace, cfg: SearchConfig, t_max: float | None = None) -> float:
    """Largest probability outside levels ``j`` and ``s`` over ``[0, t_max]`` (default ``tau``)."""
    if t_max is None:
        t_max = cfg.tau
    if trace.times[-1] < t_max * (1 - 1e-12):
        raise InvalidState(f"trace ends at {trace.times[-1]:.6g} before t_max = {t_max:.6g}")
    window = trace.times <= t_max * (1 + 1e-12)
    return float(trace.leakage[window].max())


def max_rwa_deviation(trace: ProbabilityTrace, pred: RwaPrediction) -> float:
    """``max_t |P_s(t) - sin^2(Omega t)|`` over the samples."""
    return float(np.max(np.abs(trace.P_s - rwa_probabilities(pred, trace.times)[1])))


def sweep_levels(N: int) -> tuple:
    """Fixed ``(j, s)`` for a search set of size ``N``: ``ceil(N/5)``, ``ceil(2N/3)``."""
    j = -(-N // 5)
    s = -(-2 * N // 3)
    if s == j:
        s = j + 1
    return j, s


@dataclass(frozen=True)
class ScalingFit:
    points: tuple  # ((N, t_peak), ...)
    slope: float
    intercept: float
    r_squared: float


def fit_sqrt_scaling(points) -> ScalingFit:
    """Least-squares line of ``t_peak`` against ``sqrt(N)``."""
    pts = tuple((int(N), float(t)) for N, t in points)
    if len(pts) < 5:
        raise InvalidConfiguration(f"scaling fit needs at least 5 points, got {len(pts)}")
    x = np.sqrt([N for N, _ in pts])
    y = np.array([t for _, t in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return ScalingFit(pts, float(slope), float(intercept), min(1.0, max(0.0, r2)))


def scaling_study(N_list, delta: float, lam: float = 1.0, photons: PhotonDistribution | None = None,
                  photon_mode: str = "mixture", fock_pad: int = 2, t_end_over_tau: float = 2.0,
                  dt_factor: float = 40.0, sample_every: int | None = None,
                  norm_budget: float = 1e-6) -> ScalingFit:
    """Run the full search for every ``N`` and fit the first-peak time against ``sqrt(N)``.

    Levels follow :func:`sweep_levels`.  Every ``N`` is attempted; if any
    yields no peak a :class:`ScalingFailure` lists all of them together
    with the points that did succeed.
    """
    points, failed = [], []
    for N in N_list:
        j, s = sweep_levels(int(N))
        cfg = SearchConfig.create(int(N), j, s, delta, lam=lam, photons=photons,
                                  photon_mode=photon_mode, fock_pad=fock_pad)
        trace = run_search(cfg, t_end=t_end_over_tau * cfg.tau, dt=default_dt(cfg, dt_factor),
                           sample_every=sample_every, norm_budget=norm_budget)
        try:
            t_peak, _ = find_peak(trace, cfg.s)
        except NoPeak:
            failed.append(int(N))
            continue
        points.append((int(N), t_peak))
    if failed:
        raise ScalingFailure(failed, points)
    return fit_sqrt_scaling(points)
