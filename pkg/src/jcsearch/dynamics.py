"""Fixed-step RK4 integration of the interaction-picture amplitude equations.

The state is the complex field ``b[l-1, k - k_lo]`` over atomic levels and
the simulated photon numbers ``k_lo..k_hi`` (see ``SearchConfig.fock_range``).
Amplitudes outside that range are absent (hard truncation).  Row ``l``
obeys::

    db_lk/dt = -i (omega0/2) [ sqrt(k) exp(-i (w_lj - w_sj) t) b_{j,k-1}
                 + delta_lj sqrt(k+1) sum_m exp(-i (w_jm + w_sj) t) b_{m,k+1} ]

which costs O(N K) per evaluation: the sum over ``m`` is formed once per
photon number and only feeds row ``j``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import InvalidConfiguration, InvalidState, NormViolation
from .model import SearchConfig, max_coupling_rate, max_phase_frequency, phase_rates

DEFAULT_NORM_BUDGET = 1e-6
DEFAULT_DT_FACTOR = 40.0
AUTO_SAMPLES = 2000


@dataclass
class AmplitudeField:
    """Amplitudes ``b`` of shape ``(N, K)`` at time ``t``; column 0 is photon number ``k_lo``."""

    b: np.ndarray
    t: float = 0.0
    k_lo: int = 0

    @classmethod
    def initial(cls, cfg: SearchConfig, sector: int | None = None) -> "AmplitudeField":
        """Start in the initial level.

        ``sector=None`` gives the coherent start ``b_jk = sqrt(p(k))``;
        an integer gives the single-sector start ``b_{j,sector} = 1``.
        """
        lo, hi = cfg.fock_range
        b = np.zeros((cfg.N, hi - lo + 1), dtype=complex)
        if sector is None:
            b[cfg.j - 1, cfg.photons.n_min - lo : cfg.photons.n_max - lo + 1] = np.sqrt(cfg.photons.p)
        else:
            if not lo <= sector <= hi:
                raise InvalidState(f"photon sector {sector} outside simulated range [{lo}, {hi}]")
            b[cfg.j - 1, sector - lo] = 1.0
        return cls(b, 0.0, lo)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.b) ** 2))

    def level_probabilities(self) -> np.ndarray:
        return np.sum(np.abs(self.b) ** 2, axis=-1)


@dataclass
class ProbabilityTrace:
    """Per-level probabilities ``P[i, l-1]`` sampled at ``times[i]``."""

    times: np.ndarray
    P: np.ndarray
    norm: np.ndarray
    j: int
    s: int
    tau: float

    @property
    def t_over_tau(self) -> np.ndarray:
        return self.times / self.tau

    @property
    def P_j(self) -> np.ndarray:
        return self.P[:, self.j - 1]

    @property
    def P_s(self) -> np.ndarray:
        return self.P[:, self.s - 1]

    @property
    def leakage(self) -> np.ndarray:
        """Probability held by levels other than ``j`` and ``s``."""
        others = np.ones(self.P.shape[1], dtype=bool)
        others[[self.j - 1, self.s - 1]] = False
        return self.P[:, others].sum(axis=1)

    def level(self, l: int) -> np.ndarray:
        return self.P[:, l - 1]

    def __len__(self):
        return len(self.times)


def _as_batch(cfg: SearchConfig, b) -> np.ndarray:
    if isinstance(b, AmplitudeField):
        b = b.b
    b = np.asarray(b)
    shape = (cfg.N, len(cfg.photon_numbers))
    if b.shape[-2:] != shape:
        raise InvalidState(f"amplitude shape {b.shape} does not match (N, K) = {shape}")
    return b


def rhs(cfg: SearchConfig, t: float, b) -> np.ndarray:
    """Time derivative of the amplitudes; ``b`` may carry leading batch axes."""
    b = _as_batch(cfg, b)
    emit, absorb = phase_rates(cfg)
    k = cfg.photon_numbers.astype(float)
    j = cfg.j - 1
    out = np.zeros(b.shape, dtype=complex)
    # emission channel j,k-1 -> l,k for every row l
    out[..., :, 1:] = np.exp(-1j * emit * t)[:, None] * (np.sqrt(k[1:]) * b[..., j, None, :-1])
    # absorption back into row j from every level at k+1
    back = np.einsum("m,...mk->...k", np.exp(-1j * absorb * t), b[..., :, 1:])
    out[..., j, :-1] += np.sqrt(k[:-1] + 1.0) * back
    return -0.5j * cfg.omega0 * out


@numba.njit(cache=True)
def _deriv(b, e, half, j, sqrt_k, sqrt_k1, out):
    # e holds exp(-i rate_absorb t); the emission factor is its conjugate
    N, K = b.shape
    for i in range(K):
        acc = 0j
        if i + 1 < K:
            for m in range(N):
                acc += e[m] * b[m, i + 1]
            acc *= sqrt_k1[i]
        src = 0j
        if i >= 1:
            src = sqrt_k[i] * b[j, i - 1]
        for l in range(N):
            out[l, i] = -1j * half * (e[l].conjugate() * src)
        out[j, i] += -1j * half * acc


@numba.njit(cache=True)
def _phases(rates, t, e):
    for m in range(rates.shape[0]):
        e[m] = complex(math.cos(rates[m] * t), -math.sin(rates[m] * t))


@numba.njit(cache=True)
def _integrate_kernel(b0, rates, half, j, sqrt_k, sqrt_k1, dt, nsteps, sample_steps,
                      budget, probs, norms, amps, store_amps, fail_sample):
    S, N, K = b0.shape
    nsamp = sample_steps.shape[0]
    e0 = np.empty(N, dtype=np.complex128)
    eh = np.empty(N, dtype=np.complex128)
    e1 = np.empty(N, dtype=np.complex128)
    k1 = np.empty((N, K), dtype=np.complex128)
    k2 = np.empty((N, K), dtype=np.complex128)
    k3 = np.empty((N, K), dtype=np.complex128)
    k4 = np.empty((N, K), dtype=np.complex128)
    tmp = np.empty((N, K), dtype=np.complex128)
    for sec in range(S):
        b = b0[sec].copy()
        _phases(rates, 0.0, e0)
        si = 0
        for step in range(nsteps + 1):
            if si < nsamp and sample_steps[si] == step:
                total = 0.0
                for l in range(N):
                    p = 0.0
                    for i in range(K):
                        p += b[l, i].real ** 2 + b[l, i].imag ** 2
                    probs[si, sec, l] = p
                    total += p
                norms[si, sec] = total
                if store_amps:
                    amps[si, sec] = b
                si += 1
                if abs(total - 1.0) > budget:
                    fail_sample[sec] = si - 1
                    break
            if step == nsteps:
                break
            _phases(rates, (step + 0.5) * dt, eh)
            _phases(rates, (step + 1) * dt, e1)
            _deriv(b, e0, half, j, sqrt_k, sqrt_k1, k1)
            for l in range(N):
                for i in range(K):
                    tmp[l, i] = b[l, i] + 0.5 * dt * k1[l, i]
            _deriv(tmp, eh, half, j, sqrt_k, sqrt_k1, k2)
            for l in range(N):
                for i in range(K):
                    tmp[l, i] = b[l, i] + 0.5 * dt * k2[l, i]
            _deriv(tmp, eh, half, j, sqrt_k, sqrt_k1, k3)
            for l in range(N):
                for i in range(K):
                    tmp[l, i] = b[l, i] + dt * k3[l, i]
            _deriv(tmp, e1, half, j, sqrt_k, sqrt_k1, k4)
            for l in range(N):
                for i in range(K):
                    b[l, i] += dt / 6.0 * (k1[l, i] + 2.0 * k2[l, i] + 2.0 * k3[l, i] + k4[l, i])
            for m in range(N):
                e0[m] = e1[m]


def stability_bound(cfg: SearchConfig) -> float:
    """Largest admissible step: RK4's imaginary-axis limit ``2*sqrt(2)``
    over the faster of the phase and coupling rates."""
    return 2.0 * math.sqrt(2.0) / max(max_phase_frequency(cfg), max_coupling_rate(cfg))


def step_plan(t_end: float, dt: float) -> tuple:
    """Number of steps and the adjusted step that lands exactly on ``t_end``."""
    if not t_end > 0:
        raise InvalidConfiguration(f"t_end must be positive, got {t_end}")
    if not dt > 0:
        raise InvalidConfiguration(f"dt must be positive, got {dt}")
    nsteps = max(1, math.ceil(t_end / dt * (1 - 1e-12)))
    return nsteps, t_end / nsteps


def sample_grid(nsteps: int, sample_every: int | None) -> np.ndarray:
    if sample_every is None:
        sample_every = max(1, -(-nsteps // AUTO_SAMPLES))
    if int(sample_every) != sample_every or sample_every < 1:
        raise InvalidConfiguration(f"sample_every must be a positive integer, got {sample_every}")
    steps = np.arange(0, nsteps + 1, int(sample_every))
    if steps[-1] != nsteps:
        steps = np.append(steps, nsteps)
    return steps


@dataclass
class Integration:
    """Raw batched integrator output, one batch entry per initial state."""

    times: np.ndarray
    probabilities: np.ndarray  # (samples, batch, N)
    norms: np.ndarray  # (samples, batch)
    amplitudes: np.ndarray | None  # (samples, batch, N, K)
    dt: float
    nsteps: int


def integrate(
    cfg: SearchConfig,
    b0,
    t_end: float,
    dt: float | None = None,
    sample_every: int | None = None,
    sample_steps=None,
    norm_budget: float = DEFAULT_NORM_BUDGET,
    store_amplitudes: bool = False,
) -> Integration:
    """Integrate one or a batch of amplitude fields with classic RK4.

    ``dt`` is the nominal step; it is shrunk slightly so that an integer
    number of steps reaches ``t_end``.  Samples are taken every
    ``sample_every`` steps plus the final point, or at the explicit step
    indices ``sample_steps``.
    """
    b = _as_batch(cfg, b0)
    batch = b.reshape((-1,) + b.shape[-2:]).astype(complex)
    if dt is None:
        dt = 2.0 * math.pi / max_phase_frequency(cfg) / DEFAULT_DT_FACTOR
    bound = stability_bound(cfg)
    if dt > bound:
        raise InvalidConfiguration(f"dt = {dt:.3e} exceeds the stability bound {bound:.3e}")
    nsteps, h = step_plan(t_end, dt)
    if sample_steps is None:
        steps = sample_grid(nsteps, sample_every)
    else:
        steps = np.unique(np.asarray(sample_steps, dtype=np.int64))
        if steps.size == 0 or steps[0] < 0 or steps[-1] > nsteps:
            raise InvalidConfiguration("sample steps must lie within the step range")
    steps = steps.astype(np.int64)

    _, absorb = phase_rates(cfg)
    k = cfg.photon_numbers.astype(float)
    S, N, K = batch.shape
    probs = np.zeros((steps.size, S, N))
    norms = np.zeros((steps.size, S))
    amps = np.zeros((steps.size if store_amplitudes else 1, S, N, K), dtype=complex)
    fail = np.full(S, -1, dtype=np.int64)
    _integrate_kernel(
        batch, absorb, 0.5 * cfg.omega0, cfg.j - 1, np.sqrt(k), np.sqrt(k + 1.0),
        h, nsteps, steps, norm_budget, probs, norms, amps, store_amplitudes, fail,
    )
    times = steps * h
    if np.any(fail >= 0):
        first = int(fail[fail >= 0].min())
        sec = int(np.argmax(fail == first))
        raise NormViolation(times[first], abs(norms[first, sec] - 1.0), norm_budget)
    return Integration(
        times=times,
        probabilities=probs,
        norms=norms,
        amplitudes=amps.reshape(steps.size, *b.shape) if store_amplitudes else None,
        dt=h,
        nsteps=nsteps,
    )


def rk4_integrate(
    cfg: SearchConfig,
    b0,
    t_end: float,
    dt: float | None = None,
    sample_every: int | None = None,
    norm_budget: float = DEFAULT_NORM_BUDGET,
) -> ProbabilityTrace:
    """Integrate a single amplitude field and return its probability trace."""
    b = _as_batch(cfg, b0)
    if b.ndim != 2:
        raise InvalidState("rk4_integrate takes a single (N, K) field")
    res = integrate(cfg, b, t_end, dt=dt, sample_every=sample_every, norm_budget=norm_budget)
    return ProbabilityTrace(res.times, res.probabilities[:, 0, :], res.norms[:, 0], cfg.j, cfg.s, cfg.tau)


def initial_batch(cfg: SearchConfig) -> tuple:
    """Initial fields and their weights for ``cfg.photon_mode``."""
    if cfg.photon_mode == "coherent":
        return AmplitudeField.initial(cfg).b[None], np.ones(1)
    sectors = cfg.photons.support()
    fields = np.stack([AmplitudeField.initial(cfg, k).b for k in sectors])
    weights = np.array([cfg.photons.weights[k - cfg.photons.n_min] for k in sectors])
    return fields, weights


def run_search(
    cfg: SearchConfig,
    t_end: float | None = None,
    dt: float | None = None,
    sample_every: int | None = None,
    sample_steps=None,
    norm_budget: float = DEFAULT_NORM_BUDGET,
) -> ProbabilityTrace:
    """Full search run, photon-averaged according to ``cfg.photon_mode``.

    Mixture mode starts one run per photon number ``k`` in the support
    with ``b_jk(0) = 1`` and combines ``P_l = sum_k p(k) P_l^(k)`` in
    ascending ``k``.  Coherent mode evolves the single superposition
    ``b_jk(0) = sqrt(p(k))``.  ``t_end`` defaults to twice the optimal time.
    """
    if t_end is None:
        t_end = 2.0 * cfg.tau
    fields, weights = initial_batch(cfg)
    res = integrate(cfg, fields, t_end, dt=dt, sample_every=sample_every,
                    sample_steps=sample_steps, norm_budget=norm_budget)
    P = np.zeros((res.times.size, cfg.N))
    norm = np.zeros(res.times.size)
    for idx, w in enumerate(weights):
        P += w * res.probabilities[:, idx, :]
        norm += w * res.norms[:, idx]
    return ProbabilityTrace(res.times, P, norm, cfg.j, cfg.s, cfg.tau)
