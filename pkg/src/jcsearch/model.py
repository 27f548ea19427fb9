"""Static model quantities: spectrum, photon statistics and coupling constant.

Units are natural (hbar = 1).  Atomic levels are addressed with 1-based
indices ``1..N`` everywhere in the public API; arrays indexed by level use
position ``l - 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidConfiguration, InvalidIndex

PHOTON_MODES = ("mixture", "coherent")


@dataclass(frozen=True)
class AtomicSpectrum:
    """Hydrogen-like ladder ``eps_k = -epsilon0 / k**2`` for ``k = 1..N``."""

    levels: int
    epsilon0: float

    @cached_property
    def inverse_squares(self) -> np.ndarray:
        k = np.arange(1, self.levels + 1, dtype=float)
        return 1.0 / (k * k)

    @property
    def energies(self) -> np.ndarray:
        return -self.epsilon0 * self.inverse_squares

    def bohr_matrix(self) -> np.ndarray:
        """All Bohr frequencies ``w[l-1, m-1] = eps_m - eps_l``."""
        inv = self.inverse_squares
        return self.epsilon0 * (inv[:, None] - inv[None, :])

    def _check(self, index: int) -> None:
        if not 1 <= index <= self.levels:
            raise InvalidIndex(f"level {index} outside 1..{self.levels}")


def build_spectrum(N: int, epsilon0: float) -> AtomicSpectrum:
    if int(N) != N or N < 2:
        raise InvalidConfiguration(f"need at least two levels, got N = {N}")
    if not epsilon0 > 0 or not math.isfinite(epsilon0):
        raise InvalidConfiguration(f"epsilon0 must be positive, got {epsilon0}")
    return AtomicSpectrum(int(N), float(epsilon0))


def bohr_frequency(spectrum: AtomicSpectrum, l: int, m: int) -> float:
    """``w_lm = epsilon0 * (1/l**2 - 1/m**2)``, i.e. ``eps_m - eps_l``.

    With this convention the cavity tuning ``w_sj = eps_j - eps_s`` is
    ``bohr_frequency(spectrum, s, j)``.
    """
    spectrum._check(l)
    spectrum._check(m)
    return spectrum.epsilon0 * (1.0 / (l * l) - 1.0 / (m * m))


@dataclass(frozen=True)
class PhotonDistribution:
    """Normalized photon-number weights ``p(n)`` on ``n_min..n_max``."""

    n_min: int
    n_max: int
    weights: tuple

    @classmethod
    def uniform(cls, n_min: int, n_max: int) -> "PhotonDistribution":
        _check_range(n_min, n_max)
        count = n_max - n_min + 1
        return cls(int(n_min), int(n_max), (1.0 / count,) * count)

    @classmethod
    def from_weights(cls, weights, n_min: int = 0) -> "PhotonDistribution":
        """Normalize arbitrary non-negative weights starting at ``n_min``."""
        w = [float(x) for x in weights]
        if not w:
            raise InvalidConfiguration("empty photon weight list")
        _check_range(n_min, n_min + len(w) - 1)
        if any(x < 0 or not math.isfinite(x) for x in w):
            raise InvalidConfiguration("photon weights must be finite and non-negative")
        total = math.fsum(w)
        if total <= 0:
            raise InvalidConfiguration("photon weights sum to zero")
        return cls(int(n_min), int(n_min) + len(w) - 1, tuple(x / total for x in w))

    @classmethod
    def poisson(cls, mean: float, n_max: int) -> "PhotonDistribution":
        """Poissonian statistics truncated to ``0..n_max`` and renormalized."""
        if mean < 0:
            raise InvalidConfiguration("Poisson mean must be non-negative")
        if mean == 0:
            return cls.from_weights([1.0] + [0.0] * n_max, 0)
        w = [math.exp(k * math.log(mean) - mean - math.lgamma(k + 1)) for k in range(n_max + 1)]
        return cls.from_weights(w, 0)

    @property
    def photon_numbers(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    @property
    def p(self) -> np.ndarray:
        return np.asarray(self.weights)

    @property
    def mean(self) -> float:
        return math.fsum(n * w for n, w in zip(range(self.n_min, self.n_max + 1), self.weights))

    def support(self) -> list:
        """Photon numbers carrying non-zero weight, ascending."""
        return [n for n, w in zip(range(self.n_min, self.n_max + 1), self.weights) if w > 0]


def _check_range(n_min, n_max):
    if int(n_min) != n_min or int(n_max) != n_max or not 0 <= n_min <= n_max:
        raise InvalidConfiguration(f"bad photon range [{n_min}, {n_max}]")


def coupling_constant(N: int, mean_n: float, lam: float = 1.0) -> float:
    """Atom-field coupling fixed by normalizing the averaged transition weights.

    ``Omega0 = 2 lam / sqrt(<n> (N + 1) + N)``; no large-N simplification.
    """
    if N < 2:
        raise InvalidConfiguration(f"need at least two levels, got N = {N}")
    if mean_n < 0:
        raise InvalidConfiguration(f"mean photon number must be >= 0, got {mean_n}")
    if not lam > 0:
        raise InvalidConfiguration(f"lambda must be positive, got {lam}")
    return 2.0 * lam / math.sqrt(mean_n * (N + 1) + N)


@dataclass(frozen=True)
class SearchConfig:
    """A fully specified search: spectrum, field state, levels and couplings.

    Build instances with :meth:`create`; the derived fields (``omega0``,
    ``cavity_freq`` and the spectrum scale ``epsilon0 = delta * omega0``) are
    filled in there.  ``fock_pad`` extends the simulated photon range by that
    many states on each side of the distribution support so that the
    resonant partner ``(s, k+1)`` of the top sector exists.
    """

    spectrum: AtomicSpectrum
    photons: PhotonDistribution
    j: int
    s: int
    lam: float
    delta: float
    omega0: float
    cavity_freq: float
    photon_mode: str = "mixture"
    fock_pad: int = 2

    @classmethod
    def create(
        cls,
        N: int,
        j: int,
        s: int,
        delta: float,
        lam: float = 1.0,
        photons: PhotonDistribution | None = None,
        photon_mode: str = "mixture",
        fock_pad: int = 2,
    ) -> "SearchConfig":
        if photons is None:
            photons = PhotonDistribution.uniform(0, 9)
        if int(N) != N or N < 2:
            raise InvalidConfiguration(f"need at least two levels, got N = {N}")
        if not (1 <= j <= N and 1 <= s <= N):
            raise InvalidConfiguration(f"levels j={j}, s={s} must lie in 1..{N}")
        if j == s:
            raise InvalidConfiguration("initial and searched level coincide")
        if not delta > 0 or not math.isfinite(delta):
            raise InvalidConfiguration(f"delta must be positive, got {delta}")
        if photon_mode not in PHOTON_MODES:
            raise InvalidConfiguration(f"photon_mode must be one of {PHOTON_MODES}")
        if int(fock_pad) != fock_pad or fock_pad < 0:
            raise InvalidConfiguration(f"fock_pad must be a non-negative integer")
        omega0 = coupling_constant(int(N), photons.mean, lam)
        spectrum = build_spectrum(int(N), delta * omega0)
        return cls(
            spectrum=spectrum,
            photons=photons,
            j=int(j),
            s=int(s),
            lam=float(lam),
            delta=float(delta),
            omega0=omega0,
            cavity_freq=bohr_frequency(spectrum, s, j),
            photon_mode=photon_mode,
            fock_pad=int(fock_pad),
        )

    @property
    def N(self) -> int:
        return self.spectrum.levels

    @property
    def epsilon0(self) -> float:
        return self.spectrum.epsilon0

    @property
    def fock_range(self) -> tuple:
        """Inclusive photon-number bounds of the simulated amplitude field."""
        return (max(0, self.photons.n_min - self.fock_pad), self.photons.n_max + self.fock_pad)

    @property
    def photon_numbers(self) -> np.ndarray:
        lo, hi = self.fock_range
        return np.arange(lo, hi + 1)

    @property
    def tau(self) -> float:
        return math.pi / (2.0 * self.lam) * math.sqrt(self.N)


def phase_rates(cfg: SearchConfig) -> tuple:
    """Angular frequencies of the oscillating factors in the amplitude equations.

    Returns ``(rate_emit, rate_absorb)``: ``rate_emit[l-1] = w_lj - w_sj``
    multiplies ``b_{j,k-1}`` in row ``l``; ``rate_absorb[m-1] = w_jm + w_sj``
    multiplies ``b_{m,k+1}`` in row ``j``.  Both vanish exactly at the
    searched level and ``rate_emit == -rate_absorb`` bit for bit.
    """
    w = cfg.spectrum.bohr_matrix()
    wsj = cfg.cavity_freq
    j = cfg.j - 1
    return w[:, j] - wsj, w[j, :] + wsj


def max_phase_frequency(cfg: SearchConfig) -> float:
    """Upper bound ``max|w_lm| + |w_sj|`` on the fast phase frequencies."""
    return float(np.max(np.abs(cfg.spectrum.bohr_matrix()))) + abs(cfg.cavity_freq)


def max_coupling_rate(cfg: SearchConfig) -> float:
    """Bound ``(omega0/2) sqrt(k_hi + 1) (sqrt(N) + 2)`` on the coupling part of the generator."""
    k_hi = cfg.fock_range[1]
    return 0.5 * cfg.omega0 * math.sqrt(k_hi + 1.0) * (math.sqrt(cfg.N) + 2.0)


def default_dt(cfg: SearchConfig, dt_factor: float = 40.0) -> float:
    """Step resolving the fastest rate (phase or coupling) with ``dt_factor`` points.

    The coupling only wins at small ``delta``, where the level spacing is
    comparable to ``omega0``.
    """
    return 2.0 * math.pi / max(max_phase_frequency(cfg), max_coupling_rate(cfg)) / dt_factor


def transition_probability_matrix(cfg: SearchConfig) -> np.ndarray:
    """Photon-averaged probabilities ``P_ji`` out of the initial level.

    Returns the row for ``j`` as an array over ``i = 1..N`` (position
    ``i - 1``); it sums to one because ``omega0`` is fixed by that condition.
    """
    n = cfg.photons.mean
    scale = cfg.omega0**2 / (4.0 * cfg.lam**2)
    row = np.full(cfg.N, scale * (n + 1.0))
    row[cfg.j - 1] = scale * (2.0 * n + 1.0)
    return row


def resonance_margin(cfg: SearchConfig) -> float:
    """Smallest non-vanishing phase frequency in units of ``omega0``.

    The two-mode picture needs this to be large; levels adjacent to the
    searched one set it in the dense upper part of the ladder.
    """
    emit, absorb = phase_rates(cfg)
    rates = np.abs(np.concatenate([np.delete(emit, cfg.s - 1), np.delete(absorb, cfg.s - 1)]))
    return float(rates.min() / cfg.omega0)
