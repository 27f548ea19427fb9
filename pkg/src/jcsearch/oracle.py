"""Exact desk-scale reference built on the dense Hamiltonian.

The full Hamiltonian is assembled on the truncated product basis
``|phi_l> (x) |k>`` and propagated through one eigendecomposition, so that
every time point costs a matrix-vector product.  This path shares nothing
with :mod:`jcsearch.dynamics` beyond the configuration object.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidIndex, NumericalFailure, OracleTooLarge
from .model import SearchConfig

DEFAULT_CAP = 4096

#: leaving the initial level emits a photon: ``S_kj a^dag + a S_jk``
EMISSION = "emission"
#: the ladder placement as typeset in the model Hamiltonian: ``a^dag S_jk + S_kj a``
AS_PRINTED = "as-printed"


@dataclass(frozen=True)
class ProductBasis:
    """Flat index ``(l - 1) * K + (k - k_lo)`` for level ``l`` and photon number ``k``."""

    N: int
    k_lo: int
    k_hi: int

    @classmethod
    def for_config(cls, cfg: SearchConfig) -> "ProductBasis":
        lo, hi = cfg.fock_range
        return cls(cfg.N, lo, hi)

    @property
    def K(self) -> int:
        return self.k_hi - self.k_lo + 1

    @property
    def dim(self) -> int:
        return self.N * self.K

    def index(self, l: int, k: int) -> int:
        if not (1 <= l <= self.N and self.k_lo <= k <= self.k_hi):
            raise InvalidIndex(f"(l={l}, k={k}) outside the basis")
        return (l - 1) * self.K + (k - self.k_lo)

    def label(self, flat: int) -> tuple:
        if not 0 <= flat < self.dim:
            raise InvalidIndex(f"flat index {flat} outside 0..{self.dim - 1}")
        l, i = divmod(flat, self.K)
        return l + 1, self.k_lo + i

    def to_field(self, psi: np.ndarray) -> np.ndarray:
        return np.asarray(psi).reshape(psi.shape[:-1] + (self.N, self.K))

    def from_field(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b)
        return b.reshape(b.shape[:-2] + (self.dim,))


def annihilation(basis: ProductBasis) -> np.ndarray:
    """``a`` on the photon range, dropping the state below ``k_lo``."""
    k = np.arange(basis.k_lo + 1, basis.k_hi + 1)
    return np.diag(np.sqrt(k.astype(float)), 1)


def number_operator(basis: ProductBasis) -> np.ndarray:
    return np.diag(np.arange(basis.k_lo, basis.k_hi + 1).astype(float))


def transition_operator(N: int, l: int, k: int) -> np.ndarray:
    """Atomic ``S_lk = |phi_l><phi_k|``."""
    S = np.zeros((N, N))
    S[l - 1, k - 1] = 1.0
    return S


def interaction_operator(cfg: SearchConfig, basis: ProductBasis, ordering: str = EMISSION) -> np.ndarray:
    """Atom-field coupling ``(omega0/2) sum_k (...)`` on the product basis.

    ``ordering=EMISSION`` is the coupling whose interaction picture yields
    the amplitude equations integrated in :mod:`jcsearch.dynamics`;
    ``AS_PRINTED`` swaps the ladder operators and is kept for comparison.
    """
    a = annihilation(basis)
    ad = a.T
    if ordering == EMISSION:
        up, down = ad, a  # S_kj carries a^dag, S_jk carries a
    elif ordering == AS_PRINTED:
        up, down = a, ad
    else:
        raise ValueError(f"unknown ordering {ordering!r}")
    W = np.zeros((basis.dim, basis.dim))
    for k in range(1, basis.N + 1):
        W += np.kron(transition_operator(basis.N, k, cfg.j), up)
        W += np.kron(transition_operator(basis.N, cfg.j, k), down)
    return 0.5 * cfg.omega0 * W


@dataclass(frozen=True)
class DenseHamiltonian:
    H: np.ndarray
    basis: ProductBasis

    @cached_property
    def eig(self) -> tuple:
        try:
            return np.linalg.eigh(self.H)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(f"eigendecomposition failed: {exc}") from exc

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.H - self.H.conj().T)))


def build_hamiltonian(cfg: SearchConfig, basis: ProductBasis | None = None,
                      cap: int = DEFAULT_CAP, ordering: str = EMISSION) -> DenseHamiltonian:
    """``w a^dag a + sum_k eps_k S_kk + W`` with the cavity tuned to ``w_sj``."""
    if basis is None:
        basis = ProductBasis.for_config(cfg)
    if basis.dim > cap:
        raise OracleTooLarge(f"flat dimension {basis.dim} exceeds cap {cap}")
    free = cfg.cavity_freq * np.kron(np.eye(basis.N), number_operator(basis))
    free += np.kron(np.diag(cfg.spectrum.energies), np.eye(basis.K))
    return DenseHamiltonian(free + interaction_operator(cfg, basis, ordering), basis)


def exact_propagate(H: DenseHamiltonian, psi0: np.ndarray, t) -> np.ndarray:
    """``U exp(-i L t) U^dag psi0``; ``t`` may be an array, giving one row per time."""
    evals, U = H.eig
    c = U.conj().T @ np.asarray(psi0, dtype=complex)
    t = np.asarray(t, dtype=float)
    phases = np.exp(-1j * np.multiply.outer(t, evals))
    return (phases * c) @ U.T


def free_phases(cfg: SearchConfig, basis: ProductBasis, t) -> np.ndarray:
    """``exp(-i (eps_l + w k) t)`` on the flat basis, one row per time."""
    k = np.arange(basis.k_lo, basis.k_hi + 1)
    energy = (cfg.spectrum.energies[:, None] + cfg.cavity_freq * k[None, :]).ravel()
    return np.exp(-1j * np.multiply.outer(np.asarray(t, dtype=float), energy))


def to_interaction_picture(cfg: SearchConfig, basis: ProductBasis, psi, t) -> np.ndarray:
    """Strip the free evolution: ``b_lk = exp(+i (eps_l + w k) t) psi_lk``."""
    return np.asarray(psi) * free_phases(cfg, basis, t).conj()


def from_interaction_picture(cfg: SearchConfig, basis: ProductBasis, b, t) -> np.ndarray:
    return np.asarray(b) * free_phases(cfg, basis, t)


@dataclass(frozen=True)
class MatrixElement:
    """``|<n phi_i| W |m phi_j>|^2`` three ways."""

    direct: float
    closed_form: float
    as_printed: float


def closed_form_element(cfg: SearchConfig, i: int, m: int, n: int) -> float:
    """``(omega0^2/4) {(m+1) d(n,m+1) + m d(n,m-1) d(i,j)}``."""
    emit = (m + 1.0) if n == m + 1 else 0.0
    absorb = float(m) if (n == m - 1 and i == cfg.j) else 0.0
    return cfg.omega0**2 / 4.0 * (emit + absorb)


def matrix_element_check(cfg: SearchConfig, i: int, m: int, n: int) -> MatrixElement:
    """Squared transition element out of ``|m phi_j>`` computed from the operator.

    The operator is built on a photon range wide enough that truncation
    cannot touch the element.
    """
    if not 1 <= i <= cfg.N:
        raise InvalidIndex(f"level {i} outside 1..{cfg.N}")
    if m < 0 or n < 0:
        raise InvalidIndex("photon numbers must be non-negative")
    basis = ProductBasis(cfg.N, 0, max(m, n) + 1)
    ket = np.zeros(basis.dim)
    ket[basis.index(cfg.j, m)] = 1.0
    bra = basis.index(i, n)
    direct = interaction_operator(cfg, basis, EMISSION) @ ket
    printed = interaction_operator(cfg, basis, AS_PRINTED) @ ket
    return MatrixElement(
        direct=float(abs(direct[bra]) ** 2),
        closed_form=closed_form_element(cfg, i, m, n),
        as_printed=float(abs(printed[bra]) ** 2),
    )


def channel_sum(cfg: SearchConfig, m: int, ordering: str = EMISSION) -> float:
    """``sum_{n,i} |<n phi_i|W|m phi_j>|^2`` from the operator."""
    basis = ProductBasis(cfg.N, 0, m + 2)
    ket = np.zeros(basis.dim)
    ket[basis.index(cfg.j, m)] = 1.0
    return float(np.sum(np.abs(interaction_operator(cfg, basis, ordering) @ ket) ** 2))


@dataclass
class OracleComparison:
    times: np.ndarray
    max_deviation: float
    deviations: np.ndarray  # per time, max over amplitudes
    hermiticity_error: float


def compare_with_dynamics(cfg: SearchConfig, b0=None, t_end: float | None = None, n_times: int = 10,
                          dt: float | None = None, cap: int = DEFAULT_CAP) -> OracleComparison:
    """Max amplitude deviation between RK4 and exact propagation.

    Both start from ``b0`` (default: the coherent initial field) and are
    compared in the interaction picture at ``n_times`` equally spaced
    instants in ``(0, t_end]``; ``t_end`` defaults to the optimal time.
    """
    from .dynamics import AmplitudeField, DEFAULT_DT_FACTOR, integrate
    from .model import max_phase_frequency

    basis = ProductBasis.for_config(cfg)
    H = build_hamiltonian(cfg, basis, cap=cap)
    if b0 is None:
        b0 = AmplitudeField.initial(cfg).b
    if t_end is None:
        t_end = cfg.tau
    if dt is None:
        dt = 2.0 * math.pi / max_phase_frequency(cfg) / DEFAULT_DT_FACTOR
    per = math.ceil(t_end / n_times / dt)
    nsteps = per * n_times
    steps = np.arange(0, nsteps + 1, per)
    res = integrate(cfg, b0, t_end, dt=t_end / nsteps, sample_steps=steps, store_amplitudes=True)
    times = res.times[1:]
    b_rk4 = basis.from_field(res.amplitudes[1:])
    psi = exact_propagate(H, basis.from_field(b0), times)
    b_exact = to_interaction_picture(cfg, basis, psi, times)
    dev = np.max(np.abs(b_rk4 - b_exact), axis=1)
    return OracleComparison(times, float(dev.max()), dev, H.hermiticity_error())
