"""Resonant atom-cavity search dynamics with a multilevel Jaynes-Cummings coupling.

An N-level atom with ladder ``eps_k = -eps0/k**2`` couples to one cavity
mode tuned to the transition between the initial level ``j`` and the
searched level ``s``.  The package integrates the interaction-picture
amplitude equations, checks them against exact propagation and compares
the search dynamics with the two-mode prediction.
"""
__version__ = "0.1.0"

from .errors import (  # noqa: E402
    InvalidConfiguration,
    InvalidIndex,
    InvalidState,
    JCSearchError,
    NoPeak,
    NormViolation,
    NumericalFailure,
    OracleTooLarge,
    ScalingFailure,
)
from .model import (  # noqa: E402
    AtomicSpectrum,
    PhotonDistribution,
    SearchConfig,
    bohr_frequency,
    build_spectrum,
    coupling_constant,
    resonance_margin,
    transition_probability_matrix,
)
from .dynamics import AmplitudeField, ProbabilityTrace, rhs, rk4_integrate, run_search  # noqa: E402
from .analysis import (  # noqa: E402
    RwaPrediction,
    ScalingFit,
    find_peak,
    leakage_profile,
    max_rwa_deviation,
    per_sector_rwa,
    rwa_probabilities,
    scaling_study,
)
