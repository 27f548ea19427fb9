"""
Checking the integrator against exact propagation
=================================================

For a small truncated system the full Hamiltonian fits in memory, so the
interaction-picture RK4 amplitudes can be compared with
``exp(-iHt)`` from one eigendecomposition, moved to the same picture.
"""

# %%
from jcsearch.cli import oracle_config
from jcsearch.oracle import build_hamiltonian, channel_sum, compare_with_dynamics

cfg = oracle_config(4, 3, 1e3)
H = build_hamiltonian(cfg)
print(f"flat dimension {H.basis.dim}, hermiticity error {H.hermiticity_error():.1e}")

# %%
res = compare_with_dynamics(cfg)
for t, d in zip(res.times, res.deviations):
    print(f"t/tau = {t / cfg.tau:.2f}   max |b_rk4 - b_exact| = {d:.2e}")

# %%
# The coupling out of ``|m phi_j>`` carries total weight
# ``(omega0^2/4) {N(m+1) + m}``, which is what fixes omega0.
for m in range(4):
    expect = cfg.omega0**2 / 4 * (cfg.N * (m + 1) + m)
    print(f"m = {m}: channel sum {channel_sum(cfg, m):.6f}, expected {expect:.6f}")
