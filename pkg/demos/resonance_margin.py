"""
When the search fails
=====================

The two-mode picture needs every non-resonant phase in the amplitude
equations to rotate much faster than the coupling.  With a hydrogen-like
spectrum the levels bunch up as ``1/k^2``, so a searched level high in the
ladder has close neighbours.  This script tabulates the margin for the
50-level setup (j = 10, s = 32) and shows where the population goes.
"""

# %%
from jcsearch import SearchConfig
from jcsearch.model import resonance_margin

for delta in (5e3, 1e4, 4e4, 1e5, 1e6):
    cfg = SearchConfig.create(50, 10, 32, delta)
    print(f"delta = {delta:8.0e}   margin = {resonance_margin(cfg):8.2f}")

# %%
# The closest offenders are the levels next to s.  Their detuning from the
# cavity is ``eps0 (1/31^2 - 1/32^2)`` and ``eps0 (1/32^2 - 1/33^2)``,
# a few times 1e-5 of the spectrum scale.
cfg = SearchConfig.create(50, 10, 32, 1e4)
w = cfg.spectrum.bohr_matrix()
for l in (31, 33, 34):
    print(f"level {l}: detuning / omega0 = {abs(w[l - 1, 31]) / cfg.omega0:.3f}")

# %%
# Even with the neighbours pushed away, a broad photon distribution limits
# the peak: each photon sector k swaps at ``omega0 sqrt(k + 1) / 2``, and a
# uniform mixture over 0..9 cannot be in phase at a single time.
import numpy as np

from jcsearch.analysis import sector_averaged_rwa

cfg = SearchConfig.create(50, 10, 32, 1e6)
t = np.linspace(0, 2 * cfg.tau, 4001)
p = sector_averaged_rwa(cfg, t)
i = int(np.argmax(p[: len(t) // 2 + 1]))
print(f"sector-averaged two-mode peak: {p[i]:.3f} at t/tau = {t[i] / cfg.tau:.3f}")
