"""
Search time against the size of the search set
==============================================

With the empty cavity and ``delta = 1e3`` the small-N systems are well
resolved, and the first peak of the searched level follows
``tau = (pi / 2 lambda) sqrt(N)``.
"""

# %%
import math

from jcsearch import PhotonDistribution, scaling_study

vacuum = PhotonDistribution.uniform(0, 0)
for lam in (1.0, 2.0):
    fit = scaling_study([4, 5, 6, 7, 8], 1e3, lam=lam, photons=vacuum)
    print(f"lambda = {lam}: slope = {fit.slope:.4f} (ideal {math.pi / (2 * lam):.4f}), "
          f"intercept = {fit.intercept:+.4f}, r^2 = {fit.r_squared:.6f}")
    for N, t_peak in fit.points:
        print(f"    N = {N}: t_peak = {t_peak:.4f}")
