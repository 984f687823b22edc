"""Single-fermion spectra of the Fibonacci chain and their limit set.

Run with ``python3 demos/spectrum_and_b_infinity.py``.
"""

from qising import CouplingMap, hausdorff_distance
from qising.fractal import box_counting
from qising.quantum import SpectrumParams, b_infty_approx, b_infty_grid, sigma_k
from qising.sequences import fibonacci

c = CouplingMap(1.0, 1.5)

# A periodic approximant of period F_k has exactly F_k bands in x = lambda^2.
# Each of them pulls back to a mirror pair of bands in lambda = +-sqrt(x).
print("periodic approximants, p_b / p_a = 1.5")
previous = None
for k in range(4, 13, 2):
    s = sigma_k(SpectrumParams(c, k))
    drift = "" if previous is None else f"  hdist to previous: {hausdorff_distance(s, previous):.3e}"
    print(f"  k={k:2d}  F_k={fibonacci(k):4d}  lambda-bands={len(s):4d}  measure={s.measure:.4f}{drift}")
    previous = s

# The limit set is read off the trace map: an energy belongs to it when its
# orbit stays bounded.  Probing a grid gives a union of cells covering it.
params = SpectrumParams(c, 12, grid_resolution=4000)
b_inf = b_infty_approx(params)
_, h = b_infty_grid(params)
print(f"\nbounded-orbit approximation: {len(b_inf)} intervals on a grid of step {h:.2e}")
print(f"distance from sigma_12: {hausdorff_distance(previous, b_inf):.3e} ({hausdorff_distance(previous, b_inf) / h:.2f} grid steps)")

# The limit set is a Cantor set whose box dimension falls as the couplings
# move apart.
print("\nbox-counting dimension of sigma_12")
for ratio in (1.05, 1.5, 3.0):
    s = sigma_k(SpectrumParams(CouplingMap(1.0, ratio), 12, grid_resolution=2000))
    lo, hi = s.hull
    est = box_counting(s, (hi - lo) / 2**11, (hi - lo) / 8)
    print(f"  p_b / p_a = {ratio:4.2f}: slope {est.slope:.3f} (r^2 {est.r_squared:.4f})")
