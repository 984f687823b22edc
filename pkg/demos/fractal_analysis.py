"""Thickness, sum sets and box dimension of a computed spectrum.

Run with ``python3 demos/fractal_analysis.py``.
"""

from qising import CouplingMap
from qising.fractal import (
    astels_interval_check,
    box_counting,
    dimension_lower_bound,
    local_dimension_profile,
    middle_thirds,
    thickness,
)
from qising.quantum import SpectrumParams, fermion_sum, sigma_k

# The middle-thirds Cantor set is the reference fixture: thickness 1,
# box dimension log 2 / log 3, and C + C is an interval.
cantor = middle_thirds(10)
t = thickness(cantor)
est = box_counting(cantor, 3.0**-9, 3.0**-2, levels=15)
print(f"Cantor set: tau={t.tau:.6f}  slope={est.slope:.4f}  lower bound={dimension_lower_bound(t):.4f}")
print(f"  C + C an interval by thickness: {astels_interval_check(cantor, 2)}")

# Close to the pure chain the spectrum is thick, so sums of two copies (two
# non-interacting fermions) already fill an interval.
s = sigma_k(SpectrumParams(CouplingMap(1.0, 1.1), 12))
t = thickness(s)
print(f"\nsigma_12 at p_b / p_a = 1.1: {len(s)} bands, tau={t.tau:.3f}, nu={t.nu:.3f}")
print(f"  Astels predicts an interval for m=2: {astels_interval_check(s, 2)}")
two = fermion_sum(s, 2)
print(f"  computed two-fermion set has {len(two)} interval(s), hull {two.hull}")

# The local profile boxes the set inside overlapping windows.  Far from the
# pure chain the estimates vary from window to window.
s = sigma_k(SpectrumParams(CouplingMap(1.0, 3.0), 12, grid_resolution=2000))
print("\nlocal box dimension of sigma_12 at p_b / p_a = 3")
for center, e in local_dimension_profile(s, window_count=8):
    print(f"  window centred at {center: .3f}: {e.slope:.3f}")
