"""Lee-Yang zeros of Fibonacci Ising rings, from the trace map and from brute force.

Run with ``python3 demos/lee_yang_zeros.py``.
"""

import numpy as np

from qising import hausdorff_distance
from qising.leeyang import FugacityParams, convergence_diagnostic, to_circle, zero_set, zero_set_oracle
from qising.sequences import fibonacci

f = FugacityParams(1.7, 2.3)

# Zeros are parametrised by eta_t = 2 cos(theta) for eta = exp(i theta).
# Small rings can be solved by summing over every spin configuration, which
# checks the trace-map route independently.
print("trace map vs exhaustive configuration sum")
for k in range(3, 7):
    zs = zero_set(k, f)
    oracle = zero_set_oracle(k, f)
    print(f"  k={k}  ring of {fibonacci(k):2d} sites  {len(zs):2d} zeros  hdist {hausdorff_distance(zs, oracle):.1e}")

# The zero sets converge as the ring grows, and there is a gap around
# eta = 1 (theta = 0) that no zero enters.
zs = zero_set(15, f)
theta = to_circle(zs)
print(f"\nk=15: {len(zs)} zeros, smallest angle {np.min(theta):.4f} rad, largest {np.max(theta):.4f} rad")
for k, d in convergence_diagnostic(f, [6, 12, 18]):
    print(f"  hdist(Z_{k}, Z_{k + 6}) = {d:.2e}")
