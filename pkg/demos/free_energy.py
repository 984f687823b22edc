"""Free energy of the classical Fibonacci Ising chain in the thermodynamic limit.

Run with ``python3 demos/free_energy.py``.
"""

import numpy as np

from qising import CouplingMap
from qising.classical import ThermoParams, free_energy_at, free_energy_limit, pure_closed_form
from qising.sequences import substitution_word

# With equal couplings the chain is the ordinary Ising chain, whose free
# energy has a closed form in the reduced couplings K = p / tau and h = q / tau.
# The transfer-matrix limit must reproduce it.
pure = CouplingMap(1.0, 1.0, 0.4, 0.4)
print("pure chain, p = 1, q = 0.4")
for tau in (0.5, 1.0, 2.0):
    r = free_energy_limit(pure, tau)
    print(f"  tau={tau:3.1f}  F={r.value:.12f}  closed form={pure_closed_form(1.0 / tau, 0.4 / tau, tau):.12f}  N={r.n_used}")

# For unequal couplings the finite free energies along N = F_k settle down
# quickly, and the result does not depend on where the Fibonacci word starts.
c = CouplingMap(1.0, 2.0)
print("\nquasiperiodic chain, p_a = 1, p_b = 2")
for tau in np.linspace(0.5, 3.0, 6):
    r = free_energy_limit(c, float(tau))
    print(f"  tau={tau:4.2f}  F={r.value: .10f}  converged at N={r.n_used:5d}  gap {r.cauchy_gap:.1e}")

values = [free_energy_at(c, 1.0, 18, offset).value for offset in (0.0, 0.2, 0.4, 0.6, 0.8)]
print(f"\nspread over five starting offsets at N=F_18: {max(values) - min(values):.2e}")
print(f"first letters of the generation-7 word: {substitution_word(7)}")
