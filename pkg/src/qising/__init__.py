"""Fibonacci-modulated Ising chains.

Submodules:

- ``sequences``: Fibonacci words and coupling maps
- ``tracemap``: the trace map, its invariant and escape rates
- ``sets``: interval unions, point sets and the Hausdorff distance
- ``quantum``: approximant spectra and the bounded-orbit set B_inf
- ``classical``: transfer matrices, partition functions and free energy
- ``leeyang``: Lee-Yang zeros via the trace map and an exhaustive oracle
- ``fractal``: box counting, thickness and local dimension
- ``validation``: the acceptance suite
- ``cli``: the ``qising`` command
"""

from .sequences import CouplingMap, Word, fibonacci, rotation_word, substitution_word
from .sets import BandSet, PointSet, hausdorff_distance

__version__ = "0.1.0"

__all__ = [
    "CouplingMap",
    "Word",
    "fibonacci",
    "rotation_word",
    "substitution_word",
    "BandSet",
    "PointSet",
    "hausdorff_distance",
]
