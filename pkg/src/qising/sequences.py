"""Fibonacci substitution words, golden-rotation samples and coupling sequences.

Words over the alphabet {a, b} are stored as ``uint8`` arrays (0 for ``a``,
1 for ``b``).  The substitution ``a -> ab, b -> a`` generates the fixed point
``u = abaababaabaab...``; its prefix of length ``F_k`` is ``S^(k-1)(a)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Union

import numpy as np

PHI = (1.0 + np.sqrt(5.0)) / 2.0
# frequency of the letter b in u; rotation by this angle is rotation by -phi mod 1
B_FREQUENCY = 2.0 - PHI

MAX_FIBONACCI_INDEX = 90
MAX_GENERATION = 36  # F_36 ~ 2.4e7 letters

LETTERS = "ab"


@dataclass(frozen=True, eq=False)
class Word:
    """Finite word over {a, b}.

    ``generation`` is set when the word is ``S^(generation-1)(a)``.
    """

    bits: np.ndarray
    generation: Optional[int] = None

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.ndim != 1 or (bits.size and bits.max() > 1):
            raise ValueError("word bits must be a 1-d array of 0/1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_string(cls, s: str, generation: Optional[int] = None) -> "Word":
        if set(s) - set(LETTERS):
            raise ValueError(f"word contains symbols outside {{a, b}}: {s!r}")
        bits = np.frombuffer(s.encode("ascii"), dtype=np.uint8) - ord("a")
        return cls(bits.copy(), generation)

    def __len__(self) -> int:
        return int(self.bits.size)

    def __str__(self) -> str:
        return (self.bits + ord("a")).tobytes().decode("ascii")

    def __repr__(self) -> str:
        s = str(self)
        if len(s) > 40:
            s = s[:37] + "..."
        return f"Word({s!r}, generation={self.generation})"

    def __eq__(self, other) -> bool:
        if isinstance(other, str):
            other = Word.from_string(other)
        if not isinstance(other, Word):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash(self.bits.tobytes())

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Word(self.bits[item])
        return LETTERS[self.bits[item]]

    def __add__(self, other: "Word") -> "Word":
        return Word(np.concatenate([self.bits, as_word(other).bits]))


def as_word(w: Union[Word, str]) -> Word:
    return w if isinstance(w, Word) else Word.from_string(w)


@dataclass(frozen=True)
class CouplingMap:
    """Per-letter interaction strengths ``p`` and magnetic fields ``q``."""

    p_a: float
    p_b: float
    q_a: float = 0.0
    q_b: float = 0.0

    def __post_init__(self):
        if not (self.p_a > 0 and self.p_b > 0):
            raise ValueError(f"couplings must be ferromagnetic (p_a, p_b > 0), got {self.p_a}, {self.p_b}")
        if self.q_a < 0 or self.q_b < 0:
            raise ValueError("fields q_a, q_b must be non-negative")

    @property
    def p(self) -> dict:
        return {"a": self.p_a, "b": self.p_b}

    @property
    def q(self) -> dict:
        return {"a": self.q_a, "b": self.q_b}

    def swapped(self) -> "CouplingMap":
        """The same couplings with the roles of the two letters exchanged."""
        return CouplingMap(self.p_b, self.p_a, self.q_b, self.q_a)


def fibonacci_numbers(k_max: int) -> list:
    """Return ``[F_0, ..., F_k_max]`` with ``F_0 = F_1 = 1``."""
    if k_max < 0:
        raise ValueError("k_max must be non-negative")
    if k_max > MAX_FIBONACCI_INDEX:
        raise ValueError(f"k_max={k_max} exceeds supported maximum {MAX_FIBONACCI_INDEX}")
    fib = [1, 1]
    while len(fib) <= k_max:
        fib.append(fib[-1] + fib[-2])
    return fib[: k_max + 1]


def fibonacci(k: int) -> int:
    return fibonacci_numbers(k)[k]


def substitution_word(gen: int) -> Word:
    """``S^(gen-1)(a)``, built by the concatenation rule W_{k+1} = W_k W_{k-1}."""
    if gen < 1:
        raise ValueError("generation must be >= 1")
    if gen > MAX_GENERATION:
        raise ValueError(
            f"generation {gen} needs {fibonacci(gen)} letters; maximum supported generation is {MAX_GENERATION}"
        )
    prev, cur = np.array([1], dtype=np.uint8), np.array([0], dtype=np.uint8)  # W_0 = b, W_1 = a
    for _ in range(gen - 1):
        prev, cur = cur, np.concatenate([cur, prev])
    return Word(cur, gen)


def rotation_word(n: int, offset: float = 0.0) -> Word:
    """Length-``n`` sample of the golden circle rotation with phase ``offset``.

    Letter ``n`` is ``b`` iff ``frac(n * (2 - phi) + offset)`` lies in
    ``[phi - 1, 1)``, an arc of length ``1/phi**2``; the complementary arc of
    length ``1/phi`` codes ``a``.  With ``offset = 0`` this reproduces the
    substitution fixed point.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    idx = np.arange(1, n + 1, dtype=np.float64)
    theta = np.mod(idx * B_FREQUENCY + offset, 1.0)
    return Word((theta >= 1.0 - B_FREQUENCY).astype(np.uint8))


def letter_counts(w: Union[Word, str]) -> tuple:
    w = as_word(w)
    n_b = int(w.bits.sum())
    return len(w) - n_b, n_b


def modulate(w: Union[Word, str], mapping: Mapping[str, complex]) -> np.ndarray:
    """Replace each letter by its mapped value, preserving order."""
    w = as_word(w)
    values = np.array([mapping["a"], mapping["b"]])
    return values[w.bits]
