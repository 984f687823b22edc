import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qising.sequences import (
    CouplingMap,
    Word,
    fibonacci,
    fibonacci_numbers,
    letter_counts,
    modulate,
    rotation_word,
    substitution_word,
)


def test_fibonacci_numbers_examples():
    assert fibonacci_numbers(5) == [1, 1, 2, 3, 5, 8]
    assert fibonacci_numbers(0) == [1]
    assert fibonacci_numbers(10)[-1] == 89


def test_fibonacci_numbers_limits():
    assert fibonacci_numbers(90)[-1] == 4660046610375530309
    with pytest.raises(ValueError):
        fibonacci_numbers(91)
    with pytest.raises(ValueError):
        fibonacci_numbers(-1)


@pytest.mark.parametrize("gen, text", [(1, "a"), (2, "ab"), (3, "aba"), (4, "abaab"), (5, "abaababa")])
def test_substitution_word_examples(gen, text):
    w = substitution_word(gen)
    assert str(w) == text
    assert w.generation == gen


def test_substitution_word_rejects_bad_generation():
    with pytest.raises(ValueError):
        substitution_word(0)
    with pytest.raises(ValueError, match="maximum supported generation"):
        substitution_word(60)


@pytest.mark.parametrize("k", range(2, 26))
def test_concatenation_and_counts(k):
    w = substitution_word(k + 2)
    assert w == substitution_word(k + 1) + substitution_word(k)
    assert letter_counts(substitution_word(k)) == (fibonacci(k - 1), fibonacci(k - 2))


def test_substitution_is_the_morphism():
    w = str(substitution_word(6))
    image = "".join("ab" if ch == "a" else "a" for ch in w)
    assert image == str(substitution_word(7))


@pytest.mark.parametrize("k", range(2, 21))
def test_rotation_word_reproduces_substitution(k):
    assert rotation_word(fibonacci(k), 0.0) == substitution_word(k)


def test_rotation_word_examples():
    assert str(rotation_word(8, 0.0)) == "abaababa"
    assert str(rotation_word(1, 0.0)) == "a"
    n_a, n_b = letter_counts(rotation_word(13, 0.37))
    assert abs(n_a - 8) <= 1 and abs(n_b - 5) <= 1


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 400), st.floats(0.0, 1.0, exclude_max=True))
def test_rotation_words_are_balanced_and_bb_free(n, offset):
    w = rotation_word(n, offset)
    assert "bb" not in str(w)
    # Sturmian balance: b-counts of equal-length factors differ by at most one
    bits = w.bits.astype(int)
    for m in (1, 2, 5, 13):
        if m <= n:
            sums = np.convolve(bits, np.ones(m, dtype=int), mode="valid")
            assert sums.max() - sums.min() <= 1


def test_no_bb_in_substitution_words():
    assert "bb" not in str(substitution_word(20))


def test_letter_counts_examples():
    assert letter_counts("abaab") == (3, 2)
    assert letter_counts("") == (0, 0)
    assert letter_counts(substitution_word(10)) == (55, 34)


def test_modulate_examples():
    assert modulate("ab", {"a": 1, "b": 2}).tolist() == [1, 2]
    assert modulate("abaab", {"a": 1, "b": 2}).tolist() == [1, 2, 1, 1, 2]
    x, y = 0.7, 1.9
    total = modulate(substitution_word(6), {"a": x, "b": y}).sum()
    assert total == pytest.approx(fibonacci(5) * x + fibonacci(4) * y)


def test_word_validation_and_roundtrip():
    assert str(Word.from_string("abba")) == "abba"
    with pytest.raises(ValueError):
        Word.from_string("abc")
    with pytest.raises(ValueError):
        Word(np.array([0, 2]))


def test_coupling_map_invariants():
    c = CouplingMap(1.0, 2.0, 0.1, 0.2)
    assert c.swapped() == CouplingMap(2.0, 1.0, 0.2, 0.1)
    assert c.p == {"a": 1.0, "b": 2.0}
    with pytest.raises(ValueError):
        CouplingMap(0.0, 1.0)
    with pytest.raises(ValueError):
        CouplingMap(1.0, 1.0, -0.1, 0.0)
