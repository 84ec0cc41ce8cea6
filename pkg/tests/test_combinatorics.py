import itertools
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from covkit.combinatorics import (
    bell,
    enumerate_partitions,
    falling_factorial,
    frequency_vector_counts,
    is_rgs,
    stirling2,
    weight_count,
    word_to_rgs,
)


def brute_rgs(t):
    return [w for w in itertools.product(range(t), repeat=t) if is_rgs(w)]


def test_bell_small():
    assert bell(1) == 1
    assert bell(3) == 5
    assert bell(4) == len(brute_rgs(4)) == 15


@pytest.mark.parametrize("t", range(1, 13))
def test_stirling_rows_sum_to_bell(t):
    assert sum(stirling2(t, r) for r in range(1, t + 1)) == bell(t)
    assert stirling2(t, t) == 1


def test_stirling_values():
    assert stirling2(4, 2) == 7
    assert stirling2(4, 3) == 6


@pytest.mark.parametrize("bad", [(0, 1), (3, 4), (3, 0), (21, 1)])
def test_stirling_range(bad):
    with pytest.raises(ValueError):
        stirling2(*bad)


@pytest.mark.parametrize("bad", [0, 21])
def test_bell_range(bad):
    with pytest.raises(ValueError):
        bell(bad)


def test_enumerate_examples():
    assert enumerate_partitions(2, 2) == [(0, 0), (0, 1)]
    assert len(enumerate_partitions(3, 3)) == 5
    three_two = enumerate_partitions(3, 2)
    assert len(three_two) == 4 and (0, 1, 2) not in three_two


@pytest.mark.parametrize("t", range(1, 8))
def test_enumeration_matches_brute_force(t):
    got = enumerate_partitions(t, t)
    assert got == sorted(brute_rgs(t))
    assert len(set(got)) == bell(t)
    assert all(is_rgs(p) for p in got)
    for r in range(1, t + 1):
        assert len(enumerate_partitions(t, r)) == sum(stirling2(t, j) for j in range(1, r + 1))


def test_word_to_rgs_examples():
    assert word_to_rgs((1, 1, 0)) == (0, 0, 1)
    assert word_to_rgs((5, 7, 5)) == (0, 1, 0)
    assert word_to_rgs((1, 2, 3, 4)) == (0, 1, 2, 3)
    with pytest.raises(ValueError):
        word_to_rgs(())


@given(st.lists(st.integers(0, 5), min_size=1, max_size=9), st.permutations(range(40)))
def test_word_to_rgs_relabeling_invariant(word, perm):
    relabeled = [perm[s] * 3 + 7 for s in word]
    assert word_to_rgs(relabeled) == word_to_rgs(word)
    assert word_to_rgs(word_to_rgs(word)) == word_to_rgs(word)


def test_falling_factorial():
    assert falling_factorial(4, 2) == 12
    assert falling_factorial(3, 3) == 6
    assert falling_factorial(2, 3) == 0
    assert falling_factorial(7, 0) == 1


def test_weight_count_examples():
    assert weight_count(2, 3, 3) == 1
    assert weight_count(2, 3, 4) == 3
    assert weight_count(2, 3, 2) == 0
    assert weight_count(2, 3, 7) == 0
    for d in range(2, 6):
        for t in range(1, 7):
            assert weight_count(d, t, t + 1) == t


@pytest.mark.parametrize("d", range(1, 6))
@pytest.mark.parametrize("t", range(1, 9))
def test_weight_count_sums_and_reflection(d, t):
    assert sum(weight_count(d, t, w) for w in range(t, d * t + 1)) == d**t
    for w in range(t, d * t + 1):
        assert weight_count(d, t, w) == weight_count(d, t, t * (d + 1) - w)


@pytest.mark.parametrize("d,t", [(2, 3), (3, 3), (4, 2), (3, 5)])
def test_weight_counts_against_enumeration(d, t):
    ordered = [0] * (d * t + 1)
    for word in itertools.product(range(1, d + 1), repeat=t):
        ordered[sum(word)] += 1
    multisets = [0] * (d * t + 1)
    for word in itertools.combinations_with_replacement(range(1, d + 1), t):
        multisets[sum(word)] += 1
    for w in range(d * t + 1):
        assert weight_count(d, t, w) == (ordered[w] if w >= t else 0)
    assert list(frequency_vector_counts(d, t)) == multisets
    assert sum(multisets) == comb(d + t - 1, t)
