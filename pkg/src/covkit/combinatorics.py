"""Exact integer combinatorics: Bell/Stirling numbers, set partitions as
restricted growth strings, falling factorials and weight counts."""

from __future__ import annotations

from functools import lru_cache
from math import comb
from typing import Sequence

__all__ = [
    "bell",
    "stirling2",
    "enumerate_partitions",
    "is_rgs",
    "word_to_rgs",
    "falling_factorial",
    "weight_count",
    "weight_counts",
    "frequency_vector_counts",
    "comb",
]

MAX_EXACT_T = 20
MAX_ENUM_T = 12


@lru_cache(maxsize=None)
def _stirling_row(t: int) -> tuple[int, ...]:
    if t == 0:
        return (1,)
    prev = _stirling_row(t - 1)
    row = [0] * (t + 1)
    for r in range(1, t + 1):
        row[r] = r * (prev[r] if r < len(prev) else 0) + prev[r - 1]
    return tuple(row)


def stirling2(t: int, r: int) -> int:
    """Number of partitions of a t-set into exactly r non-empty blocks."""
    if not 1 <= t <= MAX_EXACT_T:
        raise ValueError(f"t={t} outside [1, {MAX_EXACT_T}]")
    if not 1 <= r <= t:
        raise ValueError(f"r={r} outside [1, t={t}]")
    return _stirling_row(t)[r]


def bell(t: int) -> int:
    """Number of set partitions of a t-set."""
    if not 1 <= t <= MAX_EXACT_T:
        raise ValueError(f"t={t} outside [1, {MAX_EXACT_T}]")
    return sum(_stirling_row(t))


def is_rgs(labels: Sequence[int]) -> bool:
    top = -1
    for x in labels:
        if x < 0 or x > top + 1:
            return False
        top = max(top, x)
    return len(labels) > 0


def enumerate_partitions(t: int, max_parts: int) -> list[tuple[int, ...]]:
    """All restricted growth strings of length t with at most max_parts
    blocks, in lexicographic order."""
    if not 1 <= t <= MAX_ENUM_T:
        raise ValueError(f"t={t} outside [1, {MAX_ENUM_T}]")
    if max_parts < 1:
        raise ValueError("max_parts must be >= 1")
    out: list[tuple[int, ...]] = []
    word = [0] * t

    def extend(i: int, top: int) -> None:
        if i == t:
            out.append(tuple(word))
            return
        for x in range(min(top + 2, max_parts)):
            word[i] = x
            extend(i + 1, max(top, x))

    extend(1, 0)
    return out


def word_to_rgs(word: Sequence) -> tuple[int, ...]:
    """Relabel each symbol by the rank of its first occurrence.

    >>> word_to_rgs((5, 7, 5))
    (0, 1, 0)
    """
    if len(word) == 0:
        raise ValueError("empty word")
    seen: dict = {}
    return tuple(seen.setdefault(s, len(seen)) for s in word)


def falling_factorial(d: int, r: int) -> int:
    if r < 0:
        raise ValueError("r must be non-negative")
    out = 1
    for i in range(r):
        out *= d - i
    return out


@lru_cache(maxsize=None)
def weight_counts(d: int, t: int) -> tuple[int, ...]:
    """Ordered word counts indexed by weight: entry w is the number of words in
    {1..d}^t whose symbols sum to w (entries below t are zero)."""
    if d < 1 or t < 0:
        raise ValueError("need d >= 1 and t >= 0")
    row = [1]  # length-0 words: weight 0 only
    for _ in range(t):
        nxt = [0] * (len(row) + d)
        for w, c in enumerate(row):
            if c:
                for s in range(1, d + 1):
                    nxt[w + s] += c
        row = nxt
    return tuple(row)


def weight_count(d: int, t: int, w: int) -> int:
    """Number of ordered words in {1..d}^t with symbol sum w."""
    if d < 1 or t < 1:
        raise ValueError("need d >= 1 and t >= 1")
    if w < t or w > d * t:
        return 0
    return weight_counts(d, t)[w]


@lru_cache(maxsize=None)
def frequency_vector_counts(d: int, t: int) -> tuple[int, ...]:
    """Number of frequency vectors (x_1..x_d) with sum x_j = t and
    sum j*x_j = w, indexed by w.  This is the unordered (multiset)
    analogue of weight_counts."""
    if d < 1 or t < 0:
        raise ValueError("need d >= 1 and t >= 0")
    # table[c][w]: multisets of size c over the symbols processed so far
    table = [[0] * (d * t + 1) for _ in range(t + 1)]
    table[0][0] = 1
    for s in range(1, d + 1):
        for c in range(1, t + 1):
            for w in range(s, d * t + 1):
                table[c][w] += table[c - 1][w - s]
    return tuple(table[t])
