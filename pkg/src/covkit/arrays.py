"""Array model, text format and the coverage predicate for both schemes.

Symbols are stored 0-based internally and rendered 1..d externally.  Column
subsets are always visited in colexicographic order, which is also the
order of their combinatorial-number-system rank.
"""

from __future__ import annotations

import enum
import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial
from typing import Iterable, Iterator, NamedTuple, Sequence, Union

import numpy as np

from covkit.combinatorics import enumerate_partitions

__all__ = [
    "Kind",
    "Scheme",
    "PartitionClass",
    "WeightClass",
    "PatternClass",
    "Array",
    "DeficiencyReport",
    "Deficiency",
    "InfeasibleSchemeError",
    "ArrayFormatError",
    "required_classes",
    "covered_classes",
    "find_deficiencies",
    "is_covering",
    "oracle_is_covering",
    "parse_array",
    "serialize_array",
    "colex_subsets",
    "colex_rank",
    "colex_unrank",
    "subsets_touching",
    "deficient_mask",
    "DEFAULT_CAP",
]

DEFAULT_CAP = 100
_CHUNK = 1 << 16


class Kind(str, enum.Enum):
    PARTITION = "partition"
    WEIGHT = "weight"


@dataclass(frozen=True)
class Scheme:
    kind: Kind
    t: int

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.t < 1:
            raise ValueError("strength t must be >= 1")

    @classmethod
    def partition(cls, t: int) -> "Scheme":
        return cls(Kind.PARTITION, t)

    @classmethod
    def weight(cls, t: int) -> "Scheme":
        return cls(Kind.WEIGHT, t)

    def __str__(self):
        return f"{self.kind.value}(t={self.t})"


class PartitionClass(NamedTuple):
    rgs: tuple[int, ...]

    @property
    def parts(self) -> int:
        return max(self.rgs) + 1

    def to_json(self) -> dict:
        return {"kind": "partition", "rgs": list(self.rgs)}


class WeightClass(NamedTuple):
    w: int

    def to_json(self) -> dict:
        return {"kind": "weight", "w": self.w}


PatternClass = Union[PartitionClass, WeightClass]


class InfeasibleSchemeError(ValueError):
    """The scheme demands classes the alphabet cannot produce."""


class ArrayFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class Array:
    """Immutable k x n array over an alphabet of size d."""

    __slots__ = ("_cells", "d")

    def __init__(self, cells, d: int):
        a = np.array(cells, dtype=np.int64)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError("cells must be a non-empty 2-d matrix")
        if d < 1:
            raise ValueError("alphabet size must be >= 1")
        if a.min() < 0 or a.max() >= d:
            raise ValueError(f"cells must lie in [0, {d})")
        a = a.astype(np.int32)
        a.flags.writeable = False
        self._cells = a
        self.d = int(d)

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]], d: int) -> "Array":
        """Build from 1-based rows as printed in tables."""
        return cls(np.asarray([list(r) for r in rows], dtype=np.int64) - 1, d)

    @property
    def cells(self) -> np.ndarray:
        return self._cells

    @property
    def k(self) -> int:
        return self._cells.shape[0]

    @property
    def n(self) -> int:
        return self._cells.shape[1]

    def rows(self) -> list[tuple[int, ...]]:
        """1-based rows."""
        return [tuple(int(x) + 1 for x in r) for r in self._cells]

    def delete_row(self, i: int) -> "Array":
        return Array(np.delete(self._cells, i, axis=0), self.d)

    def __eq__(self, other):
        if not isinstance(other, Array):
            return NotImplemented
        return self.d == other.d and np.array_equal(self._cells, other._cells)

    def __hash__(self):
        return hash((self.d, self._cells.shape, self._cells.tobytes()))

    def __repr__(self):
        return f"Array(k={self.k}, n={self.n}, d={self.d})"


class Deficiency(NamedTuple):
    columns: tuple[int, ...]
    missing: tuple[PatternClass, ...]

    def to_json(self) -> dict:
        return {"columns": list(self.columns), "missing": [c.to_json() for c in self.missing]}


@dataclass
class DeficiencyReport:
    covering: bool
    deficiencies: list[Deficiency] = field(default_factory=list)
    truncated: bool = False
    deficient_count: int = 0

    def to_json(self) -> dict:
        return {
            "covering": self.covering,
            "truncated": self.truncated,
            "deficiencies": [x.to_json() for x in self.deficiencies],
        }


# --------------------------------------------------------------------------
# pattern classes


def _check_feasible(scheme: Scheme, d: int) -> None:
    if d < 1:
        raise ValueError("alphabet size must be >= 1")
    if scheme.kind is Kind.PARTITION and d < scheme.t:
        raise InfeasibleSchemeError(
            f"partition scheme with t={scheme.t} needs at least t symbols, got d={d}"
        )


def required_classes(scheme: Scheme, d: int) -> list[PatternClass]:
    _check_feasible(scheme, d)
    t = scheme.t
    if scheme.kind is Kind.PARTITION:
        return [PartitionClass(p) for p in enumerate_partitions(t, t)]
    return [WeightClass(w) for w in range(t, d * t + 1)]


@lru_cache(maxsize=None)
def _partition_lut(t: int) -> np.ndarray:
    # Code of a word: sum_i f_i * i!, f_i = first index holding the same symbol.
    lut = np.full(factorial(t), -1, dtype=np.int32)
    for idx, rgs in enumerate(enumerate_partitions(t, t)):
        code = 0
        for i, lab in enumerate(rgs):
            code += rgs.index(lab) * factorial(i)
        lut[code] = idx
    return lut


def _class_codes(cells: np.ndarray, subsets: np.ndarray, scheme: Scheme) -> np.ndarray:
    """Class index realized by every row on every subset, shape (k, m)."""
    vals = cells[:, subsets]  # (k, m, t)
    t = scheme.t
    if scheme.kind is Kind.WEIGHT:
        return vals.sum(axis=2)  # 0-based symbols: weight - t
    code = np.zeros(vals.shape[:2], dtype=np.int64)
    for i in range(1, t):
        first = np.full(vals.shape[:2], i, dtype=np.int64)
        for j in range(i - 1, -1, -1):
            first = np.where(vals[:, :, j] == vals[:, :, i], j, first)
        code += first * factorial(i)
    return _partition_lut(t)[code]


def _num_classes(scheme: Scheme, d: int) -> int:
    if scheme.kind is Kind.PARTITION:
        return len(enumerate_partitions(scheme.t, scheme.t))
    return (d - 1) * scheme.t + 1


def _coverage(cells: np.ndarray, subsets: np.ndarray, scheme: Scheme, d: int) -> np.ndarray:
    """Boolean (m, classes) matrix: class c realized on subset i."""
    codes = _class_codes(cells, subsets, scheme)
    m = subsets.shape[0]
    cov = np.zeros((m, _num_classes(scheme, d)), dtype=bool)
    cov[np.broadcast_to(np.arange(m), codes.shape), codes] = True
    return cov


# --------------------------------------------------------------------------
# colex subsets


@lru_cache(maxsize=64)
def _colex_all(n: int, t: int) -> np.ndarray:
    if t == 0:
        return np.zeros((1, 0), dtype=np.int32)
    prev = _colex_all(n - 1, t - 1) if n >= 1 else np.zeros((0, t - 1), dtype=np.int32)
    blocks = []
    for top in range(t - 1, n):
        head = prev[: comb(top, t - 1)]
        blocks.append(np.hstack([head, np.full((head.shape[0], 1), top, dtype=np.int32)]))
    if not blocks:
        return np.zeros((0, t), dtype=np.int32)
    out = np.vstack(blocks)
    out.flags.writeable = False
    return out


def colex_subsets(n: int, t: int, chunk: int = _CHUNK) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (offset, block) pairs covering all t-subsets of range(n) in colex
    order; blocks are grouped by largest element to bound memory."""
    if t > n:
        return
    if t == 0:
        yield 0, np.zeros((1, 0), dtype=np.int32)
        return
    heads = _colex_all(n - 1, t - 1) if t > 1 else np.zeros((1, 0), dtype=np.int32)
    offset = 0
    pending: list[np.ndarray] = []
    size = 0
    for top in range(t - 1, n):
        h = heads[: comb(top, t - 1)]
        pending.append(np.hstack([h, np.full((h.shape[0], 1), top, dtype=np.int32)]))
        size += h.shape[0]
        if size >= chunk:
            block = np.vstack(pending)
            yield offset, block
            offset += size
            pending, size = [], 0
    if pending:
        yield offset, np.vstack(pending)


def colex_rank(subsets: np.ndarray) -> np.ndarray:
    """Colex rank of sorted subsets (rows): sum_i C(c_i, i+1)."""
    subsets = np.asarray(subsets, dtype=np.int64)
    rank = np.zeros(subsets.shape[0], dtype=np.int64)
    for i in range(subsets.shape[1]):
        c = subsets[:, i]
        # C(c, i+1) computed exactly in int64 for the sizes we handle
        num = np.ones_like(c)
        for j in range(i + 1):
            num = num * (c - j) // (j + 1)
        rank += np.where(c >= i + 1, num, 0)
    return rank


def colex_unrank(rank: int, t: int) -> tuple[int, ...]:
    out = []
    for i in range(t, 0, -1):
        c = i - 1
        while comb(c + 1, i) <= rank:
            c += 1
        rank -= comb(c, i)
        out.append(c)
    return tuple(reversed(out))


def subsets_touching(columns: Sequence[int], n: int, t: int) -> np.ndarray:
    """All t-subsets of range(n) meeting `columns`, sorted rows, colex order."""
    if t == 1:
        return np.array(sorted(set(columns)), dtype=np.int32).reshape(-1, 1)
    rest = _colex_all(n - 1, t - 1).astype(np.int64)
    parts = []
    for c in set(columns):
        shifted = rest + (rest >= c)
        parts.append(np.sort(np.hstack([shifted, np.full((rest.shape[0], 1), c)]), axis=1))
    allsub = np.vstack(parts)
    ranks = colex_rank(allsub)
    _, first = np.unique(ranks, return_index=True)
    return allsub[first].astype(np.int32)


# --------------------------------------------------------------------------
# coverage predicate


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("COVKIT_THREADS", "1")))
    except ValueError:
        return 1


def covered_classes(array: Array, cols: Sequence[int], scheme: Scheme) -> set[PatternClass]:
    cols = tuple(cols)
    if len(cols) != scheme.t:
        raise ValueError(f"expected {scheme.t} columns, got {len(cols)}")
    if any(b <= a for a, b in zip(cols, cols[1:])) or cols[0] < 0 or cols[-1] >= array.n:
        raise ValueError("columns must be strictly increasing within [0, n)")
    sub = np.array([cols], dtype=np.int32)
    codes = np.unique(_class_codes(array.cells, sub, scheme))
    if scheme.kind is Kind.WEIGHT:
        return {WeightClass(int(c) + scheme.t) for c in codes}
    parts = enumerate_partitions(scheme.t, scheme.t)
    return {PartitionClass(parts[int(c)]) for c in codes}


def deficient_mask(cells: np.ndarray, subsets: np.ndarray, scheme: Scheme, d: int,
                   required: np.ndarray | None = None) -> np.ndarray:
    """Per-subset flag: some required class is missing.  `required` is an
    optional boolean mask over class indices (default: all classes)."""
    cov = _coverage(cells, subsets, scheme, d)
    if required is not None:
        cov = cov | ~required
    return ~cov.all(axis=1)


def find_deficiencies(array: Array, scheme: Scheme, cap: int = DEFAULT_CAP) -> DeficiencyReport:
    """Scan every t-subset of columns and list those missing a class.

    At most `cap` deficient subsets are listed; `deficient_count` and
    `covering` always reflect the full scan.
    """
    required = required_classes(scheme, array.d)
    if scheme.t > array.n:
        raise ValueError(f"t={scheme.t} exceeds column count n={array.n}")
    blocks = list(colex_subsets(array.n, scheme.t))

    def work(block):
        _, subs = block
        cov = _coverage(array.cells, subs, scheme, array.d)
        bad = np.flatnonzero(~cov.all(axis=1))
        return subs, cov, bad

    workers = min(_threads(), len(blocks))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(work, blocks))
    else:
        results = [work(b) for b in blocks]

    report = DeficiencyReport(covering=True)
    for subs, cov, bad in results:  # block order is colex order
        report.deficient_count += len(bad)
        for i in bad:
            if len(report.deficiencies) >= cap:
                report.truncated = True
                break
            missing = tuple(required[c] for c in np.flatnonzero(~cov[i]))
            report.deficiencies.append(Deficiency(tuple(int(x) for x in subs[i]), missing))
    report.covering = report.deficient_count == 0
    return report


def is_covering(array: Array, scheme: Scheme) -> bool:
    return find_deficiencies(array, scheme, cap=0).covering


def oracle_is_covering(array: Array, scheme: Scheme) -> bool:
    """Deliberately naive re-implementation used as a test oracle."""
    t = scheme.t
    rows = array.rows()
    if scheme.kind is Kind.PARTITION:
        if array.d < t:
            raise InfeasibleSchemeError(f"d={array.d} < t={t}")
        blocks_of = [p for p in itertools.product(range(t), repeat=t)
                     if all(p[i] <= max(p[:i], default=-1) + 1 for i in range(t))]
        for cols in itertools.combinations(range(array.n), t):
            for pattern in blocks_of:
                found = False
                for row in rows:
                    word = [row[c] for c in cols]
                    if all((word[i] == word[j]) == (pattern[i] == pattern[j])
                           for i in range(t) for j in range(t)):
                        found = True
                if not found:
                    return False
        return True
    for cols in itertools.combinations(range(array.n), t):
        for w in range(t, array.d * t + 1):
            found = False
            for row in rows:
                if sum(row[c] for c in cols) == w:
                    found = True
            if not found:
                return False
    return True


# --------------------------------------------------------------------------
# text format


def serialize_array(array: Array, scheme: Scheme) -> str:
    lines = [f"{array.k} {array.n} {array.d} {scheme.kind.value} {scheme.t}"]
    lines += [" ".join(str(x) for x in row) for row in array.rows()]
    return "\n".join(lines) + "\n"


def parse_array(text: str) -> tuple[Array, Scheme]:
    """Parse the `k n d scheme t` header plus k rows of 1-based symbols."""
    lines = [(i + 1, ln) for i, ln in enumerate(text.splitlines()) if ln.strip()]
    if not lines:
        raise ArrayFormatError(1, "empty input")
    lineno, header = lines[0]
    fields = header.split()
    if len(fields) != 5:
        raise ArrayFormatError(lineno, "header must be 'k n d scheme t'")
    try:
        k, n, d, t = int(fields[0]), int(fields[1]), int(fields[2]), int(fields[4])
    except ValueError:
        raise ArrayFormatError(lineno, "k, n, d, t must be integers") from None
    if fields[3] not in ("partition", "weight"):
        raise ArrayFormatError(lineno, f"unknown scheme {fields[3]!r}")
    if k < 1 or n < 1 or d < 1 or t < 1:
        raise ArrayFormatError(lineno, "k, n, d, t must be positive")
    body = lines[1:]
    if len(body) != k:
        raise ArrayFormatError(body[-1][0] if body else lineno,
                               f"expected {k} rows, found {len(body)}")
    rows = []
    for ln, text_row in body:
        try:
            row = [int(x) for x in text_row.split()]
        except ValueError:
            raise ArrayFormatError(ln, "non-integer symbol") from None
        if len(row) != n:
            raise ArrayFormatError(ln, f"expected {n} symbols, found {len(row)}")
        bad = [x for x in row if not 1 <= x <= d]
        if bad:
            raise ArrayFormatError(ln, f"symbol {bad[0]} outside 1..{d}")
        rows.append(row)
    return Array.from_rows(rows, d), Scheme(Kind(fields[3]), t)

