"""Fixed seed rows and the choice of alphabet for the random rows."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from covkit.arrays import Kind, PartitionClass, PatternClass, Scheme, WeightClass, required_classes
from covkit.combinatorics import falling_factorial, weight_count

__all__ = [
    "SeedRow",
    "Model",
    "SeedRecipe",
    "seed_rows",
    "seeded_classes",
    "best_random_alphabet",
    "default_recipe",
]


class SeedRow(str, enum.Enum):
    ALL_ONES = "all-ones"
    ALL_D = "all-d"
    DISTINCT = "distinct"


class Model(str, enum.Enum):
    UNIFORM = "uniform"
    BALANCED = "balanced"


@dataclass(frozen=True)
class SeedRecipe:
    """Rows laid down before the random phase.

    random_alphabet limits the random rows to symbols 1..random_alphabet
    (None means the whole alphabet).
    """

    rows: tuple[SeedRow, ...]
    random_alphabet: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(SeedRow(r) for r in self.rows))


def seed_rows(recipe: SeedRecipe, n: int, d: int) -> list[tuple[int, ...]]:
    """The seed rows as 1-based tuples."""
    out = []
    for r in recipe.rows:
        if r is SeedRow.ALL_ONES:
            out.append((1,) * n)
        elif r is SeedRow.ALL_D:
            out.append((d,) * n)
        else:
            if d < n:
                raise ValueError(f"distinct row needs d >= n (d={d}, n={n})")
            out.append(tuple(range(1, n + 1)))
    return out


def seeded_classes(recipe: SeedRecipe, scheme: Scheme, d: int) -> set[PatternClass]:
    """Classes every t-subset receives from the seed rows alone."""
    t = scheme.t
    got: set[PatternClass] = set()
    for r in recipe.rows:
        if scheme.kind is Kind.PARTITION:
            if r is SeedRow.DISTINCT:
                got.add(PartitionClass(tuple(range(t))))
            else:
                got.add(PartitionClass((0,) * t))
        elif r is SeedRow.ALL_ONES:
            got.add(WeightClass(t))
        elif r is SeedRow.ALL_D:
            got.add(WeightClass(d * t))
    return got


def _realizations(cls: PatternClass, q: int, t: int) -> int:
    if isinstance(cls, PartitionClass):
        return falling_factorial(q, cls.parts)
    return weight_count(q, t, cls.w)


def best_random_alphabet(scheme: Scheme, d: int, seeded: set[PatternClass]) -> int:
    """Alphabet size q <= d for the random rows that makes the scarcest
    unseeded class as likely as possible in a single uniform row.

    Weight classes need the full alphabet.  For partitions a smaller q can
    win: with the all-distinct class seeded, binary rows beat larger ones
    for t=3.
    """
    if scheme.kind is Kind.WEIGHT:
        return d
    t = scheme.t
    todo = [c for c in required_classes(scheme, d) if c not in seeded]
    if not todo:
        return 1
    if t == 2:
        return d  # two-block rate 1 - 1/q increases with q
    lo = max(2, max(c.parts for c in todo))
    best_q, best = lo, Fraction(-1)
    q = lo
    while q <= d:
        if best >= 0 and Fraction(q - 1, q ** (t - 1)) < best:
            break  # the two-block realization rate only falls from here on
        worst = min(Fraction(_realizations(c, q, t), q**t) for c in todo)
        if worst > best:
            best_q, best = q, worst
        q += 1
    return best_q


def default_recipe(scheme: Scheme, n: int, d: int) -> SeedRecipe:
    required_classes(scheme, d)  # feasibility
    if scheme.kind is Kind.PARTITION:
        rows = (SeedRow.ALL_ONES, SeedRow.DISTINCT) if d >= n else (SeedRow.ALL_ONES,)
    elif d == 1:
        rows = (SeedRow.ALL_ONES,)
    else:
        rows = (SeedRow.ALL_ONES, SeedRow.ALL_D)
    recipe = SeedRecipe(rows)
    q = best_random_alphabet(scheme, d, seeded_classes(recipe, scheme, d))
    return SeedRecipe(rows, q)
