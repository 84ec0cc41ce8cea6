"""Closed-form bounds, LLL row counts and the exact balanced-column sums.

Probabilities for the uniform model are handled in log space
(k * log1p(-x)) so that large k never underflows.  The balanced-column sums
are exact rationals.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from math import comb, log, log1p
from typing import Callable, NamedTuple

import numpy as np

from covkit.arrays import (
    InfeasibleSchemeError,
    Kind,
    PartitionClass,
    PatternClass,
    Scheme,
    WeightClass,
    deficient_mask,
    required_classes,
)
from covkit.combinatorics import enumerate_partitions, falling_factorial, weight_count
from covkit.recipes import Model, SeedRecipe, SeedRow, best_random_alphabet, default_recipe, seeded_classes

__all__ = [
    "BoundReport",
    "EventProbability",
    "avoid_probability",
    "log_avoid_probability",
    "event_probability",
    "dependency_count",
    "coarse_dependency_bound",
    "lll_min_k",
    "lll_is_estimated",
    "asymptotic_constant",
    "first_moment_constant",
    "phi",
    "psi",
    "golden_section_max",
    "maximize_phi",
    "maximize_psi",
    "balanced_pair_probability",
    "balanced_triple_missing_probability",
    "balanced_weight_deficiency_bound",
    "alphabet_comparison",
    "estimate_balanced_event_probability",
]

LG = math.log(2.0)


@dataclass
class BoundReport:
    name: str
    coefficient: float
    base: float
    t: int
    d: int
    scheme: str
    model: str
    estimated: bool = False
    notes: str = ""

    def to_json(self) -> dict:
        out = asdict(self)
        del out["notes"]
        return out


class EventProbability(NamedTuple):
    union: float  # sum of per-class avoid probabilities
    coarse: float  # class count times the largest term


def _realizations(cls: PatternClass, d: int, t: int) -> int:
    if isinstance(cls, PartitionClass):
        return falling_factorial(d, cls.parts)
    return weight_count(d, t, cls.w)


def log_avoid_probability(cls: PatternClass, d: int, t: int, k: int) -> float:
    """log P(class absent from k uniform random rows over d symbols)."""
    x = _realizations(cls, d, t) / d**t
    if x >= 1.0:
        return 0.0 if k == 0 else -math.inf
    return k * log1p(-x)


def avoid_probability(cls: PatternClass, d: int, t: int, k: int) -> float:
    return math.exp(log_avoid_probability(cls, d, t, k))


def _logsumexp(xs: list[float]) -> float:
    top = max(xs)
    if top == -math.inf:
        return -math.inf
    return top + log(sum(math.exp(x - top) for x in xs))


def _todo(scheme: Scheme, d: int, seeded) -> list[PatternClass]:
    """Classes left to the random rows; d only matters for weights (the
    random alphabet may be smaller than t when the seeds supply the rest)."""
    seeded = set(seeded)
    if scheme.kind is Kind.PARTITION:
        every = [PartitionClass(p) for p in enumerate_partitions(scheme.t, scheme.t)]
    else:
        every = required_classes(scheme, d)
    return [c for c in every if c not in seeded]


def _log_event(scheme: Scheme, d: int, k: int, seeded) -> tuple[float, float]:
    todo = _todo(scheme, d, seeded)
    if not todo:
        return -math.inf, -math.inf
    terms = [log_avoid_probability(c, d, scheme.t, k) for c in todo]
    return _logsumexp(terms), log(len(terms)) + max(terms)


def event_probability(scheme: Scheme, d: int, k: int, seeded=()) -> EventProbability:
    """Union bound on a t-subset being deficient after k uniform rows over d
    symbols, counting only classes not supplied by the seed rows."""
    u, c = _log_event(scheme, d, k, seeded)
    return EventProbability(math.exp(u), math.exp(c))


def dependency_count(n: int, t: int) -> int:
    """Other t-subsets sharing at least one column with a fixed one."""
    return comb(n, t) - comb(n - t, t) - 1


def coarse_dependency_bound(n: int, t: int) -> float:
    """The hand-derived bounds on delta + 1 used for t = 2, 3, 4."""
    if t == 2:
        return 2 * n
    if t == 3:
        return 3 * n * n / 2
    if t == 4:
        return 4 * comb(n, 3)
    return t * comb(n, t - 1)


# --------------------------------------------------------------------------
# balanced-column sums (exact)


class BalancedPair(NamedTuple):
    probability: Fraction
    uniform: Fraction
    ratio: Fraction  # balanced / uniform


def balanced_pair_probability(m: int) -> BalancedPair:
    """Two balanced binary columns of length 2m never differ: 1/C(2m, m).

    `uniform` is the same event for i.i.d. fair bits, (1/2)^(2m); the ratio
    grows like sqrt(m), so balancing hurts here.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    p = Fraction(1, comb(2 * m, m))
    u = Fraction(1, 4**m)
    return BalancedPair(p, u, p / u)


def balanced_triple_missing_probability(m: int) -> Fraction:
    """Probability that three balanced binary columns of length 2m miss one
    fixed two-block partition of the triple:

        sum_j C(m,j)^2 C(2j,j) / C(2m,m)^2
    """
    if not 1 <= m <= 200:
        raise ValueError("m must lie in [1, 200]")
    s = sum(comb(m, j) ** 2 * comb(2 * j, j) for j in range(m + 1))
    return Fraction(s, comb(2 * m, m) ** 2)


def balanced_weight_deficiency_bound(m: int) -> Fraction:
    """Upper bound on a column triple of balanced binary columns (length 2m)
    missing one of the two interior weights:

        2 * sum_{j >= m/2} C(m,j)^2 C(j, 2j-m) / C(2m,m)^2
    """
    if not 1 <= m <= 200:
        raise ValueError("m must lie in [1, 200]")
    s = sum(comb(m, j) ** 2 * comb(j, 2 * j - m) for j in range((m + 1) // 2, m + 1))
    return Fraction(2 * s, comb(2 * m, m) ** 2)


def _log_fraction(x: Fraction) -> float:
    if x == 0:
        return -math.inf
    return log(x.numerator) - log(x.denominator)


def _balanced_closed_form(scheme: Scheme, q: int, seeded) -> Callable[[int], Fraction] | None:
    """Exact per-event probability for k = 2m balanced binary rows, where known."""
    if q != 2:
        return None
    todo = _todo(scheme, 2, seeded)
    t = scheme.t
    if scheme.kind is Kind.PARTITION and t == 2 and todo == [PartitionClass((0, 1))]:
        return lambda m: balanced_pair_probability(m).probability
    if scheme.kind is Kind.PARTITION and t == 3 and all(c.parts == 2 for c in todo):
        return lambda m: len(todo) * balanced_triple_missing_probability(m)
    if scheme.kind is Kind.WEIGHT and t == 3 and todo == [WeightClass(4), WeightClass(5)]:
        return balanced_weight_deficiency_bound
    return None


def _balanced_columns(rng: np.random.Generator, trials: int, width: int, k: int, q: int) -> np.ndarray:
    base = np.repeat(np.arange(q, dtype=np.int8), k // q)
    cols = np.broadcast_to(base, (trials, width, k)).copy()
    return rng.permuted(cols, axis=2)


def estimate_balanced_event_probability(scheme: Scheme, d: int, q: int, k: int, seeded=(),
                                        trials: int = 100_000, seed: int = 0) -> float:
    """Monte-Carlo estimate of a t-subset being deficient when its random
    rows are k balanced rows over q symbols (the seed rows supply `seeded`)."""
    if k % q:
        raise ValueError("k must be a multiple of q for balanced columns")
    todo = _todo(scheme, d, seeded)
    if not todo:
        return 0.0
    every = required_classes(scheme, d)
    need = np.array([c in todo for c in every])
    rng = np.random.default_rng(seed)
    t = scheme.t
    hits = 0
    batch = max(1, min(trials, 2_000_000 // max(1, k * t)))
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        cols = _balanced_columns(rng, b, t, k, q)  # (b, t, k)
        cells = cols.transpose(2, 0, 1).reshape(k, b * t).astype(np.int32)
        subsets = np.arange(b * t, dtype=np.int32).reshape(b, t)
        hits += int(deficient_mask(cells, subsets, scheme, d, need).sum())
        done += b
    return hits / trials


# --------------------------------------------------------------------------
# LLL row counts


def _setup(n: int, t: int, d: int, scheme: Scheme | Kind | str):
    if not isinstance(scheme, Scheme):
        scheme = Scheme(Kind(scheme), t)
    if n < t:
        raise ValueError(f"need n >= t (n={n}, t={t})")
    recipe = default_recipe(scheme, n, d)
    seeded = seeded_classes(recipe, scheme, d)
    return scheme, recipe, seeded


def lll_is_estimated(n: int, t: int, d: int, scheme, model) -> bool:
    scheme, recipe, seeded = _setup(n, t, d, scheme)
    if Model(model) is Model.UNIFORM or not _todo(scheme, d, seeded):
        return False
    return _balanced_closed_form(scheme, recipe.random_alphabet, seeded) is None


def lll_min_k(n: int, t: int, d: int, scheme, model=Model.UNIFORM, *,
              mc_trials: int = 100_000, mc_seed: int = 0, k_limit: int = 100_000) -> int:
    """Smallest number of random rows k with e * p(k) * (delta + 1) <= 1.

    Seed rows and the random alphabet follow default_recipe.  Returns 0
    when the seed rows already supply every class.  For balanced columns k
    is a multiple of the random alphabet size.
    """
    scheme, recipe, seeded = _setup(n, t, d, scheme)
    model = Model(model)
    q = recipe.random_alphabet
    if not _todo(scheme, d, seeded):
        return 0
    log_budget = -1.0 - log(dependency_count(n, t) + 1)  # log p must not exceed this

    if model is Model.UNIFORM:
        # p(k) = sum_c exp(k * a_c) is decreasing in k; bracket then bisect
        def ok(k: int) -> bool:
            return _log_event(scheme, q, k, seeded)[0] <= log_budget + 1e-12

        hi = 1
        while not ok(hi):
            hi *= 2
            if hi > k_limit:
                raise RuntimeError("k_limit exceeded")
        lo = hi // 2 + 1 if hi > 1 else 1
        while lo < hi:
            mid = (lo + hi) // 2
            if ok(mid):
                hi = mid
            else:
                lo = mid + 1
        return hi

    closed = _balanced_closed_form(scheme, q, seeded)
    for m in range(1, k_limit // q + 1):
        if closed is not None and m <= 200:
            lp = _log_fraction(closed(m))
        else:
            p = estimate_balanced_event_probability(scheme, d, q, q * m, seeded, mc_trials, mc_seed + m)
            lp = log(p) if p > 0 else -math.inf
        if lp <= log_budget + 1e-12:
            return q * m
    raise RuntimeError("k_limit exceeded")


# --------------------------------------------------------------------------
# maximizers

_INVPHI = (math.sqrt(5) - 1) / 2


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-12):
    """Maximize a unimodal f on [a, b]; returns (x, f(x))."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = (a + b) / 2
    return x, f(x)


def _xlogx(x: float) -> float:
    return 0.0 if x <= 0.0 else x * log(x)


def _log_phi(a: float) -> float:
    return _xlogx(2 * a) - 4 * _xlogx(a) - 2 * _xlogx(1 - a)


def _log_psi(a: float) -> float:
    return -(_xlogx(a) + 3 * _xlogx(1 - a) + _xlogx(2 * a - 1))


def phi(a: float) -> float:
    """(2A)^(2A) / (A^(4A) (1-A)^(2(1-A))) on [0, 1]; phi(0)=1, phi(1)=4."""
    if not 0.0 <= a <= 1.0:
        raise ValueError("A must lie in [0, 1]")
    return math.exp(_log_phi(a))


def psi(a: float) -> float:
    """1 / (A^A (1-A)^(3(1-A)) (2A-1)^(2A-1)) on [1/2, 1]."""
    if not 0.5 <= a <= 1.0:
        raise ValueError("A must lie in [1/2, 1]")
    return math.exp(_log_psi(a))


def maximize_phi(eps: float = 1e-9, tol: float = 1e-12) -> tuple[float, float]:
    return golden_section_max(phi, eps, 1 - eps, tol)


def maximize_psi(eps: float = 1e-9, tol: float = 1e-12) -> tuple[float, float]:
    a, v = golden_section_max(psi, 0.5 + eps, 1 - eps, tol)
    if psi(1.0) > v:
        return 1.0, psi(1.0)
    return a, v


# --------------------------------------------------------------------------
# asymptotic constants

_PUBLISHED_ROUNDING = {
    ("first-moment", "partition", 3, "beta"): "published as 8.25; the formula gives 8.274",
}


def _partition_setup(t: int, d: int | None, variant: str | None):
    """(random alphabet, seeded classes, label d) for a partition preset."""
    if variant == "alpha":  # alphabet of size n: distinct + all-ones rows, t-1 random symbols
        if t < 3:
            raise ValueError("the alpha preset needs t >= 3")
        q = t - 1
        seeded = {PartitionClass((0,) * t), PartitionClass(tuple(range(t)))}
        return q, seeded, q
    if variant == "beta":
        d = t
    elif variant is not None:
        raise ValueError(f"unknown variant {variant!r}")
    if d is None:
        raise ValueError("alphabet size d is required")
    scheme = Scheme.partition(t)
    seeded = seeded_classes(SeedRecipe((SeedRow.ALL_ONES,)), scheme, d)
    return best_random_alphabet(scheme, d, seeded), seeded, d


def _uniform_base(scheme: Scheme, q: int, seeded) -> float:
    todo = _todo(scheme, q, seeded)
    if not todo:
        raise ValueError("the seed rows already supply every class")
    scarcest = min(Fraction(_realizations(c, q, scheme.t), q**scheme.t) for c in todo)
    return float(1 / (1 - scarcest))


def asymptotic_constant(scheme, t: int, d: int | None = None, model=Model.UNIFORM,
                        variant: str | None = None) -> BoundReport:
    """Leading coefficient c in k <= c lg n from the local lemma.

    Uniform rows give (t-1)/lg(base) where 1/base is the largest
    per-row avoid probability among unseeded classes.  Balanced binary
    columns are supported for partitions with t=3 (alpha preset) and t=2, and
    for weights with t=3, d=2.
    """
    kind = Kind(scheme.kind if isinstance(scheme, Scheme) else scheme)
    model = Model(model)
    if kind is Kind.PARTITION:
        q, seeded, d_label = _partition_setup(t, d, variant)
        if q < t and PartitionClass(tuple(range(t))) not in seeded:
            raise InfeasibleSchemeError("random alphabet too small")
        sch = Scheme.partition(t)
    else:
        if d is None:
            raise ValueError("alphabet size d is required")
        if variant is not None:
            raise ValueError("variants apply to the partition scheme only")
        sch = Scheme.weight(t)
        recipe = default_recipe(sch, t, d)
        q, seeded, d_label = d, seeded_classes(recipe, sch, d), d
    name = f"{kind.value}-t{t}" + (f"-{variant}" if variant else f"-d{d_label}")
    if model is Model.UNIFORM:
        base = _uniform_base(sch, q, seeded)
        return BoundReport(name, (t - 1) / math.log2(base), base, t, d_label, kind.value, model.value)

    # balanced binary columns: per-event probability ~ (rate)^m for k = 2m rows
    if kind is Kind.PARTITION and t == 3 and q == 2:
        _, top = maximize_phi()
        rate = 16 / top  # per pair of rows
        notes = "balanced columns: exponent from the phi maximizer"
    elif kind is Kind.PARTITION and t == 2 and q == 2:
        rate = 4.0  # 1/C(2m,m) ~ 4^-m up to polynomial factors
        notes = "balanced columns: central binomial asymptotics"
    elif kind is Kind.WEIGHT and t == 3 and d == 2:
        _, top = maximize_psi()
        rate = 16 / top
        notes = "balanced columns: exponent from the psi maximizer"
    else:
        raise ValueError(f"no closed form for balanced columns with {kind.value}, t={t}, d={d_label}")
    base = math.sqrt(rate)
    return BoundReport(name + "-balanced", 2 * (t - 1) / math.log2(rate), base, t, d_label,
                       kind.value, model.value, notes=notes)


def first_moment_constant(scheme, t: int, d: int | None = None, model=Model.UNIFORM,
                          variant: str | None = None) -> BoundReport:
    """Coefficient from E[X] < 1 alone: t/lg(base), i.e. t/(t-1) times the
    local-lemma coefficient."""
    rep = asymptotic_constant(scheme, t, d, model, variant)
    kind = Kind(scheme.kind if isinstance(scheme, Scheme) else scheme)
    note = _PUBLISHED_ROUNDING.get(("first-moment", kind.value, t, variant), "")
    return BoundReport("first-moment-" + rep.name, rep.coefficient * t / (t - 1), rep.base,
                       rep.t, rep.d, rep.scheme, rep.model, rep.estimated, note)


# --------------------------------------------------------------------------
# alphabet comparison for t = 3


@dataclass(frozen=True)
class AlphabetComparison:
    d: int
    three_part_base: Fraction
    two_part_base: Fraction
    reference: Fraction  # 21/27, the d = 3 base for both classes
    three_part_smaller: bool
    two_part_not_smaller: bool


def alphabet_comparison(d: int, t: int = 3) -> AlphabetComparison:
    """Per-row avoid probabilities of 3-block and 2-block partitions of a
    triple over d symbols, compared with the d = 3 value 21/27."""
    if d < 2:
        raise ValueError("d must be >= 2")
    if t != 3:
        raise ValueError("only t = 3 is supported")
    cube = d**3
    three = Fraction(cube - falling_factorial(d, 3), cube)
    two = Fraction(cube - falling_factorial(d, 2), cube)
    ref = Fraction(21, 27)
    return AlphabetComparison(d, three, two, ref, three < ref, two >= ref)
