"""Randomized constructions: seed rows plus uniform or balanced random rows,
repaired by Moser-Tardos resampling of deficient column subsets."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import comb

import numpy as np

from covkit.arrays import (
    Array,
    Kind,
    Scheme,
    colex_rank,
    colex_subsets,
    colex_unrank,
    deficient_mask,
    required_classes,
    subsets_touching,
)
from covkit.recipes import Model, SeedRecipe, SeedRow, default_recipe, seed_rows, seeded_classes

__all__ = [
    "SeedRow",
    "SeedRecipe",
    "Model",
    "ConstructParams",
    "Construction",
    "ResamplingLimitError",
    "ConstructionError",
    "seed_rows",
    "default_recipe",
    "seeded_classes",
    "uniform_fill",
    "balanced_fill",
    "moser_tardos",
    "construct",
]

log = logging.getLogger(__name__)


class ResamplingLimitError(RuntimeError):
    def __init__(self, rounds: int, last_deficiency: tuple[int, ...] | None):
        super().__init__(f"still deficient after {rounds} resampling rounds "
                         f"(last deficient columns: {last_deficiency})")
        self.rounds = rounds
        self.last_deficiency = last_deficiency


class ConstructionError(RuntimeError):
    pass


@dataclass(frozen=True)
class ConstructParams:
    n: int
    t: int
    d: int
    scheme: Kind
    recipe: SeedRecipe
    model: Model
    k_random: int
    rng_seed: int = 0
    max_rounds: int | None = None  # default 1000 * C(n, t)
    max_restarts: int = 20

    def __post_init__(self):
        object.__setattr__(self, "scheme", Kind(self.scheme))
        object.__setattr__(self, "model", Model(self.model))
        if self.k_random < 0:
            raise ValueError("k_random must be >= 0")
        q = self.random_alphabet
        if self.model is Model.BALANCED and self.k_random % q:
            raise ValueError(f"balanced columns need k_random divisible by {q}")

    @property
    def random_alphabet(self) -> int:
        return self.recipe.random_alphabet or self.d


@dataclass
class Construction:
    array: Array
    scheme: Scheme
    k_random: int
    rounds: int
    attempts: list[tuple[int, int]] = field(default_factory=list)  # (total rows, rounds)


def uniform_fill(k_random: int, n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """k_random x n i.i.d. uniform symbols, 0-based (0 renders as 1)."""
    return rng.integers(0, d, size=(k_random, n), dtype=np.int32)


def balanced_fill(k_random: int, n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Each column an independent uniform shuffle of k_random/d copies of
    every symbol (0-based)."""
    if k_random % d:
        raise ValueError(f"k_random={k_random} is not a multiple of d={d}")
    base = np.repeat(np.arange(d, dtype=np.int32), k_random // d)
    cols = np.broadcast_to(base[:, None], (k_random, n)).copy()
    return rng.permuted(cols, axis=0)


def moser_tardos(params: ConstructParams) -> Construction:
    """Sample the random rows, then repeatedly resample all random cells in
    the lowest deficient column subset until none is left."""
    p = params
    scheme = Scheme(p.scheme, p.t)
    required_classes(scheme, p.d)
    if p.t > p.n:
        raise ValueError("t exceeds n")
    rng = np.random.default_rng(p.rng_seed)
    q = p.random_alphabet
    fill = balanced_fill if p.model is Model.BALANCED else uniform_fill
    seeds = np.array(seed_rows(p.recipe, p.n, p.d), dtype=np.int32).reshape(-1, p.n) - 1
    s = seeds.shape[0]
    cells = np.vstack([seeds, fill(p.k_random, p.n, q, rng)])
    if cells.shape[0] == 0:
        raise ValueError("an array needs at least one row")

    deficient = np.concatenate([deficient_mask(cells, block, scheme, p.d)
                                for _, block in colex_subsets(p.n, p.t)])
    max_rounds = p.max_rounds if p.max_rounds is not None else 1000 * comb(p.n, p.t)
    rounds = 0
    last = None
    while True:
        j = int(np.argmax(deficient))
        if not deficient[j]:
            break
        last = colex_unrank(j, p.t)
        if rounds >= max_rounds or p.k_random == 0:
            raise ResamplingLimitError(rounds, last)
        rounds += 1
        cols = list(last)
        cells[s:, cols] = fill(p.k_random, len(cols), q, rng)
        touched = subsets_touching(cols, p.n, p.t)
        deficient[colex_rank(touched)] = deficient_mask(cells, touched, scheme, p.d)
    return Construction(Array(cells, p.d), scheme, p.k_random, rounds)


def construct(n: int, t: int, d: int, scheme, model=Model.UNIFORM, rng_seed: int = 0, *,
              recipe: SeedRecipe | None = None, k_random: int | None = None,
              max_restarts: int = 20, max_rounds: int | None = None) -> Construction:
    """Seed rows from default_recipe, k_random from lll_min_k, Moser-Tardos;
    on failure add one random row (d rows for balanced columns) and retry
    with a fresh derived seed."""
    from covkit.bounds import lll_min_k

    kind = Kind(scheme.kind if isinstance(scheme, Scheme) else scheme)
    model = Model(model)
    sch = Scheme(kind, t)
    if recipe is None:
        recipe = default_recipe(sch, n, d)
    if k_random is None:
        k_random = lll_min_k(n, t, d, sch, model)
    q = recipe.random_alphabet or d
    step = q if model is Model.BALANCED else 1
    if model is Model.BALANCED and k_random % q:
        k_random += q - k_random % q
    seeds = np.random.SeedSequence(rng_seed).spawn(max_restarts + 1)
    attempts: list[tuple[int, int]] = []
    for restart in range(max_restarts + 1):
        params = ConstructParams(n, t, d, kind, recipe, model, k_random,
                                 int(seeds[restart].generate_state(1, np.uint64)[0]),
                                 max_rounds)
        try:
            out = moser_tardos(params)
        except ResamplingLimitError as exc:
            log.info("restart %d: k_random=%d failed after %d rounds", restart, k_random, exc.rounds)
            attempts.append((len(recipe.rows) + k_random, exc.rounds))
            k_random = max(k_random, 0) + step
            continue
        attempts.append((out.array.k, out.rounds))
        out.attempts = attempts
        return out
    raise ConstructionError(f"no covering array after {max_restarts} restarts "
                            f"(last k_random={k_random - step})")
