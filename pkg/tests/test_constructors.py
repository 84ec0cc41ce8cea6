import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covkit.arrays import Scheme, is_covering, oracle_is_covering, serialize_array
from covkit.bounds import lll_min_k
from covkit.constructors import (
    ConstructionError,
    ConstructParams,
    Model,
    ResamplingLimitError,
    SeedRecipe,
    SeedRow,
    balanced_fill,
    construct,
    default_recipe,
    moser_tardos,
    seed_rows,
    uniform_fill,
)

# upper 10^-3 quantiles of chi-square with d-1 degrees of freedom
CHI2_999 = {1: 10.828, 2: 13.816, 3: 16.266, 4: 18.467}


def test_seed_rows_examples():
    assert seed_rows(SeedRecipe((SeedRow.ALL_ONES, SeedRow.DISTINCT)), 4, 4) == [(1, 1, 1, 1), (1, 2, 3, 4)]
    assert seed_rows(SeedRecipe((SeedRow.ALL_ONES, SeedRow.ALL_D)), 3, 2) == [(1, 1, 1), (2, 2, 2)]
    with pytest.raises(ValueError):
        seed_rows(SeedRecipe((SeedRow.DISTINCT,)), 5, 3)


def test_default_recipe_examples():
    assert default_recipe(Scheme.partition(3), 10, 10).rows == (SeedRow.ALL_ONES, SeedRow.DISTINCT)
    assert default_recipe(Scheme.partition(3), 10, 3).rows == (SeedRow.ALL_ONES,)
    assert default_recipe(Scheme.weight(3), 10, 2).rows == (SeedRow.ALL_ONES, SeedRow.ALL_D)


def test_default_random_alphabet():
    assert default_recipe(Scheme.partition(3), 10, 10).random_alphabet == 2
    assert default_recipe(Scheme.partition(4), 10, 10).random_alphabet == 3
    assert default_recipe(Scheme.partition(3), 10, 3).random_alphabet == 3
    assert default_recipe(Scheme.partition(2), 10, 2).random_alphabet == 2
    assert default_recipe(Scheme.weight(3), 10, 4).random_alphabet == 4


def test_uniform_fill_deterministic():
    a = uniform_fill(50, 7, 3, np.random.default_rng(11))
    b = uniform_fill(50, 7, 3, np.random.default_rng(11))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, uniform_fill(50, 7, 3, np.random.default_rng(12)))


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_uniform_fill_frequencies(d):
    cells = uniform_fill(1000, 100, d, np.random.default_rng(d))
    counts = np.bincount(cells.ravel(), minlength=d)
    expected = cells.size / d
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    assert chi2 < CHI2_999[d - 1]
    sigma = np.sqrt(cells.size * (1 / d) * (1 - 1 / d))
    assert np.all(np.abs(counts - expected) <= 3 * sigma)


def test_uniform_fill_single_symbol():
    assert not uniform_fill(4, 5, 1, np.random.default_rng(0)).any()


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(1, 6), st.integers(1, 10), st.integers(0, 2**32))
def test_balanced_fill_counts(d, m, n, seed):
    cells = balanced_fill(d * m, n, d, np.random.default_rng(seed))
    for j in range(n):
        assert np.bincount(cells[:, j], minlength=d).tolist() == [m] * d


def test_balanced_fill_binary_column_weight():
    m = 7
    cells = balanced_fill(2 * m, 9, 2, np.random.default_rng(3)) + 1
    assert (cells.sum(axis=0) == 3 * m).all()
    a = balanced_fill(10, 4, 2, np.random.default_rng(1))
    assert np.array_equal(a, balanced_fill(10, 4, 2, np.random.default_rng(1)))
    with pytest.raises(ValueError):
        balanced_fill(7, 3, 2, np.random.default_rng(0))


def test_params_validation():
    rec = SeedRecipe((SeedRow.ALL_ONES,))
    with pytest.raises(ValueError):
        ConstructParams(5, 3, 2, "weight", rec, "balanced", 5)
    with pytest.raises(ValueError):
        ConstructParams(5, 3, 2, "weight", rec, "uniform", -1)


def test_moser_tardos_no_rounds_when_already_covering():
    rec = SeedRecipe((SeedRow.ALL_ONES, SeedRow.ALL_D))
    out = moser_tardos(ConstructParams(3, 3, 2, "weight", rec, "uniform", 60, rng_seed=1))
    assert out.rounds == 0 and is_covering(out.array, out.scheme)


def test_moser_tardos_weight_n20():
    n, t, d = 20, 3, 2
    rec = default_recipe(Scheme.weight(t), n, d)
    k = lll_min_k(n, t, d, "weight")
    for seed in range(5):
        try:
            out = moser_tardos(ConstructParams(n, t, d, "weight", rec, "uniform", k, rng_seed=seed))
        except ResamplingLimitError:
            continue
        assert is_covering(out.array, out.scheme)
        assert out.array.rows()[:2] == [(1,) * n, (2,) * n]
        return
    pytest.fail("no success in five seeds")


def test_moser_tardos_failure_contract():
    rec = SeedRecipe((SeedRow.ALL_ONES,))
    for seed in range(10):
        params = ConstructParams(8, 2, 2, "partition", rec, "uniform", 1, rng_seed=seed, max_rounds=200)
        try:
            out = moser_tardos(params)
        except ResamplingLimitError as exc:
            assert exc.rounds == 200 and len(exc.last_deficiency) == 2
        else:
            assert is_covering(out.array, out.scheme)


def test_moser_tardos_zero_random_rows_reports():
    rec = SeedRecipe((SeedRow.ALL_ONES,))
    with pytest.raises(ResamplingLimitError) as exc:
        moser_tardos(ConstructParams(4, 2, 2, "partition", rec, "uniform", 0))
    assert exc.value.rounds == 0 and exc.value.last_deficiency == (0, 1)


def test_balanced_counts_survive_resampling():
    n, t = 24, 3
    rec = default_recipe(Scheme.weight(t), n, 2)
    out = moser_tardos(ConstructParams(n, t, 2, "weight", rec, "balanced", 12, rng_seed=5))
    assert out.rounds > 0
    rand = out.array.cells[2:]
    assert (np.bincount(rand[:, 0], minlength=2) == 6).all()
    assert all(np.bincount(rand[:, j], minlength=2).tolist() == [6, 6] for j in range(n))


def test_construct_pairs():
    out = construct(10, 2, 2, "partition", "uniform", 3)
    assert is_covering(out.array, out.scheme)
    k = lll_min_k(10, 2, 2, "partition")
    assert out.array.k <= k + len(out.attempts) + 1


@pytest.mark.parametrize("n", range(2, 9))
def test_construct_two_rows(n):
    rec = SeedRecipe((SeedRow.ALL_ONES, SeedRow.DISTINCT))
    out = construct(n, 2, n, "partition", recipe=rec, k_random=0)
    assert out.array.k == 2 and is_covering(out.array, out.scheme)
    assert construct(n, 2, n, "partition").array.k == 2


def test_construct_balanced_64():
    out = construct(64, 3, 2, "weight", "balanced", 0)
    assert is_covering(out.array, out.scheme)
    rand = out.array.cells[2:]
    assert (rand.sum(axis=0) * 2 == rand.shape[0]).all()
    assert out.array.k <= 1.5 * 2.699 * 6 + 2


def test_construct_determinism():
    a = construct(30, 3, 2, "weight", "uniform", 99)
    b = construct(30, 3, 2, "weight", "uniform", 99)
    assert serialize_array(a.array, a.scheme) == serialize_array(b.array, b.scheme)
    c = construct(12, 3, 3, "partition", "uniform", 99)
    d = construct(12, 3, 3, "partition", "uniform", 99)
    assert serialize_array(c.array, c.scheme) == serialize_array(d.array, d.scheme)


def test_construct_escalation_monotone():
    out = construct(40, 3, 2, "weight", "uniform", 1, k_random=1, max_rounds=50, max_restarts=30)
    totals = [a for a, _ in out.attempts]
    assert len(totals) > 1
    assert all(x < y for x, y in zip(totals, totals[1:]))
    assert totals[-1] == out.array.k
    assert is_covering(out.array, out.scheme)


def test_construct_balanced_escalates_by_alphabet():
    out = construct(20, 3, 2, "weight", "balanced", 1, k_random=2, max_rounds=30, max_restarts=40)
    totals = [a for a, _ in out.attempts]
    assert all(y - x == 2 for x, y in zip(totals, totals[1:]))


def test_construct_exhausted():
    with pytest.raises(ConstructionError):
        construct(30, 3, 2, "weight", "uniform", 0, k_random=1, max_rounds=5, max_restarts=2)


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_postcondition_random_parameters(data):
    kind = data.draw(st.sampled_from(["partition", "weight"]))
    t = data.draw(st.integers(2, 3))
    d = data.draw(st.integers(t if kind == "partition" else 2, 4))
    n = data.draw(st.integers(t, 12))
    model = data.draw(st.sampled_from(["uniform", "balanced"])) if (kind, t, d) == ("weight", 3, 2) else "uniform"
    seed = data.draw(st.integers(0, 2**63 - 1))
    out = construct(n, t, d, kind, model, seed)
    assert is_covering(out.array, out.scheme)
    assert oracle_is_covering(out.array, out.scheme)
    seeds = seed_rows(default_recipe(out.scheme, n, d), n, d)
    assert out.array.rows()[: len(seeds)] == seeds
