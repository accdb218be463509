import itertools
from collections import Counter

import numpy as np
import pytest
from scipy import stats

from nusat import _kernels, rng
from nusat.dist import EnsembleSpec, instantiate
from nusat.errors import RetryCapError
from nusat.formula import to_dimacs
from nusat.generator import AliasTable, GeneratorConfig, alias_table, sample_clauses, sample_formula


def test_mix64_matches_reference_splitmix64():
    # first two outputs of the reference SplitMix64 generator seeded with 0
    assert rng.mix64(rng.GAMMA) == 0xE220A8397B1DCDAF
    assert rng.mix64(2 * rng.GAMMA) == 0x6E789E6AA1B965F4
    arr = rng.mix64_array(np.array([rng.GAMMA, (2 * rng.GAMMA) & rng.MASK64], dtype=np.uint64))
    assert arr.tolist() == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4]


def test_golden_stream():
    assert rng.derive_seed(42, 7, 3) == 5888389794945804607
    f = sample_formula(instantiate(EnsembleSpec.uniform(), 10), 2, 5, 2024)
    assert f.clauses.tolist() == [[6, 10], [-3, -1], [-4, 5], [-4, 9], [10, -3]]
    g = sample_formula(instantiate(EnsembleSpec.power_law(2.5), 100), 2, 4, 7)
    assert g.clauses.tolist() == [[-4, 11], [5, -10], [-57, 11], [-6, -12]]


def test_words_scalar_and_array_agree():
    bases = rng.stream_bases(9, np.arange(5))
    a = rng.words(bases, 3)
    b = rng.words(bases, np.full(5, 3))
    assert a.tolist() == b.tolist()


@pytest.mark.parametrize("spec", [EnsembleSpec.uniform(), EnsembleSpec.power_law(2.3), EnsembleSpec.geometric(4)])
def test_alias_table_reproduces_pmf(spec):
    d = instantiate(spec, 37)
    np.testing.assert_allclose(alias_table(d).probabilities(), d.p, rtol=1e-12, atol=1e-15)


def test_alias_lookup_frequencies():
    table = AliasTable([0.5, 0.3, 0.2])
    words = rng.mix64_array(np.arange(1, 200_001, dtype=np.uint64))
    freq = np.bincount(table.lookup(words), minlength=3) / words.size
    np.testing.assert_allclose(freq, [0.5, 0.3, 0.2], atol=0.005)


def test_n2_always_uses_both_variables():
    d = instantiate(EnsembleSpec.uniform(), 2)
    for seed in range(50):
        f = sample_formula(d, 2, 1, seed)
        assert sorted(abs(x) for x in f[0]) == [1, 2]


def _signed_clause_key(row):
    return tuple(sorted(row))


def _chi_square(d, m, seed):
    n = d.n
    lits = sample_clauses(d, 2, m, seed)
    counts = Counter(map(_signed_clause_key, lits.tolist()))
    keys, expected = [], []
    p = d.p.tolist()
    denom = 1 - sum(x * x for x in p)
    for i, j in itertools.combinations(range(1, n + 1), 2):
        # oracle: ordered i.i.d. draws conditioned on distinct, times 1/4 per sign pattern
        prob = 2 * p[i - 1] * p[j - 1] / denom / 4
        for si, sj in itertools.product((1, -1), repeat=2):
            keys.append(tuple(sorted((si * i, sj * j))))
            expected.append(prob * m)
    observed = [counts.get(k, 0) for k in keys]
    assert sum(observed) == m
    return stats.chisquare(observed, expected)


@pytest.mark.parametrize("spec", [EnsembleSpec.uniform(), EnsembleSpec.power_law(2.5), EnsembleSpec.geometric(3)])
def test_chi_square_small_n(spec):
    d = instantiate(spec, 5)
    res = _chi_square(d, 10**6, 11)
    assert res.pvalue > 1e-3


def test_uniform4_each_clause_near_one_24th():
    d = instantiate(EnsembleSpec.uniform(), 4)
    m = 10**6
    lits = sample_clauses(d, 2, m, 3)
    counts = Counter(map(_signed_clause_key, lits.tolist()))
    assert len(counts) == 24
    sigma = np.sqrt(m * (1 / 24) * (23 / 24))
    for c in counts.values():
        assert abs(c - m / 24) < 3 * sigma


def test_powerlaw_top_clause_frequency():
    d = instantiate(EnsembleSpec.power_law(2.5), 100)
    m = 10**6
    lits = sample_clauses(d, 2, m, 5)
    from nusat.dist import clause_probability

    q = clause_probability(d, (1, 2))
    hits = int(np.sum(np.all(np.sort(lits, axis=1) == [1, 2], axis=1)))
    sigma = np.sqrt(m * q * (1 - q))
    assert abs(hits - m * q) < 3 * sigma


def test_sign_symmetry():
    d = instantiate(EnsembleSpec.power_law(2.5), 30)
    lits = sample_clauses(d, 2, 200_000, 8).ravel()
    pos = np.bincount(lits[lits > 0], minlength=31)[1:]
    neg = np.bincount(-lits[lits < 0], minlength=31)[1:]
    tot = pos + neg
    z = np.abs(pos - neg) / np.sqrt(np.maximum(tot, 1))
    assert np.all(z < 4)


@pytest.mark.parametrize("workers", [1, 4, 16])
def test_byte_identical_across_workers(workers):
    d = instantiate(EnsembleSpec.power_law(2.5), 1000)
    ref = to_dimacs(sample_formula(d, 2, 5000, 99))
    assert to_dimacs(sample_formula(d, 2, 5000, 99, workers=workers)) == ref


def test_chunk_offsets_compose():
    d = instantiate(EnsembleSpec.geometric(2), 200)
    full = sample_clauses(d, 3, 100, 4)
    parts = [sample_clauses(d, 3, 30, 4, start=s) for s in (0, 30, 60)]
    np.testing.assert_array_equal(full[:90], np.concatenate(parts))


@pytest.mark.parametrize("k", [2, 3])
def test_numba_kernel_matches_numpy_generator(k):
    d = instantiate(EnsembleSpec.power_law(2.2), 50)
    t = alias_table(d)
    for seed in (0, 1, 2**63 + 5):
        ref = sample_clauses(d, k, 400, seed, start=17)
        out = np.empty((400, k), dtype=np.int64)
        assert _kernels.draw_clauses(t.prob, t.alias, k, np.uint64(seed), 17, 10**6, out) == -1
        np.testing.assert_array_equal(out, ref)


def test_retry_cap_error_reports_clause():
    # p1 close to 1 makes nearly every pair collide
    d = instantiate(EnsembleSpec.explicit([1e6, 1.0, 1.0]), 3)
    with pytest.raises(RetryCapError) as exc:
        sample_formula(d, 2, 50, GeneratorConfig(seed=1, retry_cap=2))
    assert exc.value.clause_index >= 0
    assert exc.value.collision_rate > 0.9


def test_generator_config_validation():
    with pytest.raises(ValueError):
        GeneratorConfig(retry_cap=0)


def test_distinct_variables_and_range():
    d = instantiate(EnsembleSpec.power_law(2.1), 20)
    lits = sample_clauses(d, 3, 5000, 1)
    v = np.sort(np.abs(lits), axis=1)
    assert np.all(v[:, 1:] != v[:, :-1])
    assert v.min() >= 1 and v.max() <= 20
