import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nusat.dist import EnsembleSpec, instantiate
from nusat.errors import ArityError, SizeError
from nusat.formula import Formula, formula_from_clauses
from nusat.generator import sample_formula
from nusat.solver import Status, is_satisfiable, solve2, solve_brute, verify_unsat_witness


def test_single_clause_sat():
    res = solve2(formula_from_clauses([(1, 2)]))
    assert res.status is Status.SAT
    assert res.assignment[0] or res.assignment[1]


def test_core4_unsat(core4):
    res = solve2(core4)
    assert res.status is Status.UNSAT
    assert res.witness_var in (1, 2)
    assert verify_unsat_witness(core4, res.witness_var)
    assert solve_brute(core4).status is Status.UNSAT


def test_snake_formula_unsat_by_hand():
    f = formula_from_clauses([(2, 1), (-1, 2), (-2, 3), (-3, -2)])
    assert solve2(f).status is Status.UNSAT
    assert solve_brute(f).status is Status.UNSAT


def test_empty_formula():
    f = Formula(4, 2, [])
    assert solve2(f).satisfiable
    assert solve_brute(f).satisfiable


def test_arity_and_size_errors():
    with pytest.raises(ArityError):
        solve2(Formula(3, 3, [(1, 2, 3)]))
    with pytest.raises(SizeError):
        solve_brute(Formula(26, 2, [(1, 2)]))


def _naive_sat(f):
    # third oracle: itertools over all assignments, clause by clause
    for bits in itertools.product((False, True), repeat=f.n):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in f):
            return True
    return False


clause2 = st.tuples(st.integers(1, 8), st.integers(1, 8), st.booleans(), st.booleans()).filter(
    lambda c: c[0] != c[1]
)


@settings(max_examples=300, deadline=None)
@given(st.lists(clause2, max_size=24))
def test_solvers_agree_with_naive_enumeration(rows):
    f = Formula(8, 2, [(a if sa else -a, b if sb else -b) for a, b, sa, sb in rows])
    want = _naive_sat(f)
    res = solve2(f)
    assert res.satisfiable == want
    assert solve_brute(f).satisfiable == want
    if want:
        assert f.is_satisfied_by(res.assignment)
    else:
        assert verify_unsat_witness(f, res.witness_var)
    if f.m:
        assert is_satisfiable(f.clauses) == want


def test_brute_handles_width_3():
    f = formula_from_clauses(
        [(s1 * 1, s2 * 2, s3 * 3) for s1 in (1, -1) for s2 in (1, -1) for s3 in (1, -1)]
    )
    assert solve_brute(f).status is Status.UNSAT
    assert solve_brute(f.prefix(7)).satisfiable


def test_oracle_equivalence_mixed_ensembles():
    specs = [EnsembleSpec.uniform(), EnsembleSpec.power_law(2.5), EnsembleSpec.geometric(2)]
    rng = np.random.default_rng(0)
    for i in range(600):
        n = int(rng.integers(2, 17))
        m = int(rng.integers(1, 3 * n + 1))
        f = sample_formula(instantiate(specs[i % 3], n), 2, m, i)
        res = solve2(f)
        assert res.satisfiable == solve_brute(f).satisfiable
        if res.satisfiable:
            assert f.is_satisfied_by(res.assignment)
        else:
            assert verify_unsat_witness(f, res.witness_var)


def test_monotone_under_prefix():
    d = instantiate(EnsembleSpec.uniform(), 200)
    for seed in range(30):
        f = sample_formula(d, 2, 300, seed)
        status = [solve2(f.prefix(m)).satisfiable for m in range(0, 301, 10)]
        # once UNSAT, stays UNSAT
        assert status == sorted(status, reverse=True)


def test_duplicates_and_large_instance():
    f = formula_from_clauses([(1, 2)] * 5 + [(-1, 2)] * 3)
    res = solve2(f)
    assert res.satisfiable and res.assignment[1]
    d = instantiate(EnsembleSpec.uniform(), 10**6)
    big = sample_formula(d, 2, 5 * 10**5, 1)
    res = solve2(big)
    assert res.satisfiable and big.is_satisfied_by(res.assignment)


def test_witness_verification_rejects_wrong_variable():
    f = formula_from_clauses([(1, 2), (-1, 2), (1, -2), (-1, -2), (3, 4)])
    assert verify_unsat_witness(f, 1)
    assert not verify_unsat_witness(f, 3)
    assert not verify_unsat_witness(f, 9)


def test_to_json():
    js = solve2(formula_from_clauses([(1, -2)])).to_json()
    assert js["status"] == "SAT"
    assert len(js["assignment"]) == 2


def test_unsat_witness_with_repeated_clauses():
    f = formula_from_clauses([(1, 2), (1, 2), (-1, 2), (1, -2), (-1, -2), (-1, -2), (2, 3)])
    res = solve2(f)
    assert res.status is Status.UNSAT
    assert verify_unsat_witness(f, res.witness_var)
