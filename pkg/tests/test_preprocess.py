import pytest
from hypothesis import given, settings, strategies as st
import numpy as np

from saisat.cnf import Cnf, Conflict, count_unsatisfied
from saisat.oracle import OracleStatus, dpll_solve
from saisat.preprocess import (Eliminated, UnitFixed, eliminate_variable,
                               preprocess, reconstruct, unit_propagate)

from conftest import CNF_A, CONTRADICTION, brute_force_models, random_cnf


def test_unit_propagate_examples():
    reduced, stack = unit_propagate(CNF_A)
    assert reduced.clauses == ()
    assert stack == [UnitFixed(1, 0), UnitFixed(2, 1)]
    with pytest.raises(Conflict):
        unit_propagate(CONTRADICTION)
    plain = Cnf(3, ((1, 2), (-2, 3)))
    assert unit_propagate(plain) == (plain, [])


def test_eliminate_examples():
    assert eliminate_variable(Cnf(3, ((1, 2), (-1, 3))), 1).clauses == ((2, 3),)
    assert eliminate_variable(Cnf(2, ((1, 2), (-1, -2))), 1).clauses == ()
    assert eliminate_variable(Cnf(1, ((1,),)), 1).clauses == ()


def test_eliminate_is_equisatisfiable(rng):
    for _ in range(200):
        cnf = random_cnf(rng, max_vars=10)
        v = int(rng.integers(1, cnf.num_vars + 1))
        out = eliminate_variable(cnf, v)
        assert bool(brute_force_models(out)) == bool(brute_force_models(cnf))
        assert v not in out.variables()


def test_reconstruct_example():
    cnf = Cnf(3, ((1, 2), (-1, 3)))
    stack = [Eliminated(1, cnf.clauses)]
    assert reconstruct((0, 0, 1), stack, cnf) == (1, 0, 1)
    assert reconstruct((1, 0, 1), [], cnf) == (1, 0, 1)


def test_reconstruct_aborts_loudly():
    cnf = Cnf(2, ((1, 2), (-1, 2)))
    with pytest.raises(RuntimeError):
        reconstruct((0, 0), [Eliminated(1, cnf.clauses)], cnf)


def test_preprocess_cnf_a():
    reduced, stack, report = preprocess(CNF_A)
    assert reduced.clauses == ()
    assert count_unsatisfied(CNF_A, reconstruct((0, 0), stack, CNF_A)) == 0
    assert report.clauses_before == 2 and report.clauses_after == 0
    with pytest.raises(Conflict):
        preprocess(CONTRADICTION)
    with pytest.raises(ValueError):
        preprocess(CNF_A, growth_bound=-1)


def test_preprocess_idempotent(rng):
    for _ in range(100):
        cnf = random_cnf(rng, max_vars=15)
        try:
            reduced, _, _ = preprocess(cnf)
        except Conflict:
            continue
        again, stack, _ = preprocess(reduced)
        assert again is reduced and stack == []


def check_pipeline(cnf, growth_bound=0):
    expected = dpll_solve(cnf).status
    try:
        reduced, stack, report = preprocess(cnf, growth_bound)
    except Conflict:
        assert expected is OracleStatus.UNSAT
        return
    res = dpll_solve(reduced)
    assert res.status is expected
    if growth_bound == 0:
        assert report.vars_after <= report.vars_before
        assert report.clauses_after <= report.clauses_before
    if res.model is not None:
        assert count_unsatisfied(cnf, reconstruct(res.model, stack, cnf)) == 0


def test_pipeline_on_random_cnfs(rng):
    for _ in range(500):
        check_pipeline(random_cnf(rng, max_vars=15))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 5))
def test_pipeline_property(seed, bound):
    check_pipeline(random_cnf(np.random.default_rng(seed), max_vars=12), bound)


def test_report_dict():
    _, _, report = preprocess(Cnf(3, ((1, 2), (-1, 3), (2, 3))))
    d = report.to_dict()
    assert set(d) == {"vars_before", "vars_after", "clauses_before",
                      "clauses_after", "eliminated_by_rule"}
    assert report.clause_ratio == float("inf") or report.clause_ratio >= 1
