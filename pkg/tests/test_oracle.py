import pytest

from saisat.cnf import Cnf, count_unsatisfied, gen_uniform_3sat
from saisat.oracle import OracleStatus, dpll_solve, enumerate_models

from conftest import CNF_A, CONTRADICTION, brute_force_models, random_cnf


def test_dpll_examples():
    res = dpll_solve(CNF_A)
    assert res.status is OracleStatus.SAT
    assert res.model == (0, 1)
    assert dpll_solve(CONTRADICTION).status is OracleStatus.UNSAT


def test_dpll_budget():
    hard = gen_uniform_3sat(60, 256, 1)
    assert dpll_solve(hard, node_budget=1).status is OracleStatus.BUDGET_EXCEEDED
    with pytest.raises(ValueError):
        dpll_solve(hard, node_budget=0)


def test_dpll_agrees_with_brute_force(rng):
    for _ in range(500):
        cnf = random_cnf(rng, max_vars=15)
        models = brute_force_models(cnf)
        res = dpll_solve(cnf)
        assert res.status is (OracleStatus.SAT if models else OracleStatus.UNSAT)
        if res.model is not None:
            assert count_unsatisfied(cnf, res.model) == 0


def test_dpll_deterministic():
    cnf = gen_uniform_3sat(30, 120, 9)
    assert dpll_solve(cnf) == dpll_solve(cnf)


def test_empty_clause_is_unsat():
    assert dpll_solve(Cnf(2, ((1, 2), ()))).status is OracleStatus.UNSAT


def test_enumerate_examples():
    assert enumerate_models(Cnf(2, ((1, 2),))) == [(0, 1), (1, 0), (1, 1)]
    assert enumerate_models(CONTRADICTION) == []
    assert enumerate_models(Cnf(1, ())) == [(0,), (1,)]


def test_enumerate_matches_brute_force(rng):
    for _ in range(200):
        cnf = random_cnf(rng, max_vars=10)
        assert enumerate_models(cnf) == brute_force_models(cnf)


def test_enumerate_cap():
    assert len(enumerate_models(Cnf(4, ()), cap=5)) == 5
