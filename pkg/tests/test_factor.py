import csv
import math

import numpy as np
import pytest
import sympy

from saisat.cnf import Cnf, count_unsatisfied
from saisat.factor import (BitTestReport, BitVote, and_gate, bits_to_int, decode,
                           encode, functional_comparison_test, ground_truth_point,
                           matrix_cluster_test, or_gate, random_semiprime,
                           right_bit_fraction, truth_bits, vote, write_matrix_csv,
                           xor_clauses)
from saisat.oracle import dpll_solve, enumerate_models
from saisat.solver import SolverConfig

from conftest import brute_force_models


def gate_table(clauses, n):
    return brute_force_models(Cnf(n, tuple(clauses)))


def test_gate_templates():
    # variable 1 is the output, 2 and 3 the inputs
    for a in gate_table(and_gate(1, 2, 3), 3):
        assert a[0] == (a[1] & a[2])
    for a in gate_table(or_gate(1, 2, 3), 3):
        assert a[0] == (a[1] | a[2])
    for a in gate_table(xor_clauses(1, [2, 3]), 3):
        assert a[0] == a[1] ^ a[2]
    for a in gate_table(xor_clauses(1, [2, 3, 4]), 4):
        assert a[0] == a[1] ^ a[2] ^ a[3]
    assert len(gate_table(and_gate(1, 2, 3), 3)) == 4


def test_encode_rejects_bad_n():
    for n in (8, 7, 1, 144):
        with pytest.raises(ValueError):
            encode(n)


def test_widths():
    inst = encode(143)
    assert inst.n_bits == 8
    assert len(inst.p_vars) == 4 and len(inst.q_vars) == 7
    assert len(inst.partial) == 7 and all(len(r) == 4 for r in inst.partial)


def factor_pairs(inst):
    return sorted(decode(m, inst) for m in enumerate_models(inst.cnf))


def test_encode_15():
    assert factor_pairs(encode(15)) == [(3, 5)]


def test_encode_143():
    inst = encode(143)
    p, q = decode(dpll_solve(inst.cnf).model, inst)
    assert p * q == 143 and {p, q} == {11, 13}
    assert factor_pairs(inst) == [(11, 13), (13, 11)]


def test_primes_have_no_models():
    for n in (11, 13, 101, 257, 1009):
        assert enumerate_models(encode(n).cnf) == []


def trial_division_pairs(n, p_bits, q_bits):
    out = []
    for p in range(3, 1 << p_bits, 2):
        if n % p == 0 and (n // p) < (1 << q_bits) and n // p > 1:
            out.append((p, n // p))
    return sorted(out)


def test_models_match_trial_division_small():
    for n in range(9, 600, 2):
        inst = encode(n)
        assert factor_pairs(inst) == trial_division_pairs(
            n, len(inst.p_vars), len(inst.q_vars)), n


def test_decode():
    inst = encode(15)
    model = dpll_solve(inst.cnf).model
    assert decode(model, inst) == (3, 5)
    assert bits_to_int((1, 1)) == 3 and bits_to_int((1, 0, 1)) == 5
    bad = list(model)
    bad[inst.p_vars[1] - 1] ^= 1
    with pytest.raises(ValueError):
        decode(bad, inst)


def test_clause_growth_is_quadratic():
    counts = {}
    for nb in (8, 16, 32):
        n, a, b = random_semiprime(nb, 1)
        assert n.bit_length() == nb and a * b == n
        assert sympy.isprime(a) and sympy.isprime(b) and a < b
        counts[nb] = encode(n).cnf.num_clauses
    slope = math.log(counts[32] / counts[8]) / math.log(4)
    assert 1.7 <= slope <= 2.3


def test_random_semiprime_deterministic():
    assert random_semiprime(20, 5) == random_semiprime(20, 5)
    n, a, b = random_semiprime(160, 2)
    assert n.bit_length() == 160 and a * b == n and sympy.isprime(b)
    with pytest.raises(ValueError):
        random_semiprime(4, 0)


@pytest.fixture(scope="module")
def inst143():
    inst = encode(143, (11, 13))
    return inst, ground_truth_point(inst)


def test_ground_truth_point(inst143):
    inst, x = inst143
    assert count_unsatisfied(inst.cnf, tuple(int(v) for v in x)) == 0
    assert decode(tuple(int(v) for v in x), inst) == (11, 13)
    assert right_bit_fraction(x, inst) == 1.0


def test_right_bit_fraction_orientation(inst143):
    inst, x = inst143
    flipped = x.copy()
    key = np.array(inst.key_vars) - 1
    flipped[key] = 1 - flipped[key]
    tp, tq = truth_bits(inst, swap=True)
    expected = (sum(1 - b == t for b, t in zip(truth_bits(inst)[0], tp))
                + sum(1 - b == t for b, t in zip(truth_bits(inst)[1], tq)))
    assert right_bit_fraction(flipped, inst) == max(0.0, expected / len(key))
    with pytest.raises(ValueError):
        right_bit_fraction(x, encode(143))


def test_matrix_test_exact(inst143):
    inst, x = inst143
    votes = matrix_cluster_test(x, inst)
    assert len(votes) == len(inst.key_vars)
    tp, tq = truth_bits(inst)
    for b in votes:
        assert b.predicted == (tp if b.group == "P" else tq)[b.position]


def test_matrix_test_silent_at_center(inst143):
    inst, _ = inst143
    assert matrix_cluster_test(np.full(inst.cnf.num_vars, 0.5), inst) == []


def test_functional_test_exact(inst143):
    inst, x = inst143
    tp, tq = truth_bits(inst)
    for group, vars_, truth in (("P", inst.p_vars, tp), ("Q", inst.q_vars, tq)):
        for pos, v in enumerate(vars_):
            pred, f0, f1 = functional_comparison_test(inst, x, v)
            assert pred == truth[pos]
            right, wrong = (f1, f0) if truth[pos] else (f0, f1)
            assert right == 0.0 and wrong >= 1.0


def test_functional_test_conflict_and_errors(inst143):
    inst, x = inst143
    pred, f0, f1 = functional_comparison_test(inst, x, inst.p_vars[0])
    assert pred == 1 and f0 == float("inf")
    with pytest.raises(ValueError):
        functional_comparison_test(inst, x, inst.partial[0][0])


def test_functional_settle_sweeps(inst143):
    inst, x = inst143
    noisy = np.clip(x + np.random.default_rng(0).uniform(-0.2, 0.2, x.size), 0, 1)
    pred, f0, f1 = functional_comparison_test(inst, noisy, inst.q_vars[1],
                                              settle_sweeps=3)
    assert pred in (0, 1) and np.isfinite(f0) and np.isfinite(f1)


def test_vote_single_run():
    inst = encode(143, (11, 13))
    report = vote(inst, 1, SolverConfig(max_sweeps=50, seed=3))
    assert {b.confidence for b in report.votes} <= {0.0, 1.0}
    assert len(report.for_test("matrix")) == len(inst.key_vars)
    assert len(report.right_bits) == 1
    assert len(report.functional_rows) == len(inst.key_vars)
    with pytest.raises(ValueError):
        vote(inst, 0)
    with pytest.raises(ValueError):
        vote(inst, 1, tests=("bogus",))


def test_vote_report_shape_and_determinism():
    inst = encode(143, (11, 13))
    cfg = SolverConfig(max_sweeps=30, seed=1)
    a = vote(inst, 4, cfg, workers=2)
    b = vote(inst, 4, cfg, workers=1)
    assert a.votes == b.votes
    conf = [v.confidence for v in a.votes]
    assert conf == sorted(conf, reverse=True)
    for v in a.votes:
        assert 0 <= v.votes_for <= v.votes_total <= 4
    for row in a.agreement_table("matrix"):
        assert row["runs_determined_pct"] == round(100 * row["runs_determined"] / 4, 2)
    acc = a.accuracy("matrix")
    assert acc is None or 0.0 <= acc <= 1.0


def test_agreement_table_percentages():
    votes = [BitVote("P", k, 1, 31, 31, "matrix") for k in range(2)]
    votes.append(BitVote("Q", 0, 0, 30, 31, "matrix"))
    report = BitTestReport(n=143, runs=31, votes=votes, key_bits=500)
    rows = report.agreement_table()
    assert rows[0] == {"runs_determined": 31, "runs_determined_pct": 100.0,
                       "bits": 2, "bits_pct": 0.4}
    assert rows[1]["runs_determined_pct"] == 96.77


def test_accuracy_uses_best_orientation():
    votes = [BitVote("P", 1, 0, 1, 1, "matrix"), BitVote("Q", 1, 1, 1, 1, "matrix")]
    # 11 = 1011b has bit1 = 1, 13 = 1101b has bit1 = 0
    report = BitTestReport(143, 1, votes, 11, ground_truth=(11, 13))
    assert report.accuracy() == 1.0  # matches with the factors swapped
    swapped = BitTestReport(143, 1, votes, 11, ground_truth=(13, 11))
    assert report.accuracy() == swapped.accuracy()
    assert BitTestReport(143, 1, votes, 11).accuracy() is None


def test_matrix_csv(inst143, tmp_path):
    inst, x = inst143
    path = tmp_path / "m.csv"
    write_matrix_csv(x, inst, path)
    rows = list(csv.reader(open(path)))
    assert len(rows) == len(inst.q_vars) + 1
    assert len(rows[0]) == len(inst.p_vars) + 1
    # row q0 of the matrix is p itself because q0 = 1
    assert [int(float(v)) for v in rows[1][1:]] == truth_bits(inst)[0]
