import itertools

import numpy as np
import pytest

from saisat.cnf import Cnf

CNF_A = Cnf(2, ((1, 2), (-1,)))
CONTRADICTION = Cnf(1, ((1,), (-1,)))


def brute_force_models(cnf):
    """Every satisfying assignment, by enumeration (independent of the oracle)."""
    out = []
    for bits in itertools.product((0, 1), repeat=cnf.num_vars):
        if all(any((bits[abs(l) - 1] == 1) == (l > 0) for l in c) for c in cnf.clauses):
            out.append(bits)
    return out


def random_cnf(rng, max_vars=15, max_width=4, ratio=5.0, min_vars=1):
    n = int(rng.integers(min_vars, max_vars + 1))
    m = int(rng.integers(1, max(2, int(ratio * n)) + 1))
    clauses = []
    for _ in range(m):
        w = int(rng.integers(1, min(max_width, n) + 1))
        vs = rng.choice(n, size=w, replace=False) + 1
        clauses.append(tuple(int(v) if rng.random() < 0.5 else -int(v) for v in vs))
    return Cnf(n, tuple(clauses))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion."""
    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
