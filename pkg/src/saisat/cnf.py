"""CNF data model, DIMACS I/O, evaluation, conditioning and generators.

Literals are signed integers in the DIMACS convention: ``v`` is the
positive literal of variable ``v`` and ``-v`` its negation.  Variables are
numbered from 1.  Assignments are tuples of 0/1 ints indexed from 0, so
variable ``v`` lives at ``a[v - 1]``.

Random generators draw from numpy's PCG64 bit generator
(``numpy.random.default_rng(seed)``), which is stable across platforms for
a given numpy major version.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

Clause = tuple[int, ...]
Assignment = tuple[int, ...]


class DimacsError(ValueError):
    """Malformed DIMACS input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class Conflict(Exception):
    """An empty clause was derived; the formula is unsatisfiable."""


def normalize_clause(lits: Iterable[int]) -> Clause:
    """Drop repeated literals, keeping first-occurrence order."""
    seen = set()
    out = []
    for lit in lits:
        if lit == 0:
            raise ValueError("0 is not a literal")
        if lit not in seen:
            seen.add(lit)
            out.append(lit)
    return tuple(out)


def is_tautology(clause: Clause) -> bool:
    s = set(clause)
    return any(-lit in s for lit in clause)


@dataclass(frozen=True)
class Cnf:
    num_vars: int
    clauses: tuple[Clause, ...] = ()

    def __post_init__(self):
        if self.num_vars < 0:
            raise ValueError("num_vars must be non-negative")
        clauses = tuple(normalize_clause(c) for c in self.clauses)
        for c in clauses:
            for lit in c:
                if abs(lit) > self.num_vars:
                    raise ValueError(
                        f"literal {lit} exceeds declared {self.num_vars} variables")
        object.__setattr__(self, "clauses", clauses)

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def tautologies(self) -> list[int]:
        """Indices of clauses holding both polarities of some variable."""
        return [i for i, c in enumerate(self.clauses) if is_tautology(c)]

    def variables(self) -> set[int]:
        return {abs(lit) for c in self.clauses for lit in c}


def parse_dimacs(text: str) -> Cnf:
    header = None
    clauses: list[list[int]] = []
    current: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if header is not None:
                raise DimacsError("duplicate problem line", lineno)
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"bad problem line {line!r}", lineno)
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise DimacsError(f"bad problem line {line!r}", lineno) from None
            if header[0] < 0 or header[1] < 0:
                raise DimacsError("negative counts in problem line", lineno)
            continue
        if header is None:
            raise DimacsError("clause before 'p cnf' header", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"bad token {tok!r}", lineno) from None
            if lit == 0:
                clauses.append(current)
                current = []
                continue
            if abs(lit) > header[0]:
                raise DimacsError(
                    f"literal {lit} exceeds declared {header[0]} variables", lineno)
            current.append(lit)
    if header is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        clauses.append(current)
    if len(clauses) != header[1]:
        raise DimacsError(
            f"header declares {header[1]} clauses, found {len(clauses)}", lineno)
    return Cnf(header[0], tuple(tuple(c) for c in clauses))


def read_dimacs(path) -> Cnf:
    with open(path) as f:
        return parse_dimacs(f.read())


def emit_dimacs(cnf: Cnf) -> str:
    lines = [f"p cnf {cnf.num_vars} {cnf.num_clauses}"]
    for c in cnf.clauses:
        lines.append(" ".join(str(lit) for lit in c) + (" 0" if c else "0"))
    return "\n".join(lines) + "\n"


def lit_true(lit: int, a: Sequence[int]) -> bool:
    value = a[abs(lit) - 1]
    return bool(value) if lit > 0 else not value


def count_unsatisfied(cnf: Cnf, a: Sequence[int]) -> int:
    if len(a) != cnf.num_vars:
        raise ValueError(
            f"assignment has length {len(a)}, CNF has {cnf.num_vars} variables")
    return sum(1 for c in cnf.clauses if not any(lit_true(lit, a) for lit in c))


def undetermined_variables(cnf: Cnf, a: Sequence[int]) -> list[int]:
    """Variables whose flip leaves the number of unsatisfied clauses unchanged."""
    if len(a) != cnf.num_vars:
        raise ValueError("assignment length does not match the CNF")
    makes = [0] * (cnf.num_vars + 1)
    breaks = [0] * (cnf.num_vars + 1)
    for clause in cnf.clauses:
        true_lits = [lit for lit in clause if lit_true(lit, a)]
        if not true_lits:
            for v in {abs(lit) for lit in clause}:
                makes[v] += 1
        elif len({abs(lit) for lit in true_lits}) == 1:
            v = abs(true_lits[0])
            # flipping v breaks the clause unless it also holds the opposite literal
            if not any(abs(lit) == v and not lit_true(lit, a) for lit in clause):
                breaks[v] += 1
    return [v for v in range(1, cnf.num_vars + 1) if makes[v] == breaks[v]]


def condition(cnf: Cnf, lit: int) -> Cnf:
    """Set ``lit`` true: drop clauses it satisfies, strip its complement.

    Raises Conflict when a clause loses its last literal.
    """
    if lit == 0 or abs(lit) > cnf.num_vars:
        raise ValueError(f"literal {lit} out of range")
    out = []
    for c in cnf.clauses:
        if lit in c:
            continue
        if -lit in c:
            c = tuple(x for x in c if x != -lit)
            if not c:
                raise Conflict(f"conditioning on {lit} empties a clause")
        out.append(c)
    return Cnf(cnf.num_vars, tuple(out))


def _random_clause(rng, n_vars: int, width: int) -> Clause:
    vs = rng.choice(n_vars, size=width, replace=False) + 1
    signs = rng.integers(0, 2, size=width)
    return tuple(int(v) if s else -int(v) for v, s in zip(vs, signs))


def gen_uniform_3sat(n_vars: int, n_clauses: int, seed: int) -> Cnf:
    if n_vars < 3:
        raise ValueError("need at least 3 variables")
    rng = np.random.default_rng(seed)
    return Cnf(n_vars, tuple(_random_clause(rng, n_vars, 3) for _ in range(n_clauses)))


def gen_planted(n_vars: int, n_clauses: int, seed: int) -> tuple[Cnf, Assignment]:
    """Random 3-SAT satisfied by a hidden assignment (rejection sampling)."""
    if n_vars < 3:
        raise ValueError("need at least 3 variables")
    rng = np.random.default_rng(seed)
    plant = tuple(int(b) for b in rng.integers(0, 2, size=n_vars))
    clauses = []
    while len(clauses) < n_clauses:
        c = _random_clause(rng, n_vars, 3)
        if any(lit_true(lit, plant) for lit in c):
            clauses.append(c)
    return Cnf(n_vars, tuple(clauses)), plant
