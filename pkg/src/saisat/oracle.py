"""Plain DPLL used as ground truth: unit propagation, pure literals, no heuristics.

Branching always picks the lowest-index unassigned variable and tries
``True`` first, so results are reproducible.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .cnf import Assignment, Cnf, count_unsatisfied


class OracleStatus(str, enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    BUDGET_EXCEEDED = "BUDGET_EXCEEDED"


@dataclass(frozen=True)
class OracleResult:
    status: OracleStatus
    model: Optional[Assignment] = None
    nodes: int = 0


class _Budget(Exception):
    pass


class _Search:
    def __init__(self, cnf: Cnf, pure_literals: bool):
        self.cnf = cnf
        self.n = cnf.num_vars
        self.clauses = cnf.clauses
        self.pure_literals = pure_literals
        # occurrence lists keyed by literal
        self.occ: dict[int, list[int]] = {}
        for i, c in enumerate(self.clauses):
            for lit in c:
                self.occ.setdefault(lit, []).append(i)
        self.value = [None] * (self.n + 1)
        self.trail: list[int] = []
        self.nodes = 0

    def lit_value(self, lit):
        v = self.value[abs(lit)]
        if v is None:
            return None
        return v if lit > 0 else not v

    def assign(self, lit):
        self.value[abs(lit)] = lit > 0
        self.trail.append(abs(lit))

    def undo(self, mark):
        while len(self.trail) > mark:
            self.value[self.trail.pop()] = None

    def clause_state(self, i):
        """Return ('sat'|'conflict'|'unit'|'open', unit_literal)."""
        unit = None
        free = 0
        for lit in self.clauses[i]:
            val = self.lit_value(lit)
            if val is True:
                return "sat", None
            if val is None:
                free += 1
                unit = lit
        if free == 0:
            return "conflict", None
        if free == 1:
            return "unit", unit
        return "open", None

    def propagate(self, queue):
        """Assign queued literals and their consequences; False on conflict."""
        head = 0
        queue = list(queue)
        while head < len(queue):
            lit = queue[head]
            head += 1
            val = self.lit_value(lit)
            if val is True:
                continue
            if val is False:
                return False
            self.assign(lit)
            for i in self.occ.get(-lit, ()):
                state, unit = self.clause_state(i)
                if state == "conflict":
                    return False
                if state == "unit":
                    queue.append(unit)
        return True

    def initial_units(self):
        units = []
        for i, c in enumerate(self.clauses):
            if not c:
                return None
            if len(c) == 1:
                units.append(c[0])
        return units

    def open_clauses(self):
        return [i for i in range(len(self.clauses))
                if self.clause_state(i)[0] != "sat"]

    def pure(self):
        seen = set()
        for i in self.open_clauses():
            for lit in self.clauses[i]:
                if self.value[abs(lit)] is None:
                    seen.add(lit)
        return sorted((lit for lit in seen if -lit not in seen), key=abs)

    def next_var(self):
        for v in range(1, self.n + 1):
            if self.value[v] is None:
                return v
        return None

    def all_satisfied(self):
        return all(self.clause_state(i)[0] == "sat" for i in range(len(self.clauses)))

    def model(self) -> Assignment:
        return tuple(1 if self.value[v] else 0 for v in range(1, self.n + 1))


def dpll_solve(cnf: Cnf, node_budget: int = 1_000_000) -> OracleResult:
    if node_budget <= 0:
        raise ValueError("node_budget must be positive")
    s = _Search(cnf, pure_literals=True)
    units = s.initial_units()
    if units is None or not s.propagate(units):
        return OracleResult(OracleStatus.UNSAT, nodes=0)

    def rec():
        s.nodes += 1
        if s.nodes > node_budget:
            raise _Budget
        while True:
            pures = s.pure()
            if not pures:
                break
            if not s.propagate(pures):
                return False
        if s.all_satisfied():
            return True
        v = s.next_var()
        for lit in (v, -v):
            mark = len(s.trail)
            if s.propagate([lit]) and rec():
                return True
            s.undo(mark)
        return False

    try:
        found = rec()
    except _Budget:
        return OracleResult(OracleStatus.BUDGET_EXCEEDED, nodes=s.nodes)
    if not found:
        return OracleResult(OracleStatus.UNSAT, nodes=s.nodes)
    model = s.model()
    assert count_unsatisfied(cnf, model) == 0
    return OracleResult(OracleStatus.SAT, model, s.nodes)


def enumerate_models(cnf: Cnf, cap: int = 1 << 20) -> list[Assignment]:
    """All models (up to ``cap``), sorted lexicographically."""
    if cap <= 0:
        raise ValueError("cap must be positive")
    s = _Search(cnf, pure_literals=False)
    models: list[Assignment] = []
    units = s.initial_units()
    if units is None or not s.propagate(units):
        return models

    def rec():
        # branching 0 before 1 on the lowest free variable yields sorted output
        if len(models) >= cap:
            return
        v = s.next_var()
        if v is None:
            models.append(s.model())
            return
        for lit in (-v, v):
            mark = len(s.trail)
            if s.propagate([lit]):
                rec()
            s.undo(mark)

    rec()
    for m in models:
        assert count_unsatisfied(cnf, m) == 0
    return models
