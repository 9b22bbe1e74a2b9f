"""Resolution-based CNF simplification with model reconstruction.

Three rules run to a fixpoint: unit propagation, pure-literal fixing and
bounded variable elimination (a variable is resolved away only when its
non-tautological resolvents number no more than the clauses they replace
plus ``growth_bound``).  Variable numbering is preserved; removed variables
simply stop occurring.  Every step is logged so a model of the reduced CNF
can be extended back to the original variables.
"""

from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass, field
from typing import Union

from .cnf import Assignment, Clause, Cnf, Conflict, is_tautology, lit_true


@dataclass(frozen=True)
class UnitFixed:
    var: int
    value: int


@dataclass(frozen=True)
class PureFixed:
    var: int
    value: int


@dataclass(frozen=True)
class Eliminated:
    var: int
    removed_clauses: tuple[Clause, ...]


Step = Union[UnitFixed, PureFixed, Eliminated]
ReconstructionStack = list


@dataclass
class PreprocessReport:
    vars_before: int
    vars_after: int
    clauses_before: int
    clauses_after: int
    eliminated_by_rule: Counter = field(default_factory=Counter)

    @property
    def clause_ratio(self) -> float:
        return self.clauses_before / self.clauses_after if self.clauses_after else float("inf")

    def to_dict(self) -> dict:
        return {
            "vars_before": self.vars_before,
            "vars_after": self.vars_after,
            "clauses_before": self.clauses_before,
            "clauses_after": self.clauses_after,
            "eliminated_by_rule": dict(sorted(self.eliminated_by_rule.items())),
        }


class _Store:
    """Mutable clause database with literal occurrence lists."""

    def __init__(self, cnf: Cnf):
        self.num_vars = cnf.num_vars
        self.clauses: dict[int, Clause] = {}
        self.occ: dict[int, set[int]] = {}
        self.keys: dict[frozenset, int] = {}
        self.next_id = 0
        self.stack: list[Step] = []
        self.units: list[int] = []
        for c in cnf.clauses:
            self.add(c)

    def add(self, clause: Clause):
        if is_tautology(clause):
            return
        if not clause:
            raise Conflict("empty clause")
        key = frozenset(clause)
        if key in self.keys:
            return
        cid = self.next_id
        self.next_id += 1
        self.clauses[cid] = clause
        self.keys[key] = cid
        for lit in clause:
            self.occ.setdefault(lit, set()).add(cid)
        if len(clause) == 1:
            self.units.append(clause[0])

    def remove(self, cid: int) -> Clause:
        clause = self.clauses.pop(cid)
        del self.keys[frozenset(clause)]
        for lit in clause:
            self.occ[lit].discard(cid)
        return clause

    def occurrences(self, lit: int) -> set[int]:
        return self.occ.get(lit, set())

    def assign(self, lit: int):
        """Make ``lit`` true: drop satisfied clauses, shorten the rest."""
        for cid in list(self.occurrences(lit)):
            self.remove(cid)
        for cid in list(self.occurrences(-lit)):
            clause = self.remove(cid)
            self.add(tuple(x for x in clause if x != -lit))

    def propagate(self) -> bool:
        changed = False
        while self.units:
            lit = self.units.pop()
            v = abs(lit)
            if not self.occurrences(lit) and not self.occurrences(-lit):
                # stale unit (already handled)
                continue
            if any(self.clauses[cid] == (-lit,) for cid in self.occurrences(-lit)):
                raise Conflict(f"complementary units on variable {v}")
            self.stack.append(UnitFixed(v, int(lit > 0)))
            self.assign(lit)
            changed = True
        return changed

    def variables(self) -> set[int]:
        return {abs(lit) for lit, ids in self.occ.items() if ids}

    def pure_pass(self) -> bool:
        changed = False
        for v in sorted(self.variables()):
            pos, neg = self.occurrences(v), self.occurrences(-v)
            if pos and not neg:
                lit = v
            elif neg and not pos:
                lit = -v
            else:
                continue
            self.stack.append(PureFixed(v, int(lit > 0)))
            for cid in list(self.occurrences(lit)):
                self.remove(cid)
            changed = True
        return changed

    def resolvents(self, v: int, limit: int | None):
        """Distinct non-tautological resolvents on v, or None past ``limit``."""
        out: dict[frozenset, Clause] = {}
        pos = [self.clauses[c] for c in sorted(self.occurrences(v))]
        neg = [self.clauses[c] for c in sorted(self.occurrences(-v))]
        for c in pos:
            for d in neg:
                lits = [x for x in c if x != v]
                seen = set(lits)
                taut = False
                for x in d:
                    if x == -v or x in seen:
                        continue
                    if -x in seen:
                        taut = True
                        break
                    lits.append(x)
                    seen.add(x)
                if taut:
                    continue
                key = frozenset(lits)
                if key not in out:
                    out[key] = tuple(lits)
                    if limit is not None and len(out) > limit:
                        return None
        return list(out.values())

    def eliminate(self, v: int, growth_bound: int | None) -> bool:
        ids = sorted(self.occurrences(v) | self.occurrences(-v))
        if not ids:
            return False
        limit = None if growth_bound is None else len(ids) + growth_bound
        res = self.resolvents(v, limit)
        if res is None:
            return False
        removed = tuple(self.remove(cid) for cid in ids)
        self.stack.append(Eliminated(v, removed))
        for r in res:
            self.add(r)
        return True

    def bve_pass(self, growth_bound: int) -> bool:
        changed = False
        heap = [(len(self.occurrences(v)) + len(self.occurrences(-v)), v)
                for v in self.variables()]
        heapq.heapify(heap)
        while heap:
            count, v = heapq.heappop(heap)
            now = len(self.occurrences(v)) + len(self.occurrences(-v))
            if now == 0:
                continue
            if now != count:
                heapq.heappush(heap, (now, v))
                continue
            neighbours = {abs(x) for cid in self.occurrences(v) | self.occurrences(-v)
                          for x in self.clauses[cid]} - {v}
            if self.eliminate(v, growth_bound):
                changed = True
                if self.units:
                    self.propagate()
                for u in neighbours:
                    n = len(self.occurrences(u)) + len(self.occurrences(-u))
                    if n:
                        heapq.heappush(heap, (n, u))
        return changed

    def to_cnf(self) -> Cnf:
        return Cnf(self.num_vars, tuple(self.clauses[c] for c in sorted(self.clauses)))


def _occurring(cnf: Cnf) -> int:
    return len(cnf.variables())


def unit_propagate(cnf: Cnf) -> tuple[Cnf, ReconstructionStack]:
    """Raises Conflict if an empty clause is derived."""
    if not any(len(c) == 1 for c in cnf.clauses):
        if any(not c for c in cnf.clauses):
            raise Conflict("empty clause")
        return cnf, []
    store = _Store(cnf)
    store.propagate()
    return store.to_cnf(), store.stack


def eliminate_variable(cnf: Cnf, v: int) -> Cnf:
    """Replace every clause on v by all non-tautological resolvents on v."""
    keep = [c for c in cnf.clauses if v not in c and -v not in c]
    pos = [c for c in cnf.clauses if v in c]
    neg = [c for c in cnf.clauses if -v in c]
    seen = {frozenset(c) for c in keep}
    for c in pos:
        for d in neg:
            lits = [x for x in c if x != v] + [x for x in d if x != -v]
            r = tuple(dict.fromkeys(lits))
            if is_tautology(r) or frozenset(r) in seen:
                continue
            seen.add(frozenset(r))
            keep.append(r)
    return Cnf(cnf.num_vars, tuple(keep))


def preprocess(cnf: Cnf, growth_bound: int = 0):
    """Simplify to a fixpoint; returns (reduced Cnf, stack, report)."""
    if growth_bound < 0:
        raise ValueError("growth_bound must be non-negative")
    store = _Store(cnf)
    while True:
        changed = store.propagate()
        changed |= store.pure_pass()
        changed |= store.bve_pass(growth_bound)
        if not changed:
            break
    reduced = store.to_cnf()
    if (reduced.clauses == cnf.clauses and not store.stack):
        reduced = cnf
    report = PreprocessReport(
        _occurring(cnf), _occurring(reduced), cnf.num_clauses, reduced.num_clauses,
        Counter(type(s).__name__ for s in store.stack))
    return reduced, store.stack, report


def reconstruct(reduced_model, stack, original: Cnf) -> Assignment:
    """Extend a model of the reduced CNF to one of ``original``."""
    a = [int(b) for b in reduced_model]
    if len(a) != original.num_vars:
        raise ValueError("model length does not match the original CNF")
    for step in reversed(stack):
        if isinstance(step, (UnitFixed, PureFixed)):
            a[step.var - 1] = step.value
            continue
        for value in (a[step.var - 1], 1 - a[step.var - 1]):
            a[step.var - 1] = value
            if all(any(lit_true(x, a) for x in c) for c in step.removed_clauses):
                break
        else:
            raise RuntimeError(
                f"no value of variable {step.var} satisfies its removed clauses")
    return tuple(a)
