"""Two-part parallel scheme: solve halves of the clause set, merge, finish.

The two part solutions are blended componentwise along the segment from
their componentwise minimum to their componentwise maximum,

    x(l)_i = min(x1_i, x2_i) + (l / k) * |x1_i - x2_i|,   l = 0..k,

and the endpoints x1, x2 are added to the candidates.  The candidate with
the smallest F warm-starts a solve of the whole CNF.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .cnf import Cnf
from .solver import (Problem, SolveOutcome, SolverConfig, Status, as_problem,
                     initial_point, solve)


@dataclass(frozen=True)
class SplitPlan:
    part1: Cnf
    part2: Cnf
    clause_map: tuple[int, ...]  # owner (1 or 2) of each original clause


def split(cnf: Cnf, seed: int = 0) -> SplitPlan:
    """Balanced two-way clause partition that keeps shared variables together.

    Clauses are visited in a seeded random order; each goes to the part
    already holding more of its variables, ties to the smaller part (then
    part 1).  Part sizes never differ by more than one.
    """
    m = cnf.num_clauses
    if m < 2:
        raise ValueError("need at least two clauses to split")
    caps = ((m + 1) // 2, m // 2)
    order = np.random.default_rng(seed).permutation(m)
    owner = [0] * m
    sizes = [0, 0]
    seen = (set(), set())
    for ci in order:
        vs = {abs(lit) for lit in cnf.clauses[ci]}
        score = [len(vs & seen[0]), len(vs & seen[1])]
        if sizes[0] >= caps[0]:
            side = 1
        elif sizes[1] >= caps[1]:
            side = 0
        elif score[0] != score[1]:
            side = 0 if score[0] > score[1] else 1
        else:
            side = 0 if sizes[0] <= sizes[1] else 1
        owner[ci] = side + 1
        sizes[side] += 1
        seen[side].update(vs)
    parts = [tuple(c for c, o in zip(cnf.clauses, owner) if o == k) for k in (1, 2)]
    return SplitPlan(Cnf(cnf.num_vars, parts[0]), Cnf(cnf.num_vars, parts[1]),
                     tuple(owner))


@dataclass
class MergeCandidateSet:
    points: list[np.ndarray]
    values: list[float]
    chosen: int

    @property
    def best(self) -> np.ndarray:
        return self.points[self.chosen]


def merge_points(x1, x2, k: int, cnf) -> MergeCandidateSet:
    if k < 1:
        raise ValueError("k must be at least 1")
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    if x1.shape != x2.shape:
        raise ValueError("points differ in length")
    problem = as_problem(cnf)
    lo = np.minimum(x1, x2)
    gap = np.abs(x1 - x2)
    points = [lo + (l / k) * gap for l in range(k + 1)] + [x1.copy(), x2.copy()]
    values = [problem.evaluate(p) for p in points]
    chosen = int(np.argmin(values))  # first minimum wins ties
    return MergeCandidateSet(points, values, chosen)


@dataclass
class ParallelOutcome:
    status: Status
    assignment: tuple[int, ...] | None
    part_sweeps: tuple[int, int]
    whole_sweeps: int
    merge: MergeCandidateSet
    parts: tuple[SolveOutcome, SolveOutcome]
    whole: SolveOutcome
    plan: SplitPlan

    @property
    def satisfied(self) -> bool:
        return self.status is Status.SATISFIED

    @property
    def sweeps_used(self) -> int:
        return max(self.part_sweeps) + self.whole_sweeps


def _complete(own: np.ndarray, other: np.ndarray, own_vars: set[int]) -> np.ndarray:
    # variables absent from a part take the other part's values
    out = other.copy()
    idx = np.array(sorted(own_vars), dtype=np.int64) - 1
    if idx.size:
        out[idx] = own[idx]
    return out


def part_points(plan: SplitPlan, parts: tuple[SolveOutcome, SolveOutcome]):
    x1, x2 = parts[0].point, parts[1].point
    return (_complete(x1, x2, plan.part1.variables()),
            _complete(x2, x1, plan.part2.variables()))


def solve_parallel(cnf: Cnf, config: SolverConfig = SolverConfig(), k: int = 8,
                   workers: int = 2) -> ParallelOutcome:
    """Split, solve both parts concurrently, merge, then solve the whole CNF.

    Part r (1 or 2) runs with seed ``config.seed + r``; the whole phase
    uses ``config.seed``.
    """
    plan = split(cnf, config.seed)
    problems = (Problem(plan.part1), Problem(plan.part2))
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = [pool.submit(solve, problems[r], replace(config, seed=config.seed + r + 1))
                   for r in range(2)]
        parts = tuple(f.result() for f in futures)
    whole_problem = Problem(cnf)
    x1, x2 = part_points(plan, parts)
    merge = merge_points(x1, x2, k, whole_problem)
    whole = solve(whole_problem, config, init=merge.best)
    return ParallelOutcome(whole.status, whole.assignment,
                           (parts[0].sweeps_used, parts[1].sweeps_used),
                           whole.sweeps_used, merge, parts, whole, plan)


def random_start(cnf: Cnf, seed: int, config: SolverConfig = SolverConfig()) -> np.ndarray:
    return initial_point(cnf.num_vars, config, np.random.default_rng(seed))
