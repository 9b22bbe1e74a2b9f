"""Successive approximation with inertia ("SAI mix").

Each sweep visits variables in ascending order and sets
``x_v <- B_v / Abar_v`` where B is taken at the current, partially updated
point and ``Abar_v = sum_p alpha_p * A_v(x(t - p))`` blends A over the last
K iterates.  Every ``reflection_period`` sweeps the point is reflected
through its fixed-point targets (``x <- 2x - B/A``), the rounded point is
checked after every sweep, and a stalled run has its trajectory changed by
nudging the variables of falsified clauses.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels as K
from .cnf import Cnf, count_unsatisfied
from .functional import OccurrenceIndex


class TrajectoryPolicy(str, enum.Enum):
    NONE = "none"
    PERTURB_UNSAT = "perturb_unsat"


class Status(str, enum.Enum):
    SATISFIED = "SATISFIED"
    BUDGET_EXCEEDED = "BUDGET_EXCEEDED"


@dataclass(frozen=True)
class SolverConfig:
    inertia_weights: tuple[float, ...] = (0.3, 0.3, 0.4)
    max_sweeps: int = 10_000
    reflection_period: int = 7
    stagnation_window: int = 10
    stagnation_epsilon: float = 1e-6
    trajectory_policy: TrajectoryPolicy = TrajectoryPolicy.PERTURB_UNSAT
    perturb_magnitude: float = 1.0
    init_noise: float = 0.1
    eps_div: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        w = tuple(float(a) for a in self.inertia_weights)
        object.__setattr__(self, "inertia_weights", w)
        object.__setattr__(self, "trajectory_policy",
                           TrajectoryPolicy(self.trajectory_policy))
        if not w:
            raise ValueError("inertia depth must be at least 1")
        if any(a < 0.0 or a > 1.0 for a in w):
            raise ValueError("inertia weights must lie in [0, 1]")
        if abs(sum(w) - 1.0) > 1e-12:
            raise ValueError(f"inertia weights sum to {sum(w)!r}, not 1")
        if self.max_sweeps < 0 or self.reflection_period < 0:
            raise ValueError("sweep counts must be non-negative")
        if self.stagnation_window < 1:
            raise ValueError("stagnation_window must be positive")
        if not 0.0 < self.perturb_magnitude <= 1.0:
            raise ValueError("perturb_magnitude must lie in (0, 1]")

    @property
    def inertia_depth(self) -> int:
        return len(self.inertia_weights)

    def to_dict(self) -> dict:
        return {
            "inertia_weights": list(self.inertia_weights),
            "max_sweeps": self.max_sweeps,
            "reflection_period": self.reflection_period,
            "stagnation_window": self.stagnation_window,
            "stagnation_epsilon": self.stagnation_epsilon,
            "trajectory_policy": self.trajectory_policy.value,
            "perturb_magnitude": self.perturb_magnitude,
            "init_noise": self.init_noise,
            "eps_div": self.eps_div,
            "seed": self.seed,
        }


@dataclass
class SolverState:
    history: np.ndarray  # (K, N); row p holds x(t - p)
    sweep_count: int = 0
    best_F: float = float("inf")
    best_point: Optional[np.ndarray] = None

    @classmethod
    def start(cls, x0, depth: int) -> "SolverState":
        x0 = np.clip(np.asarray(x0, dtype=np.float64), 0.0, 1.0)
        return cls(history=np.tile(x0, (depth, 1)))

    @property
    def x(self) -> np.ndarray:
        return self.history[0]

    def push(self, x: np.ndarray):
        self.history[1:] = self.history[:-1].copy()
        self.history[0] = x

    def reset(self, x: np.ndarray):
        self.history[:] = x


@dataclass(frozen=True)
class TraceRow:
    sweep: int
    F: float
    unsat_count: int
    right_bit_fraction: Optional[float] = None


@dataclass
class SolveOutcome:
    status: Status
    assignment: Optional[tuple[int, ...]]
    sweeps_used: int
    point: np.ndarray
    best_F: float
    trace: list[TraceRow] = field(default_factory=list)
    trajectory_changes: int = 0

    @property
    def satisfied(self) -> bool:
        return self.status is Status.SATISFIED


class Problem:
    """A CNF bundled with its occurrence index; build once, share freely."""

    def __init__(self, cnf: Cnf, index: OccurrenceIndex | None = None):
        self.cnf = cnf
        self.index = index if index is not None else OccurrenceIndex.build(cnf)
        ix = self.index
        self._csr = (ix.clause_start, ix.lit_var, ix.lit_pos)
        self._occ = (ix.occ_start, ix.occ_clause, ix.occ_pos)

    @property
    def num_vars(self) -> int:
        return self.cnf.num_vars

    def evaluate(self, x) -> float:
        return K.evaluate(np.asarray(x, dtype=np.float64), *self._csr)

    def unsat_mask(self, bits) -> np.ndarray:
        return K.unsat_mask(np.asarray(bits, dtype=np.int8), *self._csr)

    def sweep_point(self, history: np.ndarray, alpha: np.ndarray, eps_div: float):
        return K.sweep(history, alpha, eps_div, *self._csr, *self._occ)

    def reflect_point(self, x: np.ndarray, eps_div: float):
        return K.reflect(x, eps_div, *self._csr, *self._occ)


def as_problem(cnf) -> Problem:
    return cnf if isinstance(cnf, Problem) else Problem(cnf)


def round_point(x) -> tuple[int, ...]:
    return tuple(int(v >= 0.5) for v in np.asarray(x, dtype=np.float64))


def sai_sweep(state: SolverState, problem, config: SolverConfig) -> SolverState:
    problem = as_problem(problem)
    alpha = np.asarray(config.inertia_weights, dtype=np.float64)
    if state.history.shape[0] != alpha.shape[0]:
        raise ValueError("history depth does not match inertia depth")
    x = problem.sweep_point(state.history, alpha, config.eps_div)
    state.push(x)
    state.sweep_count += 1
    return state


def reflect(state: SolverState, problem, config: SolverConfig) -> SolverState:
    """Jacobi-order reflection of the current iterate through B/A."""
    problem = as_problem(problem)
    state.history[0] = problem.reflect_point(state.x.copy(), config.eps_div)
    return state


def change_trajectory(state: SolverState, problem, config: SolverConfig,
                      rng: np.random.Generator) -> SolverState:
    """Nudge each variable of a falsified clause toward flipping its rounding."""
    if config.trajectory_policy is TrajectoryPolicy.NONE:
        raise ValueError("trajectory policy is NONE")
    problem = as_problem(problem)
    ix = problem.index
    x = state.x.copy()
    bits = np.array(round_point(x), dtype=np.int8)
    unsat = np.flatnonzero(problem.unsat_mask(bits))
    if unsat.size == 0:
        return state
    targets = np.unique(np.concatenate(
        [ix.lit_var[ix.clause_start[c]:ix.clause_start[c + 1]] for c in unsat]))
    u = 1.0 - rng.random(targets.size)  # (0, 1]
    # every literal of a falsified clause is false, so the direction is 1 - bit
    direction = np.where(bits[targets] == 1, -1.0, 1.0)
    x[targets] = np.clip(x[targets] + direction * config.perturb_magnitude * u,
                         0.0, 1.0)
    state.reset(x)
    return state


def initial_point(n: int, config: SolverConfig,
                  rng: np.random.Generator) -> np.ndarray:
    return np.clip(0.5 + config.init_noise * rng.uniform(-1.0, 1.0, size=n), 0.0, 1.0)


def solve(cnf, config: SolverConfig = SolverConfig(), init=None,
          monitor: Callable[[np.ndarray], float] | None = None) -> SolveOutcome:
    """Run SAI mix until the rounded iterate satisfies the CNF or the budget ends.

    ``monitor`` maps the current point to a score recorded in the trace
    (for example the fraction of bits agreeing with a known plant).
    """
    problem = as_problem(cnf)
    rng = np.random.default_rng(config.seed)
    x0 = initial_point(problem.num_vars, config, rng) if init is None else init
    state = SolverState.start(x0, config.inertia_depth)
    alpha = np.asarray(config.inertia_weights, dtype=np.float64)

    trace: list[TraceRow] = []
    changes = 0
    epoch_best = float("inf")
    epoch_mark = 0

    def checkpoint(t):
        nonlocal epoch_best, epoch_mark
        x = state.x
        bits = np.array(round_point(x), dtype=np.int8)
        unsat = int(problem.unsat_mask(bits).sum())
        f = problem.evaluate(x)
        trace.append(TraceRow(t, f, unsat, monitor(x) if monitor else None))
        for value, point in ((f, x), (float(unsat), bits.astype(np.float64))):
            if value < state.best_F:
                state.best_F = value
                state.best_point = point.copy()
        if f < epoch_best - config.stagnation_epsilon:
            epoch_best = f
            epoch_mark = t
        return bits, unsat

    def finish(status, t, bits=None):
        assignment = None
        if status is Status.SATISFIED:
            assignment = tuple(int(b) for b in bits)
            # never report a model that does not check out
            if count_unsatisfied(problem.cnf, assignment) != 0:
                raise AssertionError("solver produced an unverified model")
        return SolveOutcome(status, assignment, t, state.x.copy(), state.best_F,
                            trace, changes)

    bits, unsat = checkpoint(0)
    if unsat == 0:
        return finish(Status.SATISFIED, 0, bits)
    for t in range(1, config.max_sweeps + 1):
        state.push(problem.sweep_point(state.history, alpha, config.eps_div))
        state.sweep_count = t
        if config.reflection_period and t % config.reflection_period == 0:
            state.history[0] = problem.reflect_point(state.x.copy(), config.eps_div)
        bits, unsat = checkpoint(t)
        if unsat == 0:
            return finish(Status.SATISFIED, t, bits)
        if (config.trajectory_policy is not TrajectoryPolicy.NONE
                and t - epoch_mark >= config.stagnation_window):
            change_trajectory(state, problem, config, rng)
            changes += 1
            epoch_mark = t
    return finish(Status.BUDGET_EXCEEDED, config.max_sweeps)


def plant_monitor(plant) -> Callable[[np.ndarray], float]:
    plant = np.asarray(plant, dtype=np.int8)

    def fraction(x):
        return float(np.mean((np.asarray(x) >= 0.5).astype(np.int8) == plant))
    return fraction


def write_trace_csv(trace, path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["sweep", "F", "unsat_count", "right_bit_fraction"])
        for row in trace:
            rbf = "" if row.right_bit_fraction is None else repr(row.right_bit_fraction)
            w.writerow([row.sweep, repr(row.F), row.unsat_count, rbf])
