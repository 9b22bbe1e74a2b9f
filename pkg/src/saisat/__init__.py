"""Continuous-relaxation SAT solving and factoring-attack experiments."""

from .cnf import (Cnf, Conflict, DimacsError, condition, count_unsatisfied,
                  emit_dimacs, gen_planted, gen_uniform_3sat, parse_dimacs)
from .functional import OccurrenceIndex, coefficients, evaluate, gradient
from .oracle import OracleStatus, dpll_solve, enumerate_models
from .preprocess import preprocess, reconstruct
from .solver import SolverConfig, Status, TrajectoryPolicy, solve
from .split import solve_parallel

__all__ = [
    "Cnf", "Conflict", "DimacsError", "condition", "count_unsatisfied", "emit_dimacs",
    "gen_planted", "gen_uniform_3sat", "parse_dimacs", "OccurrenceIndex", "coefficients",
    "evaluate", "gradient", "OracleStatus", "dpll_solve", "enumerate_models",
    "preprocess", "reconstruct", "SolverConfig", "Status", "TrajectoryPolicy", "solve",
    "solve_parallel",
]
__version__ = "0.1.0"
