"""The polynomial penalty F(x) of a CNF and its stationarity coefficients.

Each literal contributes a falsity factor: ``(1 - x)**2`` for a positive
literal and ``x**2`` for a negative one.  A clause term is the product of
its factors and F is the sum of clause terms.  For variable ``v`` let the
rest-product of an occurrence be the product of the other literals'
factors in that clause.  Then

    A_v = sum of rest-products over all occurrences of v
    B_v = sum of rest-products over positive occurrences of v
    dF/dx_v = 2 * (A_v * x_v - B_v)

so a stationary point satisfies ``A_v * x_v = B_v``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cnf import Cnf


@dataclass(frozen=True, eq=False)
class OccurrenceIndex:
    """Flat (CSR) views of a CNF, shared by the numpy and numba code paths.

    Variables are 0-based here.  ``clause_start[i]:clause_start[i+1]`` slices
    ``lit_var``/``lit_pos`` for clause i; ``occ_start[v]:occ_start[v+1]``
    slices ``occ_clause``/``occ_pos`` for variable v.
    """

    num_vars: int
    num_clauses: int
    clause_start: np.ndarray
    lit_var: np.ndarray
    lit_pos: np.ndarray
    occ_start: np.ndarray
    occ_clause: np.ndarray
    occ_pos: np.ndarray
    # padded (M, W) layout for vectorised evaluation
    pad_var: np.ndarray
    pad_pos: np.ndarray
    pad_mask: np.ndarray

    @classmethod
    def build(cls, cnf: Cnf) -> "OccurrenceIndex":
        n, m = cnf.num_vars, cnf.num_clauses
        sizes = np.array([len(c) for c in cnf.clauses], dtype=np.int64)
        clause_start = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(sizes, out=clause_start[1:])
        flat = np.fromiter((lit for c in cnf.clauses for lit in c), dtype=np.int64,
                           count=int(sizes.sum()))
        lit_var = np.abs(flat) - 1
        lit_pos = (flat > 0).astype(np.int8)
        lit_clause = np.repeat(np.arange(m, dtype=np.int64), sizes)

        order = np.argsort(lit_var, kind="stable")
        counts = np.bincount(lit_var, minlength=n) if n else np.zeros(0, np.int64)
        occ_start = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=occ_start[1:])
        occ_clause = lit_clause[order]
        occ_pos = lit_pos[order]

        width = int(sizes.max()) if m else 0
        pad_var = np.zeros((m, width), dtype=np.int64)
        pad_pos = np.zeros((m, width), dtype=np.int8)
        pad_mask = np.zeros((m, width), dtype=bool)
        for i, c in enumerate(cnf.clauses):
            k = len(c)
            pad_var[i, :k] = lit_var[clause_start[i]:clause_start[i + 1]]
            pad_pos[i, :k] = lit_pos[clause_start[i]:clause_start[i + 1]]
            pad_mask[i, :k] = True
        return cls(n, m, clause_start, lit_var, lit_pos, occ_start, occ_clause,
                   occ_pos, pad_var, pad_pos, pad_mask)


def falsity(x, positive):
    """Per-literal factor: zero exactly when the literal is true."""
    return np.where(positive, (1.0 - x) ** 2, x ** 2)


def clause_term(clause, x) -> float:
    term = 1.0
    for lit in clause:
        xv = x[abs(lit) - 1]
        term *= (1.0 - xv) ** 2 if lit > 0 else xv ** 2
    return term


def _check_len(index: OccurrenceIndex, x):
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (index.num_vars,):
        raise ValueError(f"point has shape {x.shape}, expected ({index.num_vars},)")
    return x


def _factor_matrix(index: OccurrenceIndex, x: np.ndarray) -> np.ndarray:
    if index.pad_var.size == 0:
        return np.ones(index.pad_var.shape)
    f = falsity(x[index.pad_var], index.pad_pos == 1)
    return np.where(index.pad_mask, f, 1.0)


def clause_terms(index: OccurrenceIndex, x) -> np.ndarray:
    x = _check_len(index, x)
    return _factor_matrix(index, x).prod(axis=1)


def evaluate(cnf_or_index, x) -> float:
    index = cnf_or_index if isinstance(cnf_or_index, OccurrenceIndex) \
        else OccurrenceIndex.build(cnf_or_index)
    return float(clause_terms(index, x).sum())


def _rest_products(index: OccurrenceIndex, x: np.ndarray) -> np.ndarray:
    # exclusive prefix * suffix products; no division, so zero factors are safe
    f = _factor_matrix(index, x)
    m, w = f.shape
    prefix = np.ones((m, w + 1))
    suffix = np.ones((m, w + 1))
    for j in range(w):
        prefix[:, j + 1] = prefix[:, j] * f[:, j]
        suffix[:, w - 1 - j] = suffix[:, w - j] * f[:, w - 1 - j]
    return prefix[:, :w] * suffix[:, 1:]


def all_coefficients(index: OccurrenceIndex, x) -> tuple[np.ndarray, np.ndarray]:
    """Vectors (A, B) for every variable at x."""
    x = _check_len(index, x)
    rest = _rest_products(index, x)[index.pad_mask]
    var = index.pad_var[index.pad_mask]
    pos = index.pad_pos[index.pad_mask] == 1
    a = np.bincount(var, weights=rest, minlength=index.num_vars)
    b = np.bincount(var[pos], weights=rest[pos], minlength=index.num_vars)
    return a, b


def coefficients(index: OccurrenceIndex, x, v: int) -> tuple[float, float]:
    """(A, B) for the 1-based variable v."""
    x = _check_len(index, x)
    a = b = 0.0
    for k in range(index.occ_start[v - 1], index.occ_start[v]):
        ci = index.occ_clause[k]
        rest = 1.0
        skipped = False
        for t in range(index.clause_start[ci], index.clause_start[ci + 1]):
            u = index.lit_var[t]
            # skip v's own literal once; a repeated v would be a tautology
            if u == v - 1 and not skipped and index.lit_pos[t] == index.occ_pos[k]:
                skipped = True
                continue
            xu = x[u]
            rest *= (1.0 - xu) ** 2 if index.lit_pos[t] else xu ** 2
        a += rest
        if index.occ_pos[k]:
            b += rest
    return a, b


def gradient(index: OccurrenceIndex, x) -> np.ndarray:
    x = _check_len(index, x)
    a, b = all_coefficients(index, x)
    return 2.0 * (a * x - b)
