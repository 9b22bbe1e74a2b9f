"""numba kernels for the solver hot loops (CSR layout from OccurrenceIndex)."""

import numba as nb
import numpy as np

_JIT = dict(nogil=True, cache=True)


@nb.njit(**_JIT)
def coeff_at(x, v, clause_start, lit_var, lit_pos, occ_start, occ_clause, occ_pos):
    a = 0.0
    b = 0.0
    for k in range(occ_start[v], occ_start[v + 1]):
        ci = occ_clause[k]
        pos = occ_pos[k]
        rest = 1.0
        skipped = False
        for t in range(clause_start[ci], clause_start[ci + 1]):
            u = lit_var[t]
            if u == v and not skipped and lit_pos[t] == pos:
                skipped = True
                continue
            xu = x[u]
            if lit_pos[t]:
                rest *= (1.0 - xu) * (1.0 - xu)
            else:
                rest *= xu * xu
        a += rest
        if pos:
            b += rest
    return a, b


@nb.njit(**_JIT)
def sweep(hist, alpha, eps_div, clause_start, lit_var, lit_pos, occ_start,
          occ_clause, occ_pos):
    """One Gauss-Seidel pass; returns the new point, history untouched."""
    n = hist.shape[1]
    depth = alpha.shape[0]
    x = hist[0].copy()
    for v in range(n):
        if occ_start[v] == occ_start[v + 1]:
            continue
        a0, b = coeff_at(x, v, clause_start, lit_var, lit_pos, occ_start,
                         occ_clause, occ_pos)
        abar = alpha[0] * a0
        for p in range(1, depth):
            if alpha[p] != 0.0:
                ap, _ = coeff_at(hist[p], v, clause_start, lit_var, lit_pos,
                                 occ_start, occ_clause, occ_pos)
                abar += alpha[p] * ap
        if abar <= eps_div:
            continue
        val = b / abar
        if val < 0.0:
            val = 0.0
        elif val > 1.0:
            val = 1.0
        x[v] = val
    return x


@nb.njit(**_JIT)
def reflect(x, eps_div, clause_start, lit_var, lit_pos, occ_start, occ_clause,
            occ_pos):
    n = x.shape[0]
    out = x.copy()
    for v in range(n):
        a, b = coeff_at(x, v, clause_start, lit_var, lit_pos, occ_start,
                        occ_clause, occ_pos)
        if a <= eps_div:
            continue
        val = 2.0 * x[v] - b / a
        if val < 0.0:
            val = 0.0
        elif val > 1.0:
            val = 1.0
        out[v] = val
    return out


@nb.njit(**_JIT)
def evaluate(x, clause_start, lit_var, lit_pos):
    m = clause_start.shape[0] - 1
    total = 0.0
    for ci in range(m):
        term = 1.0
        for t in range(clause_start[ci], clause_start[ci + 1]):
            xu = x[lit_var[t]]
            if lit_pos[t]:
                term *= (1.0 - xu) * (1.0 - xu)
            else:
                term *= xu * xu
        total += term
    return total


@nb.njit(**_JIT)
def unsat_mask(bits, clause_start, lit_var, lit_pos):
    m = clause_start.shape[0] - 1
    out = np.zeros(m, dtype=np.bool_)
    for ci in range(m):
        sat = False
        for t in range(clause_start[ci], clause_start[ci + 1]):
            if bits[lit_var[t]] == lit_pos[t]:
                sat = True
                break
        out[ci] = not sat
    return out
