"""Factoring as SAT: a schoolbook multiplier circuit with its output fixed to n.

Layout for an N-bit odd n:

* ``p`` has P = ceil(N/2) bits and ``q`` has Q = N - 1 bits, little-endian,
  with ``p[0] = q[0] = 1`` forced by unit clauses and one clause
  ``(p[1] or ... or p[P-1])`` excluding p = 1;
* ``partial[i][j] = q[i] and p[j]`` is row i, column j of the
  long-multiplication matrix (3 clauses per gate);
* rows are accumulated with ripple-carry adders.  Each column position
  adds the running sum bit, the partial product and the incoming carry.
  Two inputs use a half adder: ``s = a xor b`` (4 clauses) and
  ``c = a and b`` (3).  Three inputs use a gate-level full adder with
  internal wires ``t1 = a xor b``, ``s = t1 xor cin``, ``t2 = a and b``,
  ``agreement_path = t1 and cin``, ``c = t2 or agreement_path`` (4 + 4 + 3 + 3 + 3 = 17 clauses);
* every accumulator bit is fixed to the matching bit of n by a unit clause.

Variables are numbered p bits first, then q bits, then the matrix row by
row, then adder outputs in creation order.
"""

from __future__ import annotations

import csv
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cnf import Cnf, Conflict, condition, count_unsatisfied


def and_gate(out: int, a: int, b: int) -> list[tuple[int, ...]]:
    return [(-out, a), (-out, b), (out, -a, -b)]


def xor_clauses(out: int, ins: list[int]) -> list[tuple[int, ...]]:
    """out <-> parity(ins): forbid every assignment of the wrong parity."""
    vs = ins + [out]
    clauses = []
    for signs in itertools.product((0, 1), repeat=len(vs)):
        # assignment 'signs' is forbidden when parity of ins != out
        if sum(signs) % 2 == 1:
            clauses.append(tuple(-v if s else v for v, s in zip(vs, signs)))
    return clauses


def or_gate(out: int, a: int, b: int) -> list[tuple[int, ...]]:
    return [(-a, out), (-b, out), (-out, a, b)]


@dataclass
class FactorInstance:
    n: int
    n_bits: int
    cnf: Cnf
    p_vars: list[int]
    q_vars: list[int]
    partial: list[list[int]]  # partial[i][j] = q_i and p_j
    sums: list[int] = field(default_factory=list)
    carries: list[int] = field(default_factory=list)
    wires: list[int] = field(default_factory=list)
    ground_truth: Optional[tuple[int, int]] = None

    @property
    def key_vars(self) -> list[int]:
        return self.p_vars + self.q_vars


class _Builder:
    def __init__(self):
        self.next_var = 1
        self.clauses: list[tuple[int, ...]] = []
        self.sums: list[int] = []
        self.carries: list[int] = []
        self.wires: list[int] = []

    def new(self, count=1):
        vs = list(range(self.next_var, self.next_var + count))
        self.next_var += count
        return vs

    def add(self, inputs: list[int]):
        """Sum the given bits; returns (sum bit, carry bit or None)."""
        if len(inputs) == 1:
            return inputs[0], None
        if len(inputs) == 2:
            s, c = self.new(2)
            self.clauses += xor_clauses(s, inputs) + and_gate(c, *inputs)
        else:
            a, b, cin = inputs
            t1, s, t2, agreement_path, c = self.new(5)
            self.wires += [t1, t2, agreement_path]
            self.clauses += (xor_clauses(t1, [a, b]) + xor_clauses(s, [t1, cin])
                             + and_gate(t2, a, b) + and_gate(agreement_path, t1, cin)
                             + or_gate(c, t2, agreement_path))
        self.sums.append(s)
        self.carries.append(c)
        return s, c


def encode(n: int, ground_truth: tuple[int, int] | None = None) -> FactorInstance:
    n = int(n)
    if n < 9 or n % 2 == 0:
        raise ValueError("n must be odd and at least 9")
    nb = n.bit_length()
    P, Q = (nb + 1) // 2, nb - 1
    b = _Builder()
    p = b.new(P)
    q = b.new(Q)
    partial = [b.new(P) for _ in range(Q)]

    b.clauses += [(p[0],), (q[0],), tuple(p[1:])]
    for i in range(Q):
        for j in range(P):
            b.clauses += and_gate(partial[i][j], q[i], p[j])

    acc = {j: partial[0][j] for j in range(P)}
    for i in range(1, Q):
        carry = None
        pos = i
        while True:
            j = pos - i
            ins = [x for x in (acc.get(pos), partial[i][j] if j < P else None, carry)
                   if x is not None]
            if j >= P and carry is None:
                break
            acc[pos], carry = b.add(ins)
            pos += 1

    for pos in sorted(acc):
        b.clauses.append((acc[pos],) if (n >> pos) & 1 else (-acc[pos],))

    cnf = Cnf(b.next_var - 1, tuple(b.clauses))
    return FactorInstance(n, nb, cnf, p, q, partial, b.sums, b.carries, b.wires,
                          ground_truth)


def bits_to_int(bits) -> int:
    return sum(int(bit) << k for k, bit in enumerate(bits))


def decode(a, inst: FactorInstance) -> tuple[int, int]:
    if count_unsatisfied(inst.cnf, a):
        raise ValueError("assignment does not satisfy the factoring CNF")
    p = bits_to_int(a[v - 1] for v in inst.p_vars)
    q = bits_to_int(a[v - 1] for v in inst.q_vars)
    return p, q


def random_semiprime(n_bits: int, seed: int) -> tuple[int, int, int]:
    """Two distinct primes of about n_bits/2 bits whose product has n_bits bits."""
    import sympy

    if n_bits < 6:
        raise ValueError("n_bits must be at least 6")
    rng = np.random.default_rng(seed)

    def top_bit_set(bits):
        # arbitrary width, so build from random bytes rather than int64 draws
        r = int.from_bytes(rng.bytes((bits + 7) // 8), "little")
        return (1 << (bits - 1)) | (r & ((1 << (bits - 1)) - 1))

    lo_bits = n_bits // 2
    hi_bits = n_bits - lo_bits
    while True:
        a = int(sympy.nextprime(top_bit_set(lo_bits)))
        b = int(sympy.nextprime(top_bit_set(hi_bits)))
        if a != b and (a * b).bit_length() == n_bits:
            a, b = sorted((a, b))
            return a * b, a, b


def truth_bits(inst: FactorInstance, swap: bool = False):
    if inst.ground_truth is None:
        raise ValueError("instance has no ground truth")
    a, b = inst.ground_truth
    if swap:
        a, b = b, a
    return ([(a >> k) & 1 for k in range(len(inst.p_vars))],
            [(b >> k) & 1 for k in range(len(inst.q_vars))])


def _key_rounding(x, inst):
    x = np.asarray(x, dtype=np.float64)
    pb = (x[np.array(inst.p_vars) - 1] >= 0.5).astype(int)
    qb = (x[np.array(inst.q_vars) - 1] >= 0.5).astype(int)
    return pb, qb


def right_bit_fraction(x, inst: FactorInstance) -> float:
    """Share of rounded key bits equal to the true factors, best orientation."""
    pb, qb = _key_rounding(x, inst)
    total = len(pb) + len(qb)
    best = 0
    for swap in (False, True):
        tp, tq = truth_bits(inst, swap)
        best = max(best, int((pb == tp).sum() + (qb == tq).sum()))
    return best / total


def ground_truth_point(inst: FactorInstance) -> np.ndarray:
    """The unique model with p, q = ground truth, as a float vector."""
    from .oracle import dpll_solve

    p, q = inst.ground_truth
    units = [(v if (p >> k) & 1 else -v,) for k, v in enumerate(inst.p_vars)]
    units += [(v if (q >> k) & 1 else -v,) for k, v in enumerate(inst.q_vars)]
    res = dpll_solve(Cnf(inst.cnf.num_vars, inst.cnf.clauses + tuple(units)))
    if res.model is None:
        raise ValueError("ground truth does not fit the encoding widths")
    return np.array(res.model, dtype=np.float64)


def write_matrix_csv(x, inst: FactorInstance, path):
    """Partial-product matrix at x as a grid: row i is q_i, column j is p_j."""
    x = np.asarray(x, dtype=np.float64)
    m = x[np.array(inst.partial) - 1]
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["q\\p"] + [f"p{j}" for j in range(m.shape[1])])
        for i, row in enumerate(m):
            w.writerow([f"q{i}"] + [repr(float(v)) for v in row])


@dataclass(frozen=True)
class BitVote:
    group: str  # "P" or "Q"
    position: int
    predicted: Optional[int]
    votes_for: int
    votes_total: int
    test: str = ""

    @property
    def confidence(self) -> float:
        return self.votes_for / self.votes_total if self.votes_total else 0.0


def _classify(vec, ref, margin):
    d_zero = float(np.sum(vec ** 2))
    d_ref = float(np.sum((vec - ref) ** 2))
    if d_zero <= margin * d_ref and d_zero < d_ref:
        return 0
    if d_ref <= margin * d_zero and d_ref < d_zero:
        return 1
    return None


def matrix_cluster_test(x, inst: FactorInstance, margin: float = 0.5) -> list[BitVote]:
    """Classify matrix rows as zero-or-p and columns as zero-or-q.

    Row i of the partial-product matrix is the zero vector when q_i = 0 and
    a copy of p otherwise; columns behave the same way with q.  The
    reference vectors are the rounded p and q of ``x``.  A vote is cast only
    when the nearer pattern's squared distance is at most ``margin`` times
    the other's.
    """
    x = np.asarray(x, dtype=np.float64)
    m = x[np.array(inst.partial) - 1]  # (Q, P)
    p_ref, q_ref = (a.astype(np.float64) for a in _key_rounding(x, inst))
    votes = []
    for i in range(m.shape[0]):
        bit = _classify(m[i], p_ref, margin)
        if bit is not None:
            votes.append(BitVote("Q", i, bit, 1, 1, "matrix"))
    for j in range(m.shape[1]):
        bit = _classify(m[:, j], q_ref, margin)
        if bit is not None:
            votes.append(BitVote("P", j, bit, 1, 1, "matrix"))
    return votes


def functional_comparison_test(inst: FactorInstance, x, v: int, settle_sweeps: int = 0,
                               config=None):
    """Fix key variable v to 0 and to 1 and compare the resulting F.

    Returns (predicted, f0, f1).  A branch whose conditioning empties a
    clause scores +inf.  predicted is None on an exact tie.
    """
    from .solver import Problem, SolverConfig, SolverState, sai_sweep

    if v not in inst.p_vars and v not in inst.q_vars:
        raise ValueError(f"variable {v} is not a key bit")
    config = config or SolverConfig()
    scores = []
    for b in (0, 1):
        try:
            cond = condition(inst.cnf, v if b else -v)
        except Conflict:
            scores.append(float("inf"))
            continue
        y = np.array(x, dtype=np.float64)
        y[v - 1] = b
        problem = Problem(cond)
        if settle_sweeps:
            state = SolverState.start(y, config.inertia_depth)
            for _ in range(settle_sweeps):
                sai_sweep(state, problem, config)
            y = state.x
        scores.append(problem.evaluate(y))
    f0, f1 = scores
    predicted = None if f0 == f1 else int(f1 < f0)
    return predicted, f0, f1


@dataclass
class BitTestReport:
    n: int
    runs: int
    votes: list[BitVote]
    key_bits: int
    ground_truth: Optional[tuple[int, int]] = None
    functional_rows: list[dict] = field(default_factory=list)
    right_bits: list[float] = field(default_factory=list)

    def for_test(self, test: str) -> list[BitVote]:
        return [b for b in self.votes if b.test == test]

    def accuracy(self, test: str | None = None, min_confidence: float = 0.0):
        """Share of decided positions matching the true factors.

        The orientation (which factor is p) is the one scoring better.
        Returns None when nothing qualifies or no ground truth is known.
        """
        if self.ground_truth is None:
            return None
        chosen = [b for b in self.votes
                  if b.votes_total > 0 and b.predicted is not None
                  and (test is None or b.test == test)
                  and b.confidence >= min_confidence]
        if not chosen:
            return None
        a, c = self.ground_truth
        best = 0
        for tp, tq in ((a, c), (c, a)):
            hits = sum(b.predicted == ((tp if b.group == "P" else tq) >> b.position) & 1
                       for b in chosen)
            best = max(best, hits)
        return best / len(chosen)

    def agreement_table(self, test: str = "matrix") -> list[dict]:
        """Key bits grouped by how many runs agreed on them."""
        counts: dict[int, int] = {}
        for b in self.for_test(test):
            if b.votes_for:
                counts[b.votes_for] = counts.get(b.votes_for, 0) + 1
        rows = []
        for k in sorted(counts, reverse=True):
            rows.append({
                "runs_determined": k,
                "runs_determined_pct": round(100.0 * k / self.runs, 2),
                "bits": counts[k],
                "bits_pct": round(100.0 * counts[k] / self.key_bits, 2),
            })
        return rows


def _aggregate(raw: dict, runs: int, test: str) -> list[BitVote]:
    out = []
    for (group, pos), ballots in sorted(raw.items()):
        ones = sum(ballots)
        zeros = len(ballots) - ones
        if not ballots:
            out.append(BitVote(group, pos, None, 0, 0, test))
            continue
        bit = int(ones > zeros)
        out.append(BitVote(group, pos, bit, max(ones, zeros), len(ballots), test))
    return out


def vote(inst: FactorInstance, runs: int, config=None, tests=("matrix", "functional"),
         settle_sweeps: int = 0, margin: float = 0.5, workers: int = 1) -> BitTestReport:
    """Restart the solver ``runs`` times and pool the bit tests' ballots.

    Restart r uses seed ``config.seed + r``.
    """
    from dataclasses import replace

    from .solver import Problem, SolverConfig, solve

    if runs < 1:
        raise ValueError("runs must be at least 1")
    unknown = set(tests) - {"matrix", "functional"}
    if unknown:
        raise ValueError(f"unknown tests {sorted(unknown)}")
    config = config or SolverConfig()
    problem = Problem(inst.cnf)

    def one_run(r):
        out = solve(problem, replace(config, seed=config.seed + r))
        ballots = {"matrix": [], "functional": []}
        if "matrix" in tests:
            ballots["matrix"] = matrix_cluster_test(out.point, inst, margin)
        if "functional" in tests:
            for group, vars_ in (("P", inst.p_vars), ("Q", inst.q_vars)):
                for pos, v in enumerate(vars_):
                    pred, f0, f1 = functional_comparison_test(
                        inst, out.point, v, settle_sweeps, config)
                    ballots["functional"].append((group, pos, pred, f0, f1))
        rbf = right_bit_fraction(out.point, inst) if inst.ground_truth else None
        return ballots, rbf

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(one_run, range(runs)))

    positions = [("P", k) for k in range(len(inst.p_vars))] + \
                [("Q", k) for k in range(len(inst.q_vars))]
    votes: list[BitVote] = []
    functional_rows = []
    for test in tests:
        raw = {key: [] for key in positions}
        for ballots, _ in results:
            if test == "matrix":
                for b in ballots["matrix"]:
                    raw[(b.group, b.position)].append(b.predicted)
            else:
                for group, pos, pred, _, _ in ballots["functional"]:
                    if pred is not None:
                        raw[(group, pos)].append(pred)
        votes += _aggregate(raw, runs, test)
    if "functional" in tests and inst.ground_truth is not None:
        functional_rows = _functional_table(inst, results)
    votes.sort(key=lambda b: (-b.confidence, -b.votes_for, b.test, b.group, b.position))
    return BitTestReport(inst.n, runs, votes, len(positions), inst.ground_truth,
                         functional_rows, [r for _, r in results if r is not None])


def _functional_table(inst, results) -> list[dict]:
    """Mean F with the right and with the wrong value per key bit ."""
    tp, tq = truth_bits(inst)
    rows = []
    per_bit: dict[tuple, list] = {}
    for ballots, _ in results:
        for group, pos, _, f0, f1 in ballots["functional"]:
            right = (tp if group == "P" else tq)[pos]
            fr, fw = (f1, f0) if right else (f0, f1)
            per_bit.setdefault((group, pos), []).append((fr, fw))
    for (group, pos), pairs in sorted(per_bit.items()):
        fr = float(np.mean([a for a, _ in pairs]))
        fw = float(np.mean([b for _, b in pairs]))
        rows.append({"group": group, "position": pos, "f_right": fr, "f_wrong": fw,
                     "difference": fr - fw})
    return rows
