"""Command line front end.

Exit codes: ``solve`` returns 10 when a model is found, 0 when the sweep
budget runs out and 2 on bad input; every other command returns 0 on
success and 2 on bad input.  Reports go to ``--out-dir``, defaulting to
``$SAISAT_OUT`` or ``./saisat-out``.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import bench
from .cnf import Cnf, DimacsError, emit_dimacs, gen_planted, gen_uniform_3sat, read_dimacs
from .factor import (FactorInstance, decode, encode, right_bit_fraction,
                     vote, write_matrix_csv)
from .oracle import OracleStatus, dpll_solve
from .preprocess import Conflict, preprocess
from .solver import SolverConfig, TrajectoryPolicy, solve, write_trace_csv

EXIT_SAT = 10
EXIT_UNKNOWN = 0
EXIT_INPUT = 2


class InputError(Exception):
    pass


def default_out_dir() -> Path:
    return Path(os.environ.get("SAISAT_OUT", "saisat-out"))


def _weights(text):
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad weight list {text!r}") from None


def add_config_flags(p: argparse.ArgumentParser):
    d = SolverConfig()
    g = p.add_argument_group("solver")
    g.add_argument("--inertia", type=_weights, default=d.inertia_weights,
                   help="comma separated inertia weights, newest first")
    g.add_argument("--max-sweeps", type=int, default=d.max_sweeps)
    g.add_argument("--reflection-period", type=int, default=d.reflection_period)
    g.add_argument("--stagnation-window", type=int, default=d.stagnation_window)
    g.add_argument("--stagnation-epsilon", type=float, default=d.stagnation_epsilon)
    g.add_argument("--policy", choices=[t.value for t in TrajectoryPolicy],
                   default=d.trajectory_policy.value)
    g.add_argument("--perturb", type=float, default=d.perturb_magnitude)
    g.add_argument("--init-noise", type=float, default=d.init_noise)
    g.add_argument("--seed", type=int, default=d.seed)


def config_from(args) -> SolverConfig:
    try:
        return SolverConfig(
            inertia_weights=args.inertia, max_sweeps=args.max_sweeps,
            reflection_period=args.reflection_period,
            stagnation_window=args.stagnation_window,
            stagnation_epsilon=args.stagnation_epsilon,
            trajectory_policy=args.policy, perturb_magnitude=args.perturb,
            init_noise=args.init_noise, seed=args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _load(path) -> Cnf:
    try:
        return read_dimacs(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except (DimacsError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def model_lines(assignment) -> str:
    lits = [str(v if b else -v) for v, b in enumerate(assignment, start=1)]
    return "v " + " ".join(lits + ["0"])


def cmd_solve(args) -> int:
    cnf = _load(args.file)
    config = config_from(args)
    out = solve(cnf, config)
    if args.trace:
        write_trace_csv(out.trace, args.trace)
    if out.satisfied:
        print("s SATISFIABLE")
        print(model_lines(out.assignment))
        print(f"c sweeps {out.sweeps_used}")
        return EXIT_SAT
    print("s UNKNOWN")
    print(f"c budget of {config.max_sweeps} sweeps exhausted, best F {out.best_F:.6g}")
    return EXIT_UNKNOWN


def cmd_preprocess(args) -> int:
    cnf = _load(args.file)
    try:
        reduced, stack, report = preprocess(cnf, args.growth_bound)
    except Conflict as exc:
        print(f"c conflict: {exc}", file=sys.stderr)
        print("s UNSATISFIABLE")
        return 0
    text = emit_dimacs(reduced)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    summary = json.dumps(report.to_dict(), sort_keys=True)
    if args.report:
        Path(args.report).write_text(summary + "\n")
    print(f"c {summary}", file=sys.stderr)
    return 0


def cmd_gen(args) -> int:
    if args.kind == "uniform":
        text = emit_dimacs(gen_uniform_3sat(args.vars, args.clauses, args.seed))
    elif args.kind == "planted":
        cnf, plant = gen_planted(args.vars, args.clauses, args.seed)
        text = f"c planted {' '.join(map(str, plant))}\n" + emit_dimacs(cnf)
    else:
        inst = encode(args.n)
        text = (f"c factor n={inst.n} p_vars={inst.p_vars[0]}..{inst.p_vars[-1]} "
                f"q_vars={inst.q_vars[0]}..{inst.q_vars[-1]}\n" + emit_dimacs(inst.cnf))
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_bench(args) -> int:
    if args.spec:
        try:
            spec_dict = json.loads(Path(args.spec).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"bad campaign spec: {exc}") from None
    else:
        spec_dict = {"name": args.name, "config": config_from(args).to_dict(),
                     "repetitions": args.repetitions, "split": args.split,
                     "merge_k": args.merge_k}
        if args.files:
            spec_dict["files"] = args.files
        else:
            spec_dict["generator"] = {"kind": args.gen, "vars": args.vars,
                                      "clauses": args.clauses, "count": args.count,
                                      "seed": args.instance_seed}
    spec_dict["workers"] = args.workers
    spec_dict["timing"] = not args.no_timing
    try:
        spec = bench.CampaignSpec.from_dict(spec_dict)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad campaign spec: {exc}") from None
    report = bench.run_campaign(spec)
    csv_path, json_path = report.write(args.out_dir or default_out_dir())
    print(json.dumps(report.table_row()))
    print(f"c wrote {csv_path} and {json_path}", file=sys.stderr)
    return 0


def _instance(args) -> FactorInstance:
    if args.n < 9 or args.n % 2 == 0:
        raise InputError("n must be odd and at least 9")
    truth = None
    if args.p and args.q:
        if args.p * args.q != args.n:
            raise InputError("p * q != n")
        truth = tuple(sorted((args.p, args.q)))
    return encode(args.n, truth)


def _write_rows(path: Path, rows: list[dict]):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        if not rows:
            return
        w = csv.DictWriter(f, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def cmd_factor(args) -> int:
    inst = _instance(args)
    config = config_from(args)
    out_dir = Path(args.out_dir or default_out_dir())
    print(f"c n={inst.n} bits={inst.n_bits} vars={inst.cnf.num_vars} "
          f"clauses={inst.cnf.num_clauses}")
    mode = args.mode or "oracle"
    if mode == "oracle":
        res = dpll_solve(inst.cnf, args.node_budget)
        if res.status is OracleStatus.SAT:
            p, q = decode(res.model, inst)
            assert p * q == inst.n
            print(f"{inst.n} = {min(p, q)} × {max(p, q)}")
        elif res.status is OracleStatus.UNSAT:
            print(f"{inst.n} is prime (no factorization within the encoding)")
        else:
            print("oracle budget exceeded")
        return 0
    if mode == "sai":
        monitor = (lambda x: right_bit_fraction(x, inst)) if inst.ground_truth else None
        out = solve(inst.cnf, config, monitor=monitor)
        trace_path = out_dir / f"factor-{inst.n}-trace.csv"
        trace_path.parent.mkdir(parents=True, exist_ok=True)
        write_trace_csv(out.trace, trace_path)
        write_matrix_csv(out.point, inst, out_dir / f"factor-{inst.n}-matrix.csv")
        if out.satisfied:
            p, q = decode(out.assignment, inst)
            assert p * q == inst.n
            print(f"{inst.n} = {min(p, q)} × {max(p, q)}")
        else:
            print(f"budget exceeded after {out.sweeps_used} sweeps, best F {out.best_F:.6g}")
        print(f"c trace {trace_path}", file=sys.stderr)
        return 0
    if inst.ground_truth is None:
        res = dpll_solve(inst.cnf, args.node_budget)
        if res.status is OracleStatus.SAT:
            inst.ground_truth = tuple(sorted(decode(res.model, inst)))
    if mode == "votes":
        report = vote(inst, args.runs, config, tests=tuple(args.tests.split(",")),
                      settle_sweeps=args.settle_sweeps, workers=args.workers)
        agreement_path = out_dir / f"factor-{inst.n}-agreement.csv"
        _write_rows(agreement_path, report.agreement_table("matrix"))
        votes_path = out_dir / f"factor-{inst.n}-votes.csv"
        _write_rows(votes_path, [
            {"test": b.test, "group": b.group, "position": b.position,
             "predicted": "" if b.predicted is None else b.predicted,
             "votes_for": b.votes_for, "votes_total": b.votes_total,
             "confidence": round(b.confidence, 6)} for b in report.votes])
        if report.functional_rows:
            _write_rows(out_dir / f"factor-{inst.n}-functional.csv", report.functional_rows)
        summary = {"n": inst.n, "runs": args.runs, "config": config.to_dict(),
                   "accuracy_matrix": report.accuracy("matrix"),
                   "accuracy_functional": report.accuracy("functional"),
                   "agreement": report.agreement_table("matrix")}
        (out_dir / f"factor-{inst.n}-votes.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n")
        w = csv.DictWriter(sys.stdout, fieldnames=["runs_determined", "runs_determined_pct",
                                                   "bits", "bits_pct"],
                           lineterminator="\n")
        w.writeheader()
        w.writerows(report.agreement_table("matrix"))
        return 0
    # trace-bits: right-bit fraction per sweep over several restarts
    if inst.ground_truth is None:
        raise InputError("n has no factorization to compare against")
    from dataclasses import replace
    curves = []
    for r in range(args.runs):
        out = solve(inst.cnf, replace(config, seed=config.seed + r),
                    monitor=lambda x: right_bit_fraction(x, inst))
        curves.append([row.right_bit_fraction for row in out.trace])
    rows = []
    for t in range(max(len(c) for c in curves)):
        vals = [c[min(t, len(c) - 1)] for c in curves]
        rows.append({"sweep": t, "mean": sum(vals) / len(vals), "max": max(vals),
                     "min": min(vals)})
    path = out_dir / f"factor-{inst.n}-rightbits.csv"
    _write_rows(path, rows)
    per_run_max = [max(c) for c in curves]
    print(f"final mean {rows[-1]['mean']:.4f} max {rows[-1]['max']:.4f} "
          f"mean of per-run max {sum(per_run_max) / len(per_run_max):.4f}")
    print(f"c wrote {path}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="saisat", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run SAI mix on a DIMACS file")
    p.add_argument("file")
    p.add_argument("--trace", help="write the per-sweep trace as CSV")
    add_config_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("preprocess", help="simplify a DIMACS file by resolution")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p.add_argument("--growth-bound", type=int, default=0)
    p.add_argument("--report", help="write the size report as JSON")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("gen", help="generate an instance")
    p.add_argument("kind", choices=["uniform", "planted", "factor"])
    p.add_argument("--vars", type=int, default=20)
    p.add_argument("--clauses", type=int, default=91)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, help="modulus for 'factor'")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run a solver campaign")
    p.add_argument("--spec", help="campaign spec as JSON (overrides instance flags)")
    p.add_argument("--name", default="campaign")
    p.add_argument("--files", nargs="*", default=[])
    p.add_argument("--gen", choices=["uniform", "planted"], default="uniform")
    p.add_argument("--vars", type=int, default=20)
    p.add_argument("--clauses", type=int, default=91)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--instance-seed", type=int, default=0)
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--split", action="store_true", help="use the two-part parallel solver")
    p.add_argument("--merge-k", type=int, default=8)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-timing", action="store_true",
                   help="record wall_time as 0 so reruns are byte-identical")
    p.add_argument("--out-dir")
    add_config_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("factor", help="factoring attack on an odd n")
    p.add_argument("n", type=int)
    mode = p.add_mutually_exclusive_group()
    for flag in ("oracle", "sai", "votes", "trace-bits"):
        mode.add_argument(f"--{flag}", dest="mode", action="store_const",
                          const=flag.replace("-", "_"))
    p.add_argument("--p", type=int, help="known factor (ground truth)")
    p.add_argument("--q", type=int, help="known cofactor (ground truth)")
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--tests", default="matrix,functional")
    p.add_argument("--settle-sweeps", type=int, default=0)
    p.add_argument("--node-budget", type=int, default=10_000_000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir")
    add_config_flags(p)
    p.set_defaults(func=cmd_factor)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "gen" and args.kind == "factor" and not args.n:
        ap.error("gen factor needs --n")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
