"""Solver campaigns: run many instances, report solved share and sweep counts per benchmark."""

from __future__ import annotations

import csv
import json
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .cnf import (Cnf, count_unsatisfied, gen_planted, gen_uniform_3sat, read_dimacs,
                  undetermined_variables)
from .oracle import OracleStatus, dpll_solve
from .solver import SolverConfig, round_point, solve
from .split import solve_parallel


@dataclass
class Instance:
    name: str
    cnf: Cnf
    known_sat: Optional[bool] = None
    seed: int = 0


@dataclass
class CampaignSpec:
    """Where instances come from and how to run them.

    ``generator`` is a dict such as ``{"kind": "uniform", "vars": 20,
    "clauses": 91, "count": 100, "seed": 0, "sat_only": true}``; ``files``
    lists DIMACS paths.  Exactly one of the two is used.
    """

    name: str = "campaign"
    files: list[str] = field(default_factory=list)
    generator: Optional[dict] = None
    config: SolverConfig = SolverConfig()
    repetitions: int = 1
    split: bool = False
    merge_k: int = 8
    oracle_budget: int = 1_000_000
    workers: int = 1
    timing: bool = True

    def __post_init__(self):
        if bool(self.files) == bool(self.generator):
            raise ValueError("give either files or a generator")
        if self.repetitions < 1 or self.config.max_sweeps < 1:
            raise ValueError("repetitions and sweep budget must be positive")
        for f in self.files:
            if not Path(f).is_file():
                raise ValueError(f"no such file: {f}")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "files": list(self.files),
            "generator": self.generator,
            "config": self.config.to_dict(),
            "repetitions": self.repetitions,
            "split": self.split,
            "merge_k": self.merge_k,
            "oracle_budget": self.oracle_budget,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignSpec":
        d = dict(d)
        cfg = d.pop("config", {}) or {}
        if "inertia_weights" in cfg:
            cfg["inertia_weights"] = tuple(cfg["inertia_weights"])
        return cls(config=SolverConfig(**cfg), **d)


def build_instances(spec: CampaignSpec) -> list[Instance]:
    if spec.files:
        out = []
        for path in spec.files:
            cnf = read_dimacs(path)
            res = dpll_solve(cnf, spec.oracle_budget)
            known = None if res.status is OracleStatus.BUDGET_EXCEEDED \
                else res.status is OracleStatus.SAT
            out.append(Instance(Path(path).name, cnf, known))
        return out
    g = dict(spec.generator)
    kind = g.get("kind", "uniform")
    n, m, count = int(g["vars"]), int(g["clauses"]), int(g.get("count", 1))
    seed = int(g.get("seed", 0))
    sat_only = bool(g.get("sat_only", kind == "uniform"))
    out = []
    s = seed
    while len(out) < count:
        if s - seed >= 100 * count:
            raise ValueError(f"generator produced too few satisfiable instances ({len(out)})")
        if kind == "uniform":
            cnf = gen_uniform_3sat(n, m, s)
            known = None
        elif kind == "planted":
            cnf, _ = gen_planted(n, m, s)
            known = True
        else:
            raise ValueError(f"unknown generator kind {kind!r}")
        if known is None:
            res = dpll_solve(cnf, spec.oracle_budget)
            if res.status is not OracleStatus.BUDGET_EXCEEDED:
                known = res.status is OracleStatus.SAT
        if not sat_only or known:
            out.append(Instance(f"{kind}-{n}-{m}-s{s}", cnf, known, s))
        s += 1
    return out


def _run_row(spec: CampaignSpec, inst: Instance, rep: int, index: int) -> dict:
    seed = spec.config.seed + 1000 * rep + index
    cfg = replace(spec.config, seed=seed)
    row = {"name": inst.name, "N": inst.cnf.num_vars, "M": inst.cnf.num_clauses,
           "known_sat": inst.known_sat, "repetition": rep, "seed": seed}
    t0 = time.perf_counter()
    try:
        if spec.split:
            out = solve_parallel(inst.cnf, cfg, spec.merge_k)
            row.update(status=out.status.value, sweeps=out.sweeps_used,
                       part1_sweeps=out.part_sweeps[0], part2_sweeps=out.part_sweeps[1],
                       whole_sweeps=out.whole_sweeps,
                       merge_F=out.merge.values[out.merge.chosen])
            # clause and variable shares left open at the rounded merge point
            bits = round_point(out.merge.best)
            row.update(
                merge_unsat_pct=round(100 * count_unsatisfied(inst.cnf, bits)
                                      / max(1, inst.cnf.num_clauses), 4),
                merge_undetermined_pct=round(100 * len(undetermined_variables(inst.cnf, bits))
                                             / max(1, inst.cnf.num_vars), 4))
        else:
            out = solve(inst.cnf, cfg)
            row.update(status=out.status.value, sweeps=out.sweeps_used)
        row["error"] = ""
    except Exception as exc:  # recorded per row; the campaign goes on
        row.update(status="ERROR", sweeps=None, error=f"{type(exc).__name__}: {exc}")
    row["wall_time"] = round(time.perf_counter() - t0, 6) if spec.timing else 0.0
    return row


def _median(xs):
    return statistics.median(xs) if xs else None


def aggregate(rows: list[dict]) -> dict:
    """Solved % counts only rows whose instance is known satisfiable."""
    eligible = [r for r in rows if r["known_sat"] or r["status"] == "SATISFIED"]
    solved = [r for r in eligible if r["status"] == "SATISFIED"]
    sweeps = [r["sweeps"] for r in solved]
    agg = {
        "runs": len(rows),
        "eligible": len(eligible),
        "solved": len(solved),
        "solved_pct": round(100.0 * len(solved) / len(eligible), 2) if eligible else None,
        "max_sweeps": max(sweeps) if sweeps else None,
        "median_sweeps": _median(sweeps),
        "errors": sum(r["status"] == "ERROR" for r in rows),
    }
    if any("whole_sweeps" in r for r in rows):
        agg["median_part_sweeps"] = _median(
            [max(r["part1_sweeps"], r["part2_sweeps"]) for r in solved])
        agg["median_whole_sweeps"] = _median([r["whole_sweeps"] for r in solved])
        agg["max_whole_sweeps"] = max((r["whole_sweeps"] for r in solved), default=None)
    return agg


@dataclass
class CampaignReport:
    spec: CampaignSpec
    rows: list[dict]
    aggregates: dict

    def table_row(self) -> dict:
        """One line in the shape of the benchmark tables."""
        first = self.rows[0] if self.rows else {"N": None, "M": None}
        out = {"benchmark": self.spec.name, "N": first["N"], "M": first["M"],
               "tests": len({r["name"] for r in self.rows}),
               "solved_pct": self.aggregates["solved_pct"]}
        if self.spec.split:
            out["part_sweeps"] = self.aggregates["median_part_sweeps"]
            out["whole_sweeps"] = self.aggregates["median_whole_sweeps"]
        else:
            out["max_sweeps"] = self.aggregates["max_sweeps"]
            out["median_sweeps"] = self.aggregates["median_sweeps"]
        return out

    def to_dict(self) -> dict:
        return {"spec": self.spec.to_dict(), "aggregates": self.aggregates,
                "table": self.table_row(), "rows": self.rows}

    def write(self, out_dir) -> tuple[Path, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / f"{self.spec.name}.csv"
        json_path = out_dir / f"{self.spec.name}.json"
        fields = list(dict.fromkeys(k for r in self.rows for k in r)) or ["name"]
        with open(csv_path, "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=fields, lineterminator="\n")
            w.writeheader()
            w.writerows(self.rows)
        with open(json_path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
        return csv_path, json_path


def run_campaign(spec: CampaignSpec, instances: list[Instance] | None = None) -> CampaignReport:
    instances = build_instances(spec) if instances is None else instances
    jobs = [(inst, rep, i) for rep in range(spec.repetitions)
            for i, inst in enumerate(instances)]
    with ThreadPoolExecutor(max_workers=max(1, spec.workers)) as pool:
        rows = list(pool.map(lambda j: _run_row(spec, *j), jobs))
    return CampaignReport(spec, rows, aggregate(rows))
