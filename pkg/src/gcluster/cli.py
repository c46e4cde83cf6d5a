"""Command-line front end.

Subcommands: ``gen`` (write a synthetic instance as CSV), ``solve`` (run one
algorithm and optionally emit a JSON report), ``oracle`` (exact enumeration
for tiny inputs), and ``bench`` (suite runner producing CSV plus an aligned
comparison grid).

Exit codes: 0 success, 2 usage error, 3 data error, 4 solver error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from dataclasses import dataclass

from . import bench, stats
from .dataset import (
    Dataset,
    Distribution,
    InstanceSpec,
    generate,
    instance_name,
    load_csv,
    standardize,
    write_csv,
)
from .errors import DataError, SolverError
from .vns import VnsConfig

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_SOLVER = 4


class UsageError(Exception):
    """Bad flag values or flag combinations (exit code 2)."""


@dataclass
class SolveReport:
    """Self-contained record of one solve: enough to re-evaluate the stored
    assignment against the (re-standardized) input without re-solving."""

    algorithm: str
    n: int
    m: int
    r2t: float
    k: int
    r2: float
    r2_per_attribute: list[float]
    elapsed_seconds: float
    converged: bool | None
    termination: str | None
    assignment: list[int]
    seed: int | None
    standardization: dict | None


def _standardization_record(ds: Dataset) -> dict | None:
    if not ds.standardized:
        return {"applied": False}
    return {
        "applied": True,
        "denominator": "n-1",
        "means": [float(v) for v in ds.column_means],
        "sds": [float(v) for v in ds.column_sds],
        "degenerate_columns": list(ds.degenerate_columns),
    }


def _r2t_flag(value: str) -> float:
    r2t = float(value)
    if not 0.0 < r2t < 1.0:
        raise argparse.ArgumentTypeError(
            f"threshold must lie strictly inside (0, 1), got {r2t}"
        )
    return r2t


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gcluster",
        description=(
            "Find partitions with the minimum number of clusters whose "
            "R-squared ratio meets a threshold."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic instance CSV")
    gen.add_argument("--dist", choices=["normal", "uniform"], required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--m", type=int, required=True)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_gen)

    solve = sub.add_parser("solve", help="solve one instance with one algorithm")
    solve.add_argument("--algo", choices=list(bench.ALGORITHMS), required=True)
    solve.add_argument("--r2t", type=_r2t_flag, required=True)
    solve.add_argument("--input", required=True)
    solve.add_argument("--standardize", action="store_true")
    solve.add_argument("--rmax", type=int, default=50)
    solve.add_argument("--time-limit", type=float, default=21600.0)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--report", default=None)
    solve.set_defaults(func=cmd_solve)

    oracle = sub.add_parser("oracle", help="exact optimum by enumeration (n <= 12)")
    oracle.add_argument("--input", required=True)
    oracle.add_argument("--r2t", type=_r2t_flag, required=True)
    oracle.set_defaults(func=cmd_oracle)

    bench_p = sub.add_parser("bench", help="run a benchmark suite")
    bench_p.add_argument("--preset", default=None)
    bench_p.add_argument("--config", default=None)
    bench_p.add_argument("--seeds", type=int, default=1)
    bench_p.add_argument("--out", default="bench_rows.csv")
    bench_p.add_argument("--rmax", type=int, default=50)
    bench_p.add_argument("--time-limit", type=float, default=21600.0)
    bench_p.add_argument("--per-attribute", action="store_true")
    bench_p.set_defaults(func=cmd_bench)

    return parser


def cmd_gen(args) -> int:
    if args.n < 2:
        raise UsageError(f"--n must be >= 2, got {args.n}")
    if args.m < 1:
        raise UsageError(f"--m must be >= 1, got {args.m}")
    if args.seed < 0:
        raise UsageError("--seed must be non-negative")
    spec = InstanceSpec(
        Distribution.NORMAL01 if args.dist == "normal" else Distribution.UNIFORM,
        args.n,
        args.m,
        args.seed,
    )
    ds = generate(spec)
    write_csv(ds, args.out)
    print(instance_name(spec))
    return EXIT_OK


def cmd_solve(args) -> int:
    ds = load_csv(args.input)
    if args.standardize:
        ds = standardize(ds)
        if ds.degenerate_columns:
            cols = ", ".join(str(c) for c in ds.degenerate_columns)
            print(f"warning: constant columns zeroed by standardization: {cols}", file=sys.stderr)
    cfg = VnsConfig(r_max=args.rmax, time_limit_seconds=args.time_limit, seed=args.seed)

    t0 = time.perf_counter()
    outcome = bench.run_algorithm(ds, args.algo, args.r2t, cfg)
    elapsed = time.perf_counter() - t0
    summary = stats.evaluate(ds, outcome.partition)

    report = SolveReport(
        algorithm=args.algo,
        n=ds.n,
        m=ds.m,
        r2t=args.r2t,
        k=outcome.partition.k,
        r2=summary.r2,
        r2_per_attribute=[float(v) for v in summary.r2_per_attribute],
        elapsed_seconds=elapsed,
        converged=outcome.converged,
        termination=outcome.termination.value if outcome.termination else None,
        assignment=[int(g) for g in outcome.partition.assignment],
        seed=args.seed if args.algo.startswith("vns") else None,
        standardization=_standardization_record(ds),
    )
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(dataclasses.asdict(report), fh, indent=2)
            fh.write("\n")
    print(f"k={report.k} r2={report.r2:.6f} time={elapsed:.3f}s")
    return EXIT_OK


def cmd_oracle(args) -> int:
    ds = load_csv(args.input)
    result = bench.gc_brute_force(ds, args.r2t)
    print(f"optimal_k={result.optimal_k} r2={result.optimal_r2:.6f}")
    print("components  best_r2")
    for i in range(1, ds.n + 1):
        print(f"{i:10d}  {result.best_per_class[i]:.6f}")
    return EXIT_OK


def cmd_bench(args) -> int:
    if (args.preset is None) == (args.config is None):
        raise UsageError("provide exactly one of --preset or --config")
    cfg = VnsConfig(r_max=args.rmax, time_limit_seconds=args.time_limit)
    if args.preset is not None:
        if args.preset != "table2-small":
            raise UsageError(f"unknown preset {args.preset!r}")
        if args.seeds < 1:
            raise UsageError("--seeds must be >= 1")
        specs = bench.preset_specs(args.preset, list(range(1, args.seeds + 1)))
        algos = list(bench.ALGORITHMS)
    else:
        specs, algos, cfg = _load_bench_config(args.config, cfg)
    if not specs or not algos:
        raise UsageError("benchmark suite is empty")

    rows = bench.run_suite(specs, algos, cfg, with_attribute_r2=args.per_attribute)
    bench.rows_to_csv(rows, args.out)
    print(bench.render_table(rows), end="")
    if args.per_attribute:
        for row in rows:
            if row.r2_per_attribute is None:
                continue
            joined = " ".join(f"{v:.4f}" for v in row.r2_per_attribute)
            print(f"{row.instance} seed={row.seed} r2t={row.r2t} {row.algorithm} R2_j: {joined}")
    print(f"wrote {len(rows)} rows to {args.out}")
    failures = [row for row in rows if row.error]
    for row in failures:
        print(
            f"row failed: {row.instance} r2t={row.r2t} {row.algorithm}: {row.error}",
            file=sys.stderr,
        )
    return EXIT_OK


def _load_bench_config(path, cfg: VnsConfig):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    specs = []
    for entry in doc.get("instances", []):
        dist = (
            Distribution.NORMAL01
            if entry["dist"] == "normal"
            else Distribution.UNIFORM
        )
        spec = InstanceSpec(dist, int(entry["n"]), int(entry["m"]), int(entry["seed"]))
        r2ts = tuple(float(v) for v in entry.get("r2t", doc.get("r2t", [])))
        specs.append((spec, r2ts))
    algos = list(doc.get("algorithms", bench.ALGORITHMS))
    cfg = dataclasses.replace(
        cfg,
        r_max=int(doc.get("rmax", cfg.r_max)),
        time_limit_seconds=float(doc.get("time_limit", cfg.time_limit_seconds)),
    )
    return specs, algos, cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
