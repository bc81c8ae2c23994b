#!/usr/bin/env python3
"""
Command-line entry point.

  generate    write seeded synthetic DAG files (dag_<seed>.json)
  divide      blocks, local paths and balanced groups of a DAG file
  schedule    the full schedule scheme of a DAG file
  analyze     all makespan bounds of a DAG file
  simulate    simulate a DAG file (scheme or greedy dispatch)
  experiment  bound sweep over a generated corpus (CSV)
  validate    simulate every generated DAG and check bound safety
  bench       benchmark fixture table

Exit status: 0 ok, 1 invariant or bound violation, 2 bad input.

Example:  python cli.py --sm-count 32 experiment --sweep-var M --values 4,8,16,32
"""
import argparse
import json
import sys
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

import config
from services.analysis import analyze
from services.benchmarks import MissingFixtureError
from services.dag_io import DagFileError, read_dag, write_dag
from services.dag_model import DagValidationError, cumulative_ancestor_workload, validate
from services.division import divide
from services.exec_model import Platform
from services.experiments import (
    ExperimentSpec,
    benchmark_rows_to_csv,
    rows_to_csv,
    run_benchmarks,
    run_experiment,
    run_validation,
)
from services.generator import GenConfig, generate_corpus
from services.invariants import check_bounds, check_scheme
from services.scheduler import schedule
from services.simulator import SimConfig, check_trace, simulate
from utils.structured_logging import log_error

METHOD_NAMES = ["proposed", "greedy", "greedy_unaware", "graham_para"]


def _int_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _platform(args) -> Platform:
    return Platform(args.sm_count, t_min=Fraction(args.t_min))


def _load(args):
    platform = _platform(args)
    task = read_dag(args.dag)
    validate(task, platform.t_min)
    return task, platform


def _gen_config(args) -> GenConfig:
    return GenConfig(
        depth_min=args.depth_min,
        depth_max=args.depth_max,
        max_width=args.max_width,
        avg_load=Decimal(args.avg_load),
        load_jitter=Decimal(args.jitter),
        edge_density=Decimal(args.density),
        t_min=Decimal(args.t_min),
        seed=args.seed,
        normalize_mean=args.normalize_mean,
        round_loads=not args.no_round,
    )


def _spec(args) -> ExperimentSpec:
    return ExperimentSpec(
        sweep_var=args.sweep_var,
        sweep_values=args.values,
        gen=_gen_config(args),
        sm_count=args.sm_count,
        corpus_size=args.corpus_size,
        methods=args.methods,
        seed=args.seed,
        workers=args.workers,
    )


def cmd_generate(args) -> int:
    corpus = generate_corpus(_gen_config(args), args.count)
    out_dir = Path(args.out_dir)
    for task in corpus:
        path = write_dag(task, out_dir / f"dag_{task.seed}.json")
        print(path)
    return 0


def cmd_divide(args) -> int:
    task, platform = _load(args)
    result = divide(task, platform)
    if args.format == "pretty":
        lines = []
        for b, ps in zip(result.blocks, result.path_sets):
            label = f"join v{b.join}" if b.join is not None else "residual"
            lines.append(f"block ({label}): {{{', '.join(f'v{v}' for v in b.members)}}}")
            for p in ps.paths:
                lines.append("  path " + " -> ".join(f"v{v}" for v in p.nodes) + f"  (load {p.length(task)})")
        lines.append("groups: " + ", ".join("{" + ",".join(f"v{v}" for v in g) + "}" for g in result.groups))
        _emit("\n".join(lines), args.out)
    elif args.format == "csv":
        _emit("group,node,load,ancestor_workload\n" + "".join(
            f"{k},{v},{task.loads[v]},{cumulative_ancestor_workload(task, v)}\n"
            for k, g in enumerate(result.groups) for v in g
        ), args.out)
    else:
        _emit(json.dumps({
            "blocks": [{"join": b.join, "members": list(b.members)} for b in result.blocks],
            "local_paths": [[list(p.nodes) for p in ps.paths] for ps in result.path_sets],
            "groups": [list(g) for g in result.groups],
        }, indent=2), args.out)
    return 0


def cmd_schedule(args) -> int:
    task, platform = _load(args)
    scheme = schedule(task, platform)
    _emit(scheme.to_json(), args.out)
    problems = check_scheme(scheme, len(divide(task, platform).groups))
    for p in problems:
        log_error("Scheme invariant violated", detail=p)
    return 1 if problems else 0


def cmd_analyze(args) -> int:
    task, platform = _load(args)
    report = analyze(task, platform)
    bounds = report.bounds()
    if args.format == "csv":
        text = "method,bound,normalized\n" + "".join(
            f"{name},{float(value):.6f},{float(report.normalized[name]):.6f}\n"
            for name, value in bounds.items()
        ) + f"lower_bound,{float(report.lower_bound):.6f},\n"
    elif args.format == "json":
        text = json.dumps(report.to_document(), indent=2, sort_keys=True)
    else:
        text = "\n".join(
            [f"{name:>15}: {value} (x{float(report.normalized[name]):.4f})" for name, value in bounds.items()]
            + [f"{'lower_bound':>15}: {report.lower_bound}",
               f"{'per-group R':>15}: {', '.join(str(r) for r in report.per_group_R)}"]
        )
    _emit(text, args.out)
    problems = check_bounds(report)
    for p in problems:
        log_error("Bound below lower bound", detail=p)
    return 1 if problems else 0


def cmd_simulate(args) -> int:
    task, platform = _load(args)
    scheme = schedule(task, platform) if args.mode == "scheme" else None
    edges = list(scheme.augmented_graph().edges()) if scheme else sorted(task.edges)
    bound = analyze(task, platform, scheme).proposed_bound if scheme else None

    status = 0
    makespans = []
    for i in range(args.runs):
        sim_config = SimConfig(
            platform=platform,
            mode=args.mode,
            policy=args.policy,
            time_model=args.time_model,
            seed=args.seed + i,
            scale_min=Fraction(args.scale_min),
            scale_max=Fraction(args.scale_max),
        )
        trace = simulate(task, sim_config, scheme)
        if i == 0 and args.format == "pretty":
            for ev in trace.events:
                print(f"{str(ev.entity):>8}  [{ev.start}, {ev.finish})  sms={ev.sms_held}")
        problems = check_trace(trace, platform, edges)
        if bound is not None and trace.makespan > bound:
            problems.append(f"makespan {trace.makespan} exceeds bound {bound}")
        for p in problems:
            log_error("Simulation violation", run=i, detail=p)
        status = 1 if problems else status
        makespans.append((args.seed + i, trace.makespan))

    _emit("run_seed,makespan\n" + "".join(f"{s},{float(m):.6f}\n" for s, m in makespans), args.out)
    return status


def cmd_experiment(args) -> int:
    _emit(rows_to_csv(run_experiment(_spec(args))), args.out)
    return 0


def cmd_validate(args) -> int:
    summary = run_validation(_spec(args), runs_per_dag=args.runs)
    _emit(
        f"dags={summary.dags} samples={summary.samples} violations={summary.violations} "
        f"invariant_failures={summary.invariant_failures} mean_tightness={summary.mean_tightness:.6f}",
        args.out,
    )
    return 0 if summary.ok else 1


def cmd_bench(args) -> int:
    rows = run_benchmarks(args.sm_counts, args.avg_loads, runs=args.runs, directory=args.bench_dir)
    _emit(benchmark_rows_to_csv(rows), args.out)
    return 0


def _add_gen_flags(p):
    p.add_argument("--depth-min", type=int, default=5)
    p.add_argument("--depth-max", type=int, default=8)
    p.add_argument("--max-width", type=int, default=8, help="P: widest internal layer")
    p.add_argument("--avg-load", default="20")
    p.add_argument("--jitter", default="0.5")
    p.add_argument("--density", default="0.005", help="extra edge probability per previous-layer pair")
    p.add_argument("--normalize-mean", action="store_true")
    p.add_argument("--no-round", action="store_true", help="keep non-integer loads")


def _add_sweep_flags(p):
    _add_gen_flags(p)
    p.add_argument("--sweep-var", choices=["M", "P", "V"], default="M")
    p.add_argument("--values", type=_int_list, default=[4, 8, 16, 32, 64, 128, 256])
    p.add_argument("--corpus-size", type=int, default=config.default_corpus_size)
    p.add_argument("--methods", type=lambda s: s.split(","), default=METHOD_NAMES)
    p.add_argument("--workers", type=int, default=config.experiment_workers)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gpu-dag-sched", description="GPU DAG scheduling and makespan analysis")
    ap.add_argument("--seed", type=int, default=config.default_seed)
    ap.add_argument("--sm-count", type=int, default=config.default_sm_count)
    ap.add_argument("--t-min", default=config.default_t_min)
    ap.add_argument("--out", help="write output to this file instead of stdout")
    ap.add_argument("--format", choices=["csv", "json", "pretty"], default="pretty")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate")
    _add_gen_flags(p)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_generate)

    for name, func in (("divide", cmd_divide), ("schedule", cmd_schedule), ("analyze", cmd_analyze)):
        p = sub.add_parser(name)
        p.add_argument("dag", help="DAG JSON file")
        p.set_defaults(func=func)

    p = sub.add_parser("simulate")
    p.add_argument("dag", help="DAG JSON file")
    p.add_argument("--mode", choices=["scheme", "greedy"], default="scheme")
    p.add_argument("--policy", choices=["fifo", "random"], default="fifo")
    p.add_argument("--time-model", choices=["worst_case", "scaled"], default="worst_case")
    p.add_argument("--scale-min", default="0.5")
    p.add_argument("--scale-max", default="1")
    p.add_argument("--runs", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment")
    _add_sweep_flags(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("validate")
    _add_sweep_flags(p)
    p.add_argument("--runs", type=int, default=10, help="scaled-time samples per DAG")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench")
    p.add_argument("--sm-counts", type=_int_list, default=[8, 30])
    p.add_argument("--avg-loads", type=_int_list, default=[4, 20])
    p.add_argument("--runs", type=int, default=100, help="random dispatch seeds for greedy")
    p.add_argument("--bench-dir", default=None)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DagValidationError, DagFileError, MissingFixtureError, ValidationError,
            ValueError, InvalidOperation) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
