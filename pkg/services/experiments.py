"""
Experiment harness: bound sweeps over generated corpora, executable bound
validation, and the benchmark fixture table.

Every sweep point reuses the same corpus seeds, so points differ only in the
swept variable. Per-DAG bounds are normalized against the reference method
before averaging.
"""
import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Callable, Dict, Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

import config
from services.analysis import METHODS, analyze, greedy_bound
from services.benchmarks import FIXTURES, MissingFixtureError, load_fixture
from services.dag_model import DagTask
from services.division import divide
from services.exec_model import Platform
from services.generator import GenConfig, generate_corpus
from services.invariants import check_bounds, check_groups, check_scheme
from services.scheduler import schedule
from services.simulator import (
    SimConfig,
    TimeModel,
    check_trace,
    greedy_distribution,
    simulate_scheme,
)
from utils.structured_logging import log_error, log_info

__all__ = [
    "BenchmarkRow",
    "ExperimentSpec",
    "MissingFixtureError",
    "ResultRow",
    "ValidationSummary",
    "benchmark_rows_to_csv",
    "rows_to_csv",
    "run_benchmarks",
    "run_experiment",
    "run_validation",
]

Method = Literal["proposed", "greedy", "greedy_unaware", "graham_para"]
# depth sweeps run on wide DAGs
DEPTH_SWEEP_WIDTH = 32
CSV_COLUMNS = ["sweep_var", "sweep_value", "method", "mean_norm", "std_norm", "mean_abs", "n", "seed"]


class ExperimentSpec(BaseModel):
    sweep_var: Literal["M", "P", "V"]
    sweep_values: List[int] = Field(..., min_length=1)
    gen: GenConfig = Field(default_factory=GenConfig)
    sm_count: int = Field(default_factory=lambda: config.default_sm_count, ge=1)
    corpus_size: int = Field(default_factory=lambda: config.default_corpus_size, ge=1)
    methods: List[Method] = ["proposed", "greedy", "greedy_unaware", "graham_para"]
    normalize_to: Method = "greedy_unaware"
    seed: int = Field(default_factory=lambda: config.default_seed)
    workers: int = Field(default_factory=lambda: config.experiment_workers, ge=1)

    @model_validator(mode="after")
    def check_sweep(self):
        if not self.methods:
            raise ValueError("at least one method is required")
        low = 2 if self.sweep_var in ("P", "V") else 1
        bad = [v for v in self.sweep_values if v < low]
        if bad:
            raise ValueError(f"{self.sweep_var} sweep values must be >= {low}, got {bad}")
        return self

    def point(self, value: int) -> Tuple[GenConfig, Platform]:
        """Generator config and platform for one sweep value."""
        gen = self.gen.model_copy(update={"seed": self.seed})
        sm_count = self.sm_count
        if self.sweep_var == "M":
            sm_count = value
        elif self.sweep_var == "P":
            gen = gen.model_copy(update={"max_width": value})
        else:
            gen = gen.model_copy(update={"depth_min": value, "depth_max": value, "max_width": DEPTH_SWEEP_WIDTH})
        return gen, Platform(sm_count, t_min=Fraction(gen.t_min))


@dataclass(frozen=True)
class ResultRow:
    sweep_var: str
    sweep_value: int
    method: str
    mean_norm: float
    std_norm: float
    mean_abs: float
    n: int
    seed: int


@dataclass
class ValidationSummary:
    dags: int = 0
    samples: int = 0
    violations: int = 0
    invariant_failures: int = 0
    mean_tightness: float = 0.0
    failures: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.violations == 0 and self.invariant_failures == 0


@dataclass(frozen=True)
class BenchmarkRow:
    fixture: str
    sm_count: int
    avg_load: int
    proposed_bound: float
    greedy_bound: float
    proposed_max: float
    proposed_avg: float
    proposed_std: float
    greedy_max: float
    greedy_avg: float
    greedy_std: float


def _map(fn: Callable, items: Sequence, workers: int) -> List:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _bounds(task: DagTask, platform: Platform, methods: Sequence[str]) -> Dict[str, Fraction]:
    return {m: METHODS[m](task, platform) for m in methods}


def run_experiment(spec: ExperimentSpec) -> List[ResultRow]:
    needed = list(dict.fromkeys(list(spec.methods) + [spec.normalize_to]))
    rows: List[ResultRow] = []
    corpus: Optional[List[DagTask]] = None

    for value in spec.sweep_values:
        started = time.perf_counter()
        gen, platform = spec.point(value)
        if corpus is None or spec.sweep_var != "M":
            corpus = generate_corpus(gen, spec.corpus_size)
        per_dag = _map(partial(_bounds, platform=platform, methods=needed), corpus, spec.workers)

        for method in spec.methods:
            norm = np.array([float(b[method] / b[spec.normalize_to]) for b in per_dag])
            absolute = np.array([float(b[method]) for b in per_dag])
            rows.append(ResultRow(
                sweep_var=spec.sweep_var,
                sweep_value=value,
                method=method,
                mean_norm=float(np.mean(norm)),
                std_norm=float(np.std(norm)),
                mean_abs=float(np.mean(absolute)),
                n=len(per_dag),
                seed=spec.seed,
            ))
        log_info(
            "Sweep point done",
            sweep_var=spec.sweep_var,
            value=value,
            dags=len(per_dag),
            seconds=f"{time.perf_counter() - started:.2f}",
        )
    return rows


def rows_to_csv(rows: Iterable[ResultRow]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([
            r.sweep_var, r.sweep_value, r.method,
            f"{r.mean_norm:.6f}", f"{r.std_norm:.6f}", f"{r.mean_abs:.6f}",
            r.n, r.seed,
        ])
    return out.getvalue()


def _validate_one(task: DagTask, platform: Platform, runs: int) -> Tuple[int, int, float, List[str]]:
    """Returns (bound violations, invariant failures, tightness, messages) for one DAG."""
    division = divide(task, platform)
    scheme = schedule(task, platform)
    report = analyze(task, platform, scheme)
    bound = report.proposed_bound
    edges = list(scheme.augmented_graph().edges())

    problems = check_groups(task, platform, division.groups)
    problems += check_scheme(scheme, len(division.groups))
    problems += check_bounds(report)
    messages = [f"seed={task.seed}: {p}" for p in problems]

    violations = 0
    worst = simulate_scheme(task, scheme, SimConfig(platform=platform))
    traces = [worst]
    for i in range(runs):
        cfg = SimConfig(platform=platform, time_model=TimeModel.SCALED, seed=(task.seed or 0) * 1000 + i)
        traces.append(simulate_scheme(task, scheme, cfg))
    for trace in traces:
        trace_problems = check_trace(trace, platform, edges)
        messages += [f"seed={task.seed}: {p}" for p in trace_problems]
        problems += trace_problems
        if trace.makespan > bound:
            violations += 1
            messages.append(f"seed={task.seed}: makespan {trace.makespan} exceeds bound {bound}")
    return violations, len(problems), float(worst.makespan / bound), messages


def run_validation(spec: ExperimentSpec, runs_per_dag: int = 10) -> ValidationSummary:
    summary = ValidationSummary()
    tightness: List[float] = []
    for value in spec.sweep_values:
        gen, platform = spec.point(value)
        corpus = generate_corpus(gen, spec.corpus_size)
        results = _map(partial(_validate_one, platform=platform, runs=runs_per_dag), corpus, spec.workers)
        for violations, failures, tight, messages in results:
            summary.dags += 1
            summary.samples += runs_per_dag + 1
            summary.violations += violations
            summary.invariant_failures += failures
            summary.failures.extend(messages)
            tightness.append(tight)
        log_info("Validated sweep point", sweep_var=spec.sweep_var, value=value, dags=len(corpus))
    summary.mean_tightness = float(np.mean(tightness)) if tightness else 0.0
    for message in summary.failures:
        log_error("Validation failure", detail=message)
    return summary


def run_benchmarks(sm_counts: Sequence[int] = (8, 30), avg_loads: Sequence[int] = (4, 20),
                   runs: int = 100, directory=None) -> List[BenchmarkRow]:
    """
    Bounds and worst-case simulated makespans for every fixture and platform.

    The scheme simulation is deterministic under worst-case times, so its
    spread is zero; greedy runs once per random dispatch seed.
    """
    rows = []
    for name in FIXTURES:
        for sm_count in sm_counts:
            for avg in avg_loads:
                task = load_fixture(name, avg, directory)
                platform = Platform(sm_count)
                scheme = schedule(task, platform)
                report = analyze(task, platform, scheme)
                proposed = np.array([
                    float(simulate_scheme(task, scheme, SimConfig(platform=platform)).makespan)
                ])
                greedy = np.array([float(x) for x in greedy_distribution(task, platform, range(runs))])
                rows.append(BenchmarkRow(
                    fixture=name,
                    sm_count=sm_count,
                    avg_load=avg,
                    proposed_bound=float(report.proposed_bound),
                    greedy_bound=float(greedy_bound(task, platform)),
                    proposed_max=float(proposed.max()),
                    proposed_avg=float(proposed.mean()),
                    proposed_std=float(proposed.std()),
                    greedy_max=float(greedy.max()),
                    greedy_avg=float(greedy.mean()),
                    greedy_std=float(greedy.std()),
                ))
                log_info("Benchmark cell done", fixture=name, sm_count=sm_count, avg_load=avg)
    return rows


def benchmark_rows_to_csv(rows: Iterable[BenchmarkRow]) -> str:
    columns = list(BenchmarkRow.__dataclass_fields__)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([
            f"{getattr(r, c):.6f}" if isinstance(getattr(r, c), float) else getattr(r, c)
            for c in columns
        ])
    return out.getvalue()
