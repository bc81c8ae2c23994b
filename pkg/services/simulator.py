"""
Discrete-event simulation of an M-SM device.

Two modes:
  scheme  run a ScheduleScheme: every entity holds exactly its planned SMs, a
          group starts only when the previous group has fully completed
  greedy  submit every node at m = min(m^max, M) and let a work-conserving
          dispatcher start whatever fits (fifo or seeded random tie order)

Kernels are non-preemptive and hold all their SMs for their whole duration.
Times are exact rationals so bound comparisons are exact.
"""
import heapq
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from services.dag_model import DagTask
from services.exec_model import Platform, full_parallel_time, max_parallelism
from services.scheduler import KernelRef, ScheduleScheme, schedule
from utils.structured_logging import log_error

# scaled execution factors are drawn on a 1/1000 grid
_FACTOR_GRID = 1000


class InfeasibleAllocationError(RuntimeError):
    """A scheme asked for more SMs than are free. Indicates a scheduler bug."""


class SimMode(str, Enum):
    SCHEME = "scheme"
    GREEDY = "greedy"


class DispatchPolicy(str, Enum):
    FIFO = "fifo"
    RANDOM = "random"


class TimeModel(str, Enum):
    WORST_CASE = "worst_case"
    SCALED = "scaled"


@dataclass(frozen=True)
class SimConfig:
    platform: Platform
    mode: SimMode = SimMode.SCHEME
    policy: DispatchPolicy = DispatchPolicy.FIFO
    time_model: TimeModel = TimeModel.WORST_CASE
    seed: int = 0
    scale_min: Fraction = Fraction(1, 2)
    scale_max: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "mode", SimMode(self.mode))
        object.__setattr__(self, "policy", DispatchPolicy(self.policy))
        object.__setattr__(self, "time_model", TimeModel(self.time_model))
        object.__setattr__(self, "scale_min", Fraction(self.scale_min))
        object.__setattr__(self, "scale_max", Fraction(self.scale_max))
        if not (0 < self.scale_min <= self.scale_max <= 1):
            raise ValueError(
                f"scale range must satisfy 0 < min <= max <= 1, got [{self.scale_min}, {self.scale_max}]"
            )


@dataclass(frozen=True)
class SimEvent:
    entity: Hashable
    start: Fraction
    finish: Fraction
    sms_held: int


@dataclass(frozen=True)
class SimTrace:
    events: Tuple[SimEvent, ...]
    makespan: Fraction

    def by_entity(self) -> Dict[Hashable, SimEvent]:
        return {e.entity: e for e in self.events}

    def to_document(self) -> dict:
        return {
            "makespan": str(self.makespan),
            "events": [
                {"entity": str(e.entity), "start": str(e.start), "finish": str(e.finish), "sms": e.sms_held}
                for e in self.events
            ],
        }


def _factors(config: SimConfig, rng: np.random.Generator, count: int) -> List[Fraction]:
    if config.time_model is TimeModel.WORST_CASE:
        return [Fraction(1)] * count
    lo = max(1, math.ceil(config.scale_min * _FACTOR_GRID))
    hi = math.floor(config.scale_max * _FACTOR_GRID)
    draws = rng.integers(lo, hi + 1, size=count)
    return [Fraction(int(d), _FACTOR_GRID) for d in draws]


def simulate_scheme(task: DagTask, scheme: ScheduleScheme, config: SimConfig) -> SimTrace:
    M = config.platform.sm_count
    entities = scheme.entities
    rng = np.random.default_rng(config.seed)
    factor = dict(zip(entities, _factors(config, rng, len(entities))))
    duration = {e: scheme.exec_time(e) * factor[e] for e in entities}

    preds: Dict[KernelRef, set] = {e: set() for e in entities}
    for u, v in scheme.dependency_edges():
        preds[v].add(u)
    group = scheme.group_index()
    outstanding = [len(p.entities) for p in scheme.group_plan]

    free = M
    now = Fraction(0)
    current = 0
    done: set = set()
    started: set = set()
    running: List[Tuple[Fraction, KernelRef]] = []
    events: List[SimEvent] = []

    def start_ready():
        nonlocal free
        if current >= len(outstanding):
            return
        for e in scheme.group_plan[current].entities:
            if e in started or not preds[e] <= done:
                continue
            m = scheme.parallelism[e]
            if m > free:
                log_error("Scheme oversubscribes the device", entity=e, needed=m, free=free, at=now)
                raise InfeasibleAllocationError(f"{e} needs {m} SMs at t={now}, only {free} free")
            free -= m
            started.add(e)
            events.append(SimEvent(e, now, now + duration[e], m))
            heapq.heappush(running, (now + duration[e], e))

    start_ready()
    while running:
        now, e = heapq.heappop(running)
        finished = [e]
        while running and running[0][0] == now:
            finished.append(heapq.heappop(running)[1])
        for f in finished:
            free += scheme.parallelism[f]
            done.add(f)
            outstanding[group[f]] -= 1
        while current < len(outstanding) and outstanding[current] == 0:
            current += 1
        start_ready()

    if len(done) != len(entities):
        stuck = sorted(set(entities) - done)
        raise InfeasibleAllocationError(f"scheme deadlocked with {len(stuck)} entities unfinished: {stuck[:5]}")
    return SimTrace(events=tuple(events), makespan=max(ev.finish for ev in events))


def simulate_greedy(task: DagTask, config: SimConfig) -> SimTrace:
    platform = config.platform
    M = platform.sm_count
    nodes = task.nodes
    rng = np.random.default_rng(config.seed)
    factor = dict(zip(nodes, _factors(config, rng, len(nodes))))
    if config.policy is DispatchPolicy.RANDOM:
        tie = dict(zip(nodes, (int(k) for k in rng.permutation(len(nodes)))))
    else:
        tie = {v: v for v in nodes}

    width = {v: min(max_parallelism(task.loads[v], platform), M) for v in nodes}
    duration = {v: full_parallel_time(task.loads[v], platform) * factor[v] for v in nodes}
    waiting = {v: len(task.predecessors(v)) for v in nodes}

    free = M
    ready: List[Tuple[Fraction, int, int]] = [(Fraction(0), tie[v], v) for v in nodes if waiting[v] == 0]
    running: List[Tuple[Fraction, int]] = []
    events: List[SimEvent] = []

    def dispatch(now: Fraction):
        nonlocal free, ready
        held = []
        for item in sorted(ready):
            v = item[2]
            if width[v] <= free:
                free -= width[v]
                events.append(SimEvent(v, now, now + duration[v], width[v]))
                heapq.heappush(running, (now + duration[v], v))
            else:
                held.append(item)
        ready = held

    dispatch(Fraction(0))
    while running:
        now, v = heapq.heappop(running)
        finished = [v]
        while running and running[0][0] == now:
            finished.append(heapq.heappop(running)[1])
        for f in finished:
            free += width[f]
            for s in task.successors(f):
                waiting[s] -= 1
                if waiting[s] == 0:
                    ready.append((now, tie[s], s))
        dispatch(now)

    return SimTrace(events=tuple(events), makespan=max(ev.finish for ev in events))


def simulate(task: DagTask, config: SimConfig, scheme: Optional[ScheduleScheme] = None) -> SimTrace:
    if config.mode is SimMode.GREEDY:
        return simulate_greedy(task, config)
    if scheme is None:
        scheme = schedule(task, config.platform)
    return simulate_scheme(task, scheme, config)


def check_trace(trace: SimTrace, platform: Platform, edges: Iterable[Tuple[Hashable, Hashable]]) -> List[str]:
    """Capacity at every start instant and finish-before-start on every edge."""
    problems = []
    for t in sorted({e.start for e in trace.events}):
        held = sum(e.sms_held for e in trace.events if e.start <= t < e.finish)
        if held > platform.sm_count:
            problems.append(f"t={t}: {held} SMs held on a {platform.sm_count}-SM device")
    at = trace.by_entity()
    for u, v in edges:
        if u in at and v in at and at[u].finish > at[v].start:
            problems.append(f"{u} finishes at {at[u].finish} after {v} starts at {at[v].start}")
    return problems


def greedy_distribution(task: DagTask, platform: Platform, seeds: Sequence[int],
                        time_model: TimeModel = TimeModel.WORST_CASE) -> List[Fraction]:
    return [
        simulate_greedy(
            task,
            SimConfig(platform=platform, mode=SimMode.GREEDY, policy=DispatchPolicy.RANDOM,
                      time_model=time_model, seed=s),
        ).makespan
        for s in seeds
    ]
