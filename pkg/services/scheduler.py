"""
Balanced-group scheduling.

For each balanced group, in order:
  * scale member parallelism in proportion to load so members finish together,
  * launch released concurrent nodes side by side on the spare SMs,
  * split a launched node whose run would overrun the group (node segmentation),
  * add extra dependency edges so groups execute strictly one after another.

The output ScheduleScheme carries everything the analysis and the simulator need.
"""
import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import networkx as nx

from services.dag_model import (
    DagTask,
    NodeId,
    concurrent_set,
    cumulative_ancestor_workload,
    validate,
)
from services.division import divide
from services.exec_model import Platform, exec_time, max_parallelism
from utils.structured_logging import log_info


class Part(str, Enum):
    WHOLE = "whole"
    PARALLEL = "parallel"
    RESIDUAL = "residual"


_SUFFIX = {Part.WHOLE: "", Part.PARALLEL: ".p", Part.RESIDUAL: ".r"}


@dataclass(frozen=True, order=True)
class KernelRef:
    """A node of the augmented graph: a whole kernel or one of its two segments."""
    node: NodeId
    part: Part = Part.WHOLE

    def __str__(self):
        return f"v{self.node}{_SUFFIX[self.part]}"


EntityEdge = Tuple[KernelRef, KernelRef]


@dataclass(frozen=True)
class Segment:
    origin: NodeId
    part: Part
    load: Fraction

    @property
    def ref(self) -> KernelRef:
        return KernelRef(self.origin, self.part)


@dataclass(frozen=True)
class Launch:
    """A parallel node (or parallel segment) run on the spare SMs of a group."""
    entity: KernelRef
    parallelism: int
    start: Fraction  # offset from group start
    finish: Fraction
    load: Fraction


@dataclass(frozen=True)
class GroupPlan:
    index: int
    members: Tuple[KernelRef, ...]
    loads: Mapping[KernelRef, Fraction]
    parallelism: Mapping[KernelRef, int]
    exec_times: Mapping[KernelRef, Fraction]
    spare_sms: int
    spare_capacity: Fraction
    bound: Fraction
    longest: KernelRef  # member that sets the bound
    candidates: Tuple[KernelRef, ...]
    launches: Tuple[Launch, ...] = ()
    segmentation: Optional[Tuple[Segment, Segment]] = None
    unlaunched: Tuple[KernelRef, ...] = ()
    extra_deps: FrozenSet[EntityEdge] = frozenset()

    @property
    def entities(self) -> Tuple[KernelRef, ...]:
        return self.members + tuple(l.entity for l in self.launches)


def _origin(x) -> NodeId:
    return x.node if isinstance(x, KernelRef) else x


def _as_ref(x) -> KernelRef:
    return x if isinstance(x, KernelRef) else KernelRef(x)


def _round_half_up(q: Fraction) -> int:
    return math.floor(q + Fraction(1, 2))


def scale_parallelism(group: Iterable, task: DagTask, platform: Platform,
                      loads: Optional[Mapping] = None) -> Dict:
    """
    Proportional SM allotment m_i = min(m_i^max, round(C_i / W(group) * M)).

    When rounding oversubscribes the device the allotment is repaired with the
    largest-remainder method over the exact quotas; if the one-SM floor still
    oversubscribes, SMs are taken from the largest allotments (lowest id first).
    """
    M = platform.sm_count
    members = sorted(group)
    load = {v: Fraction(loads[v]) if loads is not None else task.loads[_origin(v)] for v in members}
    total = sum(load.values(), Fraction(0))
    quota = {v: load[v] * M / total for v in members}
    cap = {v: max_parallelism(load[v], platform) for v in members}

    m = {v: max(1, min(cap[v], _round_half_up(quota[v]))) for v in members}
    if sum(m.values()) <= M:
        return m

    floors = {v: math.floor(quota[v]) for v in members}
    m = {v: max(1, min(cap[v], floors[v])) for v in members}
    leftover = M - sum(m.values())
    by_remainder = sorted(members, key=lambda v: (-(quota[v] - floors[v]), v))
    for v in by_remainder:
        if leftover <= 0:
            break
        if m[v] == floors[v] and m[v] < cap[v] and quota[v] > floors[v]:
            m[v] += 1
            leftover -= 1
    while sum(m.values()) > M:
        v = min((u for u in members if m[u] > 1), key=lambda u: (-m[u], u))
        m[v] -= 1
    return m


def parallel_candidates(group: Iterable, task: DagTask, released: Set,
                        pending: Optional[Sequence] = None,
                        predecessors: Optional[Callable] = None) -> List:
    """
    Sources of the union of the members' concurrent sets (minus the
    group), restricted to released nodes, by descending ancestor workload then id.

    `pending` limits the pool to unscheduled nodes/segments (default: every task
    node); `predecessors` gives the current dependency graph (default: the DAG).
    """
    members = set(group)
    origins = {_origin(x) for x in members}
    concurrent: Set[NodeId] = set()
    for o in origins:
        concurrent |= concurrent_set(task, o)
    concurrent -= origins

    pool = list(pending) if pending is not None else task.nodes
    inside = [x for x in pool if _origin(x) in concurrent and x not in members]
    inside_set = set(inside)
    if predecessors is None:
        predecessors = task.predecessors
    sources = [x for x in inside if not any(p in inside_set for p in predecessors(x))]
    chosen = [x for x in sources if x in released]
    return sorted(chosen, key=lambda x: (-cumulative_ancestor_workload(task, _origin(x)), x))


def plan_group(parallelism: Mapping, candidates: Sequence, task: DagTask, platform: Platform,
               loads: Optional[Mapping] = None, index: int = 0) -> GroupPlan:
    """
    Plan one balanced group with its member parallelism already scaled.

    Candidates run side by side from the group start, each on its own slice of
    the spare SMs with m_c = min(m_c^max, spare SMs still free), and must finish
    within the group bound. The first candidate that would outlast the group is
    split: the parallel segment ends exactly at the bound, the residual segment
    is left for a later group. Residual segments are only ever launched whole.
    """
    def load_of(x) -> Fraction:
        ref = _as_ref(x)
        if loads is not None:
            if ref in loads:
                return Fraction(loads[ref])
            if ref.part is Part.WHOLE and ref.node in loads:
                return Fraction(loads[ref.node])
        return task.loads[ref.node]

    M = platform.sm_count
    members = tuple(sorted(_as_ref(v) for v in parallelism))
    par = {_as_ref(v): m for v, m in parallelism.items()}
    member_loads = {r: load_of(r) for r in members}
    times = {r: exec_time(member_loads[r], par[r], platform) for r in members}
    bound = max(times.values())
    longest = min(r for r in members if times[r] == bound)
    spare = M - sum(par.values())
    capacity = bound * spare

    ws = capacity
    spare_left = spare
    launches: List[Launch] = []
    segmentation = None
    cands = tuple(_as_ref(c) for c in candidates)
    for c in cands:
        if ws <= 0 or spare_left <= 0:
            break
        load = load_of(c)
        m_c = min(max_parallelism(load, platform), spare_left)
        duration = exec_time(load, m_c, platform)
        if duration <= bound:
            launches.append(Launch(c, m_c, Fraction(0), duration, load))
            spare_left -= m_c
            ws -= load
            continue
        if c.part is Part.RESIDUAL:
            continue
        head = m_c * bound
        segmentation = (
            Segment(c.node, Part.PARALLEL, head),
            Segment(c.node, Part.RESIDUAL, load - head),
        )
        launches.append(Launch(segmentation[0].ref, m_c, Fraction(0), bound, head))
        spare_left -= m_c
        ws -= head
        break

    launched = {l.entity for l in launches}
    unlaunched = [c for c in cands if c not in launched]
    if segmentation is not None:
        unlaunched = [c for c in unlaunched if c.node != segmentation[0].origin]
        unlaunched.append(segmentation[1].ref)

    return GroupPlan(
        index=index,
        members=members,
        loads=member_loads,
        parallelism=par,
        exec_times=times,
        spare_sms=spare,
        spare_capacity=capacity,
        bound=bound,
        longest=longest,
        candidates=cands,
        launches=tuple(launches),
        segmentation=segmentation,
        unlaunched=tuple(sorted(unlaunched)),
    )


def add_extra_deps(plan: GroupPlan, task: DagTask,
                   successors: Optional[Callable] = None) -> FrozenSet[EntityEdge]:
    """
    (longest, n) for every unlaunched candidate n (residual segments included) and
    (n, s) for every launched n and every successor s of the longest member.
    """
    if successors is None:
        successors = lambda r: [KernelRef(s) for s in task.successors(r.node)]
    v_r = plan.longest
    edges = {(v_r, n) for n in plan.unlaunched}
    after = list(successors(v_r))
    for launch in plan.launches:
        edges |= {(launch.entity, s) for s in after}
    return frozenset(edges)


@dataclass(frozen=True)
class ScheduleScheme:
    task: DagTask
    platform: Platform
    group_plan: Tuple[GroupPlan, ...]
    loads: Mapping[KernelRef, Fraction]
    parallelism: Mapping[KernelRef, int]
    segmentation: Mapping[NodeId, Tuple[Segment, Segment]]
    extra_deps: FrozenSet[EntityEdge]
    dag_edges: FrozenSet[EntityEdge]  # original edges after segment rewiring

    @property
    def entities(self) -> List[KernelRef]:
        return sorted(self.loads)

    def exec_time(self, ref: KernelRef) -> Fraction:
        return exec_time(self.loads[ref], self.parallelism[ref], self.platform)

    def group_index(self) -> Dict[KernelRef, int]:
        return {e: k for k, plan in enumerate(self.group_plan) for e in plan.entities}

    def order_deps(self) -> FrozenSet[EntityEdge]:
        """Every entity of a group precedes every entity of the next group."""
        edges = set()
        for prev, nxt in zip(self.group_plan, self.group_plan[1:]):
            for u in prev.entities:
                for v in nxt.entities:
                    edges.add((u, v))
        return frozenset(edges - self.dag_edges - self.extra_deps)

    def dependency_edges(self) -> FrozenSet[EntityEdge]:
        return self.dag_edges | self.extra_deps

    def augmented_graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.entities)
        g.add_edges_from(sorted(self.dag_edges), kind="dag")
        g.add_edges_from(sorted(self.extra_deps), kind="extra")
        g.add_edges_from(sorted(self.order_deps()), kind="order")
        return g

    def to_document(self) -> dict:
        def num(x: Fraction) -> str:
            return str(x)

        return {
            "sm_count": self.platform.sm_count,
            "t_min": num(self.platform.t_min),
            "groups": [
                {
                    "index": plan.index,
                    "members": [
                        {
                            "entity": str(r),
                            "load": num(plan.loads[r]),
                            "parallelism": plan.parallelism[r],
                            "exec_time": num(plan.exec_times[r]),
                        }
                        for r in plan.members
                    ],
                    "spare_sms": plan.spare_sms,
                    "spare_capacity": num(plan.spare_capacity),
                    "bound": num(plan.bound),
                    "longest": str(plan.longest),
                    "launches": [
                        {
                            "entity": str(l.entity),
                            "load": num(l.load),
                            "parallelism": l.parallelism,
                            "start": num(l.start),
                            "finish": num(l.finish),
                        }
                        for l in plan.launches
                    ],
                }
                for plan in self.group_plan
            ],
            "segmentation": {
                str(v): {"parallel": num(p.load), "residual": num(r.load)}
                for v, (p, r) in sorted(self.segmentation.items())
            },
            "extra_deps": [[str(u), str(v)] for u, v in sorted(self.extra_deps)],
            "order_deps": [[str(u), str(v)] for u, v in sorted(self.order_deps())],
            "group_barrier": True,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=2, sort_keys=True)


class Scheduler:
    """Single-use planning state for one task on one platform."""

    def __init__(self, task: DagTask, platform: Platform):
        self.task = task
        self.platform = platform
        self.graph = nx.DiGraph()
        self.graph.add_nodes_from(KernelRef(v) for v in task.nodes)
        self.graph.add_edges_from((KernelRef(u), KernelRef(v)) for u, v in task.edges)
        self.loads: Dict[KernelRef, Fraction] = {KernelRef(v): c for v, c in task.loads.items()}
        self.extra: Set[EntityEdge] = set()
        self.scheduled: Set[KernelRef] = set()
        self.segmentation: Dict[NodeId, Tuple[Segment, Segment]] = {}
        self.parallelism: Dict[KernelRef, int] = {}

    def _predecessors(self, ref: KernelRef) -> List[KernelRef]:
        return list(self.graph.predecessors(ref))

    def _successors(self, ref: KernelRef) -> List[KernelRef]:
        return sorted(s for s in self.graph.successors(ref) if self.graph.edges[ref, s].get("kind") != "extra")

    def _split(self, groups: List[List[KernelRef]], parallel: Segment, residual: Segment):
        whole = KernelRef(parallel.origin)
        p, r = parallel.ref, residual.ref
        preds = list(self.graph.predecessors(whole))
        succs = list(self.graph.successors(whole))
        for u in preds:
            kind = self.graph.edges[u, whole].get("kind", "dag")
            self.graph.add_edge(u, p, kind=kind)
            self.graph.add_edge(u, r, kind=kind)
            if kind == "extra":
                self.extra.discard((u, whole))
                self.extra |= {(u, p), (u, r)}
        for s in succs:
            self.graph.add_edge(r, s, kind="dag")
        self.graph.remove_node(whole)
        del self.loads[whole]
        self.loads[p] = parallel.load
        self.loads[r] = residual.load
        for members in groups:
            if whole in members:
                members[members.index(whole)] = r
        self.segmentation[parallel.origin] = (parallel, residual)

    def run(self) -> ScheduleScheme:
        division = divide(self.task, self.platform)
        groups = [[KernelRef(v) for v in g] for g in division.groups]
        plans: List[GroupPlan] = []

        for members in groups:
            members = [r for r in members if r not in self.scheduled]
            if not members:
                continue
            m = scale_parallelism(members, self.task, self.platform, loads=self.loads)
            pending = sorted(r for r in self.loads if r not in self.scheduled and r not in members)
            released = {
                r for r in pending
                if all(p in self.scheduled for p in self.graph.predecessors(r))
            }
            candidates = parallel_candidates(
                members, self.task, released, pending=pending, predecessors=self._predecessors
            )
            plan = plan_group(m, candidates, self.task, self.platform, loads=self.loads, index=len(plans))
            if plan.segmentation is not None:
                self._split(groups, *plan.segmentation)

            edges = add_extra_deps(plan, self.task, successors=self._successors)
            for u, v in edges:
                if not self.graph.has_edge(u, v):
                    self.graph.add_edge(u, v, kind="extra")
                    self.extra.add((u, v))
            plan = replace(plan, extra_deps=edges)

            self.parallelism.update(plan.parallelism)
            for launch in plan.launches:
                self.parallelism[launch.entity] = launch.parallelism
            self.scheduled |= set(plan.entities)
            plans.append(plan)

        dag_edges = frozenset(
            (u, v) for u, v, kind in self.graph.edges(data="kind", default="dag") if kind == "dag"
        )
        scheme = ScheduleScheme(
            task=self.task,
            platform=self.platform,
            group_plan=tuple(plans),
            loads=dict(self.loads),
            parallelism=dict(self.parallelism),
            segmentation=dict(self.segmentation),
            extra_deps=frozenset(self.extra),
            dag_edges=dag_edges,
        )
        log_info(
            "Scheduled DAG",
            nodes=len(self.task.loads),
            groups=len(plans),
            segments=len(self.segmentation),
            extra_deps=len(self.extra),
        )
        return scheme


def schedule(task: DagTask, platform: Platform) -> ScheduleScheme:
    validate(task, platform.t_min)
    return Scheduler(task, platform).run()
