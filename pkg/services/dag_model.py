"""
DAG task model and the graph queries every other service consumes.

A DagTask is a periodic DAG of GPU kernels with one source and one sink.
Loads are exact rationals in time units; queries are pure and cached per task.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

import networkx as nx

NodeId = int
Edge = Tuple[NodeId, NodeId]


class DagValidationError(ValueError):
    """Raised when a DAG breaks a task invariant. Carries the offending elements."""

    def __init__(self, message: str, nodes: Iterable[NodeId] = (), edges: Iterable[Edge] = ()):
        super().__init__(message)
        self.nodes = sorted(nodes)
        self.edges = sorted(edges)


class UnknownNodeError(KeyError):
    def __init__(self, node: NodeId):
        super().__init__(node)
        self.node = node

    def __str__(self):
        return f"unknown node id {self.node}"


@dataclass(frozen=True)
class Path:
    """An ordered node sequence where consecutive nodes share an edge."""
    nodes: Tuple[NodeId, ...]

    def length(self, task: "DagTask") -> Fraction:
        return sum((task.loads[v] for v in self.nodes), Fraction(0))

    def __iter__(self):
        return iter(self.nodes)

    def __len__(self):
        return len(self.nodes)


@dataclass(frozen=True)
class DagTask:
    """Periodic task with implicit deadline. Build with DagTask.build(); call validate() before use."""
    loads: Mapping[NodeId, Fraction]
    edges: FrozenSet[Edge]
    period: Fraction
    seed: Optional[int] = field(default=None, compare=False)

    @classmethod
    def build(cls, loads: Mapping[NodeId, object], edges: Iterable[Edge],
              period: Optional[object] = None, seed: Optional[int] = None) -> "DagTask":
        exact = {int(v): Fraction(c) for v, c in sorted(loads.items())}
        edge_set = frozenset((int(u), int(v)) for u, v in edges)
        if period is None:
            period = sum(exact.values(), Fraction(0))
        return cls(loads=exact, edges=edge_set, period=Fraction(period), seed=seed)

    @property
    def deadline(self) -> Fraction:
        return self.period

    @property
    def nodes(self) -> List[NodeId]:
        return list(self.loads.keys())

    @cached_property
    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.loads)
        g.add_edges_from(sorted(self.edges))
        return g

    @cached_property
    def _order(self) -> List[NodeId]:
        return list(nx.lexicographical_topological_sort(self.graph))

    def topological_order(self) -> List[NodeId]:
        return list(self._order)

    def _check(self, v: NodeId):
        if v not in self.loads:
            raise UnknownNodeError(v)

    def predecessors(self, v: NodeId) -> List[NodeId]:
        self._check(v)
        return sorted(self.graph.predecessors(v))

    def successors(self, v: NodeId) -> List[NodeId]:
        self._check(v)
        return sorted(self.graph.successors(v))

    @property
    def source(self) -> NodeId:
        return next(v for v in self._order if self.graph.in_degree(v) == 0)

    @property
    def sink(self) -> NodeId:
        return next(v for v in reversed(self._order) if self.graph.out_degree(v) == 0)

    @cached_property
    def total_workload(self) -> Fraction:
        return sum(self.loads.values(), Fraction(0))

    # ancestor closure, computed once in topological order
    @cached_property
    def _ancestors(self) -> Dict[NodeId, FrozenSet[NodeId]]:
        anc: Dict[NodeId, FrozenSet[NodeId]] = {}
        for v in self._order:
            acc = set()
            for p in self.graph.predecessors(v):
                acc.add(p)
                acc |= anc[p]
            anc[v] = frozenset(acc)
        return anc

    @cached_property
    def _descendants(self) -> Dict[NodeId, FrozenSet[NodeId]]:
        desc: Dict[NodeId, FrozenSet[NodeId]] = {}
        for v in reversed(self._order):
            acc = set()
            for s in self.graph.successors(v):
                acc.add(s)
                acc |= desc[s]
            desc[v] = frozenset(acc)
        return desc

    @cached_property
    def _w_anc(self) -> Dict[NodeId, Fraction]:
        return {
            v: self.loads[v] + sum((self.loads[a] for a in self._ancestors[v]), Fraction(0))
            for v in self._order
        }

    def descendants(self, v: NodeId) -> FrozenSet[NodeId]:
        self._check(v)
        return self._descendants[v]

    def scaled(self, factor) -> "DagTask":
        factor = Fraction(factor)
        return DagTask(
            loads={v: c * factor for v, c in self.loads.items()},
            edges=self.edges,
            period=self.period * factor,
            seed=self.seed,
        )


def validate(task: DagTask, t_min=1) -> None:
    """Raise DagValidationError unless every DagTask invariant holds."""
    t_min = Fraction(t_min)
    unknown = {v for e in task.edges for v in e if v not in task.loads}
    if unknown:
        raise DagValidationError(
            f"edges reference unknown nodes {sorted(unknown)}",
            nodes=unknown,
            edges=[e for e in task.edges if e[0] in unknown or e[1] in unknown],
        )
    if not task.loads:
        raise DagValidationError("task has no nodes")

    ids = sorted(task.loads)
    missing = sorted(set(range(ids[0], ids[-1] + 1)) - set(ids))
    if missing:
        raise DagValidationError(
            f"node ids must be contiguous from {ids[0]} to {ids[-1]}; missing {missing}",
            nodes=missing,
        )

    bad_loads = [v for v, c in task.loads.items() if c <= 0 or c < t_min]
    if bad_loads:
        raise DagValidationError(
            f"loads must be positive and at least t_min={t_min}; offending nodes {sorted(bad_loads)}",
            nodes=bad_loads,
        )

    g = task.graph
    try:
        cycle = nx.find_cycle(g)
    except nx.NetworkXNoCycle:
        cycle = None
    if cycle:
        cycle_edges = [(u, v) for u, v in cycle]
        raise DagValidationError(
            f"cycle detected through edges {cycle_edges}",
            nodes={u for u, _ in cycle_edges},
            edges=cycle_edges,
        )

    sources = [v for v in g.nodes if g.in_degree(v) == 0]
    sinks = [v for v in g.nodes if g.out_degree(v) == 0]
    if len(sources) != 1:
        raise DagValidationError(f"expected exactly one source, found {sorted(sources)}", nodes=sources)
    if len(sinks) != 1:
        raise DagValidationError(f"expected exactly one sink, found {sorted(sinks)}", nodes=sinks)

    if task.period <= 0:
        raise DagValidationError(f"period must be positive, got {task.period}")


def ancestors(task: DagTask, v: NodeId) -> FrozenSet[NodeId]:
    """Transitive predecessors of v, excluding v."""
    task._check(v)
    return task._ancestors[v]


def concurrent_set(task: DagTask, v: NodeId) -> FrozenSet[NodeId]:
    """Nodes sharing no transitive dependency with v in either direction."""
    task._check(v)
    related = task._ancestors[v] | task._descendants[v] | {v}
    return frozenset(u for u in task.loads if u not in related)


def cumulative_ancestor_workload(task: DagTask, v: NodeId) -> Fraction:
    """Total load of v and all its ancestors."""
    task._check(v)
    return task._w_anc[v]


def join_nodes(task: DagTask) -> List[NodeId]:
    """Nodes with two or more predecessors, by ascending ancestor workload then NodeId."""
    joins = [v for v in task.loads if task.graph.in_degree(v) >= 2]
    return sorted(joins, key=lambda v: (task._w_anc[v], v))


def longest_path(task: DagTask, weight: Callable[[NodeId], Fraction]) -> Tuple[Fraction, Path]:
    """Maximum-weight source-to-sink path; ties resolve to the lowest predecessor id."""
    best: Dict[NodeId, Fraction] = {}
    via: Dict[NodeId, Optional[NodeId]] = {}
    for v in task._order:
        preds = sorted(task.graph.predecessors(v))
        if preds:
            p = max(preds, key=lambda u: (best[u], -u))
            best[v] = best[p] + weight(v)
            via[v] = p
        else:
            best[v] = weight(v)
            via[v] = None
    end = task.sink
    nodes = []
    cur: Optional[NodeId] = end
    while cur is not None:
        nodes.append(cur)
        cur = via[cur]
    return best[end], Path(tuple(reversed(nodes)))


def complete_paths(task: DagTask) -> List[Path]:
    """Every source-to-sink path. Exponential in general; for small DAGs and tests."""
    return [
        Path(tuple(p))
        for p in sorted(nx.all_simple_paths(task.graph, task.source, task.sink))
    ]
