"""
Sub-graph division: blocks around join nodes, local complete paths, and the
ordered balanced group list.
"""
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from services.dag_model import (
    DagTask,
    NodeId,
    Path,
    ancestors,
    cumulative_ancestor_workload,
    join_nodes,
)
from services.exec_model import Platform, max_parallelism


@dataclass(frozen=True)
class Block:
    join: Optional[NodeId]  # None for the residual block
    members: Tuple[NodeId, ...]  # topological order

    @property
    def is_residual(self) -> bool:
        return self.join is None


@dataclass(frozen=True)
class LocalPathSet:
    block: Block
    paths: Tuple[Path, ...]


@dataclass(frozen=True)
class BalancedGroupList:
    groups: Tuple[Tuple[NodeId, ...], ...]

    def __iter__(self):
        return iter(self.groups)

    def __len__(self):
        return len(self.groups)

    def as_sets(self) -> List[frozenset]:
        return [frozenset(g) for g in self.groups]

    def group_of(self) -> Dict[NodeId, int]:
        return {v: j for j, g in enumerate(self.groups) for v in g}


@dataclass(frozen=True)
class DivisionResult:
    blocks: Tuple[Block, ...]
    path_sets: Tuple[LocalPathSet, ...]
    groups: BalancedGroupList


def build_blocks(task: DagTask) -> List[Block]:
    order = task.topological_order()
    assigned = set()
    blocks = []
    for join in join_nodes(task):
        members = ancestors(task, join) - assigned
        assigned |= members
        blocks.append(Block(join=join, members=tuple(v for v in order if v in members)))
    blocks.append(Block(join=None, members=tuple(v for v in order if v not in assigned)))
    return blocks


def local_paths(task: DagTask, block: Block) -> LocalPathSet:
    """All local complete paths of a block (local source to local sink)."""
    inside = set(block.members)
    children = {
        v: [s for s in task.successors(v) if s in inside]
        for v in block.members
    }
    roots = [
        v for v in block.members
        if not any(p in inside for p in task.predecessors(v))
    ]

    # the block's induced subgraph is a forest, so root-to-leaf walks are the paths
    paths: List[Path] = []
    for r in roots:
        stack = [(r,)]
        while stack:
            prefix = stack.pop()
            kids = children[prefix[-1]]
            if not kids:
                paths.append(Path(prefix))
            for s in reversed(kids):
                stack.append(prefix + (s,))
    return LocalPathSet(block=block, paths=tuple(paths))


def _block_groups(task: DagTask, path_set: LocalPathSet, platform: Platform) -> List[Tuple[NodeId, ...]]:
    M = platform.sm_count
    remaining = [list(p.nodes) for p in path_set.paths]
    groups = []
    while any(remaining):
        heads = sorted(
            {p[0] for p in remaining if p},
            key=lambda v: (-cumulative_ancestor_workload(task, v), v),
        )
        picked = heads[:M]  # at most one kernel per SM
        if any(max_parallelism(task.loads[v], platform) >= M for v in picked):
            # a kernel that saturates the device runs alone
            picked = [max(picked, key=lambda v: (max_parallelism(task.loads[v], platform), -v))]
        chosen = set(picked)
        remaining = [[v for v in p if v not in chosen] for p in remaining]
        groups.append(tuple(picked))
    return groups


def build_groups(task: DagTask, platform: Platform) -> BalancedGroupList:
    return divide(task, platform).groups


def divide(task: DagTask, platform: Platform) -> DivisionResult:
    blocks = build_blocks(task)
    path_sets = [local_paths(task, b) for b in blocks]
    groups = []
    for ps in path_sets:
        groups.extend(_block_groups(task, ps, platform))
    return DivisionResult(
        blocks=tuple(blocks),
        path_sets=tuple(path_sets),
        groups=BalancedGroupList(tuple(groups)),
    )
