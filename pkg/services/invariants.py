"""
Checkers for division, scheduling and analysis results.

Each check returns a list of human-readable violations; an empty list means
the result is sound.
"""
from collections import defaultdict
from fractions import Fraction
from typing import Dict, List

import networkx as nx

from services.analysis import MakespanReport
from services.dag_model import DagTask
from services.division import BalancedGroupList
from services.exec_model import Platform, max_parallelism
from services.scheduler import ScheduleScheme


def check_groups(task: DagTask, platform: Platform, groups: BalancedGroupList) -> List[str]:
    M = platform.sm_count
    problems = []
    seen: Dict[int, int] = {}
    for j, group in enumerate(groups):
        if not group:
            problems.append(f"group {j} is empty")
        if len(group) > M:
            problems.append(f"group {j} has {len(group)} members on {M} SMs")
        saturating = [v for v in group if max_parallelism(task.loads[v], platform) >= M]
        if saturating and len(group) > 1:
            problems.append(f"group {j} shares the device with saturating kernels {saturating}")
        for v in group:
            if v in seen:
                problems.append(f"node {v} in groups {seen[v]} and {j}")
            seen[v] = j
        for u in group:
            for v in group:
                if u < v and (v in task.descendants(u) or u in task.descendants(v)):
                    problems.append(f"group {j} holds dependent nodes {u} and {v}")
    missing = set(task.loads) - set(seen)
    if missing:
        problems.append(f"nodes {sorted(missing)} belong to no group")
    return problems


def check_scheme(scheme: ScheduleScheme, group_count: int) -> List[str]:
    """`group_count` is the number of balanced groups the scheme was built from."""
    task = scheme.task
    M = scheme.platform.sm_count
    problems = []

    for plan in scheme.group_plan:
        used = sum(plan.parallelism.values())
        if used > M:
            problems.append(f"group {plan.index} members hold {used} SMs on {M}")
        for launch in plan.launches:
            if launch.finish > plan.bound:
                problems.append(f"{launch.entity} finishes at {launch.finish} after group bound {plan.bound}")
        side_by_side = sum(l.parallelism for l in plan.launches)
        if side_by_side > plan.spare_sms:
            problems.append(f"group {plan.index} launches hold {side_by_side} SMs, spare is {plan.spare_sms}")
        launched = sum((l.load for l in plan.launches), Fraction(0))
        if launched > plan.spare_capacity:
            problems.append(f"group {plan.index} launches {launched} into spare capacity {plan.spare_capacity}")

    per_node: Dict[int, Fraction] = defaultdict(Fraction)
    for ref, load in scheme.loads.items():
        per_node[ref.node] += load
    for v, c in task.loads.items():
        if per_node[v] != c:
            problems.append(f"node {v} load {c} split into pieces totalling {per_node[v]}")
    for v, (p, r) in scheme.segmentation.items():
        if p.load + r.load != task.loads[v] or p.load <= 0 or r.load <= 0:
            problems.append(f"segmentation of {v} does not conserve load")

    if len(scheme.segmentation) > group_count:
        problems.append(f"{len(scheme.segmentation)} segmentations for {group_count} groups")

    scheduled = [e for plan in scheme.group_plan for e in plan.entities]
    if sorted(scheduled) != scheme.entities:
        problems.append("entities are not scheduled exactly once")

    g = scheme.augmented_graph()
    if not nx.is_directed_acyclic_graph(g):
        problems.append(f"augmented graph has a cycle through {nx.find_cycle(g)}")
    return problems


def check_bounds(report: MakespanReport) -> List[str]:
    return [
        f"{name} bound {value} is below the lower bound {report.lower_bound}"
        for name, value in report.bounds().items()
        if value < report.lower_bound
    ]
