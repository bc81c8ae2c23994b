"""
Worst-case makespan bounds.

  proposed        sum of the balanced-group response times of a ScheduleScheme
  greedy          every node alone on the device at m = min(m^max, M), in sequence
  greedy_unaware  every node at m = m^max, oversubscription penalty included
  graham_para     list-scheduling bound on the unit-node transform of the DAG

lower_bound is a sanity floor that every method must respect.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional

from services.dag_model import DagTask, longest_path
from services.exec_model import Platform, exec_time, full_parallel_time, max_parallelism
from services.scheduler import GroupPlan, ScheduleScheme, schedule

REFERENCE_METHOD = "greedy_unaware"


@dataclass(frozen=True)
class MakespanReport:
    per_group_R: List[Fraction]
    proposed_bound: Fraction
    greedy_bound: Fraction
    greedy_unaware_bound: Fraction
    graham_para_bound: Fraction
    lower_bound: Fraction
    normalized: Dict[str, Fraction] = field(default_factory=dict)

    def bounds(self) -> Dict[str, Fraction]:
        return {
            "proposed": self.proposed_bound,
            "greedy": self.greedy_bound,
            "greedy_unaware": self.greedy_unaware_bound,
            "graham_para": self.graham_para_bound,
        }

    def to_document(self) -> dict:
        return {
            "per_group_R": [str(r) for r in self.per_group_R],
            "bounds": {k: str(v) for k, v in self.bounds().items()},
            "lower_bound": str(self.lower_bound),
            "normalized": {k: float(v) for k, v in self.normalized.items()},
        }


def group_response_time(plan: GroupPlan) -> Fraction:
    """The slowest member. Launches never outlast it."""
    return max(plan.exec_times.values())


def dag_makespan_bound(scheme: ScheduleScheme) -> Fraction:
    return sum((group_response_time(p) for p in scheme.group_plan), Fraction(0))


def greedy_bound(task: DagTask, platform: Platform) -> Fraction:
    return sum((full_parallel_time(c, platform) for c in task.loads.values()), Fraction(0))


def greedy_unaware_bound(task: DagTask, platform: Platform) -> Fraction:
    return sum(
        (exec_time(c, max_parallelism(c, platform), platform) for c in task.loads.values()),
        Fraction(0),
    )


def graham_para_bound(task: DagTask, platform: Platform) -> Fraction:
    """
    Graham's L + (W - L) / M on the DAG where each node becomes ceil(C / t_min)
    mutually parallel unit nodes of length t_min.

    Args:
        task: validated DAG task
        platform: device description

    Returns:
        The bound in time units. Unit counts round up, so W may exceed the
        task's total workload when loads are not t_min multiples.
    """
    t_min = platform.t_min
    chain, _ = longest_path(task, lambda v: t_min)
    work = sum(
        (math.ceil(c / t_min) * t_min for c in task.loads.values()),
        Fraction(0),
    )
    return chain + (work - chain) / platform.sm_count


def lower_bound(task: DagTask, platform: Platform) -> Fraction:
    work_floor = task.total_workload / platform.sm_count
    path_floor, _ = longest_path(task, lambda v: full_parallel_time(task.loads[v], platform))
    return max(work_floor, path_floor)


def proposed_bound(task: DagTask, platform: Platform) -> Fraction:
    return dag_makespan_bound(schedule(task, platform))


METHODS: Dict[str, Callable[[DagTask, Platform], Fraction]] = {
    "proposed": proposed_bound,
    "greedy": greedy_bound,
    "greedy_unaware": greedy_unaware_bound,
    "graham_para": graham_para_bound,
}


def analyze(task: DagTask, platform: Platform, scheme: Optional[ScheduleScheme] = None) -> MakespanReport:
    if scheme is None:
        scheme = schedule(task, platform)
    per_group = [group_response_time(p) for p in scheme.group_plan]
    bounds = {
        "proposed": sum(per_group, Fraction(0)),
        "greedy": greedy_bound(task, platform),
        "greedy_unaware": greedy_unaware_bound(task, platform),
        "graham_para": graham_para_bound(task, platform),
    }
    reference = bounds[REFERENCE_METHOD]
    return MakespanReport(
        per_group_R=per_group,
        proposed_bound=bounds["proposed"],
        greedy_bound=bounds["greedy"],
        greedy_unaware_bound=bounds["greedy_unaware"],
        graham_para_bound=bounds["graham_para"],
        lower_bound=lower_bound(task, platform),
        normalized={k: v / reference for k, v in bounds.items()},
    )
