"""
Tests for the result checkers
"""

from dataclasses import replace
from fractions import Fraction

import pytest

from services.analysis import analyze
from services.division import BalancedGroupList, build_groups
from services.exec_model import Platform
from services.invariants import check_bounds, check_groups, check_scheme
from services.scheduler import KernelRef, Part, schedule


def test_sound_results_pass(example_task, platform6, platform8):
    for p in (platform6, platform8):
        groups = build_groups(example_task, p)
        assert check_groups(example_task, p, groups) == []
        assert check_scheme(schedule(example_task, p), len(groups)) == []
    assert check_bounds(analyze(example_task, platform6)) == []


def test_dependent_members_flagged(example_task, platform6):
    groups = BalancedGroupList(((1,), (3, 5), (2, 4, 6), (7,)))
    problems = check_groups(example_task, platform6, groups)
    assert any("dependent nodes 3 and 5" in p for p in problems)


def test_missing_and_duplicate_nodes_flagged(example_task, platform6):
    groups = BalancedGroupList(((1,), (3, 4), (3,), (7,)))
    problems = check_groups(example_task, platform6, groups)
    assert any("node 3 in groups" in p for p in problems)
    assert any("belong to no group" in p for p in problems)


def test_saturating_kernel_must_run_alone(example_task):
    # v2 (load 4) saturates a 2-SM device
    groups = BalancedGroupList(((1,), (2, 3), (4,), (5,), (6,), (7,)))
    problems = check_groups(example_task, Platform(2), groups)
    assert any("saturating" in p for p in problems)


def test_oversized_group_flagged(example_task):
    groups = BalancedGroupList(((1,), (2, 3, 4), (5,), (6,), (7,)))
    problems = check_groups(example_task, Platform(2), groups)
    assert any("3 members on 2 SMs" in p for p in problems)


def test_oversubscribed_scheme_flagged(example_task, platform6):
    scheme = schedule(example_task, platform6)
    plan = scheme.group_plan[1]
    broken_plan = replace(plan, parallelism={r: 6 for r in plan.members})
    broken = replace(scheme, group_plan=scheme.group_plan[:1] + (broken_plan,) + scheme.group_plan[2:])
    problems = check_scheme(broken, 4)
    assert any("hold 12 SMs on 6" in p for p in problems)


def test_launches_beyond_spare_flagged(example_task, platform8):
    scheme = schedule(example_task, platform8)
    k, plan = next((k, p) for k, p in enumerate(scheme.group_plan) if p.launches)
    launch = plan.launches[0]
    doubled = replace(plan, launches=(launch, replace(launch, entity=KernelRef(6))))
    broken = replace(scheme, group_plan=scheme.group_plan[:k] + (doubled,) + scheme.group_plan[k + 1:])
    problems = check_scheme(broken, 4)
    assert any(f"launches hold {2 * launch.parallelism} SMs, spare is {plan.spare_sms}" in p for p in problems)


def test_lost_load_flagged(example_task, platform8):
    scheme = schedule(example_task, platform8)
    residual = KernelRef(2, Part.RESIDUAL)
    broken = replace(scheme, loads={**scheme.loads, residual: Fraction(1)})
    problems = check_scheme(broken, 4)
    assert any("node 2 load 4" in p for p in problems)


def test_too_many_segmentations_flagged(example_task, platform8):
    assert check_scheme(schedule(example_task, platform8), 0) != []


def test_bound_below_floor_flagged(example_task, platform6):
    report = analyze(example_task, platform6)
    problems = check_bounds(replace(report, lower_bound=Fraction(6)))
    assert len(problems) == 1
    assert problems[0].startswith("proposed bound 5")


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
