"""
Tests for the makespan bounds
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from services.analysis import (
    METHODS,
    analyze,
    dag_makespan_bound,
    graham_para_bound,
    greedy_bound,
    greedy_unaware_bound,
    group_response_time,
    lower_bound,
)
from services.dag_model import DagTask
from services.exec_model import Platform, max_parallelism
from services.generator import GenConfig, generate
from services.invariants import check_bounds
from services.scheduler import plan_group, schedule


def test_group_response_time_is_slowest_member(example_task, platform6):
    plan = plan_group({3: 3, 4: 3}, [], example_task, platform6)
    assert group_response_time(plan) == 1
    single = DagTask.build({0: 10}, [])
    assert group_response_time(plan_group({0: 4}, [], single, Platform(4))) == Fraction(5, 2)


def test_chain_bounds(chain_task):
    p = Platform(4)
    assert dag_makespan_bound(schedule(chain_task, p)) == 2
    assert greedy_bound(chain_task, p) == 2
    assert graham_para_bound(chain_task, p) == Fraction(7, 2)
    assert lower_bound(chain_task, p) == 2


def test_single_node_bounds():
    task = DagTask.build({0: 3}, [])
    p = Platform(4)
    assert dag_makespan_bound(schedule(task, p)) == 1
    assert greedy_bound(task, p) == 1
    assert graham_para_bound(task, p) == 1 + Fraction(2, 4)
    assert graham_para_bound(task, Platform(1)) == 3


def test_unaware_pays_for_oversubscription():
    task = DagTask.build({0: 160}, [])
    p = Platform(80)
    assert greedy_unaware_bound(task, p) == 2
    assert greedy_bound(task, p) == 2


def test_unaware_penalised_when_max_parallelism_not_a_multiple():
    task = DagTask.build({0: 100}, [])
    p = Platform(80)
    # m = 100 takes two rounds: 2 * 100 / 100
    assert greedy_unaware_bound(task, p) == 2
    assert greedy_bound(task, p) == Fraction(5, 4)


def test_example_bounds(example_task, platform6):
    report = analyze(example_task, platform6)
    assert report.per_group_R == [1, 1, 2, 1]
    assert report.proposed_bound == 5
    assert report.greedy_bound == 7
    assert report.greedy_unaware_bound == 7
    assert report.normalized["greedy_unaware"] == 1
    assert report.normalized["proposed"] == Fraction(5, 7)


def test_example_bound_with_segmentation(example_task, platform8):
    assert analyze(example_task, platform8).proposed_bound == 4


def test_lower_bound_fan():
    loads = {v: 1 for v in range(10)}
    edges = [(0, v) for v in range(1, 9)] + [(v, 9) for v in range(1, 9)]
    task = DagTask.build(loads, edges)
    assert lower_bound(task, Platform(4)) == 3


def test_methods_registry(example_task, platform6):
    assert set(METHODS) == {"proposed", "greedy", "greedy_unaware", "graham_para"}
    assert METHODS["proposed"](example_task, platform6) == 5
    assert METHODS["greedy"](example_task, platform6) == 7


def test_report_document(example_task, platform6):
    doc = analyze(example_task, platform6).to_document()
    assert doc["bounds"]["proposed"] == "5"
    assert doc["per_group_R"] == ["1", "1", "2", "1"]
    assert doc["normalized"]["greedy_unaware"] == 1.0


def test_doubling_loads_and_t_min_doubles_bounds(example_task):
    base = analyze(example_task, Platform(6))
    doubled = analyze(example_task.scaled(2), Platform(6, t_min=2))
    for name, value in base.bounds().items():
        assert doubled.bounds()[name] == 2 * value


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=10_000),
    sm_count=st.sampled_from([2, 4, 8, 16, 32, 64, 128]),
)
def test_all_bounds_above_lower_bound(seed, sm_count):
    task = generate(GenConfig(seed=seed))
    report = analyze(task, Platform(sm_count))
    assert check_bounds(report) == []
    assert report.greedy_bound <= report.greedy_unaware_bound


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_greedy_matches_unaware_on_large_devices(seed):
    task = generate(GenConfig(seed=seed))
    widest = max(max_parallelism(c, Platform(1)) for c in task.loads.values())
    p = Platform(widest)
    assert greedy_bound(task, p) == greedy_unaware_bound(task, p)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000), sm_count=st.sampled_from([2, 4, 8]))
def test_proposed_equals_greedy_when_every_kernel_saturates(seed, sm_count):
    # loads in [10, 30] saturate up to 8 SMs, so every group is a singleton
    task = generate(GenConfig(seed=seed))
    p = Platform(sm_count)
    assert METHODS["proposed"](task, p) == greedy_bound(task, p)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
