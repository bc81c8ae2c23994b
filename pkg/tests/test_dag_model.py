"""
Unit tests for the DAG task model: validation and graph queries
"""

from fractions import Fraction

import pytest

from services.dag_model import (
    DagTask,
    DagValidationError,
    UnknownNodeError,
    ancestors,
    complete_paths,
    concurrent_set,
    cumulative_ancestor_workload,
    join_nodes,
    longest_path,
    validate,
)


def test_valid_example_passes(example_task):
    validate(example_task)
    assert example_task.source == 1
    assert example_task.sink == 7
    assert example_task.total_workload == 16


def test_period_defaults_to_total_workload(example_task):
    assert example_task.period == 16
    assert example_task.deadline == example_task.period


def test_topological_order_prefers_low_ids(example_task):
    assert example_task.topological_order() == [1, 2, 3, 4, 5, 6, 7]


def test_cycle_is_rejected_with_offending_edges():
    task = DagTask.build({1: 1, 2: 1, 3: 1, 4: 1}, [(1, 2), (2, 3), (3, 2), (3, 4)])
    with pytest.raises(DagValidationError) as exc:
        validate(task)
    assert set(exc.value.edges) == {(2, 3), (3, 2)}


def test_two_sources_rejected():
    task = DagTask.build({1: 1, 2: 1, 3: 1}, [(1, 3), (2, 3)])
    with pytest.raises(DagValidationError) as exc:
        validate(task)
    assert exc.value.nodes == [1, 2]


def test_two_sinks_rejected():
    task = DagTask.build({1: 1, 2: 1, 3: 1}, [(1, 2), (1, 3)])
    with pytest.raises(DagValidationError, match="sink"):
        validate(task)


def test_edge_to_unknown_node_rejected():
    task = DagTask.build({1: 1, 2: 1}, [(1, 2), (2, 9)])
    with pytest.raises(DagValidationError) as exc:
        validate(task)
    assert exc.value.nodes == [9]


def test_load_below_t_min_rejected():
    task = DagTask.build({1: Fraction(1, 2)}, [])
    with pytest.raises(DagValidationError):
        validate(task, t_min=1)
    validate(task, t_min=Fraction(1, 2))


def test_single_node_is_valid():
    task = DagTask.build({0: 3}, [])
    validate(task)
    assert task.source == task.sink == 0


def test_gap_in_node_ids_rejected():
    task = DagTask.build({0: 1, 1: 1, 3: 1, 4: 1}, [(0, 1), (1, 3), (3, 4)])
    with pytest.raises(DagValidationError, match="contiguous") as exc:
        validate(task)
    assert exc.value.nodes == [2]


def test_unknown_node_query_raises(example_task):
    with pytest.raises(UnknownNodeError):
        example_task.predecessors(99)
    with pytest.raises(UnknownNodeError):
        ancestors(example_task, 99)


def test_ancestors_and_concurrency(example_task):
    assert ancestors(example_task, 5) == {1, 3, 4}
    assert ancestors(example_task, 1) == frozenset()
    assert concurrent_set(example_task, 2) == {3, 4, 5, 6}
    assert concurrent_set(example_task, 1) == frozenset()
    assert example_task.descendants(4) == {5, 6, 7}


def test_concurrency_is_symmetric(example_task):
    for u in example_task.nodes:
        for v in concurrent_set(example_task, u):
            assert u in concurrent_set(example_task, v)


def test_cumulative_ancestor_workload(example_task):
    assert cumulative_ancestor_workload(example_task, 1) == 1
    assert cumulative_ancestor_workload(example_task, 5) == 9
    assert cumulative_ancestor_workload(example_task, 7) == 16


def test_join_nodes_by_ancestor_workload(example_task):
    assert join_nodes(example_task) == [5, 7]


def test_join_nodes_tie_breaks_on_id():
    # two joins with equal ancestor workload
    task = DagTask.build(
        {0: 1, 1: 1, 2: 1, 3: 1, 4: 1, 5: 1},
        [(0, 1), (0, 2), (1, 4), (2, 4), (1, 3), (2, 3), (3, 5), (4, 5)],
    )
    assert join_nodes(task) == [3, 4, 5]


def test_longest_path_and_complete_paths(example_task):
    value, path = longest_path(example_task, lambda v: example_task.loads[v])
    assert value == 7
    assert path.nodes == (1, 3, 5, 7)
    assert path.length(example_task) == 7
    assert [p.nodes for p in complete_paths(example_task)] == [
        (1, 2, 7), (1, 3, 5, 7), (1, 4, 5, 7), (1, 4, 6, 7),
    ]


def test_scaled_copy(example_task):
    doubled = example_task.scaled(2)
    assert doubled.loads[2] == 8
    assert doubled.period == 32
    assert doubled.edges == example_task.edges
    assert example_task.loads[2] == 4


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
