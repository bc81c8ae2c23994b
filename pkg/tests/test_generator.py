"""
Tests for the synthetic layered DAG generator
"""

from decimal import Decimal

import pytest
from hypothesis import given, settings, strategies as st
from pydantic import ValidationError

from services.dag_model import validate
from services.generator import GenConfig, generate, generate_corpus


def _layers(task):
    """Longest-path depth of every node from the source."""
    depth = {}
    for v in task.topological_order():
        preds = task.predecessors(v)
        depth[v] = 1 + max((depth[p] for p in preds), default=-1)
    return depth


def test_same_seed_same_dag():
    cfg = GenConfig(seed=11)
    assert generate(cfg) == generate(cfg)
    assert generate(cfg, seed=12) != generate(cfg)


def test_seed_is_recorded():
    assert generate(GenConfig(), seed=77).seed == 77


def test_minimal_depth_gives_diamond():
    cfg = GenConfig(depth_min=2, depth_max=2, max_width=2, edge_density=0)
    for seed in range(10):
        task = generate(cfg, seed=seed)
        assert task.nodes == [0, 1, 2, 3]
        assert task.edges == {(0, 1), (0, 2), (1, 3), (2, 3)}


def test_loads_are_rounded_and_in_range():
    cfg = GenConfig(avg_load=20, load_jitter=Decimal("0.5"))
    for task in generate_corpus(cfg, 20):
        for c in task.loads.values():
            assert c.denominator == 1
            assert 10 <= c <= 30


def test_unrounded_loads_stay_at_or_above_t_min():
    cfg = GenConfig(avg_load=2, load_jitter=Decimal("0.9"), round_loads=False, t_min=1)
    for task in generate_corpus(cfg, 20):
        assert min(task.loads.values()) >= 1


def test_normalized_mean_is_exact():
    cfg = GenConfig(normalize_mean=True, round_loads=False, seed=3)
    task = generate(cfg)
    mean = task.total_workload / len(task.loads)
    assert mean == 20


def test_corpus_mean_load_near_average():
    corpus = generate_corpus(GenConfig(avg_load=20), 200)
    loads = [float(c) for t in corpus for c in t.loads.values()]
    assert 19 <= sum(loads) / len(loads) <= 21


def test_corpus_uses_consecutive_seeds():
    corpus = generate_corpus(GenConfig(seed=5), 3)
    assert [t.seed for t in corpus] == [5, 6, 7]
    assert generate_corpus(GenConfig(seed=5), 3) == corpus


def test_corpus_size_must_be_positive():
    with pytest.raises(ValueError):
        generate_corpus(GenConfig(), 0)


def test_config_validation():
    with pytest.raises(ValidationError):
        GenConfig(depth_min=6, depth_max=5)
    with pytest.raises(ValidationError):
        GenConfig(max_width=1)
    with pytest.raises(ValidationError):
        GenConfig(avg_load=Decimal("0.5"), t_min=1)
    with pytest.raises(ValidationError):
        GenConfig(edge_density=Decimal("1.5"))


@settings(max_examples=50, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**32),
    width=st.integers(min_value=2, max_value=12),
    depth=st.integers(min_value=2, max_value=9),
    density=st.sampled_from(["0", "0.2", "0.6"]),
)
def test_generated_dags_are_valid_and_layered(seed, width, depth, density):
    cfg = GenConfig(depth_min=depth, depth_max=depth, max_width=width, edge_density=Decimal(density))
    task = generate(cfg, seed=seed)
    validate(task)
    assert task.source == 0
    assert task.sink == max(task.nodes)
    # depth - 1 internal layers of 2..P nodes plus source and sink
    inner = len(task.nodes) - 2
    assert 2 * (depth - 1) <= inner <= width * (depth - 1)
    assert all(u < v for u, v in task.edges)
    assert max(_layers(task).values()) <= depth


def test_extra_edges_come_from_previous_layer_only():
    cfg = GenConfig(depth_min=5, depth_max=5, max_width=4, edge_density=1)
    for seed in range(5):
        task = generate(cfg, seed=seed)
        depth = _layers(task)
        for u, v in task.edges:
            if v != task.sink:
                assert depth[v] == depth[u] + 1
        # full density links each node to the whole previous layer
        for v in task.nodes:
            if v not in (task.source, task.sink):
                assert set(task.predecessors(v)) == {u for u in task.nodes if depth[u] == depth[v] - 1}


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
