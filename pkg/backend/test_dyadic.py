import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import nodes
from dyadic import (
    CarlesonSequence,
    NodeId,
    StepFunction,
    alpha_children,
    carleson_mass,
    carleson_norm,
    counting_function,
    enumerate_carleson_sequences,
    is_two_carleson,
    random_carleson_sequence,
    sparse_generations,
)
from errors import CarlesonError, DomainError, ResourceError

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)
depths = st.integers(min_value=1, max_value=8)


def test_node_paths_and_family():
    node = NodeId.from_path("+-")
    assert node == NodeId(2, 2)
    assert node.path() == "+-"
    assert node.parent() == NodeId.from_path("+")
    assert node.children() == (NodeId(3, 4), NodeId(3, 5))
    assert NodeId.from_path("+").contains(node)
    assert not NodeId.from_path("-").contains(node)
    assert node.interval() == (0.5, 0.75)
    assert node.leaf_range(4) == (8, 12)
    assert NodeId.root().heap_index == 0 and node.heap_index == 5


def test_node_rejects_positions_outside_the_level():
    with pytest.raises(DomainError):
        NodeId(2, 4)
    with pytest.raises(DomainError):
        NodeId.root().parent()
    with pytest.raises(DomainError):
        NodeId.from_path("+x")


def test_carleson_mass_examples(f1_sequence):
    assert carleson_mass(CarlesonSequence.from_selected(1, nodes("")), NodeId.root()) == 1.0
    assert carleson_mass(CarlesonSequence.from_selected(2, nodes("", "-", "+")), NodeId.root()) == 2.0
    assert carleson_mass(f1_sequence, NodeId.root()) == 2.0
    assert carleson_mass(f1_sequence, NodeId.from_path("+")) == 2.0
    assert carleson_mass(f1_sequence, NodeId.from_path("-")) == 0.0


def test_carleson_mass_rejects_nodes_outside_the_tree(f1_sequence):
    with pytest.raises(DomainError):
        carleson_mass(f1_sequence, NodeId(4, 0))


def test_is_two_carleson_examples():
    assert is_two_carleson(CarlesonSequence.empty(3))
    assert is_two_carleson(CarlesonSequence.from_selected(2, nodes("", "-", "+")))
    overfull = {"depth": 3, "selected": [[0, 0], [1, 0], [1, 1], [2, 0], [2, 1]]}
    assert not is_two_carleson(overfull)
    with pytest.raises(CarlesonError):
        CarlesonSequence.from_dict(overfull)


def test_with_bit_rejects_violations_and_leaves_original_intact():
    seq = CarlesonSequence.from_selected(3, nodes("", "-", "+"))
    with pytest.raises(CarlesonError):
        seq.with_bit(NodeId.from_path("--"), 1)
    assert seq.selected() == nodes("", "-", "+")
    assert seq.with_bit(NodeId.root(), 0).selected() == nodes("-", "+")


def test_alpha_children_examples():
    seq = CarlesonSequence.from_selected(3, nodes("", "+-", "++"))
    assert alpha_children(seq, NodeId.root()) == nodes("+-", "++")
    assert alpha_children(CarlesonSequence.empty(3), NodeId.root()) == []
    assert alpha_children(CarlesonSequence.from_selected(2, nodes("", "+")), NodeId.root()) == nodes("+")


def test_sparse_generations_examples(f1_sequence):
    assert sparse_generations(f1_sequence) == [nodes(""), nodes("+"), nodes("+-", "++")]
    assert sparse_generations(CarlesonSequence.from_selected(2, nodes("-", "+"))) == [nodes("-", "+")]
    assert sparse_generations(CarlesonSequence.empty(4)) == []


def test_counting_function_examples(f1_sequence):
    assert np.array_equal(counting_function(CarlesonSequence.from_selected(2, nodes(""))).leaf_values, np.ones(4))
    both = CarlesonSequence.from_selected(2, nodes("", "-", "+"))
    assert np.array_equal(counting_function(both).leaf_values, np.full(4, 2.0))
    assert np.array_equal(counting_function(f1_sequence).leaf_values, [1, 1, 1, 1, 3, 3, 3, 3])


def test_carleson_norm_is_one_for_disjoint_families():
    seq = CarlesonSequence.from_selected(3, nodes("-", "+-", "++"))
    assert carleson_norm(seq) == 1.0
    assert carleson_norm(CarlesonSequence.from_selected(2, nodes("", "-", "+"))) == 2.0


def test_json_forms_round_trip(f1_sequence):
    assert CarlesonSequence.from_dict(f1_sequence.to_dict()) == f1_sequence
    assert f1_sequence.to_dict() == {"depth": 3, "selected": [[0, 0], [1, 1], [2, 2], [2, 3]]}
    f = StepFunction(2, [0.0, 0.25, 1.5, 3.0])
    assert StepFunction.from_dict(f.to_dict()) == f


def test_step_function_validation_and_averages():
    with pytest.raises(DomainError):
        StepFunction(2, [1.0, -1.0, 0.0, 0.0])
    with pytest.raises(DomainError):
        StepFunction(2, [1.0, 2.0])
    f = StepFunction(2, [0.0, 2.0, 4.0, 6.0])
    assert f.mean == 3.0
    assert f.average(NodeId.from_path("-")) == 1.0
    assert f.average(NodeId.from_path("++")) == 6.0
    assert StepFunction.indicator(2, NodeId.from_path("+"), 2.0).mean == 1.0


def test_enumeration_counts_and_pruning():
    assert len(enumerate_carleson_sequences(1)) == 2
    assert len(enumerate_carleson_sequences(2)) == 8
    assert len(enumerate_carleson_sequences(2, mass_budget=1.0)) == 5
    maximal = enumerate_carleson_sequences(2, maximal_only=True)
    assert maximal == [CarlesonSequence.from_selected(2, nodes("", "-", "+"))]
    for seq in enumerate_carleson_sequences(3):
        assert is_two_carleson(seq)


def test_enumeration_depth_limit():
    with pytest.raises(ResourceError):
        enumerate_carleson_sequences(5)


@settings(max_examples=50, deadline=None)
@given(seed=seeds, depth=depths)
def test_mass_recursion_holds_at_every_node(seed, depth):
    seq = random_carleson_sequence(depth, np.random.default_rng(seed))
    for d in range(depth):
        for k in range(1 << d):
            node = NodeId(d, k)
            left, right = node.children()
            expected = seq.is_selected(node) + (carleson_mass(seq, left) + carleson_mass(seq, right)) / 2
            assert carleson_mass(seq, node) == expected


@settings(max_examples=50, deadline=None)
@given(seed=seeds, depth=depths)
def test_counting_function_mean_is_root_mass(seed, depth):
    seq = random_carleson_sequence(depth, np.random.default_rng(seed))
    assert counting_function(seq).mean == carleson_mass(seq, NodeId.root())


@settings(max_examples=50, deadline=None)
@given(seed=seeds, depth=depths)
def test_generations_partition_the_selection(seed, depth):
    seq = random_carleson_sequence(depth, np.random.default_rng(seed), density=0.7)
    generations = sparse_generations(seq)
    flat = [node for generation in generations for node in generation]
    assert sorted(flat) == sorted(seq.selected())
    for generation in generations:
        for i, a in enumerate(generation):
            for b in generation[i + 1:]:
                assert not a.contains(b) and not b.contains(a)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, depth=depths, pick=st.integers(min_value=0))
def test_clearing_a_bit_keeps_the_condition(seed, depth, pick):
    seq = random_carleson_sequence(depth, np.random.default_rng(seed), density=0.8)
    selected = seq.selected()
    if selected:
        cleared = seq.with_bit(selected[pick % len(selected)], 0)
        assert is_two_carleson(cleared)
