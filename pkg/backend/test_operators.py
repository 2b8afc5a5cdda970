import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from closed_form import power_mean_constant, weak_norm_constant
from conftest import nodes
from dyadic import CarlesonSequence, StepFunction, random_carleson_sequence
from errors import DomainError
from operators import (
    OperatorOutput,
    apply_maximal,
    apply_power_mean,
    apply_sparse_power,
    level_set_fraction,
    power_mean_quotient,
    weak_quotient,
)

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)
exponents = st.floats(min_value=0.05, max_value=20.0)


def _random_pair(seed: int, depth: int = 5):
    rng = np.random.default_rng(seed)
    seq = random_carleson_sequence(depth, rng, density=0.6)
    values = rng.exponential(size=1 << depth) * (rng.random(1 << depth) < 0.6)
    values[0] += 1e-3
    return seq, StepFunction(depth, values)


@pytest.mark.parametrize("r", [0.3, 1.0, 4.0])
def test_single_root_gives_the_power_of_the_constant(r):
    out = apply_sparse_power(CarlesonSequence.from_selected(1, nodes("")), StepFunction.constant(1, 0.7), r)
    assert out.power == r
    assert out.leaf_values == pytest.approx([0.7 ** r] * 2, rel=1e-15)
    assert out.root() == pytest.approx([0.7, 0.7], rel=1e-14)


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0, 7.0])
def test_root_and_both_halves_at_omega_zero_reach_one(r):
    seq = CarlesonSequence.from_selected(2, nodes("", "-", "+"))
    out = apply_sparse_power(seq, StepFunction.constant(2, 2.0 ** (-1.0 / r)), r)
    assert out.leaf_values == pytest.approx(np.ones(4), abs=1e-14)


def test_first_vertex_configuration_at_r_one(f1_sequence):
    f = StepFunction.indicator(3, nodes("+")[0], 0.4)
    out = apply_sparse_power(f1_sequence, f, 1.0)
    assert out.leaf_values[:4] == pytest.approx([0.2] * 4, abs=1e-15)
    assert out.leaf_values[4:] == pytest.approx([1.0] * 4, abs=1e-15)


def test_power_mean_examples(f1_sequence):
    f = StepFunction(3, [0.0, 1.0, 0.5, 2.0, 3.0, 0.0, 1.0, 4.0])
    assert np.array_equal(apply_power_mean(f1_sequence, f, 1.0).leaf_values,
                          apply_sparse_power(f1_sequence, f, 1.0).leaf_values)
    half = StepFunction.indicator(1, nodes("+")[0], 1.0)
    out = apply_power_mean(CarlesonSequence.from_selected(1, nodes("")), half, 2.0)
    assert out.leaf_values == pytest.approx([0.5 ** 0.5] * 2, rel=1e-15)


def test_maximal_examples():
    f = StepFunction.indicator(2, nodes("+")[0], 1.0)
    assert np.array_equal(apply_maximal(CarlesonSequence.empty(2), f).leaf_values, np.zeros(4))
    out = apply_maximal(CarlesonSequence.from_selected(2, nodes("", "+")), f)
    assert np.array_equal(out.leaf_values, [0.5, 0.5, 1.0, 1.0])


def test_level_set_fraction_is_closed():
    g = OperatorOutput(3, [0.2] * 4 + [1.0] * 4)
    assert level_set_fraction(OperatorOutput(2, np.ones(4)), 1.0) == 1.0
    assert level_set_fraction(g, 1.0) == 0.5
    assert level_set_fraction(g, 0.1) == 1.0


def test_domain_errors(f1_sequence):
    with pytest.raises(DomainError):
        apply_sparse_power(f1_sequence, StepFunction.constant(2, 1.0), 1.0)
    with pytest.raises(DomainError):
        apply_sparse_power(f1_sequence, StepFunction.constant(3, 1.0), 0.0)
    with pytest.raises(DomainError):
        apply_power_mean(f1_sequence, StepFunction.constant(3, 1.0), 0.5)
    with pytest.raises(DomainError):
        weak_quotient(f1_sequence, StepFunction.constant(3, 0.0), 1.0, 1.0)
    with pytest.raises(DomainError):
        power_mean_quotient(f1_sequence, StepFunction.constant(3, 1.0), 2.0, -1.0)


def test_operator_output_round_trip():
    out = OperatorOutput(2, [0.0, 1.0, 4.0, 9.0], power=2.0)
    assert out.to_dict() == {"depth": 2, "values": [0.0, 1.0, 4.0, 9.0], "power": 2.0}
    again = OperatorOutput.from_dict(out.to_dict())
    assert np.array_equal(again.root(), [0.0, 1.0, 2.0, 3.0])


@settings(max_examples=40, deadline=None)
@given(seed=seeds, r=exponents)
def test_maximal_is_below_every_sparse_root(seed, r):
    seq, f = _random_pair(seed)
    maximal = apply_maximal(seq, f).leaf_values
    assert (maximal <= apply_sparse_power(seq, f, r).root() * (1 + 1e-12) + 1e-300).all()


@settings(max_examples=40, deadline=None)
@given(seed=seeds, p=st.floats(min_value=1.0, max_value=8.0))
def test_power_mean_reduces_to_sparse_power_of_f_to_the_p(seed, p):
    seq, f = _random_pair(seed)
    expected = apply_sparse_power(seq, f.power(p), 1.0 / p).leaf_values
    assert apply_power_mean(seq, f, p).leaf_values == pytest.approx(expected, rel=1e-10, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, r=st.floats(min_value=0.2, max_value=10.0), lam=st.floats(min_value=0.01, max_value=10.0))
def test_weak_quotient_stays_below_the_sharp_constant(seed, r, lam):
    seq, f = _random_pair(seed)
    assert weak_quotient(seq, f, r, lam) <= weak_norm_constant(r) + 1e-9


@settings(max_examples=40, deadline=None)
@given(seed=seeds, p=st.floats(min_value=1.0, max_value=6.0), lam=st.floats(min_value=0.01, max_value=10.0))
def test_power_mean_quotient_stays_below_its_constant(seed, p, lam):
    seq, f = _random_pair(seed)
    assert power_mean_quotient(seq, f, p, lam) <= power_mean_constant(p) + 1e-9


@pytest.mark.parametrize("r", [0.25, 1.0, 3.0])
def test_disjoint_selection_gives_the_same_root_for_every_r(r):
    seq = CarlesonSequence.from_selected(3, nodes("-", "+-", "++"))
    f = StepFunction(3, [1.0, 2.0, 0.0, 5.0, 3.0, 3.0, 8.0, 0.0])
    expected = apply_maximal(seq, f).leaf_values
    assert apply_sparse_power(seq, f, r).root() == pytest.approx(expected, rel=1e-13)


def _outputs(seq, f, r, p):
    return [apply_sparse_power(seq, f, r).leaf_values,
            apply_power_mean(seq, f, p).leaf_values,
            apply_maximal(seq, f).leaf_values]


@settings(max_examples=40, deadline=None)
@given(seed=seeds, r=exponents, p=st.floats(min_value=1.0, max_value=6.0),
       leaf=st.integers(min_value=0, max_value=31), bump=st.floats(min_value=1e-3, max_value=10.0))
def test_raising_a_leaf_never_lowers_an_output(seed, r, p, leaf, bump):
    seq, f = _random_pair(seed)
    values = f.leaf_values.copy()
    values[leaf] += bump
    raised = StepFunction(f.tree_depth, values)
    for before, after in zip(_outputs(seq, f, r, p), _outputs(seq, raised, r, p)):
        assert (after >= before * (1 - 1e-12)).all()


@settings(max_examples=40, deadline=None)
@given(seed=seeds, r=exponents, p=st.floats(min_value=1.0, max_value=6.0))
def test_outputs_vanish_outside_the_selected_nodes(seed, r, p):
    seq, f = _random_pair(seed)
    covered = np.zeros(1 << seq.tree_depth, dtype=bool)
    for node in seq.selected():
        start, stop = node.leaf_range(seq.tree_depth)
        covered[start:stop] = True
    for out in _outputs(seq, f, r, p):
        assert (out[~covered] == 0).all()


def test_quotients_with_an_empty_level_set_are_zero():
    root = CarlesonSequence.from_selected(1, nodes(""))
    one = StepFunction.constant(1, 1.0)
    assert weak_quotient(root, one, 0.001, 10.0) == 0.0
    assert power_mean_quotient(root, one, 2.0, 1e300) == 0.0


def test_weak_quotient_for_tiny_r_stays_finite():
    root = CarlesonSequence.from_selected(1, nodes(""))
    assert weak_quotient(root, StepFunction.constant(1, 1.0), 0.001, 0.5) == pytest.approx(0.5 ** 1000, rel=1e-9)
