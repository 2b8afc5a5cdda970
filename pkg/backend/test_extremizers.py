import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from closed_form import bellman_M, omega_seq
from errors import DomainError, ResourceError
from extremizers import (
    LEVEL_SLACK,
    build_maximal_extremizer,
    build_vertex_extremizer,
    enumerate_lower_bound,
    replay_maximal_extremizer,
    replay_vertex_extremizer,
    run_enumeration,
)


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("n", [0, 1, 2, 3, 4, 5, 6])
def test_vertex_extremizer_is_exact(r, n):
    report = replay_vertex_extremizer(r, n)
    assert report.exact
    assert report.fraction == 2.0 ** -n
    assert report.mean == pytest.approx(float(omega_seq(r, n)), rel=1e-12)
    assert report.root_mass == 2.0
    assert report.is_two_carleson
    assert report.depth == n + 2


def test_vertex_quotient_at_r_one():
    report = replay_vertex_extremizer(1.0, 2)
    assert report.weak_quotient == pytest.approx(2.75, rel=1e-12)
    assert report.target_quotient == pytest.approx(2.75, abs=1e-12)


def test_vertex_extremizer_selection():
    seq, f = build_vertex_extremizer(1.0, 1)
    assert seq.to_dict() == {"depth": 3, "selected": [[0, 0], [1, 1], [2, 2], [2, 3]]}
    assert f.mean == pytest.approx(0.2, rel=1e-12)
    with pytest.raises(DomainError):
        build_vertex_extremizer(1.0, -1)


def test_maximal_extremizer_reaches_its_level_set():
    report = replay_maximal_extremizer(0.3, 1.0, 5)
    assert report.exact and report.fraction == 0.25
    assert report.mean == pytest.approx(0.3, abs=1e-15)
    assert report.root_mass == 0.25
    assert report.is_two_carleson


def test_maximal_extremizer_with_full_selection():
    seq, f = build_maximal_extremizer(1.5, 2.0, 3)
    assert len(seq.selected()) == 4
    assert np.array_equal(f.leaf_values, np.full(8, 1.5))
    assert replay_maximal_extremizer(1.5, 2.0, 3).fraction == 1.0


def test_maximal_extremizer_rejects_bad_points():
    with pytest.raises(DomainError):
        build_maximal_extremizer(0.5, 2.5, 4)
    with pytest.raises(DomainError):
        build_maximal_extremizer(0.5, 1.0, 0)


def test_enumeration_reaches_one_at_the_first_vertex():
    assert enumerate_lower_bound(1.0, 2, 0.5, 2.0) == 1.0


def test_enumeration_finds_the_next_vertex():
    assert enumerate_lower_bound(1.0, 3, float(omega_seq(1.0, 1)), 2.0) == 0.5


@pytest.mark.parametrize("point", [(0.2, 1.0), (0.3, 2.0), (0.8, 0.5), (0.05, 1.5)])
def test_enumeration_is_sound(point):
    omega, A = point
    report = run_enumeration(1.0, 2, omega, A)
    assert report.sound
    assert report.lower_bound <= bellman_M(1.0, omega, A) + 1e-9
    assert report.sequences > 0


def test_enumeration_reports_the_level_it_counts_at():
    report = run_enumeration(1.0, 2, 0.3, 2.0)
    assert report.level == 1.0 - LEVEL_SLACK
    assert report.M_relaxed >= report.M
    assert report.M_relaxed == pytest.approx(bellman_M(1.0, 0.3 / (1.0 - LEVEL_SLACK), 2.0), abs=1e-12)


@pytest.mark.parametrize("prune", [True, False])
@pytest.mark.parametrize("r", [0.7, 1.0])
def test_enumeration_is_monotone_in_the_budget(prune, r):
    bounds = [enumerate_lower_bound(r, 3, 0.3, A, prune=prune) for A in (0.0, 0.5, 1.0, 1.25, 1.5, 2.0)]
    assert bounds == sorted(bounds)


def test_enumeration_is_monotone_in_omega():
    omegas = [0.1, 0.2, 0.3, 0.35, 0.4, 0.45, 0.5, 0.6, 0.9]
    bounds = [enumerate_lower_bound(1.0, 2, omega, 2.0) for omega in omegas]
    assert bounds == [0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 1.0, 1.0, 1.0]


@settings(max_examples=30, deadline=None)
@given(w1=st.floats(min_value=0.0, max_value=1.2), w2=st.floats(min_value=0.0, max_value=1.2),
       a=st.floats(min_value=0.0, max_value=2.0))
def test_enumeration_is_monotone_in_omega_at_depth_three(w1, w2, a):
    lo, hi = min(w1, w2), max(w1, w2)
    assert enumerate_lower_bound(1.0, 3, lo, a) <= enumerate_lower_bound(1.0, 3, hi, a)


@pytest.mark.parametrize("depth, omega, A", [
    (2, float(omega_seq(1.0, 0)), 2.0),
    (3, float(omega_seq(1.0, 0)), 2.0),
    (3, float(omega_seq(1.0, 1)), 2.0),
    (2, 1.0, 1.0),
    (3, 1.0, 1.0),
])
def test_enumeration_closes_the_gap_at_vertices_and_the_unit_point(depth, omega, A):
    report = run_enumeration(1.0, depth, omega, A)
    assert report.gap == pytest.approx(0.0, abs=1e-9)
    assert report.sound


def test_enumeration_does_not_depend_on_thread_count():
    one = enumerate_lower_bound(0.8, 2, 0.35, 1.5, threads=1)
    many = enumerate_lower_bound(0.8, 2, 0.35, 1.5, threads=3)
    assert one == many


def test_enumeration_edge_cases():
    assert enumerate_lower_bound(1.0, 2, 0.0, 2.0) == 0.0
    with pytest.raises(DomainError):
        enumerate_lower_bound(1.0, 2, 0.3, 2.5)
    with pytest.raises(DomainError):
        enumerate_lower_bound(1.0, 2, -0.1, 1.0)
    with pytest.raises(ResourceError):
        enumerate_lower_bound(1.0, 5, 0.3, 1.0)


@pytest.mark.slow
def test_enumeration_acceptance_grid():
    rng = np.random.default_rng(11)
    for omega, A in zip(rng.uniform(0.0, 1.5, 50), rng.uniform(0.0, 2.0, 50)):
        assert run_enumeration(1.0, 3, float(omega), float(A)).sound
