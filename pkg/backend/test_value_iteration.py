import numpy as np
import pytest

from api_models import GridSpec
from closed_form import bellman_M, omega_seq
from errors import DomainError
from value_iteration import (
    default_checkpoints,
    dp_compare,
    dp_value_iteration,
    reference_grid,
    small_grid,
    validate_grid,
)


@pytest.fixture(scope="module")
def table_r1():
    return dp_value_iteration(1.0, small_grid(1.0, depth=6), threads=2)


def test_reference_grid_shape():
    grid = reference_grid(1.0)
    w, a, one_index = validate_grid(grid)
    assert a.size == 101 and a[one_index] == pytest.approx(1.0)
    assert 400 <= w.size <= 420
    assert grid.depth == 12 and grid.split_stride == 4
    for n in range(7):
        assert np.isclose(w, omega_seq(1.0, n), rtol=0, atol=1e-12).any()


def test_invalid_grids_are_rejected():
    good = small_grid(1.0)
    with pytest.raises(DomainError):
        validate_grid(GridSpec.model_validate({**good.model_dump(), "a_points": np.linspace(0, 2, 4).tolist()}))
    with pytest.raises(DomainError):
        validate_grid(GridSpec.model_validate({**good.model_dump(), "omega_points": [0.0, 1.0, 0.5, 2.0]}))
    with pytest.raises(DomainError):
        validate_grid(GridSpec.model_validate({**good.model_dump(), "snap_points": [0.123456]}))


def test_first_iteration_only_reaches_the_selected_root(table_r1):
    w, a = np.meshgrid(table_r1.omega, table_r1.a, indexing="ij")
    expected = ((w >= 1.0) & (a >= 1.0)).astype(float)
    assert np.array_equal(table_r1.values[1], expected)


def test_values_grow_with_k_and_stay_below_M(table_r1):
    for earlier, later in zip(table_r1.values, table_r1.values[1:]):
        assert (later >= earlier).all()
    w, a = np.meshgrid(table_r1.omega, table_r1.a, indexing="ij")
    assert (table_r1.values[-1] <= np.asarray(bellman_M(1.0, w, a)) + 1e-9).all()
    assert len(table_r1.max_changes) == 6


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_vertex_values_are_reached(table_r1, n):
    assert table_r1.lookup(omega_seq(1.0, n), 2.0) == pytest.approx(2.0 ** -n, abs=1e-9)


def test_unit_point_is_reached(table_r1):
    assert table_r1.lookup(1.0, 1.0) == 1.0
    assert table_r1.lookup(1.0, 1.0, k=0) == 0.0


def test_lookup_validation(table_r1):
    with pytest.raises(DomainError):
        table_r1.lookup(0.5, 2.5)
    with pytest.raises(DomainError):
        table_r1.lookup(0.5, 1.0, k=7)


def test_compare_report(table_r1):
    checkpoints = [(float(omega_seq(1.0, n)), 2.0) for n in range(4)] + [(1.0, 1.0)]
    report = dp_compare(table_r1, 1.0, checkpoints, interp_tol=0.01, gap_tol=1e-6)
    assert report.passed and report.sound and report.monotone_in_k
    assert report.grid_shape == [table_r1.omega.size, table_r1.a.size]
    assert [gap.passed for gap in report.checkpoints] == [True] * 5


def test_csv_export(table_r1):
    lines = table_r1.to_csv().splitlines()
    assert lines[0] == "omega,A,W_k,M,gap"
    assert len(lines) == 1 + table_r1.omega.size * table_r1.a.size


@pytest.mark.parametrize("r", [0.5, 2.0])
def test_other_exponents_stay_sound(r):
    table = dp_value_iteration(r, small_grid(r, depth=4), threads=1)
    w, a = np.meshgrid(table.omega, table.a, indexing="ij")
    assert (table.values[-1] <= np.asarray(bellman_M(r, w, a)) + 0.01).all()
    assert table.lookup(omega_seq(r, 0), 2.0) == pytest.approx(1.0, abs=1e-6)


def test_result_does_not_depend_on_thread_count():
    grid = small_grid(0.8, depth=3)
    one = dp_value_iteration(0.8, grid, threads=1)
    many = dp_value_iteration(0.8, grid, threads=4)
    for a, b in zip(one.values, many.values):
        assert np.array_equal(a, b)


def test_default_checkpoints():
    points = default_checkpoints(1.0)
    assert points[0] == pytest.approx((0.5, 2.0), abs=1e-15)
    assert points[-2:] == [(1.0, 1.0), (0.3, 0.2)]


@pytest.mark.slow
def test_reference_run_matches_the_closed_form():
    table = dp_value_iteration(1.0, reference_grid(1.0))
    report = dp_compare(table, 1.0, default_checkpoints(1.0))
    assert report.passed, report


def test_every_iterate_is_monotone_in_omega_and_A(table_r1):
    for values in table_r1.values:
        assert (np.diff(values, axis=0) >= 0).all()
        assert (np.diff(values, axis=1) >= 0).all()


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_grids_keep_snaps_exact_and_no_node_next_to_one(r):
    for grid in (small_grid(r), reference_grid(r)):
        w = np.asarray(grid.omega_points)
        assert np.diff(w).min() > 1e-6
        for snap in grid.snap_points:
            assert snap in w
