"""
Finite-depth value iteration on an (omega, A) grid.

W_k(omega, A) is a lower bound for the best level-set fraction at level 1
reachable with trees of depth k, mean omega and Carleson mass at most A.
One iteration lets the root either stay unselected (gamma = 0) or be selected
(gamma = 1, needs A >= 1), rescales the residual level back to 1 through
s = (1 - gamma omega^r)^{1/r}, and splits mean and mass between the two
halves. Off-grid omega is linearly interpolated and clamped at omega_max.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from api_models import CheckpointGap, DPCompareReport, GridSpec
from closed_form import bellman_M, check_r, omega_seq
from errors import DomainError
from logger import logger
from serialization import csv_text

filename = os.path.basename(__file__)

REFERENCE_SNAP_N = 6
REFERENCE_DEPTH = 12
REFERENCE_STRIDE = 4
# Nodes this close to a snap point are replaced by it; a neighbour one ulp away
# would otherwise interpolate the vertex chain onto the wrong side.
SNAP_MERGE_TOL = 1e-6


def resolve_threads(threads: int) -> int:
    return threads if threads and threads > 0 else (os.cpu_count() or 1)


def _snap_points(r: float, n_snap: int) -> np.ndarray:
    omegas = np.asarray(omega_seq(r, np.arange(n_snap + 1)))
    return np.unique(np.concatenate([omegas, omegas / 2.0, [1.0]]))


def _merge_snaps(nodes: np.ndarray, snaps: np.ndarray, omega_max: float) -> np.ndarray:
    """Sorted union of nodes and snaps with every node near a snap dropped, endpoints kept."""
    nodes = np.asarray(nodes, dtype=float)
    near = np.isclose(nodes[:, None], snaps[None, :], rtol=0, atol=SNAP_MERGE_TOL).any(axis=1)
    near &= (nodes != 0.0) & (nodes != omega_max)
    return np.unique(np.concatenate([nodes[~near], snaps]))


def reference_grid(r: float) -> GridSpec:
    """
    About 401 omega nodes on [0, 2] (linear and geometric halves, omega_n and
    omega_n / 2 for n <= 6 snapped in), 101 uniform A nodes, depth 12, stride 4.
    """
    r = check_r(r)
    snaps = _snap_points(r, REFERENCE_SNAP_N)
    omegas = _merge_snaps(np.concatenate([
        np.linspace(0.0, 2.0, 201),
        np.geomspace(1e-4, 2.0, 200),
        [0.0, 2.0],
    ]), snaps, 2.0)
    return GridSpec(
        omega_max=2.0,
        omega_points=omegas.tolist(),
        a_points=np.linspace(0.0, 2.0, 101).tolist(),
        depth=REFERENCE_DEPTH,
        split_stride=REFERENCE_STRIDE,
        snap_points=snaps.tolist(),
    )


def small_grid(r: float, depth: int = 6) -> GridSpec:
    """Coarse grid for quick runs and tests."""
    r = check_r(r)
    snaps = _snap_points(r, 3)
    omegas = _merge_snaps(np.linspace(0.0, 2.0, 41), snaps, 2.0)
    return GridSpec(
        omega_max=2.0,
        omega_points=omegas.tolist(),
        a_points=np.linspace(0.0, 2.0, 21).tolist(),
        depth=depth,
        split_stride=2,
        snap_points=snaps.tolist(),
    )


def validate_grid(grid: GridSpec) -> Tuple[np.ndarray, np.ndarray, int]:
    """Grid arrays plus the index of A = 1; DomainError on any malformed grid."""
    w = np.asarray(grid.omega_points, dtype=float)
    a = np.asarray(grid.a_points, dtype=float)
    if w.size < 2 or not np.isfinite(w).all() or not (np.diff(w) > 0).all():
        raise DomainError("omega_points must be finite and strictly increasing")
    if w[0] != 0.0 or not np.isclose(w[-1], grid.omega_max, rtol=0, atol=1e-12):
        raise DomainError("omega_points must start at 0 and end at omega_max")
    if a.size < 3 or a[0] != 0.0 or not np.isclose(a[-1], 2.0, rtol=0, atol=1e-12):
        raise DomainError("a_points must run from 0 to 2")
    step = a[1] - a[0]
    if not np.allclose(np.diff(a), step, rtol=1e-9, atol=1e-12):
        raise DomainError("a_points must be uniformly spaced")
    one_index = int(round(1.0 / step))
    if one_index >= a.size or not np.isclose(a[one_index], 1.0, rtol=0, atol=1e-9):
        raise DomainError("a_points must contain A = 1")
    for snap in grid.snap_points:
        if not np.isclose(w, snap, rtol=0, atol=1e-12).any():
            raise DomainError(f"Snap point {snap} missing from omega_points")
    return w, a, one_index


def _split_candidates(w: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Indices of the omega values tried for the smaller half: every stride-th node, snaps, ends."""
    keep = set(range(0, w.size, grid.split_stride))
    keep.update({0, w.size - 1})
    for snap in grid.snap_points:
        keep.add(int(np.argmin(np.abs(w - snap))))
    return np.array(sorted(keep))


def _mass_splits(total: int, n_a: int, stride: int, one_index: int) -> List[int]:
    """First-child A indices i1 with i1 + i2 = total, both on the grid."""
    lo, hi = max(0, total - (n_a - 1)), min(total, n_a - 1)
    if lo > hi:
        return []
    chosen = set(range(lo, hi + 1, stride))
    chosen.update({lo, hi, total // 2, (total + 1) // 2, one_index})
    return sorted(i for i in chosen if lo <= i <= hi)


@dataclass
class ValueTable:
    """W_0..W_depth on the grid, rows omega, columns A."""
    grid: GridSpec
    r: float
    values: List[np.ndarray] = field(repr=False)
    max_changes: List[float] = field(default_factory=list)

    @property
    def omega(self) -> np.ndarray:
        return np.asarray(self.grid.omega_points, dtype=float)

    @property
    def a(self) -> np.ndarray:
        return np.asarray(self.grid.a_points, dtype=float)

    @property
    def depth(self) -> int:
        return len(self.values) - 1

    def a_index(self, A: float) -> int:
        if not 0.0 <= A <= 2.0:
            raise DomainError(f"A must lie in [0, 2], got {A}")
        return int(np.argmin(np.abs(self.a - A)))

    def lookup(self, omega: float, A: float, k: Optional[int] = None) -> float:
        """W_k at (omega, A): A snapped to the nearest grid column, omega interpolated."""
        k = self.depth if k is None else k
        if not 0 <= k <= self.depth:
            raise DomainError(f"Iteration {k} outside [0, {self.depth}]")
        return float(np.interp(omega, self.omega, self.values[k][:, self.a_index(A)]))

    def to_csv(self, k: Optional[int] = None) -> str:
        """Rows omega,A,W_k,M,gap in omega-major order."""
        k = self.depth if k is None else k
        w, a = np.meshgrid(self.omega, self.a, indexing="ij")
        m = np.asarray(bellman_M(self.r, w, a))
        table = self.values[k]
        rows = ((float(w[i, j]), float(a[i, j]), float(table[i, j]), float(m[i, j]), float(m[i, j] - table[i, j]))
                for i in range(w.shape[0]) for j in range(w.shape[1]))
        return csv_text(["omega", "A", "W_k", "M", "gap"], rows)


class _RecursionStep:
    """One application of the recursion to a fixed table W_k."""

    def __init__(self, r: float, w: np.ndarray, a: np.ndarray, one_index: int, grid: GridSpec):
        self.w = w
        self.n_a = a.size
        self.one_index = one_index
        self.stride = grid.split_stride
        first = np.tile(w[_split_candidates(w, grid)], (w.size, 1))
        second = 2.0 * w[:, None] - first
        self.valid = first <= w[:, None]
        self.reached = {0: np.zeros(w.size, dtype=bool), 1: w ** r >= 1.0}
        self.scaled = {}
        for gamma in (0, 1):
            with np.errstate(invalid="ignore"):
                s = np.where(self.reached[gamma], 1.0, (1.0 - gamma * w ** r) ** (1.0 / r))
            self.scaled[gamma] = (first / s[:, None], second / s[:, None])

    def interpolate(self, previous: np.ndarray, executor: ThreadPoolExecutor):
        """W_k at the rescaled halves, per gamma, half and A column: arrays (n_a, n_omega, n_split)."""
        tables = {}
        for gamma, (x1, x2) in self.scaled.items():
            tables[gamma] = tuple(
                np.stack(list(executor.map(lambda i, x=x: np.interp(x, self.w, previous[:, i]), range(self.n_a))))
                for x in (x1, x2)
            )
        return tables

    def column(self, tables, j: int) -> np.ndarray:
        best = np.zeros(self.w.size)
        for gamma in (0, 1):
            if gamma == 1 and j < self.one_index:
                continue
            total = 2 * (j - gamma * self.one_index)
            first, second = tables[gamma]
            value = np.zeros(self.w.size)
            for i1 in _mass_splits(total, self.n_a, self.stride, self.one_index):
                pair = (first[i1] + second[total - i1]) / 2.0
                value = np.maximum(value, np.where(self.valid, pair, 0.0).max(axis=1))
            best = np.maximum(best, np.where(self.reached[gamma], 1.0, value))
        return best


def dp_value_iteration(r: float, grid: GridSpec, threads: int = 0) -> ValueTable:
    """
    W_0 = 0 and W_{k+1} = max(W_k, T W_k), made monotone in omega and in A.

    Columns of one iteration are computed in parallel from W_k only; the
    result does not depend on the thread count.
    """
    r = check_r(r)
    w, a, one_index = validate_grid(grid)
    step = _RecursionStep(r, w, a, one_index, grid)
    workers = resolve_threads(threads)
    logger.info(f"[{filename}] Value iteration r={r}: grid {w.size}x{a.size}, depth {grid.depth}, "
                f"stride {grid.split_stride}, {workers} threads")

    values = [np.zeros((w.size, a.size))]
    changes: List[float] = []
    with ThreadPoolExecutor(max_workers=workers) as executor:
        for k in range(grid.depth):
            previous = values[-1]
            tables = step.interpolate(previous, executor)
            columns = list(executor.map(lambda j: step.column(tables, j), range(a.size)))
            updated = np.maximum(previous, np.stack(columns, axis=1))
            updated = np.maximum.accumulate(updated, axis=0)
            updated = np.maximum.accumulate(updated, axis=1)
            changes.append(float(np.max(updated - previous)))
            values.append(updated)
            logger.info(f"[{filename}] Iteration {k + 1}/{grid.depth}: max change {changes[-1]:.3e}")
    return ValueTable(grid=grid, r=r, values=values, max_changes=changes)


def default_checkpoints(r: float, n_max: int = 3) -> List[Tuple[float, float]]:
    """(omega_n, 2) for n <= n_max, (1, 1) and (0.3, 0.2)."""
    points = [(float(omega_seq(r, n)), 2.0) for n in range(n_max + 1)]
    return points + [(1.0, 1.0), (0.3, 0.2)]


def dp_compare(table: ValueTable, r: float, checkpoints: Sequence[Tuple[float, float]],
               interp_tol: float = 0.01, gap_tol: float = 0.02) -> DPCompareReport:
    """
    Soundness W_depth <= M + interp_tol over the whole grid and M - W_depth <= gap_tol
    at each checkpoint (A snapped to the grid, omega interpolated).
    """
    r = check_r(r)
    w, a = np.meshgrid(table.omega, table.a, indexing="ij")
    final = table.values[-1]
    max_excess = float(np.max(final - np.asarray(bellman_M(r, w, a))))
    monotone = all(bool((later >= earlier).all()) for earlier, later in zip(table.values, table.values[1:]))

    gaps = []
    for omega, A in checkpoints:
        snapped_a = float(table.a[table.a_index(A)])
        lower = table.lookup(omega, snapped_a)
        target = float(bellman_M(r, omega, snapped_a))
        gaps.append(CheckpointGap(omega=omega, A=snapped_a, W=lower, M=target, gap=target - lower,
                                  passed=target - lower <= gap_tol))
    sound = max_excess <= interp_tol
    passed = sound and monotone and all(gap.passed for gap in gaps)
    logger.info(f"[{filename}] DP compare r={r}: max excess {max_excess:.3e}, "
                f"max gap {max((g.gap for g in gaps), default=0.0):.3e}, {'pass' if passed else 'FAIL'}")
    return DPCompareReport(
        r=r,
        depth=table.depth,
        grid_shape=[int(final.shape[0]), int(final.shape[1])],
        monotone_in_k=monotone,
        max_excess=max_excess,
        interp_tol=interp_tol,
        gap_tol=gap_tol,
        sound=sound,
        checkpoints=gaps,
        passed=passed,
    )
