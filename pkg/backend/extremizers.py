"""
Explicit extremal configurations and the exhaustive small-depth search.

The vertex extremizer attains M_r(omega_n, 2) = 2^{-n} exactly; the maximal
extremizer approaches min(1, A, omega) for the adapted maximal operator; the
enumeration oracle gives lower bounds for M_r by optimizing f over every
admissible selection of a shallow tree.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Tuple

import numpy as np

from api_models import EnumerationReport, ExtremizerReport
from closed_form import bellman_M, check_r, norm_ratio, omega_seq
from dyadic import (
    CARLESON_CONSTANT,
    CarlesonSequence,
    NodeId,
    StepFunction,
    carleson_mass,
    enumerate_carleson_sequences,
    is_two_carleson,
)
from errors import DomainError
from logger import logger
from operators import apply_maximal, apply_sparse_power, level_set_fraction, weak_quotient
from value_iteration import resolve_threads

filename = os.path.basename(__file__)

# The search compares against 1 - LEVEL_SLACK so that sums like 0.2 + 0.4 + 0.4
# landing one ulp below 1 still count.
LEVEL_SLACK = 1e-12
MAX_NUDGES = 64
MOVE_FRACTIONS = (0.25, 0.5, 1.0)


def build_vertex_extremizer(r: float, n: int) -> Tuple[CarlesonSequence, StepFunction]:
    """
    alpha_n = {I, I_+, ..., I_{+^n}} plus both children of I_{+^n} on a tree of
    depth n + 2, and f = 2^n omega_n(r) on I_{+^n}, 0 elsewhere.

    The height is raised by ulps until the replayed fraction at level 1 is
    exactly 2^{-n}, which absorbs rounding in the telescoping sum.
    """
    r = check_r(r)
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    depth = n + 2
    top = "+" * n
    nodes = [NodeId.from_path("+" * k) for k in range(n + 1)]
    nodes += [NodeId.from_path(top + "-"), NodeId.from_path(top + "+")]
    seq = CarlesonSequence.from_selected(depth, nodes)

    height = 2.0 ** n * float(omega_seq(r, n))
    target = 2.0 ** -n
    for _ in range(MAX_NUDGES):
        f = StepFunction.indicator(depth, NodeId.from_path(top), height)
        if level_set_fraction(apply_sparse_power(seq, f, r), 1.0) >= target:
            break
        height = float(np.nextafter(height, np.inf))
    else:
        raise DomainError(f"Vertex extremizer r={r}, n={n} did not reach level 1")
    return seq, f


def replay_vertex_extremizer(r: float, n: int) -> ExtremizerReport:
    """
    Build the vertex extremizer and push it through the sparse operator.

    Args:
        r: Exponent of the operator
        n: Vertex index; the configuration lives on a tree of depth n + 2

    Returns:
        ExtremizerReport with the replayed level-set fraction against 2^{-n},
        the mean against omega_n(r) and the weak quotient against its target
    """
    r = check_r(r)
    seq, f = build_vertex_extremizer(r, n)
    fraction = level_set_fraction(apply_sparse_power(seq, f, r), 1.0)
    target = 2.0 ** -n
    report = ExtremizerReport(
        kind="vertex",
        r=r,
        n=n,
        depth=seq.tree_depth,
        mean=f.mean,
        target_mean=float(omega_seq(r, n)),
        root_mass=carleson_mass(seq, NodeId.root()),
        is_two_carleson=is_two_carleson(seq),
        fraction=fraction,
        target_fraction=target,
        weak_quotient=weak_quotient(seq, f, r, 1.0),
        target_quotient=float(norm_ratio(r, n)),
        exact=fraction == target,
        sequence=seq.to_dict(),
        function=f.to_dict(),
    )
    logger.info(f"[{filename}] Vertex extremizer r={r}, n={n}: fraction {fraction}, "
                f"quotient {report.weak_quotient}")
    return report


def build_maximal_extremizer(omega: float, A: float, depth: int) -> Tuple[CarlesonSequence, StepFunction]:
    """
    Disjoint selection of the first m nodes at depth N - 1, total length
    a = floor(min(1, A, omega) 2^{N-1}) / 2^{N-1}; f = 1 there and
    (omega - a)/(1 - a) elsewhere, or f = omega everywhere when a = 1.
    """
    if not (np.isfinite(omega) and omega >= 0 and 0 <= A <= 2):
        raise DomainError(f"Need omega >= 0 and 0 <= A <= 2, got ({omega}, {A})")
    if depth < 1:
        raise DomainError(f"Tree depth must be >= 1, got {depth}")
    slots = 1 << (depth - 1)
    m = int(np.floor(min(1.0, A, omega) * slots))
    a = m / slots
    seq = CarlesonSequence.from_selected(depth, [NodeId(depth - 1, k) for k in range(m)])
    if m == slots:
        return seq, StepFunction.constant(depth, omega)
    values = np.full(1 << depth, (omega - a) / (1.0 - a))
    values[: 2 * m] = 1.0
    return seq, StepFunction(depth, values)


def replay_maximal_extremizer(omega: float, A: float, depth: int) -> ExtremizerReport:
    """Level-set fraction of the maximal extremizer at level 1 against the length of its selection."""
    seq, f = build_maximal_extremizer(omega, A, depth)
    fraction = level_set_fraction(apply_maximal(seq, f), 1.0)
    target = len(seq.selected()) / (1 << (depth - 1))
    return ExtremizerReport(
        kind="maximal",
        depth=depth,
        mean=f.mean,
        target_mean=omega,
        root_mass=carleson_mass(seq, NodeId.root()),
        is_two_carleson=is_two_carleson(seq),
        fraction=fraction,
        target_fraction=target,
        exact=fraction == target,
        sequence=seq.to_dict(),
        function=f.to_dict(),
    )


class _ShapeClimb:
    """Greedy mean-preserving mass transfers between leaves for one selection."""

    def __init__(self, seq: CarlesonSequence, r: float, iterations: int):
        self.r = r
        self.iterations = iterations
        depth = seq.tree_depth
        self.leaves = 1 << depth
        self.averaging, self.cover = _node_matrices(seq)
        self.tie_weight = 2.0 ** -(depth + 1)
        src, dst = np.nonzero(~np.eye(self.leaves, dtype=bool))
        self.src = np.repeat(src, len(MOVE_FRACTIONS))
        self.dst = np.repeat(dst, len(MOVE_FRACTIONS))
        self.fractions = np.tile(MOVE_FRACTIONS, src.size)
        self.columns = np.arange(self.src.size)

    def score(self, functions: np.ndarray) -> np.ndarray:
        """Fraction at level 1 - slack, ties broken by the mean of min(value, 1)."""
        values = self.cover @ (self.averaging @ functions) ** self.r
        fraction = np.mean(values >= 1.0 - LEVEL_SLACK, axis=0)
        return fraction + self.tie_weight * np.mean(np.minimum(values, 1.0), axis=0)

    def climb(self, f: np.ndarray) -> np.ndarray:
        current = float(self.score(f[:, None])[0])
        for _ in range(self.iterations):
            if current >= 1.0:
                break
            delta = self.fractions * f[self.src]
            candidates = np.repeat(f[:, None], self.src.size, axis=1)
            candidates[self.src, self.columns] -= delta
            candidates[self.dst, self.columns] += delta
            scores = self.score(candidates)
            best = int(np.argmax(scores))
            if scores[best] <= current:
                break
            f, current = candidates[:, best], float(scores[best])
        return f


def _node_matrices(seq: CarlesonSequence) -> Tuple[np.ndarray, np.ndarray]:
    """Averaging matrix (nodes x leaves) and selected-cover matrix (leaves x nodes), heap order."""
    averaging = _averaging_matrix(seq.tree_depth)
    cover = (averaging > 0).T * seq.bits[None, :]
    return averaging, cover.astype(float)


def _averaging_matrix(depth: int) -> np.ndarray:
    leaves = 1 << depth
    averaging = np.zeros(((1 << depth) - 1, leaves))
    for d in range(depth):
        for k in range(1 << d):
            start, stop = NodeId(d, k).leaf_range(depth)
            averaging[(1 << d) - 1 + k, start:stop] = 1.0 / (stop - start)
    return averaging


def _start_shapes(depth: int, restarts: int, rng: np.random.Generator) -> np.ndarray:
    """Mean-one columns: the constant, 2^d on each node of depth d, then Dirichlet draws."""
    leaves = 1 << depth
    shapes = [np.ones(leaves)]
    for d in range(depth + 1):
        for k in range(1 << d):
            start, stop = NodeId(d, k).leaf_range(depth)
            shape = np.zeros(leaves)
            shape[start:stop] = 2.0 ** d
            shapes.append(shape)
    shapes += [leaves * rng.dirichlet(np.ones(leaves)) for _ in range(restarts)]
    return np.stack(shapes, axis=1)


def _climb_means(r: float, depth: int) -> np.ndarray:
    means = np.unique(np.append(omega_seq(r, np.arange(depth)), 1.0))
    return means[means > 0]


@lru_cache(maxsize=16)
def _shape_pool(r: float, depth: int, restarts: int, iterations: int, seed: int, threads: int) -> np.ndarray:
    """
    Mean-one step functions tried on every selection, one column each.

    The start shapes plus the end points of greedy climbs from the constant and
    the random starts, run on every maximal selection of budget 2 at the means
    omega_n(r), n < depth, and 1. Nothing here depends on the queried omega or
    budget, which keeps the search monotone in both.
    """
    starts = _start_shapes(depth, restarts, np.random.default_rng([seed, depth]))
    climb_starts = np.concatenate([starts[:, :1], starts[:, starts.shape[1] - restarts:]], axis=1)
    means = _climb_means(r, depth)
    selections = enumerate_carleson_sequences(depth, CARLESON_CONSTANT, maximal_only=True)

    def climb_all(seq: CarlesonSequence) -> np.ndarray:
        climber = _ShapeClimb(seq, r, iterations)
        ends = [climber.climb(mean * shape) / mean for mean in means for shape in climb_starts.T]
        return np.stack(ends, axis=1)

    with ThreadPoolExecutor(max_workers=resolve_threads(threads)) as executor:
        climbed = list(executor.map(climb_all, selections))
    pool = np.unique(np.concatenate([starts] + climbed, axis=1), axis=1)
    pool.flags.writeable = False
    logger.info(f"[{filename}] Shape pool r={r}, depth={depth}: {pool.shape[1]} shapes "
                f"from {len(selections)} selections")
    return pool


def _search(r: float, depth: int, omega: float, A_budget: float, restarts: int, iterations: int,
            seed: int, threads: int, prune: bool) -> Tuple[float, int]:
    r = check_r(r)
    if not (np.isfinite(omega) and omega >= 0):
        raise DomainError(f"omega must be finite and >= 0, got {omega}")
    if not 0 <= A_budget <= 2:
        raise DomainError(f"A budget must lie in [0, 2], got {A_budget}")
    sequences = enumerate_carleson_sequences(depth, A_budget, maximal_only=prune)
    if omega == 0:
        return 0.0, len(sequences)

    pool = _shape_pool(r, depth, restarts, iterations, seed, threads)
    powers = (omega * (_averaging_matrix(depth) @ pool)) ** r

    def best_fraction(seq: CarlesonSequence) -> float:
        _, cover = _node_matrices(seq)
        return float(np.max(np.mean(cover @ powers >= 1.0 - LEVEL_SLACK, axis=0)))

    with ThreadPoolExecutor(max_workers=resolve_threads(threads)) as executor:
        results = list(executor.map(best_fraction, sequences))
    return max(results, default=0.0), len(sequences)


def enumerate_lower_bound(r: float, depth: int, omega: float, A_budget: float, restarts: int = 8,
                          iterations: int = 200, seed: int = 0, threads: int = 0, prune: bool = True) -> float:
    """
    Best level-set fraction found over the 2-Carleson selections of the given
    depth with root mass <= A_budget and step functions of mean omega.

    Every selection is scored against the same pool of mean-one shapes scaled
    to mean omega. Scaling up a shape or adding nodes to a selection never
    lowers the operator, so the result is nondecreasing in omega and in
    A_budget, with or without prune (only selections that admit no further bit).

    Leaves count at level 1 - LEVEL_SLACK, so this bounds
    M_r(omega (1 - LEVEL_SLACK)^{-1/r}, A_budget) from below.
    """
    best, _ = _search(r, depth, omega, A_budget, restarts, iterations, seed, threads, prune)
    return best


def run_enumeration(r: float, depth: int, omega: float, A_budget: float, restarts: int = 8,
                    iterations: int = 200, seed: int = 0, threads: int = 0,
                    tolerance: float = 1e-9, prune: bool = True) -> EnumerationReport:
    """
    Enumeration lower bound against the closed form.

    Args:
        r: Exponent of the operator
        depth: Tree depth, at most 4
        omega: Mean of the step functions
        A_budget: Root Carleson mass allowed, in [0, 2]
        tolerance: Slack of the soundness comparison

    Returns:
        EnumerationReport; `gap` is M - lower_bound at level 1, `sound` compares
        against M_relaxed, the closed form at the level the search counts at

    Raises:
        DomainError: omega or A_budget outside the domain
        ResourceError: depth above the enumeration limit
    """
    best, count = _search(r, depth, omega, A_budget, restarts, iterations, seed, threads, prune)
    r = check_r(r)
    target = float(bellman_M(r, omega, A_budget))
    level = 1.0 - LEVEL_SLACK
    relaxed = float(bellman_M(r, omega * level ** (-1.0 / r), A_budget))
    logger.info(f"[{filename}] Enumeration r={r}, depth={depth}, (omega, A)=({omega}, {A_budget}): "
                f"{best} over {count} sequences, closed form {target} ({relaxed} at level {level})")
    return EnumerationReport(
        r=r,
        depth=depth,
        omega=omega,
        A=A_budget,
        lower_bound=best,
        M=target,
        gap=target - best,
        sequences=count,
        level=level,
        M_relaxed=relaxed,
        sound=best <= relaxed + tolerance,
    )
