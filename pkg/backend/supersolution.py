"""
Numerical certification of the supersolution axioms.

Each check draws seeded samples, evaluates a candidate surface and returns a
PropertyReport; a failed property is a report, never an exception. A candidate
is any vectorized callable (r, omega, A) -> values on [0, inf) x [0, 2],
lifted to three variables by homogeneity:
B(x, A, lam) = 1 for lam <= 0, candidate(x lam^{-1/r}, A) otherwise.

Every check owns its generator, seeded by (rng_seed, check id), so reports do
not depend on which other checks ran before.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from api_models import PropertyReport, SampleSpec
from closed_form import (
    RegionLabel,
    bellman_M,
    boundary_f,
    check_r,
    envelope_phi,
    homogeneous_omega,
    jump_gap,
    limit_surface_inf,
    limit_surface_zero,
    norm_ratio,
    omega_seq,
    omega_zero,
    phi,
    power_mean_constant,
    region_value,
    weak_norm_constant,
)
from dyadic import StepFunction, random_carleson_sequence
from errors import DomainError, ResourceError
from logger import logger
from operators import (
    apply_maximal,
    apply_power_mean,
    apply_sparse_power,
    power_mean_quotient,
    weak_quotient,
)
from value_iteration import resolve_threads

filename = os.path.basename(__file__)

Candidate = Callable[[float, np.ndarray, np.ndarray], np.ndarray]

SMALL_OMEGA = 1e-6
CONTINUITY_TOLERANCE = 1e-12
MAX_IDENTITY_DEPTH = 12
DEFAULT_R_GRID = (0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0)
LIMIT_R_SMALL = 1e-3
LIMIT_R_LARGE = 1e3
LIMIT_TOLERANCE = 0.05
KINK_MARGIN = 0.1


def _constant_one(r: float, omega: np.ndarray, A: np.ndarray) -> np.ndarray:
    return np.ones(np.broadcast(np.asarray(omega), np.asarray(A)).shape)


CANDIDATES: Dict[str, Candidate] = {
    "closed-form": bellman_M,
    "mutant-minsurface": lambda r, omega, A: limit_surface_inf(omega, A),
    "constant-one": _constant_one,
    "limit-zero": lambda r, omega, A: limit_surface_zero(omega, A),
}


def get_candidate(name: str) -> Candidate:
    try:
        return CANDIDATES[name]
    except KeyError:
        raise DomainError(f"Unknown candidate {name!r}; choose from {sorted(CANDIDATES)}")


def lifted_B(candidate: Candidate, r: float, x: np.ndarray, A: np.ndarray, lam: np.ndarray) -> np.ndarray:
    x, A, lam = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(A, dtype=float),
                                    np.asarray(lam, dtype=float))
    out = np.ones(x.shape)
    live = lam > 0
    if live.any():
        out[live] = candidate(r, homogeneous_omega(r, x[live], lam[live]), A[live])
    return out


def _rng(spec: SampleSpec, stream: int) -> np.random.Generator:
    return np.random.default_rng([spec.rng_seed, stream])


def sample_omega(rng: np.random.Generator, count: int, omega_max: float) -> np.ndarray:
    """Half log-uniform on [1e-6, omega_max], half uniform on [0, 2], shuffled."""
    log_count = count - count // 2
    low = np.log(min(SMALL_OMEGA, omega_max))
    log_part = np.exp(rng.uniform(low, np.log(omega_max), size=log_count))
    uniform_part = rng.uniform(0.0, 2.0, size=count // 2)
    return rng.permutation(np.concatenate([log_part, uniform_part]))


def _anchor_omegas(r: float, n_max: int = 6) -> np.ndarray:
    omegas = np.asarray(omega_seq(r, np.arange(n_max + 1)))
    return np.unique(np.concatenate([[0.0, 1.0], omegas, omegas / 2.0]))


def build_report(name: str, violations: np.ndarray, witnesses: Dict[str, np.ndarray], tolerance: float,
                 asserted: Optional[np.ndarray] = None, details: Optional[dict] = None) -> PropertyReport:
    """
    Reduce per-sample violations (positive = broken) to one report.

    Samples outside `asserted` are only logged when they exceed the tolerance.
    """
    violations = np.asarray(violations, dtype=float)
    if asserted is None:
        asserted = np.ones(violations.shape, dtype=bool)
    skipped = ~asserted & (violations > tolerance)
    if skipped.any():
        logger.warning(
            f"[{filename}] {name}: {int(skipped.sum())} unasserted samples with omega < {SMALL_OMEGA} "
            f"exceed tolerance (max {float(violations[skipped].max()):.3e})"
        )
    if np.isnan(violations[asserted]).any():
        raise DomainError(f"{name}: candidate produced NaN values")
    masked = np.where(asserted, violations, -np.inf)
    witness: Dict[str, float] = {}
    max_violation = 0.0
    if masked.size and np.isfinite(masked).any():
        worst = int(np.argmax(masked))
        max_violation = max(0.0, float(masked[worst]))
        witness = {key: float(np.asarray(values)[worst]) for key, values in witnesses.items()}
    passed = max_violation <= tolerance
    log = logger.info if passed else logger.warning
    log(f"[{filename}] {name}: max violation {max_violation:.3e} over {int(asserted.sum())} samples, "
        f"{'pass' if passed else 'FAIL'}")
    return PropertyReport(
        property_name=name,
        samples=int(asserted.sum()),
        max_violation=max_violation,
        worst_witness=witness,
        tolerance=tolerance,
        passed=passed,
        details=details or {},
    )


def check_obstacle(r: float, spec: SampleSpec, candidate: Candidate = bellman_M) -> PropertyReport:
    """M(omega, 1) = 1 for omega >= 1 and M(omega, 2) = 1 for omega >= omega_0."""
    rng = _rng(spec, 1)
    top = max(spec.omega_max, 2.0)
    n = spec.sample_count
    omega_one = np.concatenate([[1.0], rng.uniform(1.0, top, size=n)])
    omega_two = np.concatenate([[omega_zero(r)], rng.uniform(omega_zero(r), top, size=n)])
    omegas = np.concatenate([omega_one, omega_two])
    a = np.concatenate([np.ones(omega_one.size), np.full(omega_two.size, 2.0)])
    violations = np.abs(candidate(r, omegas, a) - 1.0)
    return build_report("obstacle", violations, {"omega": omegas, "A": a}, spec.tolerance)


def check_jump(r: float, spec: SampleSpec, candidate: Candidate = bellman_M) -> PropertyReport:
    """M(phi(omega), A + 1) >= M(omega, A) for A in [0, 1]."""
    rng = _rng(spec, 2)
    anchors = _anchor_omegas(r)
    anchor_w, anchor_a = (g.ravel() for g in np.meshgrid(anchors, [0.0, 0.5, 1.0], indexing="ij"))
    omegas = np.concatenate([anchor_w, sample_omega(rng, spec.sample_count, spec.omega_max)])
    a = np.concatenate([anchor_a, rng.uniform(0.0, 1.0, size=spec.sample_count)])
    violations = candidate(r, omegas, a) - candidate(r, phi(r, omegas), a + 1.0)
    asserted = omegas >= SMALL_OMEGA
    asserted[: anchor_w.size] = True
    return build_report("jump", violations, {"omega": omegas, "A": a}, spec.tolerance, asserted)


def check_concavity(r: float, spec: SampleSpec, candidate: Candidate = bellman_M) -> PropertyReport:
    """Midpoint concavity on random segments of [0, omega_max] x [0, 2]."""
    rng = _rng(spec, 3)
    n = spec.sample_count
    w1, w2 = sample_omega(rng, n, spec.omega_max), sample_omega(rng, n, spec.omega_max)
    a1, a2 = rng.uniform(0.0, 2.0, size=n), rng.uniform(0.0, 2.0, size=n)
    mid = candidate(r, (w1 + w2) / 2.0, (a1 + a2) / 2.0)
    violations = (candidate(r, w1, a1) + candidate(r, w2, a2)) / 2.0 - mid
    asserted = np.minimum(w1, w2) >= SMALL_OMEGA
    witnesses = {"omega1": w1, "A1": a1, "omega2": w2, "A2": a2}
    return build_report("concavity", violations, witnesses, spec.tolerance, asserted)


def check_main_inequality(r: float, spec: SampleSpec, candidate: Candidate = bellman_M) -> PropertyReport:
    """
    B(x, A + gamma, lam + gamma x^r) >= (B(x1, A1, lam) + B(x2, A2, lam)) / 2
    with x, A the midpoints of the children and gamma in {0, 1}, A + gamma <= 2.

    Children are drawn first and the parent derived from them; for gamma = 1
    the second child's mass is capped so that the parent mass stays <= 1.
    """
    rng = _rng(spec, 4)
    n = spec.sample_count
    gamma = rng.integers(0, 2, size=n).astype(float)
    x1, x2 = sample_omega(rng, n, spec.omega_max), sample_omega(rng, n, spec.omega_max)
    a1 = rng.uniform(0.0, 2.0, size=n)
    a2 = rng.uniform(0.0, 1.0, size=n) * np.where(gamma == 1.0, 2.0 - a1, 2.0)
    lam = rng.uniform(-0.5, 2.0, size=n)
    x = (x1 + x2) / 2.0
    a_parent = np.minimum((a1 + a2) / 2.0 + gamma, 2.0)
    parent = lifted_B(candidate, r, x, a_parent, lam + gamma * x ** r)
    children = (lifted_B(candidate, r, x1, a1, lam) + lifted_B(candidate, r, x2, a2, lam)) / 2.0
    witnesses = {"x1": x1, "A1": a1, "x2": x2, "A2": a2, "lambda": lam, "gamma": gamma}
    asserted = np.minimum(x1, x2) >= SMALL_OMEGA
    return build_report("main-inequality", children - parent, witnesses, spec.tolerance, asserted)


def check_homogeneity(r: float, spec: SampleSpec, candidate: Candidate = bellman_M) -> PropertyReport:
    """B(x, A, lam) = B(c x, A, c^r lam) for c > 0 and lam > 0."""
    rng = _rng(spec, 5)
    n = spec.sample_count
    x = sample_omega(rng, n, spec.omega_max)
    a = rng.uniform(0.0, 2.0, size=n)
    lam = rng.uniform(0.0, 2.0, size=n)
    lam = np.where(lam > 0, lam, 1.0)
    c = np.exp(rng.uniform(np.log(1e-3), np.log(1e3), size=n))
    violations = np.abs(lifted_B(candidate, r, x, a, lam) - lifted_B(candidate, r, c * x, a, c ** r * lam))
    return build_report("homogeneity", violations, {"x": x, "A": a, "lambda": lam, "c": c}, spec.tolerance)


def _suite_checks(r: float, spec: SampleSpec, candidate: Candidate) -> List[Callable[[], PropertyReport]]:
    return [
        lambda: check_obstacle(r, spec, candidate),
        lambda: check_jump(r, spec, candidate),
        lambda: check_concavity(r, spec, candidate),
        lambda: check_main_inequality(r, spec, candidate),
        lambda: check_homogeneity(r, spec, candidate),
    ]


def check_supersolution_suite(r: float, spec: SampleSpec, candidate: Candidate = bellman_M) -> List[PropertyReport]:
    """Obstacle, jump, midpoint concavity, main inequality and homogeneity of one candidate."""
    r = check_r(r)
    return [check() for check in _suite_checks(r, spec, candidate)]


def check_norm_constant(r: float, n_max: int = 8, tolerance: float = 1e-9,
                        grid_points: int = 4001) -> PropertyReport:
    """
    The vertex quotients 2^{-n}/omega_n(r) increase towards C(r) with
    C(r) - q_{n_max} <= 2 C(r) 2^{-n_max r} max(1, 1/r), and the grid supremum
    of M(omega, 2)/omega stays below C(r).

    Monotonicity is checked as nondecreasing: for large r consecutive quotients
    coincide in floating point.
    """
    r = check_r(r)
    if n_max < 2:
        raise DomainError(f"n_max must be >= 2, got {n_max}")
    constant = weak_norm_constant(r)
    ratios = np.asarray(norm_ratio(r, np.arange(n_max + 1)))
    decrease = float(np.max(ratios[:-1] - ratios[1:]))
    overshoot = float(np.max(ratios - constant))
    bound = 2.0 * constant * 2.0 ** (-n_max * r) * max(1.0, 1.0 / r)
    shortfall = float((constant - ratios[-1]) - bound) if np.isfinite(constant) else 0.0

    grid = np.unique(np.concatenate([
        np.geomspace(1e-8, 2.0, grid_points),
        np.asarray(omega_seq(r, np.arange(n_max + 1))),
    ]))
    quotient = np.asarray(bellman_M(r, grid, 2.0)) / grid
    grid_excess = float(np.max(quotient) - constant)

    parts = {"monotone": decrease, "bounded": overshoot, "convergence": shortfall, "grid-supremum": grid_excess}
    worst = max(parts, key=parts.get)
    violations = np.array([parts[worst]])
    return build_report(
        "norm-constant",
        violations,
        {"n_max": np.array([float(n_max)])},
        tolerance,
        details={
            "C": constant,
            "ratios": ratios.tolist(),
            "gap_bound": bound,
            "grid_supremum": float(np.max(quotient)),
            "worst_part": worst,
        },
    )


def check_envelope(r: float, spec: SampleSpec, n_max: int = 8) -> PropertyReport:
    """Phi_r >= M_r on omega <= A, with equality along the seams to (1, 1) and to (omega_n, 2)."""
    r = check_r(r)
    rng = _rng(spec, 6)
    n = spec.sample_count
    a = rng.uniform(0.0, 2.0, size=n)
    w = a * rng.uniform(0.0, 1.0, size=n)
    above = np.asarray(bellman_M(r, w, a)) - np.asarray(envelope_phi(r, w, a))

    t = np.linspace(0.0, 1.0, 21)
    seam_w = [t]
    seam_a = [t]
    for k in range(n_max + 1):
        seam_w.append(t * omega_seq(r, k))
        seam_a.append(2.0 * t)
    sw, sa = np.concatenate(seam_w), np.concatenate(seam_a)
    seam_gap = np.abs(np.asarray(envelope_phi(r, sw, sa)) - np.asarray(bellman_M(r, sw, sa)))

    return build_report(
        "envelope",
        np.concatenate([above, seam_gap]),
        {"omega": np.concatenate([w, sw]), "A": np.concatenate([a, sa])},
        spec.tolerance,
        details={"max_M_minus_Phi": float(max(0.0, above.max(initial=0.0))),
                 "max_seam_gap": float(seam_gap.max())},
    )


def _random_step_function(rng: np.random.Generator, depth: int) -> StepFunction:
    values = rng.exponential(1.0, size=1 << depth)
    values[rng.random(values.size) < 0.2] = 0.0
    if not values.any():
        values[0] = 1.0
    return StepFunction(depth, values)


def _relative(excess: np.ndarray, scale: np.ndarray) -> float:
    return float(np.max(excess / np.maximum(1.0, np.abs(scale)), initial=-np.inf))


def check_operator_identities(spec: SampleSpec, depth: int = 6, trials: Optional[int] = None) -> PropertyReport:
    """
    Random (alpha, f, p, r) trials: the chain A_{alpha,p} f <= (A_{alpha,1} f^p)^{1/p} <= Q_{alpha,p} f,
    the reduction Q_{alpha,p} f = (A_{alpha,1/p} f^p)^{1/p}, homogeneity of A^r, the maximal
    operator below A_{alpha,r}, and both weak quotients below their constants.

    Leafwise differences are relative to max(1, |value|).
    """
    if depth > MAX_IDENTITY_DEPTH:
        raise ResourceError(f"Operator identity depth {depth} exceeds the limit {MAX_IDENTITY_DEPTH}")
    rng = _rng(spec, 7)
    count = spec.sample_count if trials is None else trials
    worst = {"chain": -np.inf, "reduction": -np.inf, "homogeneity": -np.inf,
             "maximal": -np.inf, "weak-quotient": -np.inf, "power-mean-quotient": -np.inf}
    witness_trial = {key: -1 for key in worst}
    violations = np.zeros(count)

    for trial in range(count):
        seq = random_carleson_sequence(depth, rng, density=rng.uniform(0.1, 0.9))
        f = _random_step_function(rng, depth)
        p = 1.0 if rng.random() < 0.1 else 1.0 + rng.exponential(1.0)
        r = float(np.exp(rng.uniform(np.log(0.2), np.log(5.0))))
        c = float(np.exp(rng.uniform(np.log(0.1), np.log(10.0))))

        lower = apply_sparse_power(seq, f, p).root()
        middle = apply_sparse_power(seq, f.power(p), 1.0).leaf_values ** (1.0 / p)
        upper = apply_power_mean(seq, f, p).leaf_values
        reduced = apply_sparse_power(seq, f.power(p), 1.0 / p).root() ** (1.0 / p)
        power_form = apply_sparse_power(seq, f, r).leaf_values
        scaled = apply_sparse_power(seq, f.scaled(c), r).leaf_values
        sparse_root = apply_sparse_power(seq, f, r).root()
        maximal = apply_maximal(seq, f).leaf_values

        parts = {
            "chain": max(_relative(lower - middle, middle), _relative(middle - upper, upper)),
            "reduction": _relative(np.abs(upper - reduced), upper),
            "homogeneity": _relative(np.abs(scaled - c ** r * power_form), c ** r * power_form),
            "maximal": _relative(maximal - sparse_root, sparse_root),
        }
        positive = power_form[power_form > 0]
        if positive.size:
            lam = float(rng.choice(positive))
            parts["weak-quotient"] = weak_quotient(seq, f, r, lam) - weak_norm_constant(r)
        q_positive = upper[upper > 0]
        if q_positive.size:
            lam = float(rng.choice(q_positive))
            parts["power-mean-quotient"] = power_mean_quotient(seq, f, p, lam) - power_mean_constant(p)

        for key, value in parts.items():
            if value > worst[key]:
                worst[key], witness_trial[key] = value, trial
        violations[trial] = max(parts.values())

    trial_index = np.arange(count, dtype=float)
    return build_report(
        "operator-identities",
        violations,
        {"trial": trial_index},
        spec.tolerance,
        details={"depth": depth, "worst_by_part": {k: max(0.0, float(v)) for k, v in worst.items()},
                 "worst_trial_by_part": witness_trial},
    )


def _away_from_kinks(w: np.ndarray, a: np.ndarray) -> np.ndarray:
    return ((np.abs(a - 1.0) >= KINK_MARGIN) & (np.abs(w - a) >= KINK_MARGIN)
            & (np.abs(w + a - 2.0) >= KINK_MARGIN) & (np.abs(w - 1.0) >= KINK_MARGIN))


def check_r_ordering(spec: SampleSpec, r_grid: Sequence[float] = DEFAULT_R_GRID) -> PropertyReport:
    """
    min(1, A, omega) <= M_r <= min(1, A, (omega + A)/2) for every r in r_grid, and
    M_r within 0.05 of the matching limit at r = 1e-3 and r = 1e3 away from the kink lines.
    """
    if len(r_grid) == 0:
        raise DomainError("r_grid must be nonempty")
    rng = _rng(spec, 8)
    n = spec.sample_count
    w = sample_omega(rng, n, spec.omega_max)
    a = rng.uniform(0.0, 2.0, size=n)
    low, high = limit_surface_inf(w, a), limit_surface_zero(w, a)

    violations = np.full(n, -np.inf)
    worst_r = np.zeros(n)
    for r in r_grid:
        m = np.asarray(bellman_M(check_r(r), w, a))
        excess = np.maximum(low - m, m - high)
        worse = excess > violations
        violations = np.where(worse, excess, violations)
        worst_r = np.where(worse, r, worst_r)

    away = _away_from_kinks(w, a)
    near_zero = np.where(away, np.abs(np.asarray(bellman_M(LIMIT_R_SMALL, w, a)) - high) - LIMIT_TOLERANCE, -np.inf)
    near_inf = np.where(away, np.abs(np.asarray(bellman_M(LIMIT_R_LARGE, w, a)) - low) - LIMIT_TOLERANCE, -np.inf)
    for limit_r, excess in ((LIMIT_R_SMALL, near_zero), (LIMIT_R_LARGE, near_inf)):
        worse = excess > violations
        violations = np.where(worse, excess, violations)
        worst_r = np.where(worse, limit_r, worst_r)

    return build_report(
        "r-ordering",
        violations,
        {"omega": w, "A": a, "r": worst_r},
        spec.tolerance,
        details={"r_grid": list(r_grid), "limit_tolerance": LIMIT_TOLERANCE},
    )


def check_region_continuity(r: float, spec: SampleSpec) -> PropertyReport:
    """Adjacent region formulas agree on every shared boundary and f is continuous at its knots."""
    r = check_r(r)
    rng = _rng(spec, 9)
    n = spec.sample_count
    omega0 = omega_zero(r)
    top = max(spec.omega_max, 1.0)

    w_a = rng.uniform(omega0, 1.0, size=n)
    a_a = np.minimum(1.0 + (1.0 - w_a) / (1.0 - omega0), 2.0)
    w_b = rng.uniform(1.0, top, size=n)
    a_b = np.ones(n)
    w_c = rng.uniform(0.0, 1.0, size=n)
    a_c = w_c.copy()
    w_d = rng.uniform(0.0, omega0, size=n)
    a_d = np.minimum(2.0 * w_d / omega0, 2.0)

    pairs = [
        (RegionLabel.SIGMA0, RegionLabel.DELTA0, w_a, a_a),
        (RegionLabel.SIGMA0, RegionLabel.SIGMA1, w_b, a_b),
        (RegionLabel.SIGMA1, RegionLabel.DELTA0, w_c, a_c),
        (RegionLabel.DELTA, RegionLabel.DELTA0, w_d, a_d),
    ]
    diffs, ws, as_ = [], [], []
    for first, second, w, a in pairs:
        diffs.append(np.abs(np.asarray(region_value(r, first, w, a)) - np.asarray(region_value(r, second, w, a))))
        ws.append(w)
        as_.append(a)

    knots = np.asarray(omega_seq(r, np.arange(1, 31)))
    levels = 2.0 ** -np.arange(1, 31, dtype=float)
    left = np.asarray(boundary_f(r, np.nextafter(knots, 0.0)))
    knot_gap = np.maximum(np.abs(left - levels), np.abs(np.asarray(boundary_f(r, knots)) - levels))
    diffs.append(knot_gap)
    ws.append(knots)
    as_.append(np.full(knots.size, 2.0))

    return build_report(
        "region-continuity",
        np.concatenate(diffs),
        {"omega": np.concatenate(ws), "A": np.concatenate(as_)},
        CONTINUITY_TOLERANCE,
    )


def check_jump_gap(r: float, spec: SampleSpec) -> PropertyReport:
    """h(omega) = f(phi(omega)) - g(omega) >= 0."""
    r = check_r(r)
    rng = _rng(spec, 10)
    omegas = np.concatenate([_anchor_omegas(r), sample_omega(rng, spec.sample_count, spec.omega_max)])
    violations = -np.asarray(jump_gap(r, omegas))
    asserted = omegas >= SMALL_OMEGA
    asserted[omegas == 0.0] = True
    return build_report("jump-gap", violations, {"omega": omegas}, spec.tolerance, asserted)


def run_full_verification(r: float, spec: SampleSpec, candidate: str = "closed-form",
                          r_grid: Sequence[float] = DEFAULT_R_GRID, n_max: int = 8,
                          identity_depth: int = 6, identity_trials: int = 1000,
                          threads: int = 1) -> List[PropertyReport]:
    """
    Supersolution suite for the named candidate, followed by the closed-form
    checks: continuity, jump gap, envelope, norm constant, r-ordering and the
    operator identities (at most identity_trials random trials).

    Checks run on a pool of `threads` workers (0 = one per cpu). Each check
    owns its generator, so the reports and their order do not depend on it.
    """
    r = check_r(r)
    surface = get_candidate(candidate)
    workers = resolve_threads(threads)
    logger.info(f"[{filename}] Verifying candidate {candidate} at r={r} with {spec.sample_count} samples, "
                f"{workers} threads")
    checks = _suite_checks(r, spec, surface) + [
        lambda: check_region_continuity(r, spec),
        lambda: check_jump_gap(r, spec),
        lambda: check_envelope(r, spec),
        lambda: check_norm_constant(r, n_max, spec.tolerance),
        lambda: check_r_ordering(spec, r_grid),
        lambda: check_operator_identities(spec, identity_depth, min(spec.sample_count, identity_trials)),
    ]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        reports = list(executor.map(lambda check: check(), checks))
    failed = [report.property_name for report in reports if not report.passed]
    logger.info(f"[{filename}] Verification finished: {len(reports) - len(failed)}/{len(reports)} passed"
                + (f", failed: {', '.join(failed)}" if failed else ""))
    return reports
