"""
Closed-form Bellman function of the weak-type level-set problem for A_{alpha,r}.

The two-variable function M_r(omega, A) lives on [0, inf) x [0, 2]; the
three-variable B_r(x, A, lam) is recovered from it by homogeneity. Every
public function accepts scalars or numpy arrays (broadcast together) and
returns a float for scalar input, an array of the broadcast shape otherwise.

Quantities that blow up or vanish geometrically in n*r (omega_n, the segment
index of f) are computed in log space.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Tuple, Union

import numpy as np

from errors import DomainError

ArrayLike = Union[float, np.ndarray]
LN2 = float(np.log(2.0))
OMEGA_CAP = 1e300


class RegionLabel(str, Enum):
    SIGMA0 = "SIGMA0"
    SIGMA1 = "SIGMA1"
    DELTA = "DELTA"
    DELTA0 = "DELTA0"


# Tie-break order: a point on a shared boundary gets the first matching label.
REGION_ORDER = (RegionLabel.SIGMA0, RegionLabel.SIGMA1, RegionLabel.DELTA, RegionLabel.DELTA0)


@dataclass(frozen=True)
class BellmanPoint:
    """State (mean, Carleson mass, residual level) carried by a tree node."""
    x: float
    A: float
    lam: float

    def __post_init__(self):
        if not np.isfinite([self.x, self.A, self.lam]).all():
            raise DomainError(f"Bellman point must be finite, got {self}")
        if self.x < 0 or not 0 <= self.A <= 2:
            raise DomainError(f"Bellman point outside x >= 0, 0 <= A <= 2: {self}")


def check_r(r: float) -> float:
    """
    Validate the exponent r.

    Args:
        r: Exponent of the sparse operator

    Returns:
        r as a float

    Raises:
        DomainError: If r is not finite and positive, or so large that
            omega_0(r) = 2^{-1/r} rounds to 1 and the region formulas degenerate
    """
    r = float(r)
    if not np.isfinite(r) or r <= 0:
        raise DomainError(f"r must be a positive finite number, got {r}")
    if 2.0 ** (-1.0 / r) >= 1.0:
        raise DomainError(f"r = {r} is too large: omega_0(r) is not distinguishable from 1")
    return r


def _restore(out: np.ndarray, scalar: bool) -> ArrayLike:
    return float(out) if scalar else out


def _nonnegative(omega: ArrayLike, name: str = "omega") -> Tuple[np.ndarray, bool]:
    w = np.asarray(omega, dtype=np.float64)
    if np.isnan(w).any() or (w < 0).any():
        raise DomainError(f"{name} must be >= 0")
    return w, w.ndim == 0


def _domain(omega: ArrayLike, A: ArrayLike) -> Tuple[np.ndarray, np.ndarray, bool]:
    w = np.asarray(omega, dtype=np.float64)
    a = np.asarray(A, dtype=np.float64)
    scalar = w.ndim == 0 and a.ndim == 0
    w, a = np.broadcast_arrays(w, a)
    if not (np.isfinite(w).all() and np.isfinite(a).all()):
        raise DomainError("omega and A must be finite")
    if (w < 0).any():
        raise DomainError("omega must be >= 0")
    if ((a < 0) | (a > 2)).any():
        raise DomainError("A must lie in [0, 2]")
    return np.array(w), np.array(a), scalar


def _log_two_pow_minus_one(x: ArrayLike) -> np.ndarray:
    """log(2^x - 1) for x > 0, accurate for tiny and huge x."""
    x = np.asarray(x, dtype=np.float64)
    return x * LN2 + np.log(-np.expm1(-x * LN2))


def omega_zero(r: float) -> float:
    return float(2.0 ** (-1.0 / check_r(r)))


def _log_omega(r: float, n: np.ndarray) -> np.ndarray:
    log_k = _log_two_pow_minus_one(r + 1.0)
    exponent = n * r * LN2 + log_k
    log_denominator = exponent + np.log1p(-np.exp(-exponent))
    return (_log_two_pow_minus_one(r) - log_denominator) / r


def omega_seq(r: float, n: ArrayLike) -> ArrayLike:
    """omega_n(r) = ((2^r - 1) / (2^{nr}(2^{r+1} - 1) - 1))^{1/r}; omega_0 = 2^{-1/r}."""
    r = check_r(r)
    n_arr = np.asarray(n)
    if n_arr.dtype.kind not in "iu" and not np.all(np.equal(np.mod(n_arr, 1), 0)):
        raise DomainError(f"n must be a nonnegative integer, got {n}")
    if (n_arr < 0).any():
        raise DomainError(f"n must be a nonnegative integer, got {n}")
    out = np.exp(_log_omega(r, n_arr.astype(np.float64)))
    return _restore(out, n_arr.ndim == 0)


def norm_ratio(r: float, n: ArrayLike) -> ArrayLike:
    """2^{-n} / omega_n(r): the weak quotient of the n-th vertex extremizer."""
    r = check_r(r)
    n_arr = np.asarray(n, dtype=np.float64)
    out = np.exp(-n_arr * LN2 - _log_omega(r, n_arr))
    return _restore(out, n_arr.ndim == 0)


def _phi(r: float, w: np.ndarray) -> np.ndarray:
    out = np.zeros_like(w)
    pos = w > 0
    log_w = np.log(w[pos])
    out[pos] = np.exp(log_w - np.logaddexp(0.0, r * log_w) / r)
    return out


def phi(r: float, omega: ArrayLike) -> ArrayLike:
    """omega / (1 + omega^r)^{1/r}: the mean seen below a selected root at level 1."""
    r = check_r(r)
    w, scalar = _nonnegative(omega)
    return _restore(_phi(r, w), scalar)


def _segment_index(r: float, w: np.ndarray) -> np.ndarray:
    """Smallest n >= 1 with omega_n <= w, for 0 < w < omega_0."""
    log_t = np.logaddexp(_log_two_pow_minus_one(r) - r * np.log(w), 0.0) - _log_two_pow_minus_one(r + 1.0)
    n = np.maximum(np.ceil(log_t / (r * LN2)), 1.0)
    for _ in range(2):
        n = np.where(np.exp(_log_omega(r, n)) > w, n + 1.0, n)
    for _ in range(2):
        step_down = (n > 1) & (np.exp(_log_omega(r, n - 1.0)) <= w)
        n = np.where(step_down, n - 1.0, n)
    return n


def _boundary_f(r: float, w: np.ndarray) -> np.ndarray:
    out = np.zeros_like(w)
    omega0 = 2.0 ** (-1.0 / r)
    out[w >= omega0] = 1.0
    mid = (w > 0) & (w < omega0)
    if mid.any():
        wm = w[mid]
        n = _segment_index(r, wm)
        lo = np.exp(_log_omega(r, n))
        hi = np.exp(_log_omega(r, n - 1.0))
        out[mid] = np.exp2(-n) * (1.0 + (wm - lo) / (hi - lo))
    return out


def boundary_f(r: float, omega: ArrayLike) -> ArrayLike:
    """
    The A = 2 section of M_r: piecewise linear through (omega_n, 2^{-n}),
    0 at the origin and 1 from omega_0 on.

    The segment [omega_n, omega_{n-1}) holding omega is found from the log
    formula for n and then corrected by comparison, so tiny omega costs no scan.
    """
    r = check_r(r)
    w, scalar = _nonnegative(omega)
    return _restore(_boundary_f(r, w), scalar)


def _boundary_g(r: float, w: np.ndarray) -> np.ndarray:
    omega0 = 2.0 ** (-1.0 / r)
    out = np.ones_like(w)
    low = w < omega0 / 2
    out[low] = 0.5 * _boundary_f(r, 2.0 * w[low])
    mid = (w >= omega0 / 2) & (w < 1.0)
    out[mid] = (w[mid] + 1.0 - omega0) / (2.0 - omega0)
    return out


def boundary_g(r: float, omega: ArrayLike) -> ArrayLike:
    """The A = 1 section of M_r."""
    r = check_r(r)
    w, scalar = _nonnegative(omega)
    return _restore(_boundary_g(r, w), scalar)


def _region_codes(r: float, w: np.ndarray, a: np.ndarray) -> np.ndarray:
    omega0 = 2.0 ** (-1.0 / r)
    sigma0 = (a >= 1.0) & (a >= 1.0 + (1.0 - w) / (1.0 - omega0))
    sigma1 = ~sigma0 & (a < np.minimum(1.0, w))
    delta = ~sigma0 & ~sigma1 & (a * omega0 > 2.0 * w)
    codes = np.full(w.shape, 3, dtype=np.int8)
    codes[delta] = 2
    codes[sigma1] = 1
    codes[sigma0] = 0
    return codes


def classify_region(r: float, omega: ArrayLike, A: ArrayLike):
    """
    Region of (omega, A): SIGMA0 where M = 1, SIGMA1 where M = A, DELTA0 the
    plane through the line A = 1 + (1 - omega)/(1 - omega0), DELTA the cone over f.

    Returns a RegionLabel for scalars and an array of label strings otherwise.
    """
    r = check_r(r)
    w, a, scalar = _domain(omega, A)
    codes = _region_codes(r, w, a)
    if scalar:
        return REGION_ORDER[int(codes)]
    names = np.array([label.value for label in REGION_ORDER])
    return names[codes]


def _region_formula(r: float, label: RegionLabel, w: np.ndarray, a: np.ndarray) -> np.ndarray:
    omega0 = 2.0 ** (-1.0 / r)
    if label is RegionLabel.SIGMA0:
        return np.ones_like(w)
    if label is RegionLabel.SIGMA1:
        return a.astype(np.float64, copy=True)
    if label is RegionLabel.DELTA0:
        return (w + (1.0 - omega0) * a) / (2.0 - omega0)
    positive = a > 0
    safe_a = np.where(positive, a, 1.0)
    return np.where(positive, safe_a / 2.0 * _boundary_f(r, 2.0 * w / safe_a), 0.0)


def region_value(r: float, label: Union[RegionLabel, str], omega: ArrayLike, A: ArrayLike) -> ArrayLike:
    """One region's formula, evaluated whether or not (omega, A) belongs to that region."""
    r = check_r(r)
    label = RegionLabel(label)
    w, a, scalar = _domain(omega, A)
    return _restore(_region_formula(r, label, w, a), scalar)


def _bellman_M(r: float, w: np.ndarray, a: np.ndarray) -> np.ndarray:
    codes = _region_codes(r, w, a)
    out = np.empty(w.shape)
    for code, label in enumerate(REGION_ORDER):
        mask = codes == code
        if mask.any():
            out[mask] = _region_formula(r, label, w[mask], a[mask])
    return out


def bellman_M(r: float, omega: ArrayLike, A: ArrayLike) -> ArrayLike:
    """M_r(omega, A) = B_r(omega, A, 1), in [0, 1]."""
    r = check_r(r)
    w, a, scalar = _domain(omega, A)
    return _restore(_bellman_M(r, w, a), scalar)


def homogeneous_omega(r: float, x: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """x lam^{-1/r} for lam > 0, capped at OMEGA_CAP (M is constant in omega that far out)."""
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        w = x * lam ** (-1.0 / r)
    return np.where(x == 0, 0.0, np.minimum(w, OMEGA_CAP))


def bellman_B_values(r: float, x: ArrayLike, A: ArrayLike, lam: ArrayLike) -> ArrayLike:
    """Vectorized B_r(x, A, lam): 1 for lam <= 0, else M_r(x lam^{-1/r}, A)."""
    r = check_r(r)
    xs = np.asarray(x, dtype=np.float64)
    scalar = xs.ndim == 0 and np.ndim(A) == 0 and np.ndim(lam) == 0
    xs, a, lams = (np.array(v) for v in np.broadcast_arrays(xs, np.asarray(A, dtype=np.float64),
                                                             np.asarray(lam, dtype=np.float64)))
    if not (np.isfinite(xs).all() and np.isfinite(lams).all()):
        raise DomainError("x and lambda must be finite")
    if (xs < 0).any():
        raise DomainError("x must be >= 0")
    if not (np.isfinite(a).all() and ((a >= 0) & (a <= 2)).all()):
        raise DomainError("A must lie in [0, 2]")
    out = np.ones(xs.shape)
    live = lams > 0
    if live.any():
        out[live] = _bellman_M(r, homogeneous_omega(r, xs[live], lams[live]), a[live])
    return _restore(out, scalar)


def bellman_B(r: float, point: BellmanPoint) -> float:
    return float(bellman_B_values(r, point.x, point.A, point.lam))


def envelope_phi(r: float, omega: ArrayLike, A: ArrayLike) -> ArrayLike:
    """
    Smooth concave majorant of M_r on 0 <= omega <= A <= 2,
    A omega ((2^{r+1} - 1) / (2^r omega^r + (2^r - 1) A^r))^{1/r}.

    Touches M_r along the segments from the origin to (1, 1) and to every
    (omega_n, 2).
    """
    r = check_r(r)
    w, a, scalar = _domain(omega, A)
    if (w > a).any():
        raise DomainError("envelope_phi is defined for omega <= A only")
    out = np.zeros(w.shape)
    pos = (w > 0) & (a > 0)
    log_w, log_a = np.log(w[pos]), np.log(a[pos])
    log_den = np.logaddexp(r * LN2 + r * log_w, _log_two_pow_minus_one(r) + r * log_a)
    out[pos] = np.exp(log_a + log_w + (_log_two_pow_minus_one(r + 1.0) - log_den) / r)
    return _restore(out, scalar)


def weak_norm_constant(r: float) -> float:
    """C(r) = ((2^{r+1} - 1)/(2^r - 1))^{1/r}; diverges as r -> 0+ (inf on overflow)."""
    r = check_r(r)
    with np.errstate(over="ignore"):
        return float(np.exp((_log_two_pow_minus_one(r + 1.0) - _log_two_pow_minus_one(r)) / r))


def power_mean_constant(p: float) -> float:
    """C(1/p)^{1/p} = (2 * 2^{1/p} - 1)/(2^{1/p} - 1), the weak (p, p) constant of Q_{alpha,p}."""
    p = float(p)
    if not np.isfinite(p) or p < 1:
        raise DomainError(f"p must be a finite number >= 1, got {p}")
    root_two = 2.0 ** (1.0 / p)
    return (2.0 * root_two - 1.0) / (root_two - 1.0)


def limit_surface_zero(omega: ArrayLike, A: ArrayLike) -> ArrayLike:
    """sup over r of M_r: min(1, A, (omega + A)/2)."""
    w, a, scalar = _domain(omega, A)
    return _restore(np.minimum(np.minimum(1.0, a), (w + a) / 2.0), scalar)


def limit_surface_inf(omega: ArrayLike, A: ArrayLike) -> ArrayLike:
    """inf over r of M_r: min(1, A, omega)."""
    w, a, scalar = _domain(omega, A)
    return _restore(np.minimum(np.minimum(1.0, a), w), scalar)


def jump_gap(r: float, omega: ArrayLike) -> ArrayLike:
    """f(phi(omega)) - g(omega) = M(phi(omega), 2) - M(omega, 1); nonnegative."""
    r = check_r(r)
    w, scalar = _nonnegative(omega)
    return _restore(_boundary_f(r, _phi(r, w)) - _boundary_g(r, w), scalar)
