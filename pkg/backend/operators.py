"""
Sparse operators on step functions.

All operators share one pattern: averages are computed once bottom-up
(StepFunction.averages), then a top-down pass accumulates the contribution of
every selected node onto the nodes below it. Cost is O(2^N) per call.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional

import numpy as np

from dyadic import CarlesonSequence, StepFunction, check_depth
from errors import DomainError


@dataclass(frozen=True, eq=False)
class OperatorOutput:
    """
    Leaf values of an operator applied to a step function.

    If `power` is set the values are the power form A^r f and `root()` returns
    A f itself; otherwise the values are the operator output as is.
    """
    tree_depth: int
    leaf_values: np.ndarray = field(repr=False)
    power: Optional[float] = None

    def __post_init__(self):
        depth = check_depth(self.tree_depth)
        values = np.array(self.leaf_values, dtype=np.float64, copy=True)
        if values.shape != (1 << depth,):
            raise DomainError(f"Expected {1 << depth} leaf values for depth {depth}, got shape {values.shape}")
        if (values < 0).any():
            raise DomainError("Operator values must be nonnegative")
        values.flags.writeable = False
        object.__setattr__(self, "tree_depth", depth)
        object.__setattr__(self, "leaf_values", values)

    def root(self) -> np.ndarray:
        if self.power is None:
            return self.leaf_values
        return self.leaf_values ** (1.0 / self.power)

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"depth": self.tree_depth, "values": self.leaf_values.tolist()}
        if self.power is not None:
            payload["power"] = self.power
        return payload

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "OperatorOutput":
        try:
            power = data.get("power")
            return cls(int(data["depth"]), np.asarray(data["values"], dtype=np.float64),
                       None if power is None else float(power))
        except (KeyError, TypeError, ValueError) as e:
            raise DomainError(f"Malformed operator output payload: {e}")


def _check_pair(seq: CarlesonSequence, f: StepFunction) -> None:
    if seq.tree_depth != f.tree_depth:
        raise DomainError(
            f"Depth mismatch: sequence has depth {seq.tree_depth}, function has depth {f.tree_depth}"
        )


def _check_r(r: float) -> float:
    r = float(r)
    if not np.isfinite(r) or r <= 0:
        raise DomainError(f"r must be a positive finite number, got {r}")
    return r


def _check_p(p: float) -> float:
    p = float(p)
    if not np.isfinite(p) or p < 1:
        raise DomainError(f"p must be a finite number >= 1, got {p}")
    return p


def _accumulate(seq: CarlesonSequence, terms: List[np.ndarray],
                combine: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> np.ndarray:
    """Push per-node terms of selected nodes down to the leaves, combining along each root path."""
    acc = np.zeros(1)
    for d in range(seq.tree_depth):
        if d > 0:
            acc = np.repeat(acc, 2)
        acc = combine(acc, np.where(seq.level_bits(d) == 1, terms[d], 0.0))
    return np.repeat(acc, 2)


def apply_sparse_power(seq: CarlesonSequence, f: StepFunction, r: float) -> OperatorOutput:
    """A^r_{alpha,r} f = sum over selected J of <f>_J^r 1_J, in power form."""
    _check_pair(seq, f)
    r = _check_r(r)
    terms = [level ** r for level in f.averages()]
    return OperatorOutput(seq.tree_depth, _accumulate(seq, terms, np.add), power=r)


def apply_power_mean(seq: CarlesonSequence, f: StepFunction, p: float) -> OperatorOutput:
    """Q_{alpha,p} f = sum over selected J of <f^p>_J^(1/p) 1_J."""
    _check_pair(seq, f)
    p = _check_p(p)
    terms = [level ** (1.0 / p) for level in f.power(p).averages()]
    return OperatorOutput(seq.tree_depth, _accumulate(seq, terms, np.add))


def apply_maximal(seq: CarlesonSequence, f: StepFunction) -> OperatorOutput:
    """
    Adapted maximal operator: the largest average <f>_J over selected J containing each point.

    Args:
        seq: Selection on the same tree as f
        f: Nonnegative step function

    Returns:
        OperatorOutput without a power; 0 outside the union of the selected nodes
    """
    _check_pair(seq, f)
    return OperatorOutput(seq.tree_depth, _accumulate(seq, f.averages(), np.maximum))


def level_set_fraction(g: OperatorOutput, lam: float) -> float:
    """Share of leaves with g >= lam (closed level set)."""
    return float(np.count_nonzero(g.leaf_values >= lam)) / g.leaf_values.size


def weak_quotient(seq: CarlesonSequence, f: StepFunction, r: float, lam: float) -> float:
    """
    lam^(1/r) |{A^r f >= lam}| / <f>_I, bounded by the weak-type constant C(r).

    An empty level set gives 0 for every lam; otherwise the product is formed in
    log space and may come out as inf for tiny r.
    """
    r = _check_r(r)
    mean = f.mean
    if mean <= 0:
        raise DomainError("weak_quotient needs a function with positive mean")
    if lam <= 0:
        raise DomainError(f"Level must be positive, got {lam}")
    fraction = level_set_fraction(apply_sparse_power(seq, f, r), lam)
    if fraction == 0:
        return 0.0
    with np.errstate(over="ignore"):
        return float(np.exp(np.log(lam) / r + np.log(fraction) - np.log(mean)))


def power_mean_quotient(seq: CarlesonSequence, f: StepFunction, p: float, lam: float) -> float:
    """(lam^p |{Q f >= lam}| / <f^p>_I)^(1/p), bounded by power_mean_constant(p)."""
    p = _check_p(p)
    power_mean = f.power(p).mean
    if power_mean <= 0:
        raise DomainError("power_mean_quotient needs a function with positive mean")
    if lam <= 0:
        raise DomainError(f"Level must be positive, got {lam}")
    fraction = level_set_fraction(apply_power_mean(seq, f, p), lam)
    if fraction == 0:
        return 0.0
    return float(lam * (fraction / power_mean) ** (1.0 / p))
