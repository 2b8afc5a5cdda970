"""
Dyadic trees, binary Carleson selection sequences and step functions.

Everything is normalized to the unit interval I = [0, 1) and truncated at a
finite depth N: selection bits live on the nodes of depth < N (deeper nodes
are implicitly unselected) and functions are constant on the 2^N terminal
intervals. Node data is stored in implicit heap order, node (d, k) at index
2^d - 1 + k.

Masses and averages are dyadic rationals, so binary floating point holds them
exactly for N <= 40.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np

from errors import CarlesonError, DomainError, ResourceError
from logger import logger

filename = os.path.basename(__file__)

CARLESON_CONSTANT = 2.0
MAX_TREE_DEPTH = 24
MAX_ENUMERATION_DEPTH = 4


@dataclass(frozen=True, order=True)
class NodeId:
    """Address (depth, position) of a dyadic subinterval of I."""
    depth: int
    position: int

    def __post_init__(self):
        if self.depth < 0:
            raise DomainError(f"Node depth must be nonnegative, got {self.depth}")
        if not 0 <= self.position < (1 << self.depth):
            raise DomainError(
                f"Node position {self.position} outside [0, {1 << self.depth}) at depth {self.depth}"
            )

    @classmethod
    def root(cls) -> "NodeId":
        """The unit interval I itself."""
        return cls(0, 0)

    @classmethod
    def from_path(cls, path: str) -> "NodeId":
        """
        Build a node from a left/right path.

        Args:
            path: Steps from the root, "+" for the right half and "-" for the
                left half, e.g. "+-" for I_{+-}; "" is the root

        Returns:
            NodeId at depth len(path)

        Raises:
            DomainError: If the path holds any other character
        """
        position = 0
        for step in path:
            if step not in "+-":
                raise DomainError(f"Invalid path step {step!r} in {path!r}; use '+' or '-'")
            position = 2 * position + (1 if step == "+" else 0)
        return cls(len(path), position)

    def path(self) -> str:
        """Inverse of from_path."""
        if self.depth == 0:
            return ""
        bits = format(self.position, f"0{self.depth}b")
        return bits.replace("0", "-").replace("1", "+")

    @property
    def heap_index(self) -> int:
        """Index in the level-order array of a complete binary tree."""
        return (1 << self.depth) - 1 + self.position

    def left(self) -> "NodeId":
        return NodeId(self.depth + 1, 2 * self.position)

    def right(self) -> "NodeId":
        return NodeId(self.depth + 1, 2 * self.position + 1)

    def children(self) -> Tuple["NodeId", "NodeId"]:
        """(left, right) halves."""
        return self.left(), self.right()

    def parent(self) -> "NodeId":
        """
        Dyadic parent of this node.

        Raises:
            DomainError: For the root
        """
        if self.depth == 0:
            raise DomainError("The root interval has no parent")
        return NodeId(self.depth - 1, self.position // 2)

    def contains(self, other: "NodeId") -> bool:
        """True if other is this node or lies below it."""
        if other.depth < self.depth:
            return False
        return other.position >> (other.depth - self.depth) == self.position

    def interval(self) -> Tuple[float, float]:
        """(start, end) of the subinterval of [0, 1)."""
        width = 2.0 ** -self.depth
        return self.position * width, (self.position + 1) * width

    def leaf_range(self, tree_depth: int) -> Tuple[int, int]:
        """Half-open range of terminal indices (depth tree_depth) inside this node."""
        if self.depth > tree_depth:
            raise DomainError(f"Node {self} is below the terminal depth {tree_depth}")
        shift = tree_depth - self.depth
        return self.position << shift, (self.position + 1) << shift


NodeLike = Union[NodeId, Tuple[int, int], Sequence[int]]


def as_node(node: NodeLike) -> NodeId:
    if isinstance(node, NodeId):
        return node
    depth, position = node
    return NodeId(int(depth), int(position))


def check_depth(depth: int) -> int:
    depth = int(depth)
    if not 1 <= depth <= MAX_TREE_DEPTH:
        raise DomainError(f"Tree depth must be in [1, {MAX_TREE_DEPTH}], got {depth}")
    return depth


def _level_slice(depth: int) -> slice:
    return slice((1 << depth) - 1, (1 << (depth + 1)) - 1)


def _bits_from_selected(depth: int, selected: Iterable[NodeLike]) -> np.ndarray:
    bits = np.zeros((1 << depth) - 1, dtype=np.int8)
    for item in selected:
        node = as_node(item)
        if node.depth >= depth:
            raise DomainError(f"Selected node {node} is not above the terminal depth {depth}")
        bits[node.heap_index] = 1
    return bits


def _mass_levels(bits: np.ndarray, depth: int) -> List[np.ndarray]:
    """Bottom-up A_J = alpha_J + (A_{J-} + A_{J+}) / 2, one array per depth 0..N."""
    levels: List[np.ndarray] = [np.zeros(0)] * (depth + 1)
    levels[depth] = np.zeros(1 << depth)
    for d in range(depth - 1, -1, -1):
        below = levels[d + 1]
        levels[d] = bits[_level_slice(d)] + (below[0::2] + below[1::2]) / 2.0
    return levels


@dataclass(frozen=True, eq=False)
class CarlesonSequence:
    """
    Binary selection bits on a depth-truncated dyadic tree, 2-Carleson by construction.

    Instances are immutable; `with_bit` returns a new sequence.
    """
    tree_depth: int
    bits: np.ndarray = field(repr=False)
    _masses: Tuple[np.ndarray, ...] = field(init=False, repr=False)

    def __post_init__(self):
        depth = check_depth(self.tree_depth)
        bits = np.array(self.bits, copy=True)
        if bits.shape != ((1 << depth) - 1,):
            raise DomainError(
                f"Expected {(1 << depth) - 1} selection bits for depth {depth}, got shape {bits.shape}"
            )
        if not np.isin(bits, (0, 1)).all():
            raise DomainError("Selection bits must be 0 or 1")
        bits = bits.astype(np.int8)
        bits.flags.writeable = False
        levels = _mass_levels(bits, depth)
        worst = max(float(level.max()) for level in levels)
        if worst > CARLESON_CONSTANT:
            raise CarlesonError(
                f"Selection violates the 2-Carleson condition (max mass {worst})"
            )
        for level in levels:
            level.flags.writeable = False
        object.__setattr__(self, "tree_depth", depth)
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "_masses", tuple(levels))

    @classmethod
    def empty(cls, depth: int) -> "CarlesonSequence":
        return cls(depth, np.zeros((1 << check_depth(depth)) - 1, dtype=np.int8))

    @classmethod
    def from_selected(cls, depth: int, selected: Iterable[NodeLike]) -> "CarlesonSequence":
        depth = check_depth(depth)
        return cls(depth, _bits_from_selected(depth, selected))

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "CarlesonSequence":
        try:
            depth = int(data["depth"])
            selected = [tuple(item) for item in data.get("selected", [])]
        except (KeyError, TypeError, ValueError) as e:
            raise DomainError(f"Malformed Carleson sequence payload: {e}")
        return cls.from_selected(depth, selected)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "depth": self.tree_depth,
            "selected": [[node.depth, node.position] for node in self.selected()],
        }

    def level_bits(self, depth: int) -> np.ndarray:
        """Bits of the 2^depth nodes at `depth` (zeros at and below the terminal depth)."""
        if depth >= self.tree_depth:
            return np.zeros(1 << depth, dtype=np.int8)
        return self.bits[_level_slice(depth)]

    def level_masses(self, depth: int) -> np.ndarray:
        return self._masses[depth]

    def is_selected(self, node: NodeLike) -> bool:
        node = as_node(node)
        if node.depth >= self.tree_depth:
            return False
        return bool(self.bits[node.heap_index])

    def selected(self) -> List[NodeId]:
        indices = np.flatnonzero(self.bits)
        nodes = []
        for index in indices:
            depth = int(np.floor(np.log2(index + 1)))
            nodes.append(NodeId(depth, int(index) - ((1 << depth) - 1)))
        return nodes

    def with_bit(self, node: NodeLike, bit: int) -> "CarlesonSequence":
        node = as_node(node)
        if node.depth >= self.tree_depth:
            raise DomainError(f"Node {node} is not above the terminal depth {self.tree_depth}")
        bits = np.array(self.bits, copy=True)
        bits[node.heap_index] = bit
        return CarlesonSequence(self.tree_depth, bits)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CarlesonSequence):
            return NotImplemented
        return self.tree_depth == other.tree_depth and np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash((self.tree_depth, self.bits.tobytes()))


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Nonnegative function constant on each of the 2^N terminal intervals of I."""
    tree_depth: int
    leaf_values: np.ndarray = field(repr=False)

    def __post_init__(self):
        depth = check_depth(self.tree_depth)
        values = np.array(self.leaf_values, dtype=np.float64, copy=True)
        if values.shape != (1 << depth,):
            raise DomainError(f"Expected {1 << depth} leaf values for depth {depth}, got shape {values.shape}")
        if not np.isfinite(values).all():
            raise DomainError("Leaf values must be finite")
        if (values < 0).any():
            raise DomainError("Leaf values must be nonnegative")
        values.flags.writeable = False
        object.__setattr__(self, "tree_depth", depth)
        object.__setattr__(self, "leaf_values", values)

    @classmethod
    def constant(cls, depth: int, value: float) -> "StepFunction":
        return cls(depth, np.full(1 << check_depth(depth), float(value)))

    @classmethod
    def indicator(cls, depth: int, node: NodeLike, value: float = 1.0) -> "StepFunction":
        """`value` on the terminal intervals inside `node`, 0 elsewhere."""
        node = as_node(node)
        values = np.zeros(1 << check_depth(depth))
        start, stop = node.leaf_range(depth)
        values[start:stop] = value
        return cls(depth, values)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "StepFunction":
        try:
            return cls(int(data["depth"]), np.asarray(data["values"], dtype=np.float64))
        except (KeyError, TypeError, ValueError) as e:
            raise DomainError(f"Malformed step function payload: {e}")

    def to_dict(self) -> Dict[str, Any]:
        return {"depth": self.tree_depth, "values": self.leaf_values.tolist()}

    @property
    def mean(self) -> float:
        return float(self.averages()[0][0])

    def averages(self) -> List[np.ndarray]:
        return self._average_levels

    @cached_property
    def _average_levels(self) -> List[np.ndarray]:
        levels: List[np.ndarray] = [np.zeros(0)] * (self.tree_depth + 1)
        levels[self.tree_depth] = self.leaf_values
        for d in range(self.tree_depth - 1, -1, -1):
            below = levels[d + 1]
            levels[d] = (below[0::2] + below[1::2]) / 2.0
        return levels

    def average(self, node: NodeLike) -> float:
        node = as_node(node)
        if node.depth > self.tree_depth:
            raise DomainError(f"Node {node} is below the terminal depth {self.tree_depth}")
        return float(self.averages()[node.depth][node.position])

    def power(self, p: float) -> "StepFunction":
        return StepFunction(self.tree_depth, self.leaf_values ** p)

    def scaled(self, c: float) -> "StepFunction":
        return StepFunction(self.tree_depth, self.leaf_values * c)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StepFunction):
            return NotImplemented
        return self.tree_depth == other.tree_depth and np.array_equal(self.leaf_values, other.leaf_values)

    __hash__ = None


def _check_node(seq: CarlesonSequence, node: NodeLike) -> NodeId:
    node = as_node(node)
    if node.depth > seq.tree_depth:
        raise DomainError(f"Node {node} lies outside the depth-{seq.tree_depth} tree")
    return node


def carleson_mass(seq: CarlesonSequence, node: NodeLike) -> float:
    """A(alpha; J): selected length packed into J, relative to |J|."""
    node = _check_node(seq, node)
    return float(seq.level_masses(node.depth)[node.position])


def is_two_carleson(seq: Union[CarlesonSequence, Mapping[str, Any]]) -> bool:
    """
    True iff the mass is at most 2 at every node.

    Accepts a constructed sequence (always true) or the raw JSON form
    {"depth": N, "selected": [[d, k], ...]}, which is checked without
    constructing the sequence.
    """
    if isinstance(seq, CarlesonSequence):
        return max(float(level.max()) for level in seq._masses) <= CARLESON_CONSTANT
    depth = check_depth(seq["depth"])
    bits = _bits_from_selected(depth, [tuple(item) for item in seq.get("selected", [])])
    return max(float(level.max()) for level in _mass_levels(bits, depth)) <= CARLESON_CONSTANT


def carleson_norm(seq: CarlesonSequence) -> float:
    """sup_J A(alpha; J); equals 1 exactly when a nonempty selection is pairwise disjoint."""
    return max(float(level.max()) for level in seq._masses)


def alpha_children(seq: CarlesonSequence, node: NodeLike) -> List[NodeId]:
    """Maximal selected strict descendants of `node`, left to right."""
    node = _check_node(seq, node)
    children: List[NodeId] = []
    if node.depth + 1 >= seq.tree_depth:
        return children
    stack = [node.right(), node.left()]
    while stack:
        current = stack.pop()
        if seq.is_selected(current):
            children.append(current)
            continue
        if current.depth + 1 < seq.tree_depth:
            stack.extend([current.right(), current.left()])
    return children


def sparse_generations(seq: CarlesonSequence) -> List[List[NodeId]]:
    root = NodeId.root()
    current = [root] if seq.is_selected(root) else alpha_children(seq, root)
    generations: List[List[NodeId]] = []
    while current:
        generations.append(current)
        current = [child for node in current for child in alpha_children(seq, node)]
    return generations


def counting_function(seq: CarlesonSequence) -> StepFunction:
    """Number of selected intervals containing each terminal interval."""
    cover = np.zeros(1)
    for d in range(seq.tree_depth):
        if d > 0:
            cover = np.repeat(cover, 2)
        cover = cover + seq.level_bits(d)
    return StepFunction(seq.tree_depth, np.repeat(cover, 2))


def random_carleson_sequence(depth: int, rng: np.random.Generator, density: float = 0.5) -> CarlesonSequence:
    """
    Random selection built bottom-up; a bit is only set when the node's mass stays <= 2,
    so the result is 2-Carleson without rejection.
    """
    depth = check_depth(depth)
    bits = np.zeros((1 << depth) - 1, dtype=np.int8)
    below = np.zeros(1 << depth)
    for d in range(depth - 1, -1, -1):
        base = (below[0::2] + below[1::2]) / 2.0
        chosen = (rng.random(1 << d) < density) & (base + 1.0 <= CARLESON_CONSTANT)
        bits[_level_slice(d)] = chosen
        below = base + chosen
    return CarlesonSequence(depth, bits)


def enumerate_carleson_sequences(depth: int, mass_budget: float = CARLESON_CONSTANT,
                                 maximal_only: bool = False) -> List[CarlesonSequence]:
    """
    Every 2-Carleson sequence of the given depth with root mass <= mass_budget.

    With maximal_only, sequences to which another bit could still be added
    (within the condition and the budget) are dropped.
    """
    depth = int(depth)
    if depth > MAX_ENUMERATION_DEPTH:
        raise ResourceError(
            f"Enumeration depth {depth} exceeds the limit {MAX_ENUMERATION_DEPTH} "
            f"(2^{(1 << depth) - 1} sequences)"
        )
    depth = check_depth(depth)
    n_bits = (1 << depth) - 1
    codes = np.arange(1 << n_bits, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(n_bits)) & 1).astype(np.int8)

    masses = np.zeros((codes.size, 1 << depth))
    valid = np.ones(codes.size, dtype=bool)
    for d in range(depth - 1, -1, -1):
        masses = bits[:, _level_slice(d)] + (masses[:, 0::2] + masses[:, 1::2]) / 2.0
        valid &= (masses <= CARLESON_CONSTANT).all(axis=1)
    valid &= masses[:, 0] <= mass_budget

    keep = valid
    if maximal_only:
        dominated = np.zeros(codes.size, dtype=bool)
        for k in range(n_bits):
            unset = ((codes >> k) & 1) == 0
            dominated |= unset & valid[codes | (1 << k)]
        keep = valid & ~dominated

    sequences = [CarlesonSequence(depth, bits[code]) for code in np.flatnonzero(keep)]
    logger.info(
        f"[{filename}] Enumerated {int(valid.sum())} admissible sequences at depth {depth} "
        f"(budget {mass_budget}), kept {len(sequences)}"
    )
    return sequences
