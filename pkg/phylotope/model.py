# where: phylotope/model.py
# what: The group-based model map: leaf assignments -> edge values -> 0/1 exponent vectors (polytope vertices).
# why: Hilbert counting, lattices and polyhedral checks all start from this vertex set.

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .abelian import FiniteAbelianGroup, GroupElement, add, element_at, enumerate_group, identity, index_of
from .errors import BudgetExceededError, MismatchError, StructuralError
from .settings import DEFAULT_VERTEX_CAP
from .tree import EdgeRef, RootedPhyloTree

logger = logging.getLogger(__name__)

MAX_DILATION = 255  # entries are stored as uint8

LeafAssignment = Mapping[int, GroupElement]
Multidegree = tuple[int, ...]


class CoordinateLayout:
    """Coordinates of Z^{E(T) x G}: edges in canonical clade order, then group elements in canonical order."""

    def __init__(self, tree: RootedPhyloTree, group: FiniteAbelianGroup) -> None:
        self.tree = tree
        self.group = group
        self.edges: tuple[EdgeRef, ...] = tree.edges
        self._edge_index = {edge: position for position, edge in enumerate(self.edges)}

    @property
    def block_size(self) -> int:
        return self.group.order

    @property
    def dimension(self) -> int:
        return len(self.edges) * self.group.order

    def edge_index(self, edge: EdgeRef) -> int:
        try:
            return self._edge_index[edge]
        except KeyError:
            raise StructuralError(f"{edge} is not an edge of {self.tree.canonical_form()}") from None

    def block(self, edge: EdgeRef) -> slice:
        start = self.edge_index(edge) * self.group.order
        return slice(start, start + self.group.order)

    def index(self, edge: EdgeRef, g: GroupElement) -> int:
        return self.edge_index(edge) * self.group.order + index_of(g, self.group)

    def describe(self) -> list[str]:
        """Column names like "e{1,2}:(0,1)"."""
        return [f"{edge}:{g}" for edge in self.edges for g in enumerate_group(self.group)]

    def key(self) -> str:
        return f"{self.tree.canonical_form()}|{self.group}"


@dataclass(frozen=True, eq=False)
class ExponentVector:
    """A point of Z^{E(T) x G}; vertices of P_T are the 0/1 instances with one 1 per edge block."""

    entries: np.ndarray
    layout: CoordinateLayout

    def __post_init__(self) -> None:
        if self.entries.shape != (self.layout.dimension,):
            raise MismatchError(f"vector of length {self.entries.shape} does not match dimension {self.layout.dimension}")

    def __add__(self, other: "ExponentVector") -> "ExponentVector":
        if other.layout.key() != self.layout.key():
            raise MismatchError("cannot add exponent vectors of different trees or groups")
        total = self.entries.astype(np.int64) + other.entries.astype(np.int64)
        if total.max(initial=0) > MAX_DILATION:
            raise ValueError(f"entries above {MAX_DILATION} are not representable")
        return ExponentVector(total.astype(np.uint8), self.layout)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExponentVector):
            return NotImplemented
        return self.layout.key() == other.layout.key() and bool(np.array_equal(self.entries, other.entries))

    def __hash__(self) -> int:
        return hash((self.layout.key(), self.entries.tobytes()))

    def block_sums(self) -> list[int]:
        size = self.layout.block_size
        return [int(self.entries[i * size:(i + 1) * size].sum()) for i in range(len(self.layout.edges))]

    def as_tuple(self) -> tuple[int, ...]:
        return tuple(int(value) for value in self.entries)


def _check_assignment(tree: RootedPhyloTree, group: FiniteAbelianGroup, assignment: LeafAssignment) -> None:
    expected = set(tree.non_root_leaves)
    given = set(assignment)
    if given != expected:
        missing = sorted(expected - given)
        extra = sorted(given - expected)
        raise StructuralError(f"assignment must cover exactly the non-root leaves; missing {missing}, unexpected {extra}")
    for label, g in assignment.items():
        if len(g.residues) != group.rank:
            raise StructuralError(f"value {g} of leaf {label} does not belong to {group}")


def edge_values(tree: RootedPhyloTree, group: FiniteAbelianGroup, assignment: LeafAssignment) -> dict[EdgeRef, GroupElement]:
    """g_e = sum of assigned values over de(e), in one post-order pass."""
    _check_assignment(tree, group, assignment)
    values: dict[int, GroupElement] = {}
    order: list[int] = []
    stack = [tree.children(tree.root)[0]]
    while stack:
        vertex = stack.pop()
        order.append(vertex)
        stack.extend(tree.children(vertex))
    for vertex in reversed(order):
        kids = tree.children(vertex)
        if not kids:
            values[vertex] = assignment[vertex]
            continue
        total = identity(group)
        for kid in kids:
            total = add(total, values[kid], group)
        values[vertex] = total
    return {EdgeRef(tree.descendants_of_vertex(vertex)): value for vertex, value in values.items()}


def vertex_of(tree: RootedPhyloTree, group: FiniteAbelianGroup, assignment: LeafAssignment) -> ExponentVector:
    layout = CoordinateLayout(tree, group)
    entries = np.zeros(layout.dimension, dtype=np.uint8)
    for edge, value in edge_values(tree, group, assignment).items():
        entries[layout.index(edge, value)] = 1
    return ExponentVector(entries, layout)


def assignment_count(tree: RootedPhyloTree, group: FiniteAbelianGroup) -> int:
    return group.order ** len(tree.non_root_leaves)


def vertex_matrix(tree: RootedPhyloTree, group: FiniteAbelianGroup, *, cap: int = DEFAULT_VERTEX_CAP) -> np.ndarray:
    """All vertices as rows of a uint8 matrix, in lexicographic assignment order.

    The first non-root leaf is the most significant position of the assignment order.
    """
    count = assignment_count(tree, group)
    if count > cap:
        raise BudgetExceededError(
            "vertices", count, cap, tree.canonical_form(),
            remedy="split the tree with a decomposition plan",
        )
    layout = CoordinateLayout(tree, group)
    leaves = tree.non_root_leaves
    order = group.order
    moduli = np.array(group.moduli, dtype=np.int64)
    residues = np.array([g.residues for g in enumerate_group(group)], dtype=np.int64)

    # assignment index -> element index per leaf, first leaf most significant
    codes = np.arange(count, dtype=np.int64)
    leaf_indices = np.empty((count, len(leaves)), dtype=np.int64)
    for position in range(len(leaves) - 1, -1, -1):
        codes, leaf_indices[:, position] = np.divmod(codes, order)
    leaf_residues = residues[leaf_indices]  # (count, leaves, rank)

    weights = np.array([int(np.prod(moduli[j + 1:])) for j in range(group.rank)], dtype=np.int64)
    leaf_column = {label: position for position, label in enumerate(leaves)}
    matrix = np.zeros((count, layout.dimension), dtype=np.uint8)
    rows = np.arange(count)
    for edge_position, edge in enumerate(layout.edges):
        members = [leaf_column[label] for label in sorted(edge.clade)]
        sums = leaf_residues[:, members, :].sum(axis=1) % moduli
        element_index = sums @ weights
        matrix[rows, edge_position * order + element_index] = 1
    logger.debug("Generated %d vertices of dimension %d for %s over %s", count, layout.dimension, tree.canonical_form(), group)
    return matrix


def all_vertices(tree: RootedPhyloTree, group: FiniteAbelianGroup, *, cap: int = DEFAULT_VERTEX_CAP) -> list[ExponentVector]:
    layout = CoordinateLayout(tree, group)
    return [ExponentVector(row, layout) for row in vertex_matrix(tree, group, cap=cap)]


def assignment_at(tree: RootedPhyloTree, group: FiniteAbelianGroup, position: int) -> dict[int, GroupElement]:
    """The leaf assignment of row `position` of `vertex_matrix`."""
    leaves = tree.non_root_leaves
    indices: list[int] = []
    for _ in leaves:
        position, digit = divmod(position, group.order)
        indices.append(digit)
    return {label: element_at(index, group) for label, index in zip(leaves, reversed(indices))}


def multidegree_at(vector: ExponentVector, sockets: Sequence[EdgeRef]) -> list[Multidegree]:
    """The socket blocks of a point; for a vertex each is the unit multidegree e_{g_e}."""
    return [tuple(int(value) for value in vector.entries[vector.layout.block(socket)]) for socket in sockets]
