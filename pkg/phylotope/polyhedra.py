# where: phylotope/polyhedra.py
# what: V-polytopes of the model, exact LP bounds and membership on the convex-combination system,
#       and enumeration of lattice points in dilations with edge-block slices.
# why: Counting nP ∩ L independently of the semigroup path turns normality into a checked equality.

from __future__ import annotations

import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterator, Mapping, Sequence

import numpy as np

from .abelian import FiniteAbelianGroup
from .errors import BudgetExceededError, InfeasibleError, MismatchError, PhylotopeError
from .hilbert import FiberCountTable, check_sockets, socket_labels
from .lattice import LatticeBasis, from_lattice_coords, lattice_from_vertices
from .model import CoordinateLayout, Multidegree, vertex_matrix
from .settings import RuntimeContext
from .simplex import LinearProgramResult, maximize, minimize, verify_certificate
from .tree import EdgeRef, RootedPhyloTree

logger = logging.getLogger(__name__)

Point = tuple[int, ...]


@dataclass(frozen=True)
class VPolytope:
    vertices: tuple[Point, ...]
    dimension: int
    name: str = ""

    def __post_init__(self) -> None:
        if not self.vertices:
            raise MismatchError("a polytope needs at least one vertex")
        if any(len(v) != self.dimension for v in self.vertices):
            raise MismatchError(f"all vertices must have length {self.dimension}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]] | np.ndarray, name: str = "") -> "VPolytope":
        points = tuple(tuple(int(value) for value in row) for row in (rows.tolist() if isinstance(rows, np.ndarray) else rows))
        if not points:
            raise MismatchError("a polytope needs at least one vertex")
        return cls(points, len(points[0]), name)

    @classmethod
    def of_model(cls, tree: RootedPhyloTree, group: FiniteAbelianGroup, context: RuntimeContext | None = None) -> "VPolytope":
        context = context or RuntimeContext.default()
        matrix = vertex_matrix(tree, group, cap=context.settings.vertex_cap)
        return cls.from_rows(matrix, f"{tree.canonical_form()} over {group}")


@dataclass(frozen=True)
class SliceConstraint:
    """Fixes the coordinates of one edge block to a multidegree."""

    edge: EdgeRef
    multidegree: Multidegree
    columns: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.multidegree) != len(self.columns):
            raise MismatchError(f"multidegree {self.multidegree} does not fit the {len(self.columns)} block columns")

    @classmethod
    def at(cls, layout: CoordinateLayout, edge: EdgeRef, multidegree: Sequence[int]) -> "SliceConstraint":
        block = layout.block(edge)
        return cls(edge, tuple(int(value) for value in multidegree), tuple(range(block.start, block.stop)))

    @property
    def total(self) -> int:
        return sum(self.multidegree)

    def fixed(self) -> dict[int, int]:
        return dict(zip(self.columns, self.multidegree))

    def holds(self, point: Sequence[int]) -> bool:
        return all(point[col] == value for col, value in zip(self.columns, self.multidegree))


def _fixed_coordinates(slices: Sequence[SliceConstraint], fixed: Mapping[int, int] | None) -> dict[int, int]:
    merged: dict[int, int] = {}
    for constraint in slices:
        for col, value in constraint.fixed().items():
            if merged.get(col, value) != value:
                raise InfeasibleError(f"slices disagree on coordinate {col}")
            merged[col] = value
    for col, value in (fixed or {}).items():
        if merged.get(col, value) != value:
            raise InfeasibleError(f"fixed value of coordinate {col} contradicts a slice")
        merged[col] = value
    return merged


def _system(polytope: VPolytope, n: int, fixed: Mapping[int, int]) -> tuple[list[list[int]], list[int]]:
    rows = [[1] * len(polytope.vertices)]
    rhs = [n]
    for col, value in sorted(fixed.items()):
        rows.append([v[col] for v in polytope.vertices])
        rhs.append(value)
    return rows, rhs


def lp_solve(
    polytope: VPolytope,
    n: int,
    objective: Sequence[Fraction | int],
    direction: str = "max",
    slices: Sequence[SliceConstraint] = (),
    fixed: Mapping[int, int] | None = None,
) -> LinearProgramResult:
    """Optimize objective·x over x = Σ λ_i v_i, λ >= 0, Σ λ_i = n, with slice and fixed equalities.

    The returned solution is the λ certificate; it is re-evaluated exactly before returning.
    """
    if n < 0:
        raise ValueError("dilation must be non-negative")
    if len(objective) != polytope.dimension:
        raise MismatchError(f"objective of length {len(objective)} does not match dimension {polytope.dimension}")
    a, b = _system(polytope, n, _fixed_coordinates(slices, fixed))
    costs = [sum(Fraction(w) * x for w, x in zip(objective, v) if w and x) for v in polytope.vertices]
    if direction == "max":
        result = maximize(a, b, costs)
    elif direction == "min":
        result = minimize(a, b, costs)
    else:
        raise ValueError(f"direction must be min or max, not {direction!r}")
    if not verify_certificate(a, b, costs, result):
        raise PhylotopeError(f"LP certificate failed re-evaluation for {polytope.name or 'polytope'}")
    return result


def lp_extremize(
    polytope: VPolytope,
    n: int,
    objective: Sequence[Fraction | int],
    direction: str = "max",
    slices: Sequence[SliceConstraint] = (),
    fixed: Mapping[int, int] | None = None,
) -> Fraction:
    return lp_solve(polytope, n, objective, direction, slices, fixed).value


def contains(polytope: VPolytope, n: int, point: Sequence[int], slices: Sequence[SliceConstraint] = ()) -> bool:
    """True iff point lies in n·P and satisfies every slice."""
    if len(point) != polytope.dimension:
        raise MismatchError(f"point of length {len(point)} does not match dimension {polytope.dimension}")
    point = tuple(int(value) for value in point)
    if any(value < 0 for value in point) or not all(s.holds(point) for s in slices):
        return False
    a, b = _system(polytope, n, dict(enumerate(point)))
    try:
        minimize(a, b, [0] * len(polytope.vertices))
    except InfeasibleError:
        return False
    return True


class _NodeBudget:
    def __init__(self, cap: int, subject: str) -> None:
        self.cap = cap
        self.subject = subject
        self.used = 0
        self._lock = threading.Lock()

    def spend(self, prefix: Sequence[int]) -> None:
        with self._lock:
            self.used += 1
            if self.used > self.cap:
                where = ",".join(map(str, prefix))
                raise BudgetExceededError(
                    "nodes", self.used, self.cap, f"{self.subject}, subtree at lattice coordinates ({where})",
                    remedy="raise PHYLOTOPE_NODE_CAP or count a smaller tree",
                )


def _unit(dimension: int, col: int) -> list[int]:
    objective = [0] * dimension
    objective[col] = 1
    return objective


def _coordinate_range(
    polytope: VPolytope, n: int, basis: LatticeBasis, level: int, partial: int, fixed: dict[int, int]
) -> range:
    """Values of y_level whose pivot coordinate stays within the LP bounds of the current fiber."""
    col = basis.pivots[level]
    pivot = basis.rows[level][col]
    objective = _unit(polytope.dimension, col)
    try:
        low = lp_extremize(polytope, n, objective, "min", fixed=fixed)
    except InfeasibleError:
        return range(0)
    high = lp_extremize(polytope, n, objective, "max", fixed=fixed)
    return range(math.ceil((low - partial) / pivot), math.floor((high - partial) / pivot) + 1)


def _walk(
    polytope: VPolytope,
    n: int,
    basis: LatticeBasis,
    slices: Sequence[SliceConstraint],
    budget: _NodeBudget,
    prefix: list[int],
    fixed: dict[int, int],
) -> Iterator[Point]:
    budget.spend(prefix)
    level = len(prefix)
    if level == basis.rank:
        point = from_lattice_coords(basis, prefix)
        if contains(polytope, n, point, slices):
            yield point
        return
    col = basis.pivots[level]
    partial = sum(y * basis.rows[j][col] for j, y in enumerate(prefix))
    pivot = basis.rows[level][col]
    for y in _coordinate_range(polytope, n, basis, level, partial, fixed):
        value = partial + y * pivot
        if fixed.get(col, value) != value:
            continue
        yield from _walk(polytope, n, basis, slices, budget, prefix + [y], {**fixed, col: value})


def enumerate_lattice_points(
    polytope: VPolytope,
    n: int,
    basis: LatticeBasis,
    slices: Sequence[SliceConstraint] = (),
    context: RuntimeContext | None = None,
) -> list[Point]:
    """All points of n·P ∩ L satisfying the slices, in lexicographic order of lattice coordinates."""
    context = context or RuntimeContext.default()
    if n < 0:
        raise ValueError("dilation must be non-negative")
    if basis.dimension != polytope.dimension:
        raise MismatchError(f"lattice lives in Z^{basis.dimension}, polytope in Z^{polytope.dimension}")
    settings = context.settings
    budget = _NodeBudget(settings.node_cap, f"{polytope.name or 'polytope'} at n={n}")
    try:
        fixed = _fixed_coordinates(slices, None)
    except InfeasibleError:
        return []
    if basis.rank == 0:
        return list(_walk(polytope, n, basis, slices, budget, [], fixed))

    col = basis.pivots[0]
    pivot = basis.rows[0][col]
    first = [y for y in _coordinate_range(polytope, n, basis, 0, 0, fixed) if fixed.get(col, y * pivot) == y * pivot]

    def subtree(y: int) -> list[Point]:
        return list(_walk(polytope, n, basis, slices, budget, [y], {**fixed, col: y * pivot}))

    if settings.threads > 1 and len(first) > 1:
        with ThreadPoolExecutor(max_workers=settings.threads) as pool:
            parts = list(pool.map(subtree, first))
    else:
        parts = [subtree(y) for y in first]
    points = [point for part in parts for point in part]
    logger.info("Enumerated %d lattice points of %s at n=%d using %d nodes", len(points), polytope.name or "polytope", n, budget.used)
    return points


def count_slices(
    polytope: VPolytope,
    n: int,
    basis: LatticeBasis,
    slices: Sequence[SliceConstraint] = (),
    context: RuntimeContext | None = None,
) -> int:
    if any(constraint.total != n for constraint in slices):
        return 0
    return len(enumerate_lattice_points(polytope, n, basis, slices, context))


def compositions(n: int, parts: int) -> list[Multidegree]:
    """Weak compositions of n into `parts` non-negative parts."""
    result = []
    for bars in combinations(range(n + parts - 1), parts - 1):
        previous = -1
        composition = []
        for bar in bars:
            composition.append(bar - previous - 1)
            previous = bar
        composition.append(n + parts - 2 - previous)
        result.append(tuple(composition))
    return result


def slice_counts(
    tree: RootedPhyloTree,
    group: FiniteAbelianGroup,
    n: int,
    edge: EdgeRef,
    context: RuntimeContext | None = None,
) -> dict[Multidegree, int]:
    """Lattice-point counts of every nonempty slice at one edge block."""
    context = context or RuntimeContext.default()
    polytope = VPolytope.of_model(tree, group, context)
    basis = lattice_from_vertices(polytope.vertices, polytope.name)
    layout = CoordinateLayout(tree, group)
    counts = {}
    for u in sorted(compositions(n, group.order)):
        count = count_slices(polytope, n, basis, [SliceConstraint.at(layout, edge, u)], context)
        if count:
            counts[u] = count
    return counts


def lattice_points(
    tree: RootedPhyloTree, group: FiniteAbelianGroup, n: int, context: RuntimeContext | None = None
) -> list[Point]:
    """Points of n·P ∩ L for the model polytope, in lattice-coordinate order."""
    polytope = VPolytope.of_model(tree, group, context)
    basis = lattice_from_vertices(polytope.vertices, polytope.name)
    return enumerate_lattice_points(polytope, n, basis, (), context)


def polyhedral_count(tree: RootedPhyloTree, group: FiniteAbelianGroup, n: int, context: RuntimeContext | None = None) -> int:
    """|n·P ∩ L| for the model polytope and its vertex lattice."""
    return polyhedral_fiber_table(tree, group, n, (), context).total()


def polyhedral_fiber_table(
    tree: RootedPhyloTree,
    group: FiniteAbelianGroup,
    n: int,
    sockets: Sequence[EdgeRef] = (),
    context: RuntimeContext | None = None,
) -> FiberCountTable:
    """Lattice points of n·P ∩ L grouped by their socket-block multidegrees."""
    context = context or RuntimeContext.default()
    sockets = tuple(sockets)
    check_sockets(tree, sockets)
    labels = socket_labels(tree, sockets)
    clades = tuple(str(edge) for edge in sockets)
    cache = context.cache
    if cache is not None:
        cached = cache.get(tree.canonical_form(), str(group), n, labels, clades, "polyhedral")
        if cached is not None:
            return cached

    layout = CoordinateLayout(tree, group)
    blocks = [layout.block(edge) for edge in sockets]
    cells: dict[tuple[Multidegree, ...], int] = {}
    for point in lattice_points(tree, group, n, context):
        key = tuple(tuple(point[block]) for block in blocks)
        cells[key] = cells.get(key, 0) + 1

    table = FiberCountTable(tree.canonical_form(), str(group), n, labels, cells, "polyhedral", clades)
    if cache is not None:
        cache.put(table, clades)
    return table
