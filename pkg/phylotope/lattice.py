# where: phylotope/lattice.py
# what: Row-style Hermite normal form over Python integers, the lattice spanned by polytope vertices,
#       and conversion between ambient and lattice coordinates.
# why: Polyhedral counting enumerates points of the vertex lattice, not of the ambient Z^d.

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import MismatchError

logger = logging.getLogger(__name__)

IntegerMatrix = list[list[int]]


def _as_rows(matrix: Iterable[Iterable[int]] | np.ndarray) -> IntegerMatrix:
    if isinstance(matrix, np.ndarray):
        return [[int(value) for value in row] for row in matrix.tolist()]
    rows = []
    for row in matrix:
        if hasattr(row, "as_tuple"):
            row = row.as_tuple()
        rows.append([int(value) for value in row])
    if rows and len({len(row) for row in rows}) != 1:
        raise MismatchError("matrix rows must all have the same length")
    return rows


def identity(size: int) -> IntegerMatrix:
    return [[1 if i == j else 0 for j in range(size)] for i in range(size)]


def _subtract_multiple(target: list[int], source: list[int], factor: int) -> None:
    for j, value in enumerate(source):
        if value:
            target[j] -= factor * value


def hnf(matrix: Iterable[Iterable[int]] | np.ndarray, with_transform: bool = True) -> tuple[IntegerMatrix, IntegerMatrix | None]:
    """Return (H, U) with U unimodular and U·A = H in row Hermite normal form.

    Pivot columns strictly increase down the rows, pivots are positive, entries above a pivot
    lie in [0, pivot) and zero rows sit at the bottom. U is None when `with_transform` is false.
    """
    h = _as_rows(matrix)
    m = len(h)
    d = len(h[0]) if h else 0
    u = identity(m) if with_transform else None

    def swap(i: int, j: int) -> None:
        h[i], h[j] = h[j], h[i]
        if u is not None:
            u[i], u[j] = u[j], u[i]

    def reduce(target: int, source: int, factor: int) -> None:
        _subtract_multiple(h[target], h[source], factor)
        if u is not None:
            _subtract_multiple(u[target], u[source], factor)

    top = 0
    for col in range(d):
        if top == m:
            break
        while True:
            candidates = [r for r in range(top, m) if h[r][col]]
            if not candidates:
                break
            smallest = min(candidates, key=lambda r: abs(h[r][col]))
            swap(top, smallest)
            cleared = True
            for r in range(top + 1, m):
                if h[r][col]:
                    reduce(r, top, h[r][col] // h[top][col])
                    if h[r][col]:
                        cleared = False
            if cleared:
                break
        if not h[top][col]:
            continue
        if h[top][col] < 0:
            h[top] = [-value for value in h[top]]
            if u is not None:
                u[top] = [-value for value in u[top]]
        pivot = h[top][col]
        for r in range(top):
            factor = h[r][col] // pivot
            if factor:
                reduce(r, top, factor)
        top += 1
    return h, u


def pivot_columns(h: IntegerMatrix) -> tuple[int, ...]:
    pivots = []
    for row in h:
        for col, value in enumerate(row):
            if value:
                pivots.append(col)
                break
    return tuple(pivots)


def matrix_rank(matrix: Iterable[Iterable[int]] | np.ndarray) -> int:
    """Rank over the rationals, which equals the rank of the integer row lattice."""
    h, _ = hnf(matrix, with_transform=False)
    return len(pivot_columns(h))


def is_hnf(h: IntegerMatrix) -> bool:
    previous = -1
    seen_zero = False
    for position, row in enumerate(h):
        nonzero = [col for col, value in enumerate(row) if value]
        if not nonzero:
            seen_zero = True
            continue
        col = nonzero[0]
        if seen_zero or col <= previous or row[col] <= 0:
            return False
        if any(not 0 <= h[above][col] < row[col] for above in range(position)):
            return False
        previous = col
    return True


def determinant(matrix: Iterable[Iterable[int]] | np.ndarray) -> int:
    """Exact determinant by fraction-free Bareiss elimination."""
    a = _as_rows(matrix)
    size = len(a)
    if any(len(row) != size for row in a):
        raise MismatchError("determinant needs a square matrix")
    if size == 0:
        return 1
    sign = 1
    previous = 1
    for k in range(size - 1):
        if a[k][k] == 0:
            swap = next((r for r in range(k + 1, size) if a[r][k]), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // previous
        previous = a[k][k]
    return sign * a[-1][-1]


@dataclass(frozen=True)
class LatticeBasis:
    """HNF basis of a row lattice in Z^d."""

    rank: int
    rows: tuple[tuple[int, ...], ...]
    dimension: int
    pivots: tuple[int, ...]
    provenance: str = ""

    def to_csv(self) -> str:
        return "\n".join(",".join(str(value) for value in row) for row in self.rows)


def lattice_from_vertices(vertices: Sequence | np.ndarray, provenance: str = "") -> LatticeBasis:
    """The lattice generated by the vertices themselves (not their differences)."""
    rows = _as_rows(vertices)
    if not rows:
        raise MismatchError("a lattice needs at least one generating vector")
    dimension = len(rows[0])
    unique_rows = [list(row) for row in dict.fromkeys(tuple(row) for row in rows)]
    h, _ = hnf(unique_rows, with_transform=False)
    pivots = pivot_columns(h)
    basis_rows = tuple(tuple(row) for row in h[: len(pivots)])
    logger.debug("Lattice of %d generators in Z^%d has rank %d", len(unique_rows), dimension, len(pivots))
    return LatticeBasis(len(pivots), basis_rows, dimension, pivots, provenance)


def to_lattice_coords(basis: LatticeBasis, x: Sequence[int] | np.ndarray) -> tuple[int, ...] | None:
    """The y with y·basis = x, or None when x is not in the lattice."""
    residual = [int(value) for value in x]
    if len(residual) != basis.dimension:
        raise MismatchError(f"vector of length {len(residual)} does not live in Z^{basis.dimension}")
    coords = []
    for row, pivot in zip(basis.rows, basis.pivots):
        quotient, remainder = divmod(residual[pivot], row[pivot])
        if remainder:
            return None
        coords.append(quotient)
        if quotient:
            _subtract_multiple(residual, list(row), quotient)
    if any(residual):
        return None
    return tuple(coords)


def from_lattice_coords(basis: LatticeBasis, y: Sequence[int]) -> tuple[int, ...]:
    if len(y) != basis.rank:
        raise MismatchError(f"expected {basis.rank} lattice coordinates, got {len(y)}")
    point = [0] * basis.dimension
    for coefficient, row in zip(y, basis.rows):
        if coefficient:
            _subtract_multiple(point, list(row), -int(coefficient))
    return tuple(point)


def affine_dimension(vertices: Sequence | np.ndarray) -> int:
    rows = _as_rows(vertices)
    if not rows:
        raise MismatchError("affine dimension of an empty set is undefined")
    origin = rows[0]
    differences = [[a - b for a, b in zip(row, origin)] for row in rows[1:]]
    if not differences:
        return 0
    return matrix_rank(differences)
