# where: phylotope/hilbert.py
# what: Hilbert values as counts of distinct n-fold vertex sums, multigraded fiber count tables,
#       and exact Ehrhart interpolation.
# why: The degree-n piece of the toric ring has one monomial per distinct sum of n vertices.

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping, Sequence

import numpy as np
from pydantic import BaseModel, Field, field_validator

from .abelian import FiniteAbelianGroup
from .errors import BudgetExceededError, MismatchError, StructuralError
from .model import MAX_DILATION, CoordinateLayout, Multidegree, vertex_matrix
from .settings import RuntimeContext
from .spill import SpillArea, merge_runs
from .tree import EdgeRef, RootedPhyloTree

logger = logging.getLogger(__name__)

_INT64_LIMIT = 2**63
_CANDIDATE_BUFFERS = 4  # candidate arrays alive at once per step, for chunk sizing


# ---- Packed sums ------------------------------------------------------------


class _RadixPacking:
    """Sums packed into one int64 per point, base n+1.

    The last coordinate of each edge block is implied (block sums equal n), and since no
    coordinate exceeds n, adding packed vertices never carries between digits.
    """

    dtype = np.dtype(np.int64)
    row_shape: tuple[int, ...] = ()
    row_bytes = 8

    def __init__(self, layout: CoordinateLayout, n: int) -> None:
        self.layout = layout
        self.n = n
        self.radix = n + 1
        size = layout.block_size
        self.kept = [b * size + h for b in range(len(layout.edges)) for h in range(size - 1)]
        self.weights = np.array([self.radix**p for p in range(len(self.kept))], dtype=np.int64)

    @staticmethod
    def fits(layout: CoordinateLayout, n: int) -> bool:
        return (n + 1) ** (len(layout.edges) * (layout.block_size - 1)) < _INT64_LIMIT

    def encode(self, matrix: np.ndarray) -> np.ndarray:
        return matrix[:, self.kept].astype(np.int64) @ self.weights

    def zero(self) -> np.ndarray:
        return np.zeros(1, dtype=np.int64)

    def combine(self, sums: np.ndarray, chunk: np.ndarray) -> np.ndarray:
        return (chunk[:, None] + sums[None, :]).ravel()

    def unique(self, values: np.ndarray) -> np.ndarray:
        return np.unique(values)

    def bucket(self, values: np.ndarray, buckets: int) -> np.ndarray:
        """Order-preserving bucket ids in [0, buckets)."""
        span = self.radix ** len(self.kept)
        return values // max(1, -(-span // buckets))

    def block(self, sums: np.ndarray, edge_position: int) -> np.ndarray:
        size = self.layout.block_size
        columns = []
        for h in range(size - 1):
            weight = int(self.weights[edge_position * (size - 1) + h])
            columns.append((sums // weight) % self.radix)
        digits = np.stack(columns, axis=1) if columns else np.zeros((len(sums), 0), dtype=np.int64)
        last = self.n - digits.sum(axis=1)
        return np.concatenate([digits, last[:, None]], axis=1)


class _BytePacking:
    """One byte per coordinate; rows kept in lexicographic order."""

    dtype = np.dtype(np.uint8)

    def __init__(self, layout: CoordinateLayout, n: int) -> None:
        self.layout = layout
        self.n = n
        self.row_shape = (layout.dimension,)
        self.row_bytes = layout.dimension

    def encode(self, matrix: np.ndarray) -> np.ndarray:
        return np.ascontiguousarray(matrix, dtype=np.uint8)

    def zero(self) -> np.ndarray:
        return np.zeros((1, self.layout.dimension), dtype=np.uint8)

    def combine(self, sums: np.ndarray, chunk: np.ndarray) -> np.ndarray:
        return (chunk[:, None, :] + sums[None, :, :]).reshape(-1, self.layout.dimension)

    def unique(self, rows: np.ndarray) -> np.ndarray:
        return np.unique(rows, axis=0)

    def bucket(self, rows: np.ndarray, buckets: int) -> np.ndarray:
        """Order-preserving bucket ids from the leading coordinates read in base n+1."""
        radix = self.n + 1
        width = 1
        while width < self.layout.dimension and radix**width < buckets:
            width += 1
        weights = np.array([radix ** (width - 1 - j) for j in range(width)], dtype=np.int64)
        prefix = rows[:, :width].astype(np.int64) @ weights
        return prefix // max(1, -(-(radix**width) // buckets))

    def block(self, sums: np.ndarray, edge_position: int) -> np.ndarray:
        size = self.layout.block_size
        return sums[:, edge_position * size:(edge_position + 1) * size].astype(np.int64)


def _packing_for(layout: CoordinateLayout, n: int) -> _RadixPacking | _BytePacking:
    if _RadixPacking.fits(layout, n):
        return _RadixPacking(layout, n)
    logger.debug("Falling back to byte packing for %s at n=%d", layout.key(), n)
    return _BytePacking(layout, n)


def _check_dilation(n: int) -> None:
    if not isinstance(n, int) or n < 0:
        raise ValueError(f"the dilation n must be a non-negative integer, got {n!r}")
    if n > MAX_DILATION:
        raise ValueError(f"the dilation n must be at most {MAX_DILATION}")


def _union(parts: list[np.ndarray], packing) -> np.ndarray:
    return parts[0] if len(parts) == 1 else packing.unique(np.concatenate(parts))


def _sumset_step(sums: np.ndarray, keys: np.ndarray, packing, context: RuntimeContext, area: SpillArea) -> np.ndarray:
    """Distinct elements of sums + keys.

    Candidates are built in tiles (a slice of sums against a chunk of vertices) sized to the
    memory cap. Tile results stay in memory until they pass a quarter of the cap; after that
    they are written out as sorted runs and merged from disk.
    """
    settings = context.settings
    cap, threads = settings.memory_cap_bytes, settings.threads
    tile_rows = max(1, cap // (_CANDIDATE_BUFFERS * threads * packing.row_bytes))
    sum_rows = min(len(sums), tile_rows)
    key_rows = max(1, tile_rows // sum_rows)
    tiles = [(s, k) for s in range(0, len(sums), sum_rows) for k in range(0, len(keys), key_rows)]

    def tile(origin: tuple[int, int]) -> np.ndarray:
        s, k = origin
        return packing.unique(packing.combine(np.asarray(sums[s:s + sum_rows]), keys[k:k + key_rows]))

    held: list[np.ndarray] = []
    held_bytes = 0
    runs: list[np.ndarray] = []
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 and len(tiles) > 1 else None
    try:
        for start in range(0, len(tiles), threads):
            batch = tiles[start:start + threads]
            for part in (pool.map(tile, batch) if pool else map(tile, batch)):
                held.append(part)
                held_bytes += part.nbytes
            if held_bytes > cap // _CANDIDATE_BUFFERS:
                runs.append(area.save_run(_union(held, packing)))
                held, held_bytes = [], 0
    finally:
        if pool is not None:
            pool.shutdown()
    # both paths end sorted, so worker count and flush points cannot change the result
    if not runs:
        return _union(held, packing)
    if held:
        runs.append(area.save_run(_union(held, packing)))
    return merge_runs(runs, packing, area, cap // _CANDIDATE_BUFFERS)


def multiset_count(vertex_count: int, n: int) -> int:
    return comb(vertex_count + n - 1, n)


@contextmanager
def distinct_sums(tree: RootedPhyloTree, group: FiniteAbelianGroup, n: int, context: RuntimeContext | None = None):
    """Yield all distinct sums of n vertices (packed) together with the packing used.

    Sums that were spilled are memory-mapped from a temporary directory that only lives
    inside the `with` block.
    """
    context = context or RuntimeContext.default()
    _check_dilation(n)
    settings = context.settings
    vertices = vertex_matrix(tree, group, cap=settings.vertex_cap)
    subject = f"{tree.canonical_form()} over {group} at n={n}"
    budget = multiset_count(len(vertices), n)
    if budget > settings.multiset_cap:
        raise BudgetExceededError(
            "multisets", budget, settings.multiset_cap, subject,
            remedy="count through a decomposition plan (tfp --plan) instead of direct enumeration",
        )

    layout = CoordinateLayout(tree, group)
    packing = _packing_for(layout, n)
    if len(np.unique(vertices, axis=0)) != len(vertices):
        raise MismatchError(f"vertices of {tree.canonical_form()} are not pairwise distinct")
    keys = packing.encode(vertices)
    with SpillArea(settings.spill_dir) as area:
        started = time.perf_counter()
        sums = packing.zero()
        for step in range(1, n + 1):
            sums = _sumset_step(sums, keys, packing, context, area)
            logger.debug("Degree %d: %d distinct sums", step, len(sums))
        logger.info(
            "Enumerated %d distinct sums for %s in %.2fs%s",
            len(sums), subject, time.perf_counter() - started, " (spilled to disk)" if area.used else "",
        )
        yield sums, packing


# ---- Fiber tables -----------------------------------------------------------


class FiberTableMeta(BaseModel):
    tree: str
    group: str
    n: int = Field(ge=0)
    sockets: list[str]
    method: str = "semigroup"


class FiberTableCell(BaseModel):
    key: list[list[int]]
    count: str

    @field_validator("count")
    @classmethod
    def _decimal(cls, value: str) -> str:
        if not value.isdigit():
            raise ValueError("counts are decimal strings of non-negative integers")
        return value


class FiberTableDocument(BaseModel):
    meta: FiberTableMeta
    cells: list[FiberTableCell]


@dataclass(frozen=True)
class FiberCountTable:
    """Multigraded Hilbert function: socket multidegrees (one per socket) -> exact count."""

    tree: str
    group: str
    n: int
    sockets: tuple[str, ...]
    cells: Mapping[tuple[Multidegree, ...], int]
    method: str = "semigroup"
    clades: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        for key, count in self.cells.items():
            if len(key) != len(self.sockets):
                raise MismatchError(f"cell key {key} does not match sockets {self.sockets}")
            if count <= 0:
                raise MismatchError(f"cell {key} has non-positive count {count}")
            for multidegree in key:
                if sum(multidegree) != self.n:
                    raise MismatchError(f"multidegree {multidegree} does not have total {self.n}")

    def total(self) -> int:
        return sum(self.cells.values())

    def count(self, key: Sequence[Multidegree]) -> int:
        return self.cells.get(tuple(tuple(u) for u in key), 0)

    def marginal(self, keep: Sequence[str]) -> "FiberCountTable":
        """Sum out every socket not in `keep`; key order follows `keep`."""
        positions = []
        for name in keep:
            if name not in self.sockets:
                raise MismatchError(f"socket {name!r} is not in table sockets {self.sockets}")
            positions.append(self.sockets.index(name))
        cells: dict[tuple[Multidegree, ...], int] = {}
        for key, count in self.cells.items():
            reduced = tuple(key[p] for p in positions)
            cells[reduced] = cells.get(reduced, 0) + count
        return FiberCountTable(self.tree, self.group, self.n, tuple(keep), cells, self.method)

    def permuted(self, permutation: Sequence[int]) -> "FiberCountTable":
        """Apply an element permutation (perm[i] = image of element i) to every multidegree."""
        cells: dict[tuple[Multidegree, ...], int] = {}
        for key, count in self.cells.items():
            moved = []
            for u in key:
                image = [0] * len(u)
                for index, value in enumerate(u):
                    image[permutation[index]] = value
                moved.append(tuple(image))
            cells[tuple(moved)] = count
        return FiberCountTable(self.tree, self.group, self.n, self.sockets, cells, self.method)

    def to_document(self) -> FiberTableDocument:
        return FiberTableDocument(
            meta=FiberTableMeta(tree=self.tree, group=self.group, n=self.n, sockets=list(self.sockets), method=self.method),
            cells=[
                FiberTableCell(key=[list(u) for u in key], count=str(self.cells[key]))
                for key in sorted(self.cells)
            ],
        )

    def to_json(self) -> str:
        return self.to_document().model_dump_json(indent=2)

    @classmethod
    def from_document(cls, document: FiberTableDocument) -> "FiberCountTable":
        meta = document.meta
        cells = {tuple(tuple(u) for u in cell.key): int(cell.count) for cell in document.cells}
        return cls(meta.tree, meta.group, meta.n, tuple(meta.sockets), cells, meta.method)

    @classmethod
    def from_json(cls, text: str) -> "FiberCountTable":
        return cls.from_document(FiberTableDocument.model_validate_json(text))


def socket_labels(tree: RootedPhyloTree, sockets: Sequence[EdgeRef]) -> tuple[str, ...]:
    """Socket names where the tree names the edge, clade syntax otherwise."""
    named = {tree.socket_edge(name): name for name in tree.sockets}
    return tuple(named.get(edge, str(edge)) for edge in sockets)


def check_sockets(tree: RootedPhyloTree, sockets: Sequence[EdgeRef]) -> None:
    if len(set(sockets)) != len(sockets):
        raise StructuralError("sockets must be distinct edges")
    for edge in sockets:
        if not tree.is_pendant(edge):
            raise StructuralError(f"socket {edge} must be a pendant edge")


def fiber_table(
    tree: RootedPhyloTree,
    group: FiniteAbelianGroup,
    n: int,
    sockets: Sequence[EdgeRef] = (),
    context: RuntimeContext | None = None,
) -> FiberCountTable:
    """Distinct n-sums grouped by their socket-block multidegrees (key order follows `sockets`)."""
    context = context or RuntimeContext.default()
    sockets = tuple(sockets)
    check_sockets(tree, sockets)
    labels = socket_labels(tree, sockets)
    clades = tuple(str(edge) for edge in sockets)
    cache = context.cache
    if cache is not None:
        cached = cache.get(tree.canonical_form(), str(group), n, labels, clades, "semigroup")
        if cached is not None:
            return cached

    layout = CoordinateLayout(tree, group)
    positions = [layout.edge_index(edge) for edge in sockets]
    slice_rows = max(1, context.settings.memory_cap_bytes // (_CANDIDATE_BUFFERS * 8 * layout.dimension))
    size = group.order
    cells: dict[tuple[Multidegree, ...], int] = {}
    with distinct_sums(tree, group, n, context) as (sums, packing):
        if not sockets:
            cells[()] = len(sums)
        for start in range(0, len(sums) if sockets else 0, slice_rows):
            part = np.asarray(sums[start:start + slice_rows])
            blocks = np.concatenate([packing.block(part, position) for position in positions], axis=1)
            keys, counts = np.unique(blocks, axis=0, return_counts=True)
            for row, count in zip(keys.tolist(), counts.tolist()):
                key = tuple(tuple(row[i * size:(i + 1) * size]) for i in range(len(sockets)))
                cells[key] = cells.get(key, 0) + int(count)

    table = FiberCountTable(tree.canonical_form(), str(group), n, labels, cells, "semigroup", clades)
    if cache is not None:
        cache.put(table, clades)
    return table


def hilbert_value(tree: RootedPhyloTree, group: FiniteAbelianGroup, n: int, context: RuntimeContext | None = None) -> int:
    """Number of distinct sums of n vertices: the degree-n Hilbert function of the toric ring."""
    return fiber_table(tree, group, n, (), context).total()


# ---- Ehrhart polynomials ----------------------------------------------------


@dataclass(frozen=True)
class EhrhartPolynomial:
    coefficients: tuple[Fraction, ...]  # c_0 .. c_D

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, n: int) -> Fraction:
        value = Fraction(0)
        for coefficient in reversed(self.coefficients):
            value = value * n + coefficient
        return value

    def value(self, n: int) -> int:
        result = self(n)
        if result.denominator != 1:
            raise MismatchError(f"polynomial value at {n} is not an integer: {result}")
        return result.numerator

    def __str__(self) -> str:
        terms = []
        for power, coefficient in enumerate(self.coefficients):
            if coefficient == 0:
                continue
            text = str(coefficient)
            if power == 1:
                text += "*n"
            elif power > 1:
                text += f"*n^{power}"
            terms.append(text)
        return " + ".join(reversed(terms)) if terms else "0"


def ehrhart_interpolate(values: Iterable[tuple[int, int]], degree: int) -> EhrhartPolynomial:
    """Unique polynomial of degree <= `degree` through the points; extra points must agree."""
    points = sorted({int(n): int(count) for n, count in values}.items())
    if degree < 0:
        raise ValueError("degree must be non-negative")
    if len(points) < degree + 1:
        raise ValueError(f"need {degree + 1} values to interpolate degree {degree}, got {len(points)}")
    basis, extra = points[: degree + 1], points[degree + 1:]

    xs = [Fraction(n) for n, _ in basis]
    newton = [Fraction(count) for _, count in basis]
    for level in range(1, len(basis)):
        for i in range(len(basis) - 1, level - 1, -1):
            newton[i] = (newton[i] - newton[i - 1]) / (xs[i] - xs[i - level])

    coefficients = [newton[-1]]
    for i in range(len(basis) - 2, -1, -1):
        # coefficients * (n - xs[i]) + newton[i]
        shifted = [Fraction(0)] + coefficients
        for power, coefficient in enumerate(coefficients):
            shifted[power] -= xs[i] * coefficient
        shifted[0] += newton[i]
        coefficients = shifted
    while len(coefficients) > 1 and coefficients[-1] == 0:
        coefficients.pop()

    polynomial = EhrhartPolynomial(tuple(coefficients))
    for n, count in extra:
        if polynomial(n) != count:
            raise MismatchError(f"value {count} at n={n} disagrees with the interpolated polynomial ({polynomial(n)})")
    if polynomial.coefficients[0] != 1:
        logger.warning("Interpolated polynomial has constant term %s, expected 1", polynomial.coefficients[0])
    if polynomial.coefficients[-1] <= 0:
        logger.warning("Interpolated polynomial has non-positive leading coefficient %s", polynomial.coefficients[-1])
    return polynomial


def ehrhart_polynomial(
    tree: RootedPhyloTree,
    group: FiniteAbelianGroup,
    context: RuntimeContext | None = None,
    extra_checks: int = 0,
) -> tuple[EhrhartPolynomial, list[tuple[int, int]]]:
    """Interpolate from semigroup values at n = 0..D (+ extra checks); D is the affine dimension."""
    from .lattice import affine_dimension

    context = context or RuntimeContext.default()
    vertices = vertex_matrix(tree, group, cap=context.settings.vertex_cap)
    dimension = affine_dimension(vertices.tolist())
    values = [(n, hilbert_value(tree, group, n, context)) for n in range(dimension + 1 + extra_checks)]
    return ehrhart_interpolate(values, dimension), values
