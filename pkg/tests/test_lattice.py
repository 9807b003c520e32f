from __future__ import annotations

import random

import numpy as np
import pytest

from phylotope.errors import MismatchError
from phylotope.lattice import (
    affine_dimension,
    determinant,
    from_lattice_coords,
    hnf,
    is_hnf,
    lattice_from_vertices,
    matrix_rank,
    to_lattice_coords,
)
from phylotope.model import vertex_matrix


def multiply(left, right):
    return [[sum(a * b for a, b in zip(row, column)) for column in zip(*right)] for row in left]


@pytest.mark.parametrize(
    ("matrix", "expected"),
    [
        ([[4, 6], [6, 9]], [[2, 3], [0, 0]]),
        ([[2, 1], [0, 3]], [[2, 1], [0, 3]]),
        ([[2, 5], [0, 3]], [[2, 2], [0, 3]]),
        ([[0, 0, 0], [0, -2, 4]], [[0, 2, -4], [0, 0, 0]]),
        ([[1, 0, 0], [0, 1, 0], [0, 0, 1]], [[1, 0, 0], [0, 1, 0], [0, 0, 1]]),
        ([[2], [4]], [[2], [0]]),
        ([[0, 1], [1, 0]], [[1, 0], [0, 1]]),
    ],
)
def test_hnf_examples(matrix, expected):
    h, u = hnf(matrix)
    assert h == expected
    assert multiply(u, matrix) == h


def test_hnf_is_idempotent():
    h, _ = hnf([[3, 1, 4], [1, 5, 9], [2, 6, 5]])
    again, u = hnf(h)
    assert again == h
    assert abs(determinant(u)) == 1


@pytest.mark.parametrize("seed", range(12))
def test_hnf_properties_on_random_matrices(seed):
    rng = random.Random(seed)
    rows, cols = rng.randint(1, 12), rng.randint(1, 12)
    matrix = [[rng.randint(-9, 9) for _ in range(cols)] for _ in range(rows)]
    h, u = hnf(matrix)
    assert is_hnf(h)
    assert multiply(u, matrix) == h
    assert abs(determinant(u)) == 1
    assert matrix_rank(matrix) == np.linalg.matrix_rank(np.array(matrix, dtype=float))


def test_hnf_of_a_large_matrix():
    rng = random.Random(2024)
    matrix = [[rng.randint(-9, 9) for _ in range(30)] for _ in range(30)]
    h, u = hnf(matrix)
    assert is_hnf(h)
    assert multiply(u, matrix) == h
    assert abs(determinant(u)) == 1


def test_is_hnf_rejects_violations():
    assert not is_hnf([[0, 0], [1, 0]])
    assert not is_hnf([[2, 3], [0, 3]])
    assert not is_hnf([[-1, 0], [0, 1]])
    assert is_hnf([[1, 0], [0, 0]])


def test_determinant():
    assert determinant([[1, 2], [3, 4]]) == -2
    assert determinant([[0, 1], [1, 0]]) == -1
    assert determinant([[1, 2], [2, 4]]) == 0
    assert determinant([]) == 1
    rng = random.Random(7)
    matrix = [[rng.randint(-4, 4) for _ in range(6)] for _ in range(6)]
    assert determinant(matrix) == round(np.linalg.det(np.array(matrix, dtype=float)))
    with pytest.raises(MismatchError):
        determinant([[1, 2, 3], [4, 5, 6]])


def test_lattice_coordinates():
    basis = lattice_from_vertices([[2, 0], [0, 2], [2, 2]])
    assert basis.rank == 2
    assert basis.rows == ((2, 0), (0, 2))
    assert to_lattice_coords(basis, [2, 4]) == (1, 2)
    assert to_lattice_coords(basis, [1, 0]) is None
    assert from_lattice_coords(basis, (1, 2)) == (2, 4)
    with pytest.raises(MismatchError):
        to_lattice_coords(basis, [1, 2, 3])


def test_model_vertices_lie_in_their_lattice(three_leaf, z2, kimura):
    binary = vertex_matrix(three_leaf, z2)
    basis = lattice_from_vertices(binary)
    assert basis.rank == 4
    for row in binary.tolist():
        coords = to_lattice_coords(basis, row)
        assert coords is not None
        assert from_lattice_coords(basis, coords) == tuple(row)

    vertices = vertex_matrix(three_leaf, kimura)
    kimura_basis = lattice_from_vertices(vertices)
    assert all(to_lattice_coords(kimura_basis, row) is not None for row in vertices.tolist())
    assert kimura_basis.to_csv().count("\n") == kimura_basis.rank - 1


def test_affine_dimension(three_leaf, z2, kimura):
    assert affine_dimension(vertex_matrix(three_leaf, z2)) == 3
    assert 3 <= affine_dimension(vertex_matrix(three_leaf, kimura)) <= 9
    assert affine_dimension([[1, 1]]) == 0
    with pytest.raises(MismatchError):
        affine_dimension([])


def test_basis_rows_have_unit_coordinates():
    basis = lattice_from_vertices([[1, 2, 0], [0, 3, 1], [2, 1, 1]])
    for index, row in enumerate(basis.rows):
        unit = tuple(1 if i == index else 0 for i in range(basis.rank))
        assert to_lattice_coords(basis, row) == unit
    combined = [a + b for a, b in zip(basis.rows[0], basis.rows[1])]
    assert to_lattice_coords(basis, combined) == (1, 1) + (0,) * (basis.rank - 2)
    single = lattice_from_vertices([[3, 6]])
    assert (single.rank, single.rows) == (1, ((3, 6),))


def test_membership_ignores_generator_order_and_redundant_generators(quartet, z2):
    rows = vertex_matrix(quartet, z2).tolist()
    base = lattice_from_vertices(rows)
    shuffled = lattice_from_vertices(list(reversed(rows)))
    padded = lattice_from_vertices(rows + [[a + b for a, b in zip(rows[0], rows[1])]])
    assert base.rows == shuffled.rows == padded.rows
    outside = [0] * base.dimension
    outside[0] = 1
    assert to_lattice_coords(base, outside) is None
