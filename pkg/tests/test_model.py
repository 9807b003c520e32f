from __future__ import annotations

import numpy as np
import pytest

from phylotope.abelian import FiniteAbelianGroup, GroupElement, automorphisms
from phylotope.errors import BudgetExceededError, MismatchError, StructuralError
from phylotope.model import (
    CoordinateLayout,
    all_vertices,
    assignment_at,
    edge_values,
    multidegree_at,
    vertex_matrix,
    vertex_of,
)
from phylotope.tree import EdgeRef, caterpillar, snowflake


def test_edge_values_sum_over_clades(three_leaf, kimura):
    values = edge_values(three_leaf, kimura, {1: GroupElement((1, 0)), 2: GroupElement((0, 1))})
    assert values[EdgeRef.of([1])] == GroupElement((1, 0))
    assert values[EdgeRef.of([2])] == GroupElement((0, 1))
    assert values[EdgeRef.of([1, 2])] == GroupElement((1, 1))


def test_vertex_of_sets_one_coordinate_per_block(three_leaf, kimura):
    vector = vertex_of(three_leaf, kimura, {1: GroupElement((1, 0)), 2: GroupElement((0, 1))})
    assert vector.as_tuple() == (0, 0, 1, 0, 0, 0, 0, 1, 0, 1, 0, 0)
    assert vector.block_sums() == [1, 1, 1]
    assert multidegree_at(vector, [EdgeRef.of([1, 2])]) == [(0, 0, 0, 1)]


def test_assignment_must_cover_non_root_leaves(three_leaf, kimura):
    with pytest.raises(StructuralError):
        edge_values(three_leaf, kimura, {1: GroupElement((1, 0))})
    with pytest.raises(StructuralError):
        edge_values(three_leaf, kimura, {1: GroupElement((1,)), 2: GroupElement((0,))})


def test_vertex_matrix_matches_assignment_order(three_leaf, kimura):
    matrix = vertex_matrix(three_leaf, kimura)
    assert matrix.shape == (16, 12)
    assert matrix.dtype == np.uint8
    for position, row in enumerate(matrix):
        assert np.array_equal(vertex_of(three_leaf, kimura, assignment_at(three_leaf, kimura, position)).entries, row)


@pytest.mark.parametrize(("leaves", "expected"), [(3, 16), (4, 64), (6, 1024)])
def test_vertex_counts_are_distinct(kimura, leaves, expected):
    matrix = vertex_matrix(caterpillar(leaves), kimura)
    assert len(matrix) == expected
    assert len(np.unique(matrix, axis=0)) == expected


def test_vertex_cap(kimura):
    with pytest.raises(BudgetExceededError) as excinfo:
        vertex_matrix(caterpillar(6), kimura, cap=100)
    assert excinfo.value.resource == "vertices"
    assert excinfo.value.requested == 1024


def test_layout_and_vector_arithmetic(three_leaf, kimura, quartet):
    layout = CoordinateLayout(three_leaf, kimura)
    assert layout.dimension == 12
    assert layout.describe()[:2] == ["e{1}:(0,0)", "e{1}:(0,1)"]
    assert layout.block(EdgeRef.of([1, 2])) == slice(4, 8)
    a = vertex_of(three_leaf, kimura, {1: GroupElement((1, 0)), 2: GroupElement((0, 1))})
    b = vertex_of(three_leaf, kimura, {1: GroupElement((0, 0)), 2: GroupElement((0, 1))})
    assert (a + b).block_sums() == [2, 2, 2]
    assert a + b == b + a
    other = vertex_of(quartet, kimura, {1: GroupElement((0, 0)), 2: GroupElement((0, 0)), 3: GroupElement((0, 0))})
    with pytest.raises(MismatchError):
        a + other


def _act(vector, permutation, size):
    entries = vector.as_tuple()
    image = [0] * len(entries)
    for start in range(0, len(entries), size):
        for h in range(size):
            image[start + permutation[h]] = entries[start + h]
    return tuple(image)


def test_automorphisms_permute_all_vertices(three_leaf, kimura):
    vertices = all_vertices(three_leaf, kimura)
    assert len(vertices) == 16
    orbit_points = {vector.as_tuple() for vector in vertices}
    permutations = automorphisms(kimura)
    assert len(permutations) == 6
    moved = 0
    for permutation in permutations:
        images = {_act(vector, permutation, kimura.order) for vector in vertices}
        assert images == orbit_points
        moved += sum(_act(vector, permutation, kimura.order) != vector.as_tuple() for vector in vertices)
    assert moved > 0


@pytest.mark.parametrize("group", ["Z2", "Z3", "Z4", "Z2xZ2"])
@pytest.mark.parametrize("tree", [caterpillar(6), snowflake()], ids=["caterpillar6", "snowflake"])
def test_six_leaf_vertex_counts(tree, group):
    parsed = FiniteAbelianGroup.parse(group)
    vertices = all_vertices(tree, parsed)
    matrix = vertex_matrix(tree, parsed)
    assert len(vertices) == parsed.order**5
    assert len(np.unique(matrix, axis=0)) == parsed.order**5
    assert all(vector.block_sums() == [1] * len(tree.edges) for vector in vertices)
