from __future__ import annotations

import pytest

from phylotope.abelian import (
    FiniteAbelianGroup,
    GroupElement,
    add,
    automorphisms,
    element,
    element_at,
    enumerate_group,
    identity,
    index_of,
    order_of,
    scale,
)
from phylotope.errors import StructuralError


def test_parse_and_render():
    group = FiniteAbelianGroup.parse("z2XZ2")
    assert group.moduli == (2, 2)
    assert group.order == 4
    assert group.rank == 2
    assert str(group) == "Z2xZ2"
    assert str(FiniteAbelianGroup.parse(" Z3xZ4 ")) == "Z3xZ4"


@pytest.mark.parametrize("text", ["", "Q", "Z2xQ", "2x2", "Z2,Z2"])
def test_parse_rejects_garbage(text):
    with pytest.raises(ValueError):
        FiniteAbelianGroup.parse(text)


def test_trivial_factor_is_structural_error():
    with pytest.raises(StructuralError):
        FiniteAbelianGroup.parse("Z1")


def test_enumeration_is_lexicographic(kimura):
    assert [g.residues for g in enumerate_group(kimura)] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert enumerate_group(kimura)[0] == identity(kimura)


def test_index_and_element_are_inverse():
    group = FiniteAbelianGroup((3, 4))
    for position in range(group.order):
        assert index_of(element_at(position, group), group) == position
    with pytest.raises(StructuralError):
        element_at(group.order, group)


def test_addition_and_scaling_wrap(kimura):
    a = element(kimura, (1, 0))
    b = element(kimura, (1, 1))
    assert add(a, b, kimura) == GroupElement((0, 1))
    assert add(a, a, kimura) == identity(kimura)
    z6 = FiniteAbelianGroup((6,))
    assert scale(element(z6, (4,)), 2, z6) == GroupElement((2,))


def test_element_validation(kimura):
    assert GroupElement.parse("(1, 0)", kimura) == GroupElement((1, 0))
    with pytest.raises(StructuralError):
        element(kimura, (2, 0))
    with pytest.raises(StructuralError):
        element(kimura, (1,))
    with pytest.raises(ValueError):
        GroupElement.parse("1,0", kimura)


def test_order_of():
    z6 = FiniteAbelianGroup((6,))
    assert [order_of(element(z6, (k,)), z6) for k in range(6)] == [1, 6, 3, 2, 3, 6]


@pytest.mark.parametrize(
    ("moduli", "expected"),
    [((2,), 1), ((3,), 2), ((4,), 2), ((5,), 4), ((2, 2), 6)],
)
def test_automorphism_counts(moduli, expected):
    assert len(automorphisms(FiniteAbelianGroup(moduli))) == expected


def test_automorphisms_are_homomorphisms(kimura):
    elements = enumerate_group(kimura)
    for permutation in automorphisms(kimura):
        assert permutation[0] == 0
        for i, a in enumerate(elements):
            for j, b in enumerate(elements):
                total = index_of(add(a, b, kimura), kimura)
                image = add(elements[permutation[i]], elements[permutation[j]], kimura)
                assert index_of(image, kimura) == permutation[total]
