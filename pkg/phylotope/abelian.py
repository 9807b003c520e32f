# where: phylotope/abelian.py
# what: Finite abelian groups Z_m1 x ... x Z_mk with a canonical lexicographic element order.
# why: Coordinates, multidegrees and leaf assignments are all indexed by this order.

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from math import prod

from .errors import StructuralError

_FACTOR_PATTERN = re.compile(r"^z(\d+)$", re.IGNORECASE)
_ELEMENT_PATTERN = re.compile(r"^\(\s*(-?\d+(?:\s*,\s*-?\d+)*)\s*\)$")


@dataclass(frozen=True, slots=True)
class FiniteAbelianGroup:
    """Product of cyclic groups, kept in the presentation the user gave."""

    moduli: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.moduli:
            raise StructuralError("a group needs at least one cyclic factor")
        for modulus in self.moduli:
            if not isinstance(modulus, int) or modulus < 2:
                raise StructuralError(f"cyclic factor orders must be integers >= 2, got {modulus!r}")

    @classmethod
    def parse(cls, text: str) -> "FiniteAbelianGroup":
        """Parse "Z2xZ2", "z2", "Z3xZ4" (case-insensitive)."""
        moduli: list[int] = []
        for factor in re.split(r"[xX]", text.strip()):
            match = _FACTOR_PATTERN.match(factor.strip())
            if not match:
                raise ValueError(f"invalid group specification {text!r}; expected e.g. Z2xZ2")
            moduli.append(int(match.group(1)))
        return cls(tuple(moduli))

    @property
    def order(self) -> int:
        return prod(self.moduli)

    @property
    def rank(self) -> int:
        return len(self.moduli)

    def __str__(self) -> str:
        return "x".join(f"Z{modulus}" for modulus in self.moduli)


@dataclass(frozen=True, slots=True, order=True)
class GroupElement:
    residues: tuple[int, ...]

    @classmethod
    def parse(cls, text: str, group: FiniteAbelianGroup) -> "GroupElement":
        match = _ELEMENT_PATTERN.match(text.strip())
        if not match:
            raise ValueError(f"invalid group element {text!r}; expected e.g. (1,0)")
        residues = tuple(int(part) for part in match.group(1).split(","))
        return element(group, residues)

    def __str__(self) -> str:
        return "(" + ",".join(str(residue) for residue in self.residues) + ")"


def element(group: FiniteAbelianGroup, residues: tuple[int, ...] | list[int]) -> GroupElement:
    """Validate residues against the group and wrap them."""
    residues = tuple(residues)
    if len(residues) != group.rank:
        raise StructuralError(f"element {residues} has arity {len(residues)}, group {group} has {group.rank}")
    for residue, modulus in zip(residues, group.moduli):
        if not 0 <= residue < modulus:
            raise StructuralError(f"residue {residue} is not reduced modulo {modulus}")
    return GroupElement(residues)


def _check_arity(group: FiniteAbelianGroup, *elements: GroupElement) -> None:
    for item in elements:
        if len(item.residues) != group.rank:
            raise StructuralError(f"element {item} does not belong to {group}: arity mismatch")


def add(a: GroupElement, b: GroupElement, group: FiniteAbelianGroup) -> GroupElement:
    _check_arity(group, a, b)
    return GroupElement(tuple((x + y) % m for x, y, m in zip(a.residues, b.residues, group.moduli)))


def scale(a: GroupElement, k: int, group: FiniteAbelianGroup) -> GroupElement:
    _check_arity(group, a)
    return GroupElement(tuple((k * x) % m for x, m in zip(a.residues, group.moduli)))


def identity(group: FiniteAbelianGroup) -> GroupElement:
    return GroupElement((0,) * group.rank)


@lru_cache(maxsize=64)
def enumerate_group(group: FiniteAbelianGroup) -> tuple[GroupElement, ...]:
    """All elements in lexicographic residue order; position 0 is the identity."""
    return tuple(GroupElement(residues) for residues in itertools.product(*(range(m) for m in group.moduli)))


def index_of(g: GroupElement, group: FiniteAbelianGroup) -> int:
    _check_arity(group, g)
    index = 0
    for residue, modulus in zip(g.residues, group.moduli):
        if not 0 <= residue < modulus:
            raise StructuralError(f"residue {residue} is not reduced modulo {modulus}")
        index = index * modulus + residue
    return index


def element_at(index: int, group: FiniteAbelianGroup) -> GroupElement:
    if not 0 <= index < group.order:
        raise StructuralError(f"element index {index} out of range for {group} of order {group.order}")
    residues: list[int] = []
    for modulus in reversed(group.moduli):
        index, residue = divmod(index, modulus)
        residues.append(residue)
    return GroupElement(tuple(reversed(residues)))


def order_of(g: GroupElement, group: FiniteAbelianGroup) -> int:
    k = 1
    zero = identity(group)
    while scale(g, k, group) != zero:
        k += 1
    return k


@lru_cache(maxsize=16)
def automorphisms(group: FiniteAbelianGroup) -> tuple[tuple[int, ...], ...]:
    """Automorphisms as permutations of element indices (perm[i] = index of the image of element i).

    Brute force over images of the unit generators; fine for the small groups used here.
    """
    elements = enumerate_group(group)
    candidates = [
        [image for image in elements if order_of(image, group) in _divisors(modulus)]
        for modulus in group.moduli
    ]
    found: list[tuple[int, ...]] = []
    for images in itertools.product(*candidates):
        permutation = []
        for g in elements:
            image = identity(group)
            for residue, generator_image in zip(g.residues, images):
                image = add(image, scale(generator_image, residue, group), group)
            permutation.append(index_of(image, group))
        if len(set(permutation)) == group.order:
            found.append(tuple(permutation))
    return tuple(sorted(found))


def _divisors(m: int) -> set[int]:
    return {d for d in range(1, m + 1) if m % d == 0}
