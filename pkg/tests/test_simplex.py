from __future__ import annotations

import random
from fractions import Fraction

import pytest

from phylotope.errors import InfeasibleError, MismatchError, PhylotopeError
from phylotope.simplex import maximize, minimize, verify_certificate


def test_simple_min_and_max():
    a, b = [[1, 1]], [3]
    assert minimize(a, b, [1, 2]).value == 3
    result = maximize(a, b, [1, 2])
    assert result.value == 6
    assert result.solution == (0, 3)


def test_infeasible_program():
    with pytest.raises(InfeasibleError):
        minimize([[1, 1]], [-1], [0, 0])
    with pytest.raises(InfeasibleError):
        minimize([[1, 0], [1, 0]], [1, 2], [0, 0])


def test_redundant_rows_are_dropped():
    a, b, c = [[1, 1], [2, 2]], [2, 4], [1, 0]
    result = minimize(a, b, c)
    assert result.value == 0
    assert verify_certificate(a, b, c, result)


def test_degenerate_cycling_example_terminates():
    a = [
        [1, 0, 0, Fraction(1, 4), -8, -1, 9],
        [0, 1, 0, Fraction(1, 2), -12, Fraction(-1, 2), 3],
        [0, 0, 1, 0, 0, 1, 0],
    ]
    b = [0, 0, 1]
    c = [0, 0, 0, Fraction(-3, 4), 20, Fraction(-1, 2), 6]
    result = minimize(a, b, c)
    assert result.value == Fraction(-5, 4)
    assert verify_certificate(a, b, c, result)


def test_unbounded_and_shape_errors():
    with pytest.raises(PhylotopeError):
        minimize([[1, -1]], [0], [-1, 0])
    with pytest.raises(MismatchError):
        minimize([[1, 1]], [1, 2], [0, 0])


@pytest.mark.parametrize("seed", range(10))
def test_random_programs_return_valid_certificates(seed):
    rng = random.Random(seed)
    rows, cols = rng.randint(1, 4), rng.randint(2, 7)
    a = [[rng.randint(-3, 3) for _ in range(cols)] for _ in range(rows)]
    a.append([1] * cols)
    witness = [rng.randint(0, 3) for _ in range(cols)]
    b = [sum(coef * x for coef, x in zip(row, witness)) for row in a]
    c = [rng.randint(-4, 4) for _ in range(cols)]

    low = minimize(a, b, c)
    high = maximize(a, b, c)
    assert verify_certificate(a, b, c, low)
    assert verify_certificate(a, b, c, high)
    witness_value = sum(coef * x for coef, x in zip(c, witness))
    assert low.value <= witness_value <= high.value
    assert not verify_certificate(a, b, c, type(low)(low.value + 1, low.solution))
