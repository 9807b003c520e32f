# where: phylotope/simplex.py
# what: Two-phase tableau simplex over Fractions with Bland's rule, for equality-form linear programs.
# why: Polyhedral bounds and membership are decided exactly; no floating point touches a count.

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InfeasibleError, MismatchError, PhylotopeError

logger = logging.getLogger(__name__)

Rational = Fraction | int


@dataclass(frozen=True)
class LinearProgramResult:
    """Optimal value and an optimal point x (the certificate) of min/max c·x, A x = b, x >= 0."""

    value: Fraction
    solution: tuple[Fraction, ...]
    pivots: int = 0


class _Tableau:
    def __init__(self, rows: list[list[Fraction]], basis: list[int]) -> None:
        # rows[:-1] are constraints [A | rhs]; rows[-1] is the reduced-cost row [z | -value]
        self.rows = rows
        self.basis = basis
        self.pivots = 0

    @property
    def constraints(self) -> list[list[Fraction]]:
        return self.rows[:-1]

    def pivot(self, row: int, col: int) -> None:
        line = self.rows[row]
        pivot = line[col]
        line = [value / pivot for value in line]
        self.rows[row] = line
        for r, other in enumerate(self.rows):
            factor = other[col]
            if r != row and factor:
                self.rows[r] = [a - factor * b for a, b in zip(other, line)]
        self.basis[row] = col
        self.pivots += 1

    def set_objective(self, costs: Sequence[Fraction]) -> None:
        objective = list(costs) + [Fraction(0)]
        for r, var in enumerate(self.basis):
            factor = objective[var]
            if factor:
                objective = [a - factor * b for a, b in zip(objective, self.rows[r])]
        self.rows[-1] = objective

    def value(self) -> Fraction:
        return -self.rows[-1][-1]

    def run(self, allowed: int) -> None:
        """Minimize with Bland's rule over the first `allowed` columns."""
        while True:
            objective = self.rows[-1]
            entering = next((j for j in range(allowed) if objective[j] < 0), None)
            if entering is None:
                return
            best: tuple[Fraction, int, int] | None = None
            for r, line in enumerate(self.constraints):
                if line[entering] > 0:
                    candidate = (line[-1] / line[entering], self.basis[r], r)
                    if best is None or candidate < best:
                        best = candidate
            if best is None:
                raise PhylotopeError("linear program is unbounded")
            self.pivot(best[2], entering)


def _as_fractions(values: Sequence[Rational]) -> list[Fraction]:
    return [Fraction(value) for value in values]


def minimize(a: Sequence[Sequence[Rational]], b: Sequence[Rational], c: Sequence[Rational]) -> LinearProgramResult:
    """Minimize c·x subject to A x = b and x >= 0.

    Raises InfeasibleError when no x satisfies the constraints.
    """
    m = len(a)
    n = len(c)
    if len(b) != m or any(len(row) != n for row in a):
        raise MismatchError("constraint matrix, right-hand side and objective have inconsistent shapes")

    rows: list[list[Fraction]] = []
    for i, row in enumerate(a):
        line = _as_fractions(row)
        rhs = Fraction(b[i])
        if rhs < 0:
            line = [-value for value in line]
            rhs = -rhs
        artificial = [Fraction(1 if k == i else 0) for k in range(m)]
        rows.append(line + artificial + [rhs])
    rows.append([Fraction(0)] * (n + m + 1))
    tableau = _Tableau(rows, [n + i for i in range(m)])

    # phase 1: drive the artificial sum to zero
    tableau.set_objective([Fraction(0)] * n + [Fraction(1)] * m)
    tableau.run(n + m)
    if tableau.value() > 0:
        raise InfeasibleError(f"linear program is infeasible (phase one residual {tableau.value()})")

    r = 0
    while r < len(tableau.constraints):
        if tableau.basis[r] >= n:
            line = tableau.rows[r]
            col = next((j for j in range(n) if line[j] != 0), None)
            if col is None:
                # redundant equality
                del tableau.rows[r]
                del tableau.basis[r]
                continue
            tableau.pivot(r, col)
        r += 1
    tableau.rows = [line[:n] + [line[-1]] for line in tableau.rows]

    tableau.set_objective(_as_fractions(c))
    tableau.run(n)

    solution = [Fraction(0)] * n
    for row, var in enumerate(tableau.basis):
        solution[var] = tableau.rows[row][-1]
    logger.debug("Solved LP with %d constraints and %d variables in %d pivots", m, n, tableau.pivots)
    return LinearProgramResult(tableau.value(), tuple(solution), tableau.pivots)


def maximize(a: Sequence[Sequence[Rational]], b: Sequence[Rational], c: Sequence[Rational]) -> LinearProgramResult:
    result = minimize(a, b, [-Fraction(value) for value in c])
    return LinearProgramResult(-result.value, result.solution, result.pivots)


def verify_certificate(
    a: Sequence[Sequence[Rational]],
    b: Sequence[Rational],
    c: Sequence[Rational],
    result: LinearProgramResult,
) -> bool:
    """True when the solution is feasible and attains the reported value exactly."""
    x = result.solution
    if len(x) != len(c) or any(value < 0 for value in x):
        return False
    for row, rhs in zip(a, b):
        if sum(Fraction(coef) * value for coef, value in zip(row, x)) != Fraction(rhs):
            return False
    return sum(Fraction(coef) * value for coef, value in zip(c, x)) == result.value
