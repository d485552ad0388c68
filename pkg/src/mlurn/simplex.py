"""Dense two-phase simplex method over exact rationals.

Solves ``min c @ x  s.t.  A x = b, x >= 0`` with ``fractions.Fraction``
arithmetic.  Pivoting follows Bland's rule, so the method terminates on
degenerate problems.  Meant for the small LPs that arise from d x d
margin matrices, not for large sparse models.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: str
    x: tuple | None
    value: Fraction | None
    basis: tuple = ()


class _Tableau:
    """Rows ``[a_1 .. a_n | rhs]``; ``basis[k]`` is the basic column of row k."""

    def __init__(self, rows, basis):
        self.rows = rows
        self.basis = basis

    def pivot(self, r, c):
        row = self.rows[r]
        inv = 1 / row[c]
        row = [x * inv for x in row]
        self.rows[r] = row
        for k, other in enumerate(self.rows):
            if k == r:
                continue
            f = other[c]
            if f:
                self.rows[k] = [a - f * b for a, b in zip(other, row)]
        self.basis[r] = c

    def reduced_costs(self, cost):
        """``cost_j - cost_B @ column_j`` for every column, plus the objective value."""
        n = len(cost)
        red = list(cost) + [Fraction(0)]
        for r, bc in enumerate(self.basis):
            cb = cost[bc]
            if cb:
                row = self.rows[r]
                for j in range(n + 1):
                    if row[j]:
                        red[j] -= cb * row[j]
        return red[:n], -red[n]

    def run(self, cost, allowed):
        """Minimise ``cost`` with Bland's rule over the ``allowed`` columns."""
        while True:
            red, _ = self.reduced_costs(cost)
            entering = next((j for j in allowed if red[j] < 0 and j not in self.basis), None)
            if entering is None:
                return OPTIMAL
            best = None
            for r, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    ratio = row[-1] / a
                    key = (ratio, self.basis[r])
                    if best is None or key < best[0]:
                        best = (key, r)
            if best is None:
                return UNBOUNDED
            self.pivot(best[1], entering)

    def solution(self, n):
        x = [Fraction(0)] * n
        for r, bc in enumerate(self.basis):
            if bc < n:
                x[bc] = self.rows[r][-1]
        return tuple(x)


def solve_lp(c: Sequence, A: Sequence[Sequence], b: Sequence, *, maximize: bool = False) -> LPResult:
    """Solve a standard-form LP exactly.

    Parameters
    ----------
    c : sequence of rationals, length n
    A : m x n sequence of rationals
    b : sequence of rationals, length m
    maximize : bool
        Maximise ``c @ x`` instead of minimising.

    Returns
    -------
    LPResult
        ``x`` is a basic (vertex) optimal solution when ``status == "optimal"``.
    """
    c = [Fraction(v) for v in c]
    if maximize:
        c = [-v for v in c]
    m, n = len(A), len(c)
    rows = []
    for i in range(m):
        row = [Fraction(v) for v in A[i]]
        rhs = Fraction(b[i])
        if len(row) != n:
            raise ValueError("constraint row length does not match cost vector")
        if rhs < 0:
            row, rhs = [-v for v in row], -rhs
        art = [Fraction(0)] * m
        art[i] = Fraction(1)
        rows.append(row + art + [rhs])
    tab = _Tableau(rows, list(range(n, n + m)))

    phase1 = [Fraction(0)] * n + [Fraction(1)] * m
    tab.run(phase1, range(n + m))
    _, infeas = tab.reduced_costs(phase1)
    if infeas != 0:
        return LPResult(INFEASIBLE, None, None)

    # drive zero-level artificials out of the basis; drop redundant rows
    r = 0
    while r < len(tab.rows):
        if tab.basis[r] >= n:
            col = next((j for j in range(n) if tab.rows[r][j] != 0), None)
            if col is None:
                del tab.rows[r]
                del tab.basis[r]
                continue
            tab.pivot(r, col)
        r += 1
    tab.rows = [row[:n] + [row[-1]] for row in tab.rows]

    status = tab.run(c, range(n))
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, None, None)
    x = tab.solution(n)
    value = sum((ci * xi for ci, xi in zip(c, x)), Fraction(0))
    return LPResult(OPTIMAL, x, -value if maximize else value, tuple(tab.basis))


def rank(matrix: Sequence[Sequence]) -> int:
    """Exact rank by fraction-valued Gaussian elimination."""
    rows = [[Fraction(v) for v in row] for row in matrix]
    if not rows:
        return 0
    n_cols = len(rows[0])
    rk = 0
    for col in range(n_cols):
        piv = next((i for i in range(rk, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[rk], rows[piv] = rows[piv], rows[rk]
        lead = rows[rk][col]
        for i in range(rk + 1, len(rows)):
            f = rows[i][col] / lead
            if f:
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rk])]
        rk += 1
        if rk == len(rows):
            break
    return rk
