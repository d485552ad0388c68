"""Maximal lotteries: exact computation, verification and Condorcet diagnostics.

A lottery ``p`` is maximal for a margin matrix ``M`` when ``M @ p <= 0``
componentwise, i.e. ``p`` is an optimal strategy of the symmetric zero-sum
game ``M``.  Solutions are exact rationals.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import simplex
from .errors import InvalidInputError
from .prefs import MarginMatrix, as_margin


class Uniqueness(str, enum.Enum):
    UNIQUE = "unique"
    MULTIPLE = "multiple"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class MlResult:
    lottery: tuple
    unique: Uniqueness
    support: frozenset
    # a second maximal lottery, present when unique is MULTIPLE
    witness: tuple | None = None

    def as_floats(self) -> np.ndarray:
        return np.array([float(x) for x in self.lottery])


def _feasibility_system(m: MarginMatrix):
    """Equality form of ``{p >= 0, sum p = 1, M p <= 0}`` with slacks ``s``."""
    d = m.d
    A = []
    for i in range(d):
        A.append(list(m.entries[i]) + [Fraction(int(k == i)) for k in range(d)])
    A.append([Fraction(1)] * d + [Fraction(0)] * d)
    b = [Fraction(0)] * d + [Fraction(1)]
    return A, b


def _extreme(m: MarginMatrix, i: int, maximize: bool) -> tuple:
    A, b = _feasibility_system(m)
    c = [Fraction(0)] * (2 * m.d)
    c[i] = Fraction(1)
    res = simplex.solve_lp(c, A, b, maximize=maximize)
    if res.status != simplex.OPTIMAL:
        raise RuntimeError(f"ranging LP for alternative {i + 1} ended {res.status}")
    return res.x[: m.d]


def _kernel_test(m: MarginMatrix, p: Sequence[Fraction]) -> bool:
    """Sufficient condition for uniqueness of ``p``.

    If every alternative with zero payoff against ``p`` is in the support
    and the margin submatrix on the support has a one-dimensional kernel,
    no other maximal lottery exists.
    """
    support = [i for i, x in enumerate(p) if x > 0]
    mp = m.apply(p)
    tight = [i for i, v in enumerate(mp) if v == 0]
    if tight != support:
        return False
    sub = [[m.entries[i][j] for j in support] for i in support]
    return len(support) - simplex.rank(sub) == 1


def maximal_lottery(m, *, ranging: bool = True) -> MlResult:
    """Compute an exact maximal lottery of ``m``.

    Parameters
    ----------
    m : MarginMatrix (or anything ``as_margin`` accepts)
    ranging : bool
        When the kernel-dimension test is inconclusive, decide uniqueness by
        minimising and maximising every coordinate over the solution
        polytope.  With ``ranging=False`` such cases report ``UNKNOWN``.

    Returns
    -------
    MlResult
    """
    m = as_margin(m)
    A, b = _feasibility_system(m)
    res = simplex.solve_lp([Fraction(0)] * (2 * m.d), A, b)
    if res.status != simplex.OPTIMAL:
        # impossible for a skew-symmetric matrix (minimax theorem)
        raise RuntimeError(f"feasibility LP ended {res.status}")
    p = tuple(res.x[: m.d])
    support = frozenset(i for i, x in enumerate(p) if x > 0)

    if _kernel_test(m, p):
        return MlResult(p, Uniqueness.UNIQUE, support)
    if not ranging:
        return MlResult(p, Uniqueness.UNKNOWN, support)
    for i in range(m.d):
        for maximize in (False, True):
            q = _extreme(m, i, maximize)
            if q != p:
                return MlResult(p, Uniqueness.MULTIPLE, support, witness=q)
    return MlResult(p, Uniqueness.UNIQUE, support)


def is_maximal(m, p: Sequence, tol=0) -> bool:
    """True iff every component of ``m @ p`` is at most ``tol``.

    Exact when ``p`` holds Fractions/ints and ``tol`` is 0.
    """
    m = as_margin(m)
    if len(p) != m.d:
        raise InvalidInputError(f"lottery has {len(p)} entries for d={m.d}")
    if all(isinstance(x, (int, Fraction)) for x in p):
        return max(m.apply([Fraction(x) for x in p])) <= tol
    return float(np.max(m.to_array() @ np.asarray(p, dtype=float))) <= tol


def condorcet_winner(m) -> int | None:
    m = as_margin(m)
    for i in range(m.d):
        if all(m.entries[i][j] > 0 for j in range(m.d) if j != i):
            return i
    return None


def condorcet_loser(m) -> int | None:
    m = as_margin(m)
    if m.d == 1:
        return None
    for i in range(m.d):
        if all(m.entries[i][j] < 0 for j in range(m.d) if j != i):
            return i
    return None


def l1_distance(p, q) -> float:
    return float(np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float)).sum())


def format_lottery(p) -> str:
    return "(" + ", ".join(str(Fraction(x)) for x in p) + ")"
