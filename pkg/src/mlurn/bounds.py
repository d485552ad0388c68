"""Parameter recipes for profiles with a Condorcet winner.

With winner ``i`` and margin advantage ``alpha = min_j M(i,j) - 1/2``, the
stationary mass of the level sets ``S_k`` (states with ``k`` balls of
label ``i``) decays geometrically with ratio ``beta = (1-alpha)/(1+2alpha)``
away from the top.  The recipe turns a target ``(delta, tau)`` into a
mutation rate ``r`` and a ball count ``N``; ``certify`` checks the target
on the exact chain.

All arithmetic is exact; the tail length ``k0`` is the least integer with
``beta**k0 <= tau (1 - beta)``, found by exact comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import chain_exact
from .errors import InvalidInputError
from .prefs import as_fraction, as_majority


def alpha_of(m) -> tuple[int, Fraction] | None:
    """Condorcet winner (0-indexed) and its margin advantage, or None."""
    M = as_majority(m)
    for i in range(M.d):
        others = [M[i, j] for j in range(M.d) if j != i]
        if all(x > Fraction(1, 2) for x in others):
            if not others:
                return i, Fraction(1, 2)
            return i, min(others) - Fraction(1, 2)
    return None


@dataclass(frozen=True)
class CondorcetBoundInput:
    alpha: Fraction
    delta: Fraction
    tau: Fraction
    d: int

    def __post_init__(self):
        for name in ("alpha", "delta", "tau"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if not 0 < self.alpha <= Fraction(1, 2):
            raise InvalidInputError("alpha must lie in (0, 1/2]")
        if not 0 < self.delta < 1 or not 0 < self.tau < 1:
            raise InvalidInputError("delta and tau must lie in (0, 1)")
        if self.d < 2:
            raise InvalidInputError("need at least two alternatives")


@dataclass(frozen=True)
class CondorcetRecipe:
    inputs: CondorcetBoundInput
    beta: Fraction
    k0: int
    r: Fraction
    N_min: int
    # the level window {ceil((1-delta)N), ..., floor((1-r/alpha)N)} holds >= k0 integers
    window_ok: bool
    # r/(N d) >= 2(1-r)/N^2, needed for the up-move bound at small k
    side_small_k: bool
    # r <= 1/d, needed for the down-move bound
    side_r_le_inv_d: bool
    heuristic_N: int
    heuristic_r_range: tuple

    @property
    def side_conditions_ok(self) -> bool:
        return self.side_small_k and self.side_r_le_inv_d

    def as_dict(self) -> dict:
        return {
            "alpha": str(self.inputs.alpha), "delta": str(self.inputs.delta),
            "tau": str(self.inputs.tau), "d": self.inputs.d,
            "beta": str(self.beta), "k0": self.k0, "r": str(self.r), "N_min": self.N_min,
            "window_ok": self.window_ok,
            "side_small_k": self.side_small_k, "side_r_le_inv_d": self.side_r_le_inv_d,
            "heuristic": {
                "certified": False, "N": self.heuristic_N,
                "r_range": [str(x) for x in self.heuristic_r_range],
            },
        }


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def tail_length(beta: Fraction, tau: Fraction) -> int:
    """Least ``k >= 0`` with ``beta**k / (1 - beta) <= tau``."""
    target = tau * (1 - beta)
    if target >= 1:
        return 0
    guess = math.log(float(target)) / math.log(float(beta))
    k = max(0, math.floor(guess) - 1)
    while beta ** k > target:
        k += 1
    while k > 0 and beta ** (k - 1) <= target:
        k -= 1
    return k


def window_size(N: int, delta: Fraction, r: Fraction, alpha: Fraction) -> int:
    lo = _ceil((1 - delta) * N)
    hi = math.floor((1 - r / alpha) * N)
    return max(0, hi - lo + 1)


def side_small_k(N: int, d: int, r: Fraction) -> bool:
    return r / (N * d) >= 2 * (1 - r) / (N * N)


def recipe(inp: CondorcetBoundInput) -> CondorcetRecipe:
    """``beta``, ``k0``, ``r = alpha delta / 2`` and ``N_min = ceil(k0 / (delta - r/alpha))``."""
    a, dl, tau = inp.alpha, inp.delta, inp.tau
    beta = (1 - a) / (1 + 2 * a)
    k0 = tail_length(beta, tau)
    r = a * dl / 2
    N_min = _ceil(k0 / (dl - r / a))
    N_min = max(N_min, 1)
    heuristic_N = max(1, math.ceil(-math.log(float(tau)) / float(dl)))
    return CondorcetRecipe(
        inputs=inp, beta=beta, k0=k0, r=r, N_min=N_min,
        window_ok=window_size(N_min, dl, r, a) >= k0,
        side_small_k=side_small_k(N_min, inp.d, r),
        side_r_le_inv_d=r <= Fraction(1, inp.d),
        heuristic_N=heuristic_N,
        heuristic_r_range=(Fraction(1, heuristic_N), dl),
    )


def recipe_for(m, delta, tau) -> CondorcetRecipe:
    """Recipe for the Condorcet winner of ``m``; refuses profiles without one."""
    found = alpha_of(m)
    if found is None:
        raise InvalidInputError(
            "no Condorcet winner: the level-set bound does not apply; "
            "the general convergence guarantee gives no explicit N or r")
    _, alpha = found
    return recipe(CondorcetBoundInput(alpha, delta, tau, as_majority(m).d))


def beta_window(d: int, N: int, r, alpha) -> list[int]:
    """Levels ``k`` (1 <= k <= N(1 - r/alpha)) where ``d_k / u_{k-1} <= beta``."""
    r, alpha = as_fraction(r), as_fraction(alpha)
    beta = (1 - alpha) / (1 + 2 * alpha)
    top = math.floor((1 - r / alpha) * N)
    out = []
    for k in range(1, min(top, N) + 1):
        u_prev, _ = chain_exact.updown_bounds(d, N, r, alpha, k - 1)
        _, dk = chain_exact.updown_bounds(d, N, r, alpha, k)
        if dk <= beta * u_prev:
            out.append(k)
    return out


@dataclass(frozen=True)
class Certification:
    N: int
    r: Fraction
    winner: int
    mass: float  # stationary mass of levels k >= ceil(N(1 - delta))
    threshold: Fraction  # 1 - tau
    passed: bool  # mass >= threshold on the exact chain
    side_conditions_ok: bool  # whether the analytic argument covers this (N, r)
    sigma: tuple

    def as_dict(self) -> dict:
        return {"N": self.N, "r": str(self.r), "winner": self.winner + 1, "mass": self.mass,
                "threshold": str(self.threshold), "passed": self.passed,
                "side_conditions_ok": self.side_conditions_ok}


def certify(rec: CondorcetRecipe, m, *, N: int | None = None,
            state_cap: int = chain_exact.DEFAULT_STATE_CAP) -> Certification:
    """Check the tail-mass target on the exact stationary distribution at ``(N_min, r)``."""
    found = alpha_of(m)
    if found is None:
        raise InvalidInputError("no Condorcet winner")
    winner, _ = found
    d = as_majority(m).d
    N = rec.N_min if N is None else N
    kernel = chain_exact.build_kernel(d, N, rec.r, m, exact=False, state_cap=state_cap)
    dist = chain_exact.stationary(kernel)
    sigma = chain_exact.level_set_masses(dist, winner)
    lo = _ceil((1 - rec.inputs.delta) * N)
    mass = float(sigma[lo:].sum())
    threshold = 1 - rec.inputs.tau
    return Certification(N, rec.r, winner, mass, threshold, mass >= threshold,
                         side_small_k(N, d, rec.r) and rec.side_r_le_inv_d,
                         tuple(float(x) for x in sigma))
