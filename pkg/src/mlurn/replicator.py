"""Mean-field dynamics of the urn: replicator dynamics with uniform mutation.

    f_i(p) = 2 (1 - r) p_i (M p)_i + r (1/d - p_i)
    g(p)   = p + f(p) / 2

``M`` is the margin matrix.  For ``r > 0``, ``f`` has a unique zero
``p^(r)`` in the simplex which attracts every trajectory, and the relative
entropy ``D(p^(r) | y(t))`` decreases along solutions.  As ``r -> 0`` the
zeros approach the maximal lotteries.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from numba import njit

from .errors import ConvergenceError, InvalidInputError, SimplexEscapeError
from .prefs import as_fraction, as_margin

ESCAPE_TOL = 1e-6
MAX_HALVINGS = 8


class VectorField:
    def __init__(self, m, r):
        self.m = as_margin(m)
        self.r = as_fraction(r)
        if not 0 <= self.r <= 1:
            raise InvalidInputError(f"mutation rate {r} outside [0, 1]")
        self.A = self.m.to_array()
        self.d = self.m.d

    def _exact(self, p) -> bool:
        return all(isinstance(x, (int, Fraction)) for x in p)

    def eval_f(self, p):
        """``f(p)``; exact when ``p`` is rational, float array otherwise."""
        if len(p) != self.d:
            raise InvalidInputError(f"lottery has {len(p)} entries for d={self.d}")
        r, d = self.r, self.d
        if self._exact(p):
            p = [Fraction(x) for x in p]
            mp = self.m.apply(p)
            f = tuple(2 * (1 - r) * pi * v + r * (Fraction(1, d) - pi) for pi, v in zip(p, mp))
            assert sum(f) == r * (1 - sum(p))
            return f
        p = np.asarray(p, dtype=float)
        rf = float(r)
        return 2 * (1 - rf) * p * (self.A @ p) + rf * (1.0 / d - p)

    def eval_g(self, p):
        f = self.eval_f(p)
        if isinstance(f, tuple):
            g = tuple(Fraction(x) + fx / 2 for x, fx in zip(p, f))
            assert min(g) >= 0
            return g
        g = np.asarray(p, dtype=float) + 0.5 * f
        assert g.min() >= -1e-15
        return g

    def jacobian(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        rf = float(self.r)
        mp = self.A @ p
        return 2 * (1 - rf) * (np.diag(mp) + p[:, None] * self.A) - rf * np.eye(self.d)


@njit(cache=True)
def _f(A, r, y):
    d = y.shape[0]
    out = np.empty(d)
    for i in range(d):
        s = 0.0
        for j in range(d):
            s += A[i, j] * y[j]
        out[i] = 2.0 * (1.0 - r) * y[i] * s + r * (1.0 / d - y[i])
    return out


@njit(cache=True)
def _rk4(A, r, y0, h, n_steps, every, out, tol):
    """Fixed-step RK4 with renormalisation; returns -1 or the failing step."""
    y = y0.copy()
    out[0] = y
    row = 1
    for k in range(n_steps):
        k1 = _f(A, r, y)
        k2 = _f(A, r, y + 0.5 * h * k1)
        k3 = _f(A, r, y + 0.5 * h * k2)
        k4 = _f(A, r, y + h * k3)
        y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if y.min() < -tol or abs(y.sum() - 1.0) > tol:
            return k
        for i in range(y.shape[0]):
            if y[i] < 0.0:
                y[i] = 0.0
        y = y / y.sum()
        if (k + 1) % every == 0:
            out[row] = y
            row += 1
    return -1


@dataclass
class OdeTrajectory:
    t: np.ndarray
    y: np.ndarray
    h: float
    entropy: np.ndarray | None = None  # D(p_star | y(t)) when a reference was given

    @property
    def final(self) -> np.ndarray:
        return self.y[-1]


def _check_lottery(p0, d) -> np.ndarray:
    p0 = np.asarray(p0, dtype=float)
    if p0.shape != (d,) or p0.min() < -1e-12 or abs(p0.sum() - 1) > 1e-9:
        raise InvalidInputError("start point is not a lottery")
    return p0


def integrate(vf: VectorField, p0: Sequence, t_end: float, h: float = 0.01, *,
              record_every: int = 1, p_star: Sequence | None = None) -> OdeTrajectory:
    """Classical RK4 on the simplex from ``p0`` up to ``t_end``.

    If a step leaves the simplex by more than ``ESCAPE_TOL`` the whole run is
    repeated with half the step size (the output grid is kept); after
    ``MAX_HALVINGS`` attempts ``SimplexEscapeError`` is raised.
    """
    if h <= 0 or t_end < 0:
        raise InvalidInputError("need h > 0 and t_end >= 0")
    p0 = _check_lottery(p0, vf.d)
    n_steps = int(round(t_end / h))
    n_rows = n_steps // record_every + 1
    rf = float(vf.r)
    for halving in range(MAX_HALVINGS + 1):
        scale = 2 ** halving
        out = np.empty((n_rows, vf.d))
        fail = _rk4(vf.A, rf, p0, h / scale, n_steps * scale, record_every * scale, out, ESCAPE_TOL)
        if fail < 0:
            break
    else:
        raise SimplexEscapeError(f"RK4 left the simplex even with step {h / scale:g}")
    t = np.arange(n_rows) * h * record_every
    ent = None
    if p_star is not None:
        ent = entropy_series(p_star, out)
    return OdeTrajectory(t, out, h, ent)


# -------------------------------------------------------------- fixed points

@dataclass(frozen=True)
class FixedPoint:
    p: np.ndarray
    r: float
    residual: float  # |f(p)|_1
    stationarity_residual: float  # max_i |2(1-r)(Mp)_i - r(1 - 1/(d p_i))|
    spread: float  # largest L1 disagreement among the random restarts


def stationarity_residual(vf: VectorField, p) -> float:
    p = np.asarray(p, dtype=float)
    rf = float(vf.r)
    lhs = 2 * (1 - rf) * (vf.A @ p)
    rhs = rf * (1 - 1 / (p * vf.d))
    return float(np.max(np.abs(lhs - rhs)))


def _newton_polish(vf: VectorField, p: np.ndarray, tol: float, max_iter: int = 50) -> np.ndarray:
    """Newton on ``f(p) = 0`` with the last equation replaced by ``sum p = 1``."""
    for _ in range(max_iter):
        F = vf.eval_f(p)
        F[-1] = p.sum() - 1
        if np.abs(F).sum() <= tol * 1e-2:
            break
        J = vf.jacobian(p)
        J[-1] = 1.0
        step = np.linalg.solve(J, -F)
        lam = 1.0
        while (p + lam * step).min() <= 0:
            lam /= 2
            if lam < 1e-8:
                raise ConvergenceError("Newton polish cannot stay inside the simplex")
        p = p + lam * step
    return p


def _converge(vf: VectorField, p0: np.ndarray, h: float, switch_tol: float,
              t_max: float, tol: float) -> np.ndarray:
    p = p0
    t, chunk = 0.0, 50.0
    while np.abs(vf.eval_f(p)).sum() > switch_tol:
        if t >= t_max:
            raise ConvergenceError(f"no fixed point within t = {t_max:g} (|f| = {np.abs(vf.eval_f(p)).sum():.2e})")
        p = integrate(vf, p, chunk, h, record_every=int(round(chunk / h))).final
        t += chunk
    p = _newton_polish(vf, p, tol)
    if np.abs(vf.eval_f(p)).sum() > tol:
        raise ConvergenceError(f"fixed point residual {np.abs(vf.eval_f(p)).sum():.2e} above {tol:g}")
    return p


def fixed_point(vf: VectorField, *, h: float = 0.01, tol: float = 1e-12, restarts: int = 10,
                seed: int = 0, switch_tol: float = 1e-6, t_max: float = 1e5) -> FixedPoint:
    """The unique zero of ``f`` for ``r > 0``.

    Integrates from the uniform lottery until ``|f|_1 <= switch_tol``,
    sharpens with a projected Newton iteration to ``|f|_1 <= tol``, and
    repeats from ``restarts`` random interior starts; all must agree to
    1e-8 in L1.
    """
    if vf.r <= 0:
        raise InvalidInputError("fixed point is unique only for r > 0")
    d = vf.d
    p = _converge(vf, np.full(d, 1.0 / d), h, switch_tol, t_max, tol)
    rng = np.random.default_rng(seed)
    spread = 0.0
    for _ in range(restarts):
        q = _converge(vf, rng.dirichlet(np.ones(d)), h, switch_tol, t_max, tol)
        spread = max(spread, float(np.abs(q - p).sum()))
    if spread > 1e-8:
        raise ConvergenceError(f"restarts disagree by {spread:.2e}; fixed point not unique?")
    if p.min() <= 0:
        raise ConvergenceError("fixed point is not interior")
    return FixedPoint(p, float(vf.r), float(np.abs(vf.eval_f(p)).sum()),
                      stationarity_residual(vf, p), spread)


def ml_limit_path(m, r_schedule: Sequence, **kwargs) -> list[FixedPoint]:
    """Fixed points along a decreasing schedule of mutation rates."""
    rs = [as_fraction(r) for r in r_schedule]
    if any(r <= 0 for r in rs) or any(a <= b for a, b in zip(rs, rs[1:])):
        raise InvalidInputError("schedule must be positive and strictly decreasing")
    return [fixed_point(VectorField(m, r), **kwargs) for r in rs]


# ------------------------------------------------------------------ entropy

def _divergence_terms(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Nonnegative terms ``p log(p/q) - p + q``; they sum to D(p|q) on the simplex.

    ``p`` and ``q`` broadcast against each other; requires ``q > 0`` where ``p > 0``.
    """
    p, q = np.broadcast_arrays(np.asarray(p, dtype=float), np.asarray(q, dtype=float))
    out = q.copy()
    pos = p > 0
    u = p[pos] / q[pos] - 1
    small = np.abs(u) < 1e-4
    val = np.empty_like(u)
    us = u[small]
    # series of (1+u) log(1+u) - u, avoiding cancellation near u = 0
    val[small] = us * us * (0.5 - us / 6 + us * us / 12)
    ub = u[~small]
    val[~small] = (1 + ub) * np.log1p(ub) - ub
    out[pos] = q[pos] * val
    return out


def relative_entropy(p: Sequence, q: Sequence, base: float | None = None) -> float:
    """``D(p | q) = sum_i p_i log(p_i / q_i)``; natural log unless ``base`` is given.

    Infinite when some ``q_i = 0 < p_i``.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any((q <= 0) & (p > 0)):
        return float("inf")
    D = float(_divergence_terms(p, q).sum())
    return D / np.log(base) if base else D


def entropy_series(p_star: Sequence, Y: np.ndarray) -> np.ndarray:
    """``D(p_star | y)`` for every row ``y`` of ``Y``."""
    p_star = np.asarray(p_star, dtype=float)
    Y = np.asarray(Y, dtype=float)
    bad = np.any((Y <= 0) & (p_star > 0), axis=1)
    D = _divergence_terms(p_star, Y).sum(axis=1)
    D[bad] = np.inf
    return D


@dataclass
class EntropyDiagnostics:
    t: np.ndarray
    D: np.ndarray
    slope: np.ndarray  # central finite differences of D
    bound_l1: np.ndarray  # -(r / (d sqrt d)) |p_star - y|_1^2
    bound_l2: np.ndarray  # same constant with the Euclidean norm
    slack: float

    @property
    def nonincreasing(self) -> bool:
        return bool(np.all(np.diff(self.D) <= 1e-9))

    @property
    def slope_ok(self) -> np.ndarray:
        return self.slope <= (1 - self.slack) * self.bound_l1 + 1e-12

    @property
    def bound_holds(self) -> bool:
        return bool(np.all(self.slope_ok))


def entropy_diagnostics(traj: OdeTrajectory, p_star: Sequence, r, *, slack: float = 0.1) -> EntropyDiagnostics:
    """Relative entropy of ``p_star`` w.r.t. the trajectory and its decay rate."""
    p_star = np.asarray(p_star, dtype=float)
    if p_star.min() <= 0:
        raise InvalidInputError("reference lottery must be strictly positive")
    if traj.y.min() <= 0:
        raise InvalidInputError("trajectory touches the boundary; relative entropy undefined")
    d = p_star.shape[0]
    D = entropy_series(p_star, traj.y)
    slope = np.gradient(D, traj.t)
    x = p_star - traj.y
    c = float(as_fraction(r)) / (d * np.sqrt(d))
    return EntropyDiagnostics(traj.t, D, slope, -c * np.abs(x).sum(axis=1) ** 2,
                              -c * (x ** 2).sum(axis=1), slack)


def interior_start(p0: Sequence, weight: float = 1e-9) -> np.ndarray:
    """Mix ``p0`` with the uniform lottery so that every entry is positive."""
    p0 = np.asarray(p0, dtype=float)
    return (1 - weight) * p0 + weight / p0.shape[0]
