"""Exact finite-state analysis of the urn chain.

States are compositions of N balls into d labels.  They are indexed with
the combinatorial number system: a composition ``c`` corresponds to the
"bars" ``b_k = c_1 + ... + c_k + k - 1`` (k = 1..d-1), a (d-1)-subset of
``{0, ..., N+d-2}``, and its index is ``sum_k C(b_k, k)``.  The index is
therefore portable across implementations.

The kernel can be built in floating point (sparse CSR) or, for small
chains, with exact ``Fraction`` entries.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, InvalidInputError, ReducibleChainError, ResourceLimitError
from .prefs import as_fraction, as_majority

DEFAULT_STATE_CAP = 200_000
# exact rational GTH elimination is cubic in the state count
EXACT_STATE_LIMIT = 120


def n_states(d: int, N: int) -> int:
    return comb(N + d - 1, d - 1)


class StateIndex:
    """Bijection between compositions of ``N`` into ``d`` parts and ``0 .. n-1``."""

    def __init__(self, d: int, N: int):
        if d < 1 or N < 1:
            raise InvalidInputError("need d >= 1 and N >= 1")
        self.d, self.N = d, N
        self.size = n_states(d, N)
        top = N + d - 1
        self._binom = np.array([[comb(n, k) for k in range(d)] for n in range(top + 1)], dtype=np.int64)
        bars = np.array(list(itertools.combinations(range(top), d - 1)), dtype=np.int64)
        bars = bars.reshape(self.size, d - 1)
        edges = np.hstack([np.full((self.size, 1), -1), bars, np.full((self.size, 1), top)])
        comps = np.diff(edges, axis=1) - 1
        states = np.zeros_like(comps)
        states[self.ranks(comps)] = comps
        self.states = states
        self.states.setflags(write=False)

    def _from_bars(self, bars):
        edges = (-1,) + tuple(bars) + (self.N + self.d - 1,)
        return [edges[k + 1] - edges[k] - 1 for k in range(self.d)]

    def ranks(self, counts: np.ndarray) -> np.ndarray:
        """Vectorised rank of an ``(n, d)`` array of compositions."""
        counts = np.atleast_2d(np.asarray(counts, dtype=np.int64))
        bars = np.cumsum(counts[:, :-1], axis=1) + np.arange(self.d - 1)
        out = np.zeros(counts.shape[0], dtype=np.int64)
        for k in range(1, self.d):
            out += self._binom[bars[:, k - 1], k]
        return out

    def rank(self, counts: Sequence[int]) -> int:
        counts = list(counts)
        if len(counts) != self.d or sum(counts) != self.N or min(counts) < 0:
            raise InvalidInputError(f"{counts!r} is not a composition of {self.N} into {self.d} parts")
        total, acc = 0, 0
        for k in range(1, self.d):
            acc += counts[k - 1]
            total += comb(acc + k - 1, k)
        return total

    def unrank(self, index: int) -> tuple:
        if not 0 <= index < self.size:
            raise InvalidInputError(f"state index {index} out of range")
        bars = []
        rem = index
        for k in range(self.d - 1, 0, -1):
            b = k - 1
            while comb(b + 1, k) <= rem:
                b += 1
            bars.append(b)
            rem -= comb(b, k)
        return tuple(self._from_bars(bars[::-1]))


@dataclass
class Kernel:
    index: StateIndex
    r: Fraction
    matrix: sp.csr_matrix
    # exact rows {column: Fraction}; present only when built with exact=True
    exact_rows: list | None = None

    @property
    def d(self) -> int:
        return self.index.d

    @property
    def N(self) -> int:
        return self.index.N

    def entry(self, src: Sequence[int], dst: Sequence[int]):
        a, b = self.index.rank(src), self.index.rank(dst)
        if self.exact_rows is not None:
            return self.exact_rows[a].get(b, Fraction(0))
        return float(self.matrix[a, b])


def _transitions(states: np.ndarray, N: int, M: np.ndarray, r: float, d: int):
    """Off-diagonal moves (src row, i gains, j loses, probability) for every state."""
    p = states / N
    src, gain, lose, prob = [], [], [], []
    rows = np.arange(states.shape[0])
    for i in range(d):
        for j in range(d):
            if i == j:
                continue
            ok = states[:, j] > 0
            w = (1 - r) * 2 * p[ok, i] * p[ok, j] * M[i, j] + (r / d) * p[ok, j]
            keep = w > 0
            src.append(rows[ok][keep])
            gain.append(np.full(keep.sum(), i))
            lose.append(np.full(keep.sum(), j))
            prob.append(w[keep])
    return (np.concatenate(src), np.concatenate(gain).astype(np.int64),
            np.concatenate(lose).astype(np.int64), np.concatenate(prob))


def build_kernel(d: int, N: int, r, m, *, exact: bool | None = None,
                 state_cap: int = DEFAULT_STATE_CAP) -> Kernel:
    """Transition matrix of the urn chain with replacement sampling.

    Moving one ball from label ``j`` to ``i`` has probability
    ``(1-r) 2 p_i p_j M(i,j) + (r/d) p_j``; the remainder stays put.

    Parameters
    ----------
    d, N : int
    r : float or Fraction
    m : margin or majority matrix (see ``prefs.as_majority``)
    exact : bool, optional
        Also build exact rational rows.  Defaults to True when the chain
        has at most ``EXACT_STATE_LIMIT`` states.
    state_cap : int
        Refuse chains with more states than this.
    """
    size = n_states(d, N)
    if size > state_cap:
        raise ResourceLimitError(
            f"chain has {size} states, above the cap of {state_cap}; use smaller N or d")
    maj = as_majority(m)
    if maj.d != d:
        raise InvalidInputError(f"matrix has d={maj.d}, chain has d={d}")
    r = as_fraction(r)
    if not 0 <= r <= 1:
        raise InvalidInputError(f"mutation rate {r} outside [0, 1]")
    if exact is None:
        exact = size <= EXACT_STATE_LIMIT

    idx = StateIndex(d, N)
    M = maj.to_array()
    states = idx.states
    src, gain, lose, prob = _transitions(states, N, M, float(r), d)
    dst_counts = states[src].copy()
    dst_counts[np.arange(len(src)), gain] += 1
    dst_counts[np.arange(len(src)), lose] -= 1
    dst = idx.ranks(dst_counts)
    stay = 1.0 - np.bincount(src, weights=prob, minlength=size)
    rows = np.concatenate([src, np.arange(size)])
    cols = np.concatenate([dst, np.arange(size)])
    vals = np.concatenate([prob, stay])
    matrix = sp.csr_matrix((vals, (rows, cols)), shape=(size, size))
    matrix.eliminate_zeros()

    exact_rows = None
    if exact:
        Mx = maj.entries
        exact_rows = []
        for s in range(size):
            c = states[s]
            row = {}
            for i in range(d):
                for j in range(d):
                    if i == j or c[j] == 0:
                        continue
                    pi, pj = Fraction(int(c[i]), N), Fraction(int(c[j]), N)
                    w = (1 - r) * 2 * pi * pj * Mx[i][j] + r / d * pj
                    if w:
                        t = list(c)
                        t[i] += 1
                        t[j] -= 1
                        row[idx.rank(t)] = w
            row[s] = 1 - sum(row.values(), Fraction(0))
            exact_rows.append(row)
    return Kernel(idx, r, matrix, exact_rows)


@dataclass
class StationaryDist:
    index: StateIndex
    pi: np.ndarray
    residual: float
    method: str
    exact: tuple | None = None

    def mass(self, mask: np.ndarray) -> float:
        return float(self.pi[mask].sum())

    def mean_state(self) -> np.ndarray:
        return self.pi @ (self.index.states / self.index.N)


def _gth_exact(rows: list, size: int) -> tuple:
    """Grassmann-Taksar-Heyman elimination over the rationals."""
    A = [dict(row) for row in rows]
    for s in range(size):
        A[s].pop(s, None)
    for k in range(size - 1, 0, -1):
        out = sum((v for j, v in A[k].items() if j < k), Fraction(0))
        if out == 0:
            raise ReducibleChainError("chain is reducible (zero exit mass during elimination)")
        into_k = [(i, A[i][k] / out) for i in range(k) if A[i].get(k)]
        k_row = [(j, v) for j, v in A[k].items() if j < k]
        for i, a in into_k:
            A[i][k] = a
            row = A[i]
            for j, v in k_row:
                if j != i:
                    row[j] = row.get(j, Fraction(0)) + a * v
    x = [Fraction(0)] * size
    x[0] = Fraction(1)
    for k in range(1, size):
        x[k] = sum((x[i] * A[i][k] for i in range(k) if A[i].get(k)), Fraction(0))
    total = sum(x, Fraction(0))
    return tuple(v / total for v in x)


def _residual(P: sp.csr_matrix, pi: np.ndarray) -> float:
    return float(np.abs(P.T @ pi - pi).sum())


def stationary(kernel: Kernel, method: str = "auto", *, tol: float = 1e-12,
               max_iter: int = 1_000_000, start: np.ndarray | None = None) -> StationaryDist:
    """Stationary distribution of an irreducible urn chain (``r > 0``).

    Methods: ``"gth"`` exact rational elimination (needs exact rows),
    ``"direct"`` sparse LU solve, ``"power"`` power iteration to L1
    residual ``tol``.  ``"auto"`` picks ``gth`` when exact rows exist and
    ``direct`` otherwise.
    """
    if kernel.r == 0:
        raise ReducibleChainError(
            "r = 0: every degenerate state is absorbing, so the stationary distribution is not unique")
    P = kernel.matrix
    size = P.shape[0]
    if method == "auto":
        method = "gth" if kernel.exact_rows is not None else "direct"

    exact = None
    if method == "gth":
        if kernel.exact_rows is None:
            raise InvalidInputError("exact stationary solve needs a kernel built with exact=True")
        exact = _gth_exact(kernel.exact_rows, size)
        pi = np.array([float(x) for x in exact])
    elif method == "direct":
        A = (P.T - sp.identity(size, format="csr")).tolil()
        A[0, :] = np.ones(size)
        b = np.zeros(size)
        b[0] = 1.0
        pi = spla.spsolve(A.tocsc(), b)
        pi = np.clip(pi, 0.0, None)
        pi /= pi.sum()
    elif method == "power":
        pi = np.full(size, 1.0 / size) if start is None else np.asarray(start, dtype=float)
        pi = pi / pi.sum()
        PT = P.T.tocsr()
        for _ in range(max_iter):
            nxt = PT @ pi
            if np.abs(nxt - pi).sum() <= tol:
                pi = nxt / nxt.sum()
                break
            pi = nxt
        else:
            raise ConvergenceError(f"power iteration did not reach residual {tol} in {max_iter} steps")
    else:
        raise InvalidInputError(f"unknown stationary method {method!r}")

    res = _residual(P, pi)
    if res > max(tol, 1e-12) * 10:
        raise ConvergenceError(f"stationary residual {res:.3e} above tolerance")
    return StationaryDist(kernel.index, pi, res, method, exact)


def ball_mask(index: StateIndex, center: Sequence, delta: float) -> np.ndarray:
    """States strictly within L1 distance ``delta`` of ``center``."""
    dist = np.abs(index.states / index.N - np.asarray(center, dtype=float)).sum(axis=1)
    return dist < delta - 1e-12


def ball_mass(dist: StationaryDist, center: Sequence, delta: float) -> float:
    return dist.mass(ball_mask(dist.index, center, delta))


def level_set_masses(dist: StationaryDist, i: int, exact: bool = False) -> np.ndarray | tuple:
    """``sigma_k``: stationary mass of states with exactly ``k`` balls labelled ``i``."""
    k = dist.index.states[:, i]
    if exact:
        if dist.exact is None:
            raise InvalidInputError("no exact stationary distribution available")
        sig = [Fraction(0)] * (dist.index.N + 1)
        for kk, x in zip(k, dist.exact):
            sig[kk] += x
        return tuple(sig)
    return np.bincount(k, weights=dist.pi, minlength=dist.index.N + 1)


def updown_bounds(d: int, N: int, r, alpha, k: int) -> tuple[Fraction, Fraction]:
    """Lower bound on the up-move and upper bound on the down-move mass at level ``k``."""
    if not 0 <= k <= N:
        raise InvalidInputError(f"level {k} outside 0..{N}")
    r, alpha = as_fraction(r), as_fraction(alpha)
    if not 0 < alpha <= Fraction(1, 2):
        raise InvalidInputError("alpha must lie in (0, 1/2]")
    duel = 2 * (1 - r) * Fraction(k * (N - k), N * N)
    u = duel * (Fraction(1, 2) + alpha) + r / d * Fraction(N - k, N)
    dn = duel * (Fraction(1, 2) - alpha) + r * Fraction(d - 1, d) * Fraction(k, N)
    return u, dn


def level_moves(kernel: Kernel, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-state probability of gaining and of losing one ball of label ``i``."""
    states = kernel.index.states
    P = kernel.matrix.tocoo()
    delta = states[P.col, i] - states[P.row, i]
    size = P.shape[0]
    up = np.bincount(P.row, weights=P.data * (delta == 1), minlength=size)
    down = np.bincount(P.row, weights=P.data * (delta == -1), minlength=size)
    return up, down


def stationary_csv(dist: StationaryDist) -> str:
    """CSV text with columns state, count_1..count_d, pi."""
    d = dist.index.d
    lines = [",".join(["state"] + [f"count_{a + 1}" for a in range(d)] + ["pi"])]
    for s, (counts, x) in enumerate(zip(dist.index.states, dist.pi)):
        lines.append(",".join([str(s)] + [str(int(c)) for c in counts] + [repr(float(x))]))
    return "\n".join(lines) + "\n"
