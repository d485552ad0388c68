"""Monte Carlo simulation of the mutation-perturbed urn process.

Each round either relabels one uniformly drawn ball with a uniform
alternative (probability ``r``) or holds a duel: two balls are drawn, a
voter judgment is sampled, and the losing ball takes the winner's label.

Random numbers come from numpy's PCG64 generator seeded with
``SimConfig.seed``.  Every round consumes exactly four uniforms from that
stream, drawn in fixed-size chunks, so a run is reproducible across
platforms and independent of the chunk size.  The per-round work happens
in a numba-compiled loop.

Conventions
-----------
``X(0)`` is the initial state and ``X(k)`` the state after round ``k``.
The temporal average after ``n`` rounds is the mean of ``X(0) .. X(n-1)``;
sojourn fractions count ``X(1) .. X(n)``.  Distances are L1.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np
from numba import njit

from .errors import InvalidInputError
from .prefs import as_majority, as_margin

CHUNK_ROUNDS = 1 << 16
# strict-inequality guard for float L1 distances on lattice points
_DIST_EPS = 1e-12


# ----------------------------------------------------------------- state

@dataclass(frozen=True)
class UrnState:
    counts: tuple

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if not counts or any(c < 0 for c in counts) or sum(counts) < 1:
            raise InvalidInputError(f"invalid urn counts {self.counts!r}")
        object.__setattr__(self, "counts", counts)

    @property
    def N(self) -> int:
        return sum(self.counts)

    @property
    def d(self) -> int:
        return len(self.counts)

    @classmethod
    def uniform(cls, d: int, N: int) -> "UrnState":
        """As even a split as possible; the first ``N % d`` labels get one extra ball."""
        q, rem = divmod(N, d)
        return cls(tuple(q + (a < rem) for a in range(d)))

    @classmethod
    def degenerate(cls, d: int, N: int, i: int) -> "UrnState":
        if not 0 <= i < d:
            raise InvalidInputError(f"alternative index {i + 1} out of range 1..{d}")
        return cls(tuple(N if a == i else 0 for a in range(d)))

    def lottery(self, exact: bool = False):
        if exact:
            return tuple(Fraction(c, self.N) for c in self.counts)
        return np.array(self.counts, dtype=float) / self.N


def parse_init(spec: str, d: int, N: int) -> UrnState:
    """``uniform``, ``degenerate:i`` (1-indexed) or ``counts:c1,c2,...``."""
    if spec == "uniform":
        return UrnState.uniform(d, N)
    kind, _, arg = spec.partition(":")
    if kind == "degenerate" and arg.strip().isdigit():
        return UrnState.degenerate(d, N, int(arg) - 1)
    if kind == "counts":
        try:
            state = UrnState(tuple(int(x) for x in arg.split(",")))
        except ValueError:
            raise InvalidInputError(f"bad counts in init {spec!r}") from None
        if state.d != d or state.N != N:
            raise InvalidInputError(f"init {spec!r} does not match d={d}, N={N}")
        return state
    raise InvalidInputError(f"unknown init {spec!r}; use uniform, degenerate:i or counts:...")


@dataclass(frozen=True)
class SimConfig:
    """Configuration of a single urn run.

    ``init`` is ``"uniform"``, ``"degenerate:i"`` (1-indexed) or
    ``"counts:c1,...,cd"``.  ``queries`` lists ``(center, delta)`` balls
    whose sojourn fractions are tracked over all rounds.  ``checkpoints``
    are round counts at which those sojourn counters are also reported.
    """

    N: int
    r: float
    rounds: int
    seed: int = 0
    init: str = "uniform"
    sampling: str = "with"
    winner_period: int = 1
    stride: int | None = None
    queries: tuple = ()
    checkpoints: tuple = ()
    record_winners: bool = True

    def __post_init__(self):
        if self.N < 1:
            raise InvalidInputError("N must be at least 1")
        if not 0 <= self.r <= 1:
            raise InvalidInputError(f"mutation rate {self.r} outside [0, 1]")
        if self.rounds < 0:
            raise InvalidInputError("rounds must be nonnegative")
        if self.sampling not in ("with", "without"):
            raise InvalidInputError(f"sampling must be 'with' or 'without', got {self.sampling!r}")
        if self.sampling == "without" and self.N < 2:
            raise InvalidInputError("sampling without replacement needs N >= 2")
        if self.winner_period < 1:
            raise InvalidInputError("winner_period must be positive")
        if self.stride is not None and self.stride < 1:
            raise InvalidInputError("stride must be positive")
        if any(c < 1 or c > self.rounds for c in self.checkpoints):
            raise InvalidInputError("checkpoints must lie in 1..rounds")

    @property
    def effective_stride(self) -> int:
        return self.stride if self.stride is not None else max(1, self.rounds // 10000)

    def initial_state(self, d: int) -> UrnState:
        return parse_init(self.init, d, self.N)

    def as_dict(self) -> dict:
        return {
            "N": self.N, "r": self.r, "rounds": self.rounds, "seed": self.seed,
            "init": self.init, "sampling": self.sampling,
            "winner_period": self.winner_period, "stride": self.effective_stride,
            "queries": [[list(map(float, c)), float(dl)] for c, dl in self.queries],
            "checkpoints": list(self.checkpoints),
        }


@dataclass
class RunRecord:
    config: SimConfig
    d: int
    snapshot_rounds: np.ndarray
    trajectory: np.ndarray  # counts at snapshot_rounds, shape (S, d)
    snapshot_sums: np.ndarray  # sum of X(0..k-1) at each snapshot round k
    winner_counts: np.ndarray
    winners: np.ndarray | None  # per round, -1 where no winner was drawn
    sojourn: dict = field(default_factory=dict)
    sojourn_at: np.ndarray | None = None  # (len(checkpoints), len(queries))

    @property
    def rounds(self) -> int:
        return self.config.rounds

    @property
    def final_state(self) -> UrnState:
        return UrnState(tuple(self.trajectory[-1]))

    @property
    def temporal_average(self) -> np.ndarray | None:
        """Mean of ``X(0) .. X(n-1)`` as a lottery; ``None`` when no round ran."""
        if self.rounds == 0:
            return None
        return self.snapshot_sums[-1] / (self.rounds * self.config.N)

    @property
    def empirical_winner_dist(self) -> np.ndarray | None:
        total = self.winner_counts.sum()
        if total == 0:
            return None
        return self.winner_counts / total

    def zbar(self) -> np.ndarray:
        """Temporal average at each snapshot round (NaN at round 0)."""
        k = self.snapshot_rounds.astype(float)
        out = np.full(self.snapshot_sums.shape, np.nan)
        pos = k > 0
        out[pos] = self.snapshot_sums[pos] / (k[pos, None] * self.config.N)
        return out

    def summary(self) -> dict:
        za = self.temporal_average
        wd = self.empirical_winner_dist
        return {
            "rounds": self.rounds,
            "final_counts": [int(c) for c in self.trajectory[-1]],
            "temporal_average": None if za is None else [float(x) for x in za],
            "sojourn": [
                {"center": [float(x) for x in c], "delta": float(dl), "fraction": float(f)}
                for (c, dl), f in self.sojourn.items()
            ],
            "winner_counts": [int(c) for c in self.winner_counts],
            "empirical_winner_dist": None if wd is None else [float(x) for x in wd],
        }


# ------------------------------------------------------------ jit kernels

@njit(cache=True)
def _label_of(counts, idx):
    acc = 0
    for a in range(counts.shape[0]):
        acc += counts[a]
        if idx < acc:
            return a
    return counts.shape[0] - 1


@njit(cache=True)
def _step(counts, N, M, r, without, u0, u1, u2, u3):
    """Advance ``counts`` in place by one round; return the winner or -1."""
    d = counts.shape[0]
    if u0 < r:
        a = _label_of(counts, min(int(u1 * N), N - 1))
        b = min(int(u2 * d), d - 1)
        counts[a] -= 1
        counts[b] += 1
        return -1
    i1 = min(int(u1 * N), N - 1)
    if without:
        i2 = min(int(u2 * (N - 1)), N - 2)
        if i2 >= i1:
            i2 += 1
    else:
        i2 = min(int(u2 * N), N - 1)
    a = _label_of(counts, i1)
    b = _label_of(counts, i2)
    if a == b:
        return a
    if u3 < M[a, b]:
        counts[b] -= 1
        counts[a] += 1
        return a
    if u3 < M[a, b] + M[b, a]:
        counts[a] -= 1
        counts[b] += 1
        return b
    return -1


@njit(cache=True)
def _run_chunk(counts, N, M, r, without, U, k0, period, stride, sums,
               centers, deltas, soj, checkpoints, soj_at,
               snap_counts, snap_sums, snap_round, winners, wcounts, pos):
    # pos = [next checkpoint, next snapshot slot]
    d = counts.shape[0]
    nq = deltas.shape[0]
    for t in range(U.shape[0]):
        k = k0 + t
        for a in range(d):
            sums[a] += counts[a]
        w = _step(counts, N, M, r, without, U[t, 0], U[t, 1], U[t, 2], U[t, 3])
        k1 = k + 1
        if w >= 0 and k1 % period == 0:
            wcounts[w] += 1
            if winners.shape[0] > 0:
                winners[k] = w
        for q in range(nq):
            dist = 0.0
            for a in range(d):
                dist += abs(counts[a] / N - centers[q, a])
            if dist < deltas[q] - 1e-12:
                soj[q] += 1
        if pos[0] < checkpoints.shape[0] and checkpoints[pos[0]] == k1:
            for q in range(nq):
                soj_at[pos[0], q] = soj[q]
            pos[0] += 1
        if k1 % stride == 0:
            s = pos[1]
            for a in range(d):
                snap_counts[s, a] = counts[a]
                snap_sums[s, a] = sums[a]
            snap_round[s] = k1
            pos[1] += 1


@njit(cache=True)
def _sample_steps(counts0, N, M, r, without, U, out, winners):
    d = counts0.shape[0]
    c = counts0.copy()
    for t in range(U.shape[0]):
        for a in range(d):
            c[a] = counts0[a]
        winners[t] = _step(c, N, M, r, without, U[t, 0], U[t, 1], U[t, 2], U[t, 3])
        for a in range(d):
            out[t, a] = c[a]


# ----------------------------------------------------------- public API

def _majority_array(m) -> np.ndarray:
    return np.ascontiguousarray(as_majority(m).to_array())


def step(state: UrnState, m, r: float, rng: np.random.Generator,
         sampling: str = "with") -> tuple[UrnState, int | None]:
    """One round of the process from ``state``.

    Returns the new state and the round's winner (0-indexed), or ``None``
    for mutation rounds and duels where the sampled voter is indifferent.
    """
    counts = np.array(state.counts, dtype=np.int64)
    u = rng.random(4)
    w = _step(counts, state.N, _majority_array(m), float(r), sampling == "without",
              u[0], u[1], u[2], u[3])
    return UrnState(tuple(counts)), (None if w < 0 else int(w))


def sample_transitions(state: UrnState, m, r: float, n: int, rng: np.random.Generator,
                       sampling: str = "with") -> tuple[np.ndarray, np.ndarray]:
    """``n`` independent single rounds from the same ``state``.

    Returns the resulting counts, shape ``(n, d)``, and the winners
    (-1 where none was drawn).
    """
    if sampling == "without" and state.N < 2:
        raise InvalidInputError("sampling without replacement needs N >= 2")
    U = rng.random((n, 4))
    out = np.empty((n, state.d), dtype=np.int64)
    winners = np.empty(n, dtype=np.int64)
    _sample_steps(np.array(state.counts, dtype=np.int64), state.N, _majority_array(m),
                  float(r), sampling == "without", U, out, winners)
    return out, winners


def winner_distribution(p: Sequence, m) -> tuple | np.ndarray:
    """Law of a duel's winner when balls are drawn from ``p``: ``w_i = p_i (1 + (M p)_i)``.

    Exact for rational ``p``; float otherwise.
    """
    mm = as_margin(m)
    if all(isinstance(x, (int, Fraction)) for x in p):
        p = [Fraction(x) for x in p]
        w = tuple(pi * (1 + v) for pi, v in zip(p, mm.apply(p)))
        assert sum(w) == 1 and min(w) >= 0
        return w
    p = np.asarray(p, dtype=float)
    w = p * (1 + mm.to_array() @ p)
    assert abs(w.sum() - 1) < 1e-9 and w.min() >= -1e-12
    return w


def run(cfg: SimConfig, m) -> RunRecord:
    """Simulate ``cfg.rounds`` rounds; deterministic given ``cfg``."""
    M = _majority_array(m)
    d = M.shape[0]
    init = cfg.initial_state(d)
    counts = np.array(init.counts, dtype=np.int64)
    stride = cfg.effective_stride

    n_snap = cfg.rounds // stride + 2
    snap_counts = np.zeros((n_snap, d), dtype=np.int64)
    snap_sums = np.zeros((n_snap, d), dtype=np.int64)
    snap_round = np.zeros(n_snap, dtype=np.int64)
    snap_counts[0] = counts
    pos = np.array([0, 1], dtype=np.int64)

    sums = np.zeros(d, dtype=np.int64)
    centers = np.array([np.asarray(c, dtype=float) for c, _ in cfg.queries]).reshape(-1, d)
    deltas = np.array([float(dl) for _, dl in cfg.queries], dtype=float)
    soj = np.zeros(len(cfg.queries), dtype=np.int64)
    checkpoints = np.array(sorted(set(cfg.checkpoints)), dtype=np.int64)
    soj_at = np.zeros((len(checkpoints), len(cfg.queries)), dtype=np.int64)
    winners = np.full(cfg.rounds if cfg.record_winners else 0, -1, dtype=np.int16)
    wcounts = np.zeros(d, dtype=np.int64)

    rng = np.random.default_rng(cfg.seed)
    done = 0
    while done < cfg.rounds:
        n = min(CHUNK_ROUNDS, cfg.rounds - done)
        U = rng.random((n, 4))
        _run_chunk(counts, cfg.N, M, float(cfg.r), cfg.sampling == "without", U, done,
                   cfg.winner_period, stride, sums, centers, deltas, soj, checkpoints,
                   soj_at, snap_counts, snap_sums, snap_round, winners, wcounts, pos)
        done += n

    used = int(pos[1])
    if snap_round[used - 1] != cfg.rounds:
        snap_counts[used] = counts
        snap_sums[used] = sums
        snap_round[used] = cfg.rounds
        used += 1

    sojourn = {}
    if cfg.rounds > 0:
        for (c, dl), s in zip(cfg.queries, soj):
            sojourn[(tuple(c), dl)] = int(s) / cfg.rounds
    return RunRecord(
        config=cfg, d=d,
        snapshot_rounds=snap_round[:used].copy(),
        trajectory=snap_counts[:used].copy(),
        snapshot_sums=snap_sums[:used].copy(),
        winner_counts=wcounts,
        winners=winners if cfg.record_winners else None,
        sojourn=sojourn,
        sojourn_at=soj_at if len(checkpoints) else None,
    )


def _run_packed(args):
    cfg, m = args
    return run(cfg, m)


def run_many(cfgs: Sequence[SimConfig], m, jobs: int = 1) -> list[RunRecord]:
    """Independent runs, optionally spread over ``jobs`` worker processes."""
    m = as_majority(m)
    if jobs <= 1 or len(cfgs) <= 1:
        return [run(c, m) for c in cfgs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_packed, [(c, m) for c in cfgs]))


def seed_schedule(seed: int, runs: int) -> list[int]:
    """Independent 64-bit seeds for ``runs`` replicate runs, derived from ``seed``."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(runs, dtype=np.uint64)]


def sojourn_fraction(record: RunRecord, center: Sequence, delta: float) -> float:
    """Fraction of rounds ``1..n`` whose state is strictly within ``delta`` of ``center``.

    Uses the exact counter when ``(center, delta)`` was among the configured
    queries; otherwise it needs a trajectory recorded with stride 1.
    """
    if record.rounds == 0:
        raise InvalidInputError("sojourn fraction of an empty run is undefined")
    key = (tuple(center), delta)
    if key in record.sojourn:
        return record.sojourn[key]
    if record.config.effective_stride != 1:
        raise InvalidInputError("ball not tracked during the run; add it to queries or use stride=1")
    states = record.trajectory[1:] / record.config.N
    dist = np.abs(states - np.asarray(center, dtype=float)).sum(axis=1)
    return float(np.mean(dist < delta - _DIST_EPS))


@dataclass(frozen=True)
class ConcentrationTable:
    n_grid: tuple
    reference: float
    epsilon: float
    fractions: np.ndarray  # (runs, len(n_grid))
    failures: tuple

    @property
    def frequencies(self) -> tuple:
        runs = self.fractions.shape[0]
        return tuple(f / runs for f in self.failures)


def concentration_experiment(cfg: SimConfig, m, center: Sequence, delta: float, epsilon: float,
                             n_grid: Sequence[int], runs: int, reference: float | None = None,
                             jobs: int = 1) -> ConcentrationTable:
    """How often the sojourn fraction after ``n`` rounds misses ``reference`` by more than ``epsilon``.

    Each replicate is one run of ``max(n_grid)`` rounds with its own seed
    from ``seed_schedule(cfg.seed, runs)``; the value for each ``n`` is read
    off that run after ``n`` rounds.  ``reference`` defaults to the mean
    fraction at the largest ``n``.
    """
    if runs < 30:
        raise InvalidInputError("concentration experiments need at least 30 runs")
    if not n_grid or min(n_grid) < 1:
        raise InvalidInputError("n_grid must contain positive round counts")
    query = (tuple(float(x) for x in center), float(delta))
    base = replace(cfg, rounds=max(n_grid), queries=(query,), checkpoints=tuple(sorted(set(n_grid))),
                   stride=max(n_grid), record_winners=False)
    cfgs = [replace(base, seed=s) for s in seed_schedule(cfg.seed, runs)]
    records = run_many(cfgs, m, jobs=jobs)
    ck = list(base.checkpoints)
    fr = np.array([[rec.sojourn_at[ck.index(n), 0] / n for n in n_grid] for rec in records])
    if reference is None:
        reference = float(fr[:, int(np.argmax(n_grid))].mean())
    failures = tuple(int(np.sum(np.abs(fr[:, j] - reference) > epsilon)) for j in range(len(n_grid)))
    return ConcentrationTable(tuple(n_grid), float(reference), float(epsilon), fr, failures)


# ------------------------------------------------------------------ output

def run_csv(record: RunRecord) -> str:
    """CSV text of the strided trajectory: round, counts, winner, temporal average."""
    d = record.d
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["round"] + [f"count_{a + 1}" for a in range(d)] + ["winner"]
               + [f"zbar_{a + 1}" for a in range(d)])
    zbar = record.zbar()
    for k, counts, z in zip(record.snapshot_rounds, record.trajectory, zbar):
        win = ""
        if k > 0 and record.winners is not None and record.winners[k - 1] >= 0:
            win = str(int(record.winners[k - 1]) + 1)
        zs = [""] * d if k == 0 else [repr(float(x)) for x in z]
        w.writerow([int(k)] + [int(c) for c in counts] + [win] + zs)
    return buf.getvalue()


def write_run_csv(record: RunRecord, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(run_csv(record))
