"""Approximate axiom checks for lottery-valued voting rules.

A rule maps a fractional profile to a lottery.  It is a delta-approximation
of maximal lotteries if its output is within ``delta`` (L1) of the maximal
lottery.  Rules here are single-valued, so the checks only use profiles
whose maximal lottery is unique, and two outputs are treated as
"intersecting" when they are within ``2 delta`` of each other.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from . import urn
from .errors import InvalidInputError
from .lottery import Uniqueness, condorcet_winner, maximal_lottery
from .prefs import FractionalProfile, Profile, margin_matrix, mix, random_profile

SCOPE_NOTE = "single-valued rules; only profiles with a unique maximal lottery are used"


def _as_fractional(p) -> FractionalProfile:
    return p.to_fractional() if isinstance(p, Profile) else p


def _l1(a, b):
    if all(isinstance(x, Fraction) for x in list(a) + list(b)):
        return sum((abs(x - y) for x, y in zip(a, b)), Fraction(0))
    return float(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)).sum())


@dataclass(frozen=True)
class ApproxRule:
    fn: Callable[[FractionalProfile], Sequence]
    delta: Fraction | float
    name: str

    def __call__(self, profile) -> tuple:
        profile = _as_fractional(profile)
        out = tuple(self.fn(profile))
        if len(out) != profile.d or min(out) < 0 or abs(float(sum(out)) - 1) > 1e-9:
            raise InvalidInputError(f"rule {self.name} returned a non-lottery {out!r}")
        ml = maximal_lottery(margin_matrix(profile))
        if ml.unique is Uniqueness.UNIQUE:
            dist = _l1(out, ml.lottery)
            if not (dist == 0 or dist < self.delta):
                raise InvalidInputError(
                    f"rule {self.name} is {float(dist):.3g} from the maximal lottery, declared {self.delta}")
        return out


def exact_ml_rule() -> ApproxRule:
    return ApproxRule(lambda p: maximal_lottery(margin_matrix(p)).lottery, Fraction(0), "exact-ml")


def _profile_seed(profile: FractionalProfile, seed: int) -> int:
    key = repr((seed, profile.d, [(sorted(rel.pairs), str(w)) for rel, w in profile.weights]))
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "little")


def perturbed_ml_rule(delta: float, seed: int = 0) -> ApproxRule:
    """Maximal lottery mixed with a profile-seeded random lottery at weight ``0.99 delta / 2``."""
    t = 0.99 * delta / 2

    def fn(p):
        ml = maximal_lottery(margin_matrix(p)).as_floats()
        q = np.random.default_rng(_profile_seed(p, seed)).dirichlet(np.ones(p.d))
        return (1 - t) * ml + t * q

    return ApproxRule(fn, delta, f"ml-perturbed({delta:g})")


def urn_average_rule(N: int, r: float, rounds: int, seed: int = 0, delta: float = 0.1,
                     init: str = "uniform") -> ApproxRule:
    """Temporal average of one urn run driven by the profile's margins."""

    def fn(p):
        cfg = urn.SimConfig(N=N, r=r, rounds=rounds, seed=seed, init=init, record_winners=False)
        return urn.run(cfg, margin_matrix(p)).temporal_average

    return ApproxRule(fn, delta, f"urn(N={N}, r={r:g}, rounds={rounds})")


@dataclass
class ConsistencyReport:
    profiles: tuple  # (R', R'', 1/2 R' + 1/2 R'')
    outputs: tuple
    epsilon: float
    delta: float
    antecedent: bool  # outputs on R' and R'' within 2 delta
    distances: tuple  # |out(R') - out(mix)|, |out(R'') - out(mix)|
    passed: bool
    note: str = SCOPE_NOTE

    @property
    def witness_distance(self):
        return max(self.distances)


def check_population_consistency(rule: ApproxRule, r1, r2, epsilon) -> ConsistencyReport:
    """If ``rule(R')`` and ``rule(R'')`` are within ``2 delta``, both must lie
    within ``epsilon`` of ``rule(R'/2 + R''/2)``."""
    r1, r2 = _as_fractional(r1), _as_fractional(r2)
    if r1.d != r2.d:
        raise InvalidInputError("profiles have different numbers of alternatives")
    mixed = mix(r1, r2, Fraction(1, 2))
    a, b, c = rule(r1), rule(r2), rule(mixed)
    antecedent = _l1(a, b) <= 2 * rule.delta
    dist = (_l1(a, c), _l1(b, c))
    passed = (not antecedent) or max(dist) <= epsilon
    return ConsistencyReport((r1, r2, mixed), (a, b, c), epsilon, rule.delta, antecedent, dist, passed)


@dataclass
class CondorcetReport:
    epsilon: float
    winners: tuple
    masses: tuple
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def check_condorcet_consistency(rule: ApproxRule, profiles: Sequence, epsilon) -> CondorcetReport:
    """Every output must put at least ``1 - epsilon`` on the Condorcet winner."""
    winners, masses, failures = [], [], []
    for k, prof in enumerate(profiles):
        prof = _as_fractional(prof)
        w = condorcet_winner(margin_matrix(prof))
        if w is None:
            raise InvalidInputError(f"profile {k} has no Condorcet winner")
        mass = rule(prof)[w]
        winners.append(w)
        masses.append(mass)
        if mass < 1 - epsilon:
            failures.append(k)
    return CondorcetReport(epsilon, tuple(winners), tuple(masses), failures)


def random_odd_profile(rng: np.random.Generator, d: int, max_voters: int = 99) -> FractionalProfile:
    """Uniform strict rankings from an odd electorate of at most ``max_voters``."""
    n = 2 * int(rng.integers(0, (max_voters + 1) // 2)) + 1
    return random_profile(rng, d, n).to_fractional()


def sample_unique_triples(rng: np.random.Generator, d: int, count: int,
                          max_voters: int = 99) -> Iterator[tuple]:
    """Pairs ``(R', R'')`` whose maximal lotteries, and that of their mixture, are unique."""
    made = 0
    while made < count:
        r1 = random_odd_profile(rng, d, max_voters)
        r2 = random_odd_profile(rng, d, max_voters)
        mixed = mix(r1, r2, Fraction(1, 2))
        if maximal_lottery(margin_matrix(mixed)).unique is not Uniqueness.UNIQUE:
            continue
        made += 1
        yield r1, r2
