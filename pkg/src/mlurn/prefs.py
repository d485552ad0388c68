"""Preference relations, profiles and the pairwise majority matrices they induce.

Alternatives are 0-indexed in memory and 1-indexed in profile files.  All
arithmetic on profiles is exact (``fractions.Fraction``).

Profile file grammar (UTF-8, ``#`` starts a comment, whitespace tolerant)::

    d=3
    300: 1 2 3          # complete ranking, most preferred first
    300: 1 3 2
    12: pairs 1>2, 3>2  # arbitrary asymmetric relation
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInputError, ProfileParseError


def as_fraction(x) -> Fraction:
    """Convert ints, Fractions and decimal strings exactly; floats via repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        return Fraction(repr(float(x)))
    return Fraction(str(x).strip())


@dataclass(frozen=True)
class PreferenceRelation:
    """Asymmetric, irreflexive binary relation over ``range(d)``.

    ``(i, j)`` in ``pairs`` means alternative ``i`` is preferred to ``j``.
    Transitivity is not required.
    """

    d: int
    pairs: frozenset

    def __post_init__(self):
        if self.d < 1:
            raise InvalidInputError(f"need at least one alternative, got d={self.d}")
        pairs = frozenset((int(i), int(j)) for i, j in self.pairs)
        for i, j in pairs:
            if not (0 <= i < self.d and 0 <= j < self.d):
                raise InvalidInputError(f"pair ({i + 1},{j + 1}) out of range for d={self.d}")
            if i == j:
                raise InvalidInputError(f"self-pair ({i + 1},{i + 1}) in relation")
            if (j, i) in pairs:
                raise InvalidInputError(f"relation not asymmetric on {{{i + 1},{j + 1}}}")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def from_ranking(cls, ranking: Sequence[int], d: int | None = None) -> "PreferenceRelation":
        """Strict linear order; ``ranking[0]`` is the most preferred alternative."""
        d = len(ranking) if d is None else d
        if sorted(ranking) != list(range(d)):
            raise InvalidInputError(f"ranking {list(ranking)} is not a permutation of 0..{d - 1}")
        return cls(d, frozenset(itertools.combinations(ranking, 2)))

    def prefers(self, i: int, j: int) -> bool:
        return (i, j) in self.pairs

    def as_ranking(self) -> tuple[int, ...] | None:
        """The ranking this relation encodes, or None if it is not a strict linear order."""
        if len(self.pairs) != self.d * (self.d - 1) // 2:
            return None
        wins = [0] * self.d
        for i, _ in self.pairs:
            wins[i] += 1
        order = sorted(range(self.d), key=lambda a: -wins[a])
        if sorted(wins) != list(range(self.d)):
            return None
        return tuple(order)

    def sort_key(self):
        return (self.d, tuple(sorted(self.pairs)))


@dataclass(frozen=True)
class Profile:
    """Anonymous preference profile: groups of ``(count, relation)``."""

    d: int
    groups: tuple

    def __post_init__(self):
        groups = tuple((int(c), rel) for c, rel in self.groups)
        if not groups:
            raise InvalidInputError("profile has no voters")
        for count, rel in groups:
            if count <= 0:
                raise InvalidInputError(f"voter count must be positive, got {count}")
            if rel.d != self.d:
                raise InvalidInputError(f"relation over {rel.d} alternatives in a d={self.d} profile")
        object.__setattr__(self, "groups", groups)

    @classmethod
    def from_rankings(cls, rankings: Iterable[tuple[int, Sequence[int]]], d: int) -> "Profile":
        return cls(d, tuple((c, PreferenceRelation.from_ranking(r, d)) for c, r in rankings))

    @property
    def n_voters(self) -> int:
        return sum(c for c, _ in self.groups)

    def to_fractional(self) -> "FractionalProfile":
        n = self.n_voters
        weights: dict = {}
        for count, rel in self.groups:
            weights[rel] = weights.get(rel, Fraction(0)) + Fraction(count, n)
        return FractionalProfile.from_mapping(self.d, weights)

    def is_strict(self) -> bool:
        """True if every voter holds a strict linear order."""
        return all(rel.as_ranking() is not None for _, rel in self.groups)


@dataclass(frozen=True)
class FractionalProfile:
    """Map from preference relations to voter fractions summing to exactly 1.

    Stored as a canonically sorted tuple of ``(relation, weight)`` with
    positive weights so that equality is structural.
    """

    d: int
    weights: tuple

    def __post_init__(self):
        merged: dict = {}
        for rel, w in self.weights:
            w = as_fraction(w)
            if w < 0:
                raise InvalidInputError("fractional profile weights must be nonnegative")
            if rel.d != self.d:
                raise InvalidInputError(f"relation over {rel.d} alternatives in a d={self.d} profile")
            merged[rel] = merged.get(rel, Fraction(0)) + w
        if sum(merged.values(), Fraction(0)) != 1:
            raise InvalidInputError("fractional profile weights must sum to 1")
        canon = tuple(sorted(((r, w) for r, w in merged.items() if w != 0), key=lambda t: t[0].sort_key()))
        object.__setattr__(self, "weights", canon)

    @classmethod
    def from_mapping(cls, d: int, mapping: dict) -> "FractionalProfile":
        return cls(d, tuple(mapping.items()))

    def as_dict(self) -> dict:
        return dict(self.weights)


def mix(p1: FractionalProfile, p2: FractionalProfile, lam) -> FractionalProfile:
    """Pointwise convex combination ``lam * p1 + (1 - lam) * p2``."""
    if p1.d != p2.d:
        raise InvalidInputError(f"cannot mix profiles over {p1.d} and {p2.d} alternatives")
    lam = as_fraction(lam)
    if not 0 <= lam <= 1:
        raise InvalidInputError(f"mixing weight must lie in [0, 1], got {lam}")
    out: dict = {}
    for rel, w in p1.weights:
        out[rel] = out.get(rel, Fraction(0)) + lam * w
    for rel, w in p2.weights:
        out[rel] = out.get(rel, Fraction(0)) + (1 - lam) * w
    return FractionalProfile.from_mapping(p1.d, out)


def _check_square(rows) -> tuple:
    rows = tuple(tuple(as_fraction(x) for x in row) for row in rows)
    d = len(rows)
    if d == 0 or any(len(row) != d for row in rows):
        raise InvalidInputError("matrix must be square and nonempty")
    return rows


@dataclass(frozen=True)
class MajorityMatrix:
    """``entries[i][j]`` is the fraction of voters preferring ``i`` to ``j``."""

    entries: tuple

    def __post_init__(self):
        rows = _check_square(self.entries)
        for i, row in enumerate(rows):
            if row[i] != 0:
                raise InvalidInputError("majority matrix must have a zero diagonal")
            for j, x in enumerate(row):
                if x < 0 or x > 1 or x + rows[j][i] > 1:
                    raise InvalidInputError(f"invalid majority entry at ({i + 1},{j + 1})")
        object.__setattr__(self, "entries", rows)

    @property
    def d(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def margin(self) -> "MarginMatrix":
        return MarginMatrix(tuple(
            tuple(self.entries[i][j] - self.entries[j][i] for j in range(self.d))
            for i in range(self.d)
        ))

    def to_array(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.entries])


@dataclass(frozen=True)
class MarginMatrix:
    """Skew-symmetric matrix of majority margins with entries in [-1, 1]."""

    entries: tuple

    def __post_init__(self):
        rows = _check_square(self.entries)
        d = len(rows)
        for i in range(d):
            for j in range(d):
                if rows[i][j] != -rows[j][i]:
                    raise InvalidInputError(f"margin matrix not skew-symmetric at ({i + 1},{j + 1})")
                if abs(rows[i][j]) > 1:
                    raise InvalidInputError(f"margin entry out of [-1, 1] at ({i + 1},{j + 1})")
        object.__setattr__(self, "entries", rows)

    @property
    def d(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def majority(self) -> MajorityMatrix:
        """Majority matrix of a profile where every voter compares every pair.

        Only the margins are known, so ``M(i, j) = (1 + margin(i, j)) / 2``.
        """
        return MajorityMatrix(tuple(
            tuple(Fraction(0) if i == j else (1 + self.entries[i][j]) / 2 for j in range(self.d))
            for i in range(self.d)
        ))

    def to_array(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.entries])

    def apply(self, p: Sequence) -> list:
        """Exact product ``margin @ p``."""
        return [sum((a * b for a, b in zip(row, p)), Fraction(0)) for row in self.entries]


def as_majority(m) -> MajorityMatrix:
    """Duel probabilities for ``m``; margins are completed assuming strict voters."""
    if isinstance(m, MajorityMatrix):
        return m
    if isinstance(m, MarginMatrix):
        return m.majority()
    if isinstance(m, (Profile, FractionalProfile)):
        return majority_matrix(m)
    raise TypeError(f"expected MajorityMatrix or MarginMatrix, got {type(m).__name__}")


def as_margin(m) -> MarginMatrix:
    if isinstance(m, MarginMatrix):
        return m
    if isinstance(m, MajorityMatrix):
        return m.margin()
    if isinstance(m, (Profile, FractionalProfile)):
        return margin_matrix(m)
    raise TypeError(f"expected MarginMatrix or MajorityMatrix, got {type(m).__name__}")


def majority_matrix(p: Profile | FractionalProfile) -> MajorityMatrix:
    d = p.d
    if isinstance(p, Profile):
        n = p.n_voters
        tally = [[0] * d for _ in range(d)]
        for count, rel in p.groups:
            for i, j in rel.pairs:
                tally[i][j] += count
        return MajorityMatrix(tuple(tuple(Fraction(t, n) for t in row) for row in tally))
    acc = [[Fraction(0)] * d for _ in range(d)]
    for rel, w in p.weights:
        for i, j in rel.pairs:
            acc[i][j] += w
    return MajorityMatrix(tuple(tuple(row) for row in acc))


def margin_matrix(p: Profile | FractionalProfile) -> MarginMatrix:
    return majority_matrix(p).margin()


# ---------------------------------------------------------------- file format

_HEADER = re.compile(r"^d\s*=\s*(\d+)$")
_GROUP = re.compile(r"^(-?\d+)\s*:\s*(.*)$")
_PAIR = re.compile(r"^(\d+)\s*>\s*(\d+)$")


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_profile(text: str) -> Profile:
    """Parse the profile file format described in the module docstring."""
    d = None
    groups = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        if d is None:
            m = _HEADER.match(line)
            if not m:
                raise ProfileParseError(f"expected 'd=<int>' header, got {line!r}", line_no)
            d = int(m.group(1))
            if d < 1:
                raise ProfileParseError("d must be at least 1", line_no)
            continue
        m = _GROUP.match(line)
        if not m:
            raise ProfileParseError(f"malformed line {line!r}", line_no)
        count = int(m.group(1))
        if count <= 0:
            raise ProfileParseError(f"voter count must be positive, got {count}", line_no)
        body = m.group(2).strip()
        if body.startswith("pairs"):
            rel = _parse_pairs(body[len("pairs"):], d, line_no)
        else:
            rel = _parse_ranking(body, d, line_no)
        groups.append((count, rel))
    if d is None:
        raise ProfileParseError("missing 'd=<int>' header")
    if not groups:
        raise ProfileParseError("profile has no voter lines")
    return Profile(d, tuple(groups))


def _alt(token: str, d: int, line_no: int) -> int:
    if not token.isdigit():
        raise ProfileParseError(f"bad alternative {token!r}", line_no)
    a = int(token)
    if not 1 <= a <= d:
        raise ProfileParseError(f"alternative {a} out of range 1..{d}", line_no)
    return a - 1


def _parse_ranking(body: str, d: int, line_no: int) -> PreferenceRelation:
    tokens = body.replace(",", " ").split()
    ranking = [_alt(t, d, line_no) for t in tokens]
    if len(set(ranking)) != len(ranking):
        raise ProfileParseError("duplicate alternative in ranking", line_no)
    if len(ranking) != d:
        raise ProfileParseError(f"ranking lists {len(ranking)} of {d} alternatives", line_no)
    return PreferenceRelation.from_ranking(ranking, d)


def _parse_pairs(body: str, d: int, line_no: int) -> PreferenceRelation:
    pairs = set()
    for chunk in body.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        m = _PAIR.match(chunk)
        if not m:
            raise ProfileParseError(f"bad pair {chunk!r}, expected '<i>><j>'", line_no)
        pairs.add((_alt(m.group(1), d, line_no), _alt(m.group(2), d, line_no)))
    try:
        return PreferenceRelation(d, frozenset(pairs))
    except InvalidInputError as exc:
        raise ProfileParseError(str(exc), line_no) from None


def serialize_profile(p: Profile) -> str:
    lines = [f"d={p.d}"]
    for count, rel in p.groups:
        ranking = rel.as_ranking()
        if ranking is not None:
            lines.append(f"{count}: " + " ".join(str(a + 1) for a in ranking))
        else:
            pairs = ", ".join(f"{i + 1}>{j + 1}" for i, j in sorted(rel.pairs))
            lines.append(f"{count}: pairs {pairs}".rstrip())
    return "\n".join(lines) + "\n"


def random_profile(rng: np.random.Generator, d: int, n_voters: int) -> Profile:
    """Profile of ``n_voters`` strict rankings drawn uniformly and independently."""
    tally: dict = {}
    for _ in range(n_voters):
        ranking = tuple(int(a) for a in rng.permutation(d))
        tally[ranking] = tally.get(ranking, 0) + 1
    return Profile.from_rankings([(c, r) for r, c in sorted(tally.items())], d)
