"""Independent reference computations used by several test modules.

These enumerate the urn's random choices directly instead of using the
closed forms in the library.
"""

from collections import defaultdict
from fractions import Fraction as F


def _move(counts, src, dst):
    c = list(counts)
    c[src] -= 1
    c[dst] += 1
    return tuple(c)


def one_step_law(counts, M, r, sampling="with"):
    """Exact law of the next state, enumerating every mutation and duel branch.

    ``M`` is a majority matrix (``M[a][b]`` = fraction preferring a to b).
    Returns a dict state -> probability.
    """
    counts = tuple(counts)
    N, d = sum(counts), len(counts)
    r = F(r)
    law = defaultdict(F)
    # mutation: a ball of label j, relabeled to a uniform alternative a
    for j in range(d):
        for a in range(d):
            law[_move(counts, j, a) if counts[j] else counts] += r * F(counts[j], N) / d
    # duel: ordered pair of balls
    for a in range(d):
        for b in range(d):
            if sampling == "with":
                pab = F(counts[a] * counts[b], N * N)
            else:
                pab = F(counts[a] * (counts[b] - (a == b)), N * (N - 1))
            if pab == 0:
                continue
            if a == b:
                law[counts] += (1 - r) * pab
                continue
            win_a, win_b = F(M[a][b]), F(M[b][a])
            law[_move(counts, b, a)] += (1 - r) * pab * win_a
            law[_move(counts, a, b)] += (1 - r) * pab * win_b
            law[counts] += (1 - r) * pab * (1 - win_a - win_b)
    return {s: p for s, p in law.items() if p}


def duel_winner_law(p, M):
    """Law of the winner of one duel between two balls drawn i.i.d. from ``p``."""
    d = len(p)
    w = [F(0)] * d
    for a in range(d):
        for b in range(d):
            pab = F(p[a]) * F(p[b])
            if a == b:
                w[a] += pab
            else:
                w[a] += pab * F(M[a][b])
                w[b] += pab * F(M[b][a])
    return tuple(w)
