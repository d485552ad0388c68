"""The three 900-voter profiles used throughout the documentation and tests."""

from .prefs import parse_profile

CONDORCET_WINNER_TEXT = """\
# alternative 1 beats both others 600:300
d=3
300: 1 2 3
300: 1 3 2
300: 2 3 1
"""

CONDORCET_CYCLE_TEXT = """\
# 1 > 2 > 3 > 1, each by 600:300
d=3
300: 1 2 3
300: 2 3 1
300: 3 1 2
"""

CYCLE_WITH_LOSER_TEXT = """\
# cycle on {1,2,3}; alternative 4 loses to everyone
d=4
375: 1 2 3 4
300: 3 1 2 4
225: 4 2 3 1
"""

PROFILE_TEXTS = {
    "condorcet-winner": CONDORCET_WINNER_TEXT,
    "condorcet-cycle": CONDORCET_CYCLE_TEXT,
    "cycle-with-loser": CYCLE_WITH_LOSER_TEXT,
}


def load(name):
    """Parse one of the bundled profiles by name (see ``PROFILE_TEXTS``)."""
    try:
        return parse_profile(PROFILE_TEXTS[name])
    except KeyError:
        raise KeyError(f"unknown profile {name!r}; choose from {sorted(PROFILE_TEXTS)}") from None


# The reference margin matrix for the cycle-with-loser example is 2/3 of the
# margins of its ranking table; adding 450 voters with no opinion on any
# pair reproduces it exactly.
CYCLE_WITH_LOSER_ABSTAIN_TEXT = CYCLE_WITH_LOSER_TEXT + "450: pairs\n"

PROFILE_TEXTS["cycle-with-loser-abstain"] = CYCLE_WITH_LOSER_ABSTAIN_TEXT

_PRINTED = {
    "condorcet-winner": [
        ["0", "1/3", "1/3"],
        ["-1/3", "0", "1/3"],
        ["-1/3", "-1/3", "0"],
    ],
    "condorcet-cycle": [
        ["0", "1/3", "-1/3"],
        ["-1/3", "0", "1/3"],
        ["1/3", "-1/3", "0"],
    ],
    "cycle-with-loser": [
        ["0", "1/3", "-1/9", "1/3"],
        ["-1/3", "0", "2/9", "1/3"],
        ["1/9", "-2/9", "0", "1/3"],
        ["-1/3", "-1/3", "-1/3", "0"],
    ],
}


def printed_margins(name):
    """Reference margin matrix for the named example."""
    from .prefs import MarginMatrix

    return MarginMatrix(tuple(tuple(row) for row in _PRINTED[name]))


def example_margins():
    """The three reference margin matrices, in example order."""
    return [printed_margins(n) for n in ("condorcet-winner", "condorcet-cycle", "cycle-with-loser")]
