import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlurn import chain_exact, urn
from mlurn.chain_exact import StateIndex, build_kernel, stationary
from mlurn.errors import ConvergenceError, InvalidInputError, ReducibleChainError, ResourceLimitError
from mlurn.prefs import MajorityMatrix, as_majority

from oracles import one_step_law


def two_alt(a):
    """Two alternatives, a fraction ``a`` prefers the first."""
    a = F(a)
    return MajorityMatrix(((0, a), (1 - a, 0)))


def birth_death_pi(N, r, a):
    """Product-form stationary law of the number of first-label balls (d = 2)."""
    r, a = F(r), F(a)

    def up(k):
        return (1 - r) * 2 * F(k * (N - k), N * N) * a + r / 2 * F(N - k, N)

    def down(k):
        return (1 - r) * 2 * F(k * (N - k), N * N) * (1 - a) + r / 2 * F(k, N)

    w = [F(1)]
    for k in range(1, N + 1):
        w.append(w[-1] * up(k - 1) / down(k))
    total = sum(w)
    return [x / total for x in w]


class TestStateIndex:
    @pytest.mark.parametrize("d, N", [(1, 4), (2, 1), (3, 5), (4, 6), (5, 3)])
    def test_bijection(self, d, N):
        idx = StateIndex(d, N)
        assert idx.size == math.comb(N + d - 1, d - 1) == len(idx.states)
        assert len({tuple(s) for s in idx.states}) == idx.size
        assert (idx.states.sum(axis=1) == N).all()
        for k in range(idx.size):
            s = idx.unrank(k)
            assert idx.rank(s) == k
            assert tuple(idx.states[k]) == s
        assert (idx.ranks(idx.states) == np.arange(idx.size)).all()

    def test_sizes(self):
        assert chain_exact.n_states(3, 70) == 2556
        assert chain_exact.n_states(3, 100) == 5151
        assert chain_exact.n_states(3, 5) == 21

    def test_rejects(self):
        idx = StateIndex(3, 5)
        with pytest.raises(InvalidInputError):
            idx.rank((1, 1, 1))
        with pytest.raises(InvalidInputError):
            idx.unrank(21)
        with pytest.raises(InvalidInputError):
            StateIndex(3, 0)


class TestKernel:
    def test_reference_entry(self, ex1):
        k = build_kernel(3, 5, F(1, 10), ex1, exact=True)
        assert k.entry((1, 2, 2), (2, 1, 2)) == F(41, 375)

    @pytest.mark.parametrize("name", ["condorcet-winner", "condorcet-cycle", "cycle-with-loser"])
    def test_rows_match_enumeration(self, examples, name):
        m = examples[name]
        d, N, r = m.d, 4, F(1, 7)
        k = build_kernel(d, N, r, m, exact=True)
        rows = as_majority(m).entries
        for s in range(k.index.size):
            src = tuple(int(x) for x in k.index.states[s])
            law = one_step_law(src, rows, r)
            got = {tuple(int(x) for x in k.index.states[j]): v for j, v in k.exact_rows[s].items() if v}
            assert got == law
            assert sum(k.exact_rows[s].values()) == 1

    def test_float_matches_exact(self, ex3):
        a = build_kernel(4, 5, F(1, 20), ex3, exact=True)
        b = build_kernel(4, 5, 0.05, ex3, exact=False)
        dense = np.array([[float(a.exact_rows[i].get(j, 0)) for j in range(a.index.size)]
                          for i in range(a.index.size)])
        assert np.abs(dense - b.matrix.toarray()).max() < 1e-15

    @settings(max_examples=20, deadline=None)
    @given(st.integers(2, 4), st.integers(1, 12), st.floats(0, 1))
    def test_support_and_stochastic(self, d, N, r):
        from mlurn.standard_profiles import printed_margins
        m = printed_margins("cycle-with-loser") if d == 4 else printed_margins("condorcet-cycle")
        if d == 2:
            m = two_alt(F(3, 5))
        k = build_kernel(d, N, r, m, exact=False)
        P = k.matrix.tocoo()
        assert np.allclose(np.asarray(k.matrix.sum(axis=1)).ravel(), 1)
        assert P.data.min() >= 0
        jumps = np.abs(k.index.states[P.col] - k.index.states[P.row]).sum(axis=1)
        assert set(np.unique(jumps)) <= {0, 2}

    def test_state_cap(self, ex1):
        with pytest.raises(ResourceLimitError):
            build_kernel(3, 100, 0.1, ex1, state_cap=1000)

    def test_exact_default_threshold(self, ex1):
        assert build_kernel(3, 5, F(1, 10), ex1).exact_rows is not None
        assert build_kernel(3, 40, F(1, 10), ex1).exact_rows is None


class TestStationary:
    @pytest.mark.parametrize("N, r, a", [(6, F(1, 10), F(2, 3)), (9, F(1, 3), F(1, 2)), (12, F(1, 50), F(5, 6))])
    def test_birth_death_closed_form(self, N, r, a):
        k = build_kernel(2, N, r, two_alt(a), exact=True)
        dist = stationary(k)
        assert dist.method == "gth"
        expected = birth_death_pi(N, r, a)
        by_level = [F(0)] * (N + 1)
        for state, x in zip(k.index.states, dist.exact):
            by_level[int(state[0])] += x
        assert by_level == expected

    def test_single_ball_full_mutation(self):
        dist = stationary(build_kernel(2, 1, 1, two_alt(F(1, 2)), exact=True))
        assert dist.exact == (F(1, 2), F(1, 2))

    def test_full_mutation_is_multinomial(self, ex3):
        d, N = 4, 5
        dist = stationary(build_kernel(d, N, 1, ex3, exact=True))
        for state, x in zip(dist.index.states, dist.exact):
            coef = math.factorial(N)
            for c in state:
                coef //= math.factorial(int(c))
            assert x == F(coef, d ** N)
        assert np.allclose(dist.mean_state(), 1 / d)

    def test_methods_agree(self, ex1):
        k = build_kernel(3, 8, F(1, 25), ex1, exact=True)
        gth = stationary(k, "gth")
        direct = stationary(k, "direct")
        power = stationary(k, "power")
        assert np.abs(gth.pi - direct.pi).sum() < 1e-12
        assert np.abs(gth.pi - power.pi).sum() < 1e-9
        assert direct.residual < 1e-12

    def test_no_mutation_refused(self, ex1):
        with pytest.raises(ReducibleChainError):
            stationary(build_kernel(3, 5, 0, ex1))

    def test_power_budget(self, ex1):
        with pytest.raises(ConvergenceError):
            stationary(build_kernel(3, 20, 0.01, ex1), "power", max_iter=5)

    def test_gth_needs_exact(self, ex1):
        with pytest.raises(InvalidInputError):
            stationary(build_kernel(3, 20, 0.01, ex1, exact=False), "gth")

    def test_mean_tends_to_uniform_with_mutation(self, ex1):
        means = [stationary(build_kernel(3, 15, r, ex1)).mean_state() for r in (0.2, 0.6, 0.95)]
        gaps = [np.abs(m - 1 / 3).sum() for m in means]
        assert gaps[0] > gaps[1] > gaps[2] and gaps[2] < 0.03

    def test_ergodic_average_matches(self, ex2):
        """Long-run urn averages agree with the stationary law."""
        N, r = 10, 0.1
        dist = stationary(build_kernel(3, N, r, ex2))
        center, delta = (0.6, 0.2, 0.2), 0.5
        query = (center, delta)
        rec = urn.run(urn.SimConfig(N=N, r=r, rounds=2_000_000, seed=8, queries=(query,),
                                    record_winners=False), ex2)
        assert np.abs(rec.temporal_average - dist.mean_state()).sum() < 0.01
        assert rec.sojourn[query] == pytest.approx(chain_exact.ball_mass(dist, center, delta), abs=0.01)

    def test_csv(self, ex1):
        dist = stationary(build_kernel(3, 2, F(1, 2), ex1))
        lines = chain_exact.stationary_csv(dist).splitlines()
        assert lines[0] == "state,count_1,count_2,count_3,pi"
        assert len(lines) == 7
        assert sum(float(line.split(",")[-1]) for line in lines[1:]) == pytest.approx(1)


class TestLevelSets:
    def test_masses_sum(self, ex1):
        dist = stationary(build_kernel(3, 6, F(1, 10), ex1, exact=True))
        sig = chain_exact.level_set_masses(dist, 0, exact=True)
        assert sum(sig) == 1 and len(sig) == 7
        assert np.allclose(chain_exact.level_set_masses(dist, 0), [float(x) for x in sig])

    @pytest.mark.parametrize("N, r", [(12, F(1, 60)), (30, F(1, 50)), (20, F(1, 3))])
    def test_moves_respect_bounds(self, ex1, N, r):
        alpha = F(1, 6)
        k = build_kernel(3, N, r, ex1)
        up, down = chain_exact.level_moves(k, 0)
        levels = k.index.states[:, 0]
        for lvl in range(N + 1):
            u, dn = chain_exact.updown_bounds(3, N, r, alpha, lvl)
            sel = levels == lvl
            assert up[sel].min() >= float(u) - 1e-14
            assert down[sel].max() <= float(dn) + 1e-14

    def test_bounds_exact_for_condorcet_example(self, ex1):
        # every loser is beaten by the winner with the same margin
        k = build_kernel(3, 10, F(1, 20), ex1, exact=True)
        states = k.index.states
        for s in range(k.index.size):
            lvl = int(states[s, 0])
            u, dn = chain_exact.updown_bounds(3, 10, F(1, 20), F(1, 6), lvl)
            row = k.exact_rows[s]
            gain = sum((v for j, v in row.items() if states[j, 0] == lvl + 1), F(0))
            loss = sum((v for j, v in row.items() if states[j, 0] == lvl - 1), F(0))
            assert gain == u and loss == dn

    def test_flow_inequality(self, ex1):
        """Mass entering level k from below is at most what leaves it downward."""
        N, r, alpha = 30, F(1, 50), F(1, 6)
        k = build_kernel(3, N, r, ex1)
        dist = stationary(k)
        sig = chain_exact.level_set_masses(dist, 0)
        for lvl in range(1, N + 1):
            u_prev, _ = chain_exact.updown_bounds(3, N, r, alpha, lvl - 1)
            _, d_k = chain_exact.updown_bounds(3, N, r, alpha, lvl)
            assert sig[lvl - 1] * float(u_prev) <= sig[lvl] * float(d_k) * (1 + 1e-9) + 1e-300

    def test_updown_rejects(self):
        with pytest.raises(InvalidInputError):
            chain_exact.updown_bounds(3, 10, 0.1, F(1, 6), 11)
        with pytest.raises(InvalidInputError):
            chain_exact.updown_bounds(3, 10, 0.1, F(2, 3), 1)


class TestBalls:
    def test_condorcet_mass(self, ex1):
        dist = stationary(build_kernel(3, 30, F(1, 50), ex1))
        assert chain_exact.ball_mass(dist, (1, 0, 0), 0.4) >= 0.9
        assert chain_exact.ball_mass(dist, (1, 0, 0), 0.4) > chain_exact.ball_mass(dist, (1, 0, 0), 0.2)

    def test_strict_boundary(self):
        idx = StateIndex(2, 10)
        # (8, 2) is at distance exactly 0.4 from (1, 0)
        mask = chain_exact.ball_mask(idx, (1, 0), 0.4)
        assert {tuple(s) for s in idx.states[mask]} == {(10, 0), (9, 1)}
