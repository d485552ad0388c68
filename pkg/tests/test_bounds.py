import math
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mlurn import bounds, chain_exact
from mlurn.bounds import CondorcetBoundInput, recipe
from mlurn.errors import InvalidInputError

fractions_01 = st.fractions(0, 1).map(lambda x: x.limit_denominator(1000)).filter(lambda x: 0 < x < 1)


class TestRecipe:
    def test_worked_example(self, ex1):
        rec = bounds.recipe_for(ex1, F(1, 5), F(1, 10))
        assert rec.inputs.alpha == F(1, 6)
        assert rec.beta == F(5, 8)
        # (5/8)**7 <= (1/10)(3/8) < (5/8)**6
        assert rec.k0 == 7
        assert rec.r == F(1, 60)
        assert rec.N_min == 70
        assert rec.window_ok
        assert rec.side_r_le_inv_d
        assert not rec.side_small_k

    def test_side_condition_threshold(self):
        assert not bounds.side_small_k(353, 3, F(1, 60))
        assert bounds.side_small_k(354, 3, F(1, 60))

    def test_alpha(self, ex1, ex2, ex3):
        assert bounds.alpha_of(ex1) == (0, F(1, 6))
        assert bounds.alpha_of(ex2) is None
        assert bounds.alpha_of(ex3) is None

    def test_refuses_without_winner(self, ex2):
        with pytest.raises(InvalidInputError, match="Condorcet"):
            bounds.recipe_for(ex2, 0.2, 0.1)

    @pytest.mark.parametrize("kwargs", [
        dict(alpha=0), dict(alpha=F(3, 4)), dict(delta=1), dict(tau=0), dict(d=1),
    ])
    def test_input_validation(self, kwargs):
        base = dict(alpha=F(1, 6), delta=F(1, 5), tau=F(1, 10), d=3)
        base.update(kwargs)
        with pytest.raises(InvalidInputError):
            CondorcetBoundInput(**base)

    def test_decimal_inputs_are_exact(self):
        inp = CondorcetBoundInput("1/6", 0.2, "0.1", 3)
        assert inp.delta == F(1, 5) and inp.tau == F(1, 10)

    def test_dict(self, ex1):
        out = bounds.recipe_for(ex1, F(1, 5), F(1, 10)).as_dict()
        assert out["N_min"] == 70 and out["r"] == "1/60"
        assert out["heuristic"]["certified"] is False


class TestTail:
    @given(fractions_01, fractions_01)
    def test_minimal(self, beta, tau):
        k = bounds.tail_length(beta, tau)
        target = tau * (1 - beta)
        assert beta ** k <= target
        assert k == 0 or beta ** (k - 1) > target

    def test_matches_logs(self):
        for beta, tau in [(F(5, 8), F(1, 10)), (F(1, 2), F(1, 100)), (F(9, 10), F(1, 3))]:
            k = bounds.tail_length(beta, tau)
            assert k == math.ceil(math.log(tau * (1 - beta)) / math.log(beta))

    def test_shrinks_as_tolerance_loosens(self):
        ks = [bounds.tail_length(F(5, 8), F(t, 100)) for t in range(1, 100)]
        assert all(a >= b for a, b in zip(ks, ks[1:]))
        # tau = 0.99: beta**2 > 0.99 * 3/8 >= beta**3
        assert ks[-1] == 3


class TestMonotonicity:
    @given(st.sampled_from([F(1, 12), F(1, 6), F(1, 4), F(1, 2)]),
           st.sampled_from([F(1, 10), F(1, 5), F(1, 2)]),
           st.sampled_from([F(1, 100), F(1, 10), F(1, 2)]))
    def test_grid(self, alpha, delta, tau):
        base = recipe(CondorcetBoundInput(alpha, delta, tau, 3))
        tighter_tau = recipe(CondorcetBoundInput(alpha, delta, tau / 2, 3))
        assert tighter_tau.k0 >= base.k0 and tighter_tau.N_min >= base.N_min
        tighter_delta = recipe(CondorcetBoundInput(alpha, delta / 2, tau, 3))
        assert tighter_delta.N_min >= base.N_min
        assert tighter_delta.r < base.r
        stronger = recipe(CondorcetBoundInput(min(alpha * 2, F(1, 2)), delta, tau, 3))
        assert stronger.beta <= base.beta and stronger.k0 <= base.k0

    def test_window_counts_levels(self):
        assert bounds.window_size(70, F(1, 5), F(1, 60), F(1, 6)) == 63 - 56 + 1
        assert bounds.window_size(5, F(1, 100), F(1, 60), F(1, 6)) == 0


class TestCertify:
    def test_small_chain_reports_both_flags(self, ex1):
        rec = bounds.recipe_for(ex1, F(1, 2), F(1, 2))
        cert = bounds.certify(rec, ex1)
        assert cert.N == rec.N_min
        assert cert.winner == 0
        assert cert.threshold == F(1, 2)
        assert cert.passed == (cert.mass >= 0.5)
        assert cert.side_conditions_ok == bounds.side_small_k(cert.N, 3, rec.r)
        assert sum(cert.sigma) == pytest.approx(1)
        assert cert.as_dict()["winner"] == 1

    def test_override_N(self, ex1):
        rec = bounds.recipe_for(ex1, F(1, 5), F(1, 10))
        cert = bounds.certify(rec, ex1, N=20)
        assert cert.N == 20 and len(cert.sigma) == 21

    def test_refuses_without_winner(self, ex1, ex2):
        rec = bounds.recipe_for(ex1, F(1, 5), F(1, 10))
        with pytest.raises(InvalidInputError):
            bounds.certify(rec, ex2)


class TestBetaWindow:
    def test_small_levels_excluded_when_side_condition_fails(self):
        ks = bounds.beta_window(3, 30, F(1, 50), F(1, 6))
        assert ks and ks[0] > 1
        assert ks == list(range(ks[0], ks[-1] + 1))

    def test_updown_ratio_example(self):
        u34, _ = chain_exact.updown_bounds(3, 70, F(1, 60), F(1, 6), 34)
        _, d35 = chain_exact.updown_bounds(3, 70, F(1, 60), F(1, 6), 35)
        assert d35 / u34 == F(74725, 145692)
        assert d35 / u34 <= F(5, 8)

    def test_full_window_when_side_condition_holds(self):
        N, r, alpha = 400, F(1, 60), F(1, 6)
        assert bounds.side_small_k(N, 3, r)
        top = math.floor((1 - r / alpha) * N)
        assert bounds.beta_window(3, N, r, alpha) == list(range(1, top + 1))

    @pytest.mark.slow
    def test_ratio_on_exact_chain(self, ex1):
        """sigma_{k-1} / sigma_k <= beta on every level of the window."""
        N, r, alpha = 400, F(1, 60), F(1, 6)
        dist = chain_exact.stationary(chain_exact.build_kernel(3, N, r, ex1))
        sig = chain_exact.level_set_masses(dist, 0)
        checked = 0
        for k in bounds.beta_window(3, N, r, alpha):
            if sig[k - 1] < 1e-12:
                continue  # below the resolution of the float solve
            checked += 1
            assert sig[k - 1] <= float(F(5, 8)) * sig[k] * (1 + 1e-9)
        assert checked >= 15
