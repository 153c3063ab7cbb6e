"""Phase classification, auxiliary functions and boundary solvers."""

import math
import random
from dataclasses import replace

import pytest

from perpregime import (
    MarketParams,
    OptionKind,
    OptionSpec,
    Phase,
    UnsupportedBranchError,
    classify_phase,
    compute_exponents,
    critical_lambda,
    g_aux,
    h_aux,
    post_change_boundary,
    solve_boundaries,
    solve_case1_root,
    solve_case2_root,
    solve_heuristic,
)
from perpregime.boundary import g_aux_extremum, h_aux_extremum, heuristic_exists_at
from perpregime.figures import fig2_market, fig3_market

from conftest import draw_params, equal_regime_put

CALL = OptionSpec(OptionKind.CALL, 1.0)
PUT = OptionSpec(OptionKind.PUT, 1.0)


def mk(r=0.04, lam=0.5, sa=0.10, sb=0.25, da=0.0, db=0.0):
    return MarketParams(r=r, lam=lam, sigma_a=sa, sigma_b=sb,
                        delta_a=da, delta_b=db)


def exps_for(params, spec):
    return compute_exponents(params, spec)


class TestPostChangeBoundary:
    def test_call_substitution(self):
        # beta_b = 2 for a call gives H_b = 2K; solve delta_b for that target
        from conftest import delta_for_target_beta
        db = delta_for_target_beta(2.0, 0.04, 0.25)
        e = exps_for(mk(sb=0.25, db=db), CALL)
        assert e.beta_plus_b == pytest.approx(2.0, rel=1e-12)
        assert post_change_boundary(e, CALL) == pytest.approx(2.0, rel=1e-12)

    def test_put_value(self):
        e = exps_for(mk(sb=0.25), PUT)
        assert post_change_boundary(e, PUT) == pytest.approx(
            0.56140350877192982, rel=1e-14)

    def test_call_no_dividend_is_infinite(self):
        e = exps_for(mk(db=0.0, sb=0.10), CALL)
        assert post_change_boundary(e, CALL) == math.inf


class TestAuxiliaryFunctions:
    def test_g_at_one_matches_coupling_identity(self):
        # G(1) = +/- ell B / lam, upper sign for calls
        pc = mk(sa=0.10, sb=0.15, da=0.03, db=0.03)
        ec = exps_for(pc, CALL)
        assert g_aux(1.0, ec, CALL) == pytest.approx(
            ec.ell * ec.coeff_b / pc.lam, rel=1e-12)
        pp = fig2_market(0.5)
        ep = exps_for(pp, PUT)
        assert g_aux(1.0, ep, PUT) == pytest.approx(
            -ep.ell * ep.coeff_b / pp.lam, rel=1e-12)

    def test_g_call_diverges_negative_at_origin(self):
        e = exps_for(mk(sa=0.10, sb=0.15, da=0.03, db=0.03), CALL)
        assert g_aux(1e-12, e, CALL) < -1e6

    def test_g_stationary_point(self):
        # single extremum at gamma/(gamma-1): a maximum for calls (outside
        # (0,1]) and a minimum for puts (inside (0,1))
        ec = exps_for(mk(sa=0.10, sb=0.15, da=0.03, db=0.03), CALL)
        em = g_aux_extremum(ec, CALL)
        assert em > 1.0
        assert g_aux(em, ec, CALL) > g_aux(em * 1.01, ec, CALL)
        assert g_aux(em, ec, CALL) > g_aux(em * 0.99, ec, CALL)
        ep = exps_for(fig3_market(0.3), PUT)
        emp = g_aux_extremum(ep, PUT)
        assert 0.0 < emp < 1.0
        assert g_aux(emp, ep, PUT) < g_aux(emp * 1.01, ep, PUT)
        assert g_aux(emp, ep, PUT) < g_aux(emp * 0.99, ep, PUT)

    def test_h_call_without_predividend_is_positive(self):
        e = exps_for(mk(da=0.0, db=0.025, sb=0.10, sa=0.10), CALL)
        assert e.coeff_c == 0.0
        for chi in (0.01, 0.5, 1.0, 3.0, 50.0):
            assert h_aux(chi, e, CALL) > 0.0

    def test_h_stationary_point_is_a_maximum_for_calls(self):
        e = exps_for(mk(sa=0.10, sb=0.10, da=0.02, db=0.05), CALL)
        cm = h_aux_extremum(e, CALL)
        assert cm is not None and cm > 0.0
        assert h_aux(cm, e, CALL) > h_aux(cm * 1.001, e, CALL)
        assert h_aux(cm, e, CALL) > h_aux(cm * 0.999, e, CALL)

    def test_h_call_diverges_negative_with_dividend(self):
        e = exps_for(mk(sa=0.10, sb=0.10, da=0.02, db=0.05), CALL)
        assert h_aux(1e9, e, CALL) < 0.0

    def test_h_at_one_identity(self):
        # H(1) = gamma_opp ell / ((beta_b - gamma_opp)(beta_b - 1) r)
        p = fig3_market(0.4)
        e = exps_for(p, PUT)
        g2 = e.gamma_plus_a
        b = e.beta_minus_b
        expected = g2 * e.ell / ((b - g2) * (b - 1.0) * p.r)
        assert h_aux(1.0, e, PUT) == pytest.approx(expected, rel=1e-12)

    def test_nonfinite_coefficients_rejected(self):
        e = exps_for(mk(da=0.02, db=0.0, sb=0.10), CALL)  # beta_b = 1
        with pytest.raises(UnsupportedBranchError):
            g_aux(0.5, e, CALL)
        with pytest.raises(UnsupportedBranchError):
            h_aux(0.5, e, CALL)


class TestClassification:
    @pytest.mark.parametrize("params,spec,expected", [
        (mk(sa=0.2, sb=0.2, da=0.03, db=0.03), PUT, Phase.EQUAL_REGIMES),
        (mk(da=0.02, db=0.0, sb=0.10, sa=0.10), CALL, Phase.CALL_NO_DIVIDEND_STOP),
        (mk(da=0.0, db=0.02, sb=0.10, sa=0.10), CALL, Phase.CALL_DIVIDEND_START),
        (mk(da=0.0, db=0.0), CALL, Phase.NEVER_EXERCISE),
        (fig2_market(0.5), PUT, Phase.CASE1),
        (fig3_market(0.4), PUT, Phase.CASE2),
        (mk(sa=0.15, sb=0.30, da=0.03, db=0.03), CALL, Phase.CASE1),
        (mk(sa=0.30, sb=0.15, da=0.03, db=0.03), CALL, Phase.CASE2),
    ])
    def test_tags(self, params, spec, expected):
        e = exps_for(params, spec)
        assert classify_phase(e, params, spec) is expected

    def test_equal_regimes_with_distinct_parameters(self):
        params, spec = equal_regime_put()
        e = exps_for(params, spec)
        assert classify_phase(e, params, spec) is Phase.EQUAL_REGIMES


class TestCase1Root:
    def test_put_volatility_jump(self):
        # frozen from a 50-digit bisection of G on [1, inf)
        e = exps_for(fig2_market(0.5), PUT)
        eta0 = solve_case1_root(e, PUT)
        assert eta0 == pytest.approx(1.2167626600638134, rel=1e-12)
        scale = max(1.0, abs(e.coeff_a), abs(e.coeff_b))
        assert abs(g_aux(eta0, e, PUT)) <= 1e-13 * scale

    def test_call_in_unit_interval(self):
        # case-1 call needs the pre-change exponent above the post-change
        # one, i.e. the lower pre-change volatility at equal dividends
        params = mk(sa=0.15, sb=0.30, da=0.03, db=0.03)
        e = exps_for(params, CALL)
        eta0 = solve_case1_root(e, CALL)
        assert 0.0 < eta0 < 1.0
        scale = max(1.0, abs(e.coeff_a), abs(e.coeff_b))
        assert abs(g_aux(eta0, e, CALL)) <= 1e-13 * scale

    def test_uniqueness_on_dense_grid(self):
        e = exps_for(fig2_market(0.5), PUT)
        lo, hi = 1.0, 4.0
        vals = [g_aux(lo + (hi - lo) * i / 4000, e, PUT) for i in range(4001)]
        flips = sum(1 for a, b in zip(vals, vals[1:]) if (a > 0) != (b > 0))
        assert flips == 1


class TestCase2Root:
    def test_put_volatility_drop(self):
        e = exps_for(fig3_market(0.4), PUT)
        chi0 = solve_case2_root(e, PUT)
        assert chi0 == pytest.approx(0.76227105901279470, rel=1e-12)
        scale = max(1.0, abs(e.coeff_c), abs(e.coeff_d))
        assert abs(h_aux(chi0, e, PUT)) <= 1e-13 * scale

    def test_call_without_predividend_reports_infinity(self):
        e = exps_for(mk(da=0.0, db=0.025, sb=0.10, sa=0.10), CALL)
        assert solve_case2_root(e, CALL) == math.inf

    def test_vanishing_intensity_recovers_single_regime_ratio(self):
        params = replace(fig3_market(0.4), lam=1e-10)
        spec = PUT
        e = exps_for(params, spec)
        chi0 = solve_case2_root(e, spec)
        h_b = post_change_boundary(e, spec)
        ba = e.beta_minus_a
        single = ba / (ba - 1.0) * spec.strike
        assert chi0 * h_b == pytest.approx(single, rel=1e-9)


class TestHeuristic:
    def test_put_case1_sits_below_exact(self):
        params = fig2_market(0.5)
        e = exps_for(params, PUT)
        bnd = solve_boundaries(params, PUT, e)
        assert bnd.heuristic_exists
        assert bnd.heuristic_h_a == pytest.approx(0.66484017230584728, rel=1e-12)
        assert bnd.heuristic_h_a <= bnd.h_a

    def test_case2_two_zero_selection(self):
        params = fig3_market(0.3)
        e = exps_for(params, PUT)
        res = solve_heuristic(params, PUT, e, post_change_boundary(e, PUT),
                              Phase.CASE2)
        assert res.exists
        assert res.discarded_root is not None
        assert res.root != res.discarded_root
        # both zeros really are zeros of the extended G
        for z in (res.root, res.discarded_root):
            assert abs(g_aux(z, e, PUT)) <= 1e-10
        # chosen boundary still sits below the exact one for this family
        bnd = solve_boundaries(params, PUT, e)
        assert bnd.heuristic_h_a < bnd.h_a

    def test_case2_disappears_beyond_threshold(self):
        params = fig3_market(0.6)
        e = exps_for(params, PUT)
        res = solve_heuristic(params, PUT, e, post_change_boundary(e, PUT),
                              Phase.CASE2)
        assert not res.exists
        bnd = solve_boundaries(params, PUT, e)
        assert not bnd.heuristic_exists and bnd.heuristic_h_a is None


class TestCriticalLambda:
    def test_volatility_drop_put_reference(self):
        lam_bar = critical_lambda(fig3_market(0.4), PUT)
        assert lam_bar is not None
        assert 0.499 <= lam_bar <= 0.520
        # frozen from a 50-digit root of the extremal value in lambda
        assert lam_bar == pytest.approx(0.50938775510204082, abs=2e-6)
        # heuristic existence flips across the threshold
        assert heuristic_exists_at(replace(fig3_market(0.4), lam=lam_bar - 1e-3), PUT)
        assert not heuristic_exists_at(replace(fig3_market(0.4), lam=lam_bar + 1e-3), PUT)

    def test_equal_regimes_has_no_transition(self):
        params, spec = equal_regime_put()
        assert critical_lambda(params, spec) is None

    def test_call_mirror_has_a_threshold(self):
        # same volatility drop flips the call exponents into case 2 as well
        params = MarketParams(r=0.04, lam=0.4, sigma_a=0.40, sigma_b=0.25,
                              delta_a=0.0175, delta_b=0.0175)
        lam_bar = critical_lambda(params, CALL)
        assert lam_bar is not None and lam_bar > 0.0
        assert heuristic_exists_at(replace(params, lam=lam_bar - 1e-3), CALL)
        assert not heuristic_exists_at(replace(params, lam=lam_bar + 1e-3), CALL)


class TestOrderingSweep:
    def test_phase_consistent_ordering(self, rng):
        """1000 random markets: boundary ordering, root consistency."""
        for _ in range(1000):
            params, spec = draw_params(rng)
            bnd = solve_boundaries(params, spec)
            k = spec.strike
            if spec.kind is OptionKind.CALL:
                assert bnd.h_b > k
            else:
                assert 0.0 < bnd.h_b < k
            if bnd.phase is Phase.CASE1:
                if spec.kind is OptionKind.CALL:
                    assert bnd.h_a <= bnd.h_b
                else:
                    assert bnd.h_a >= bnd.h_b
            elif bnd.phase is Phase.CASE2:
                if spec.kind is OptionKind.CALL:
                    assert bnd.h_a > bnd.h_b
                else:
                    assert bnd.h_a < bnd.h_b
            if bnd.root is not None and math.isfinite(bnd.h_a) and math.isfinite(bnd.h_b):
                assert bnd.root * bnd.h_b == pytest.approx(bnd.h_a, rel=1e-12)

    def test_put_case1_heuristic_dominated(self, rng):
        """Randomized case-1 puts: the metastable boundary never exceeds
        the exact one (measured across the sweep, not proven in general)."""
        count = 0
        while count < 200:
            params, spec = draw_params(rng)
            if spec.kind is not OptionKind.PUT or params.lam == 0.0:
                continue
            bnd = solve_boundaries(params, spec)
            if bnd.phase is not Phase.CASE1 or not bnd.heuristic_exists:
                continue
            count += 1
            assert bnd.heuristic_h_a <= bnd.h_a + 1e-12 * bnd.h_a


class TestPhaseBorderContinuity:
    def test_boundaries_meet_as_exponents_merge(self):
        # sweep the pre-change volatility through the point where the
        # exponent ratio crosses 1 (sigma_a = sigma_b here): both case roots
        # approach 1, so H_a -> H_b from either side
        spec = PUT
        gaps = []
        for eps in (1e-2, 1e-3, 1e-4):
            for side in (+1, -1):
                params = MarketParams(r=0.04, lam=0.4, sigma_a=0.25 * (1 + side * eps),
                                      sigma_b=0.25, delta_a=0.0175, delta_b=0.0175)
                bnd = solve_boundaries(params, spec)
                assert bnd.phase in (Phase.CASE1, Phase.CASE2)
                gaps.append(abs(bnd.root - 1.0))
        # gaps shrink roughly linearly with eps
        assert gaps[0] < 0.5 and gaps[1] < 0.5
        assert max(gaps[2], gaps[3]) < 0.1
        assert max(gaps[4], gaps[5]) < 0.01
