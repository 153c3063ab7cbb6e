"""Monte Carlo oracle: determinism, concordance, variance behavior."""

import math
from dataclasses import replace

import pytest

from perpregime import (
    DomainError,
    MarketParams,
    OptionKind,
    OptionSpec,
    build_price_model,
    price,
    solve_boundaries,
)
from perpregime.mc import McConfig, McEstimate, mc_price

PUT = OptionSpec(OptionKind.PUT, 1.0)
CALL = OptionSpec(OptionKind.CALL, 1.0)

SINGLE = MarketParams(r=0.05, lam=0.0, sigma_a=0.30, sigma_b=0.30,
                      delta_a=0.0, delta_b=0.0)
# a fast-exercising regime-switch family for cheap concordance checks
SWITCHY = MarketParams(r=0.05, lam=2.0, sigma_a=0.35, sigma_b=0.20,
                       delta_a=0.0, delta_b=0.04)
QUICK = McConfig(paths=20000, dt=2e-3, t_max=60.0, seed=7)


class TestMechanics:
    def test_config_validation(self):
        with pytest.raises(DomainError):
            McConfig(paths=0)
        with pytest.raises(DomainError):
            McConfig(paths=100, dt=1.0 / 200.0)  # coarser than daily
        with pytest.raises(DomainError):
            McConfig(paths=100, t_max=-1.0)

    def test_determinism(self):
        bnd = solve_boundaries(SINGLE, PUT)
        cfg = McConfig(paths=2000, dt=2e-3, t_max=30.0, seed=11)
        a = mc_price(SINGLE, PUT, bnd, cfg, spot=1.0)
        b = mc_price(SINGLE, PUT, bnd, cfg, spot=1.0)
        assert a == b
        c = mc_price(SINGLE, PUT, bnd, replace(cfg, seed=12), spot=1.0)
        assert c.mean != a.mean

    def test_deep_itm_exercises_immediately(self):
        bnd = solve_boundaries(SINGLE, PUT)
        spot = bnd.h_a / 2.0
        est = mc_price(SINGLE, PUT, bnd, McConfig(paths=64, dt=2e-3, t_max=5.0),
                       spot=spot)
        assert est.mean == 1.0 - spot
        assert est.std_error == 0.0
        assert est.truncated_paths == 0

    def test_never_exercise_identity(self):
        params = MarketParams(r=0.04, lam=0.5, sigma_a=0.10, sigma_b=0.25,
                              delta_a=0.0, delta_b=0.0)
        bnd = solve_boundaries(params, CALL)
        est = mc_price(params, CALL, bnd, McConfig(paths=100), spot=1.23)
        assert est == McEstimate(mean=1.23, std_error=0.0, paths_used=100,
                                 truncation_bound=0.0)

    def test_put_truncation_bound_is_discounted_strike(self):
        bnd = solve_boundaries(SINGLE, PUT)
        cfg = McConfig(paths=1000, dt=2e-3, t_max=30.0, seed=3)
        est = mc_price(SINGLE, PUT, bnd, cfg, spot=1.0)
        assert est.truncation_bound == pytest.approx(math.exp(-0.05 * 30.0))
        assert est.truncated_paths > 0

    def test_rejects_bad_spot(self):
        bnd = solve_boundaries(SINGLE, PUT)
        with pytest.raises(DomainError):
            mc_price(SINGLE, PUT, bnd, McConfig(paths=10), spot=-1.0)


class TestConcordance:
    def test_single_regime_put(self):
        bnd = solve_boundaries(SINGLE, PUT)
        model = build_price_model(SINGLE, PUT)
        cfg = McConfig(paths=20000, dt=1e-3, t_max=100.0, seed=42)
        est = mc_price(SINGLE, PUT, bnd, cfg, spot=1.0)
        closed = price(1.0, model)
        assert abs(est.mean - closed) <= 3.0 * est.std_error
        assert est.std_error < 0.002

    def test_switching_put_both_branches(self):
        """Spot between the two boundaries: exercise happens either on the
        pre-change grid or exactly at the switch, exercising the split-step
        logic hard because the post-change boundary sits above the spot."""
        bnd = solve_boundaries(SWITCHY, PUT)
        model = build_price_model(SWITCHY, PUT)
        assert bnd.h_a < bnd.h_b  # two-branch family
        spot = 0.5 * (bnd.h_a + bnd.h_b)
        est = mc_price(SWITCHY, PUT, bnd, QUICK, spot=spot)
        closed = price(spot, model)
        assert abs(est.mean - closed) <= 3.0 * est.std_error

    def test_switching_put_from_strike(self):
        bnd = solve_boundaries(SWITCHY, PUT)
        model = build_price_model(SWITCHY, PUT)
        est = mc_price(SWITCHY, PUT, bnd, QUICK, spot=1.0)
        closed = price(1.0, model)
        assert abs(est.mean - closed) <= 3.0 * est.std_error

    def test_switching_call(self):
        params = MarketParams(r=0.05, lam=1.0, sigma_a=0.25, sigma_b=0.20,
                              delta_a=0.03, delta_b=0.06)
        bnd = solve_boundaries(params, CALL)
        model = build_price_model(params, CALL)
        est = mc_price(params, CALL, bnd, QUICK, spot=1.1)
        closed = price(1.1, model)
        assert abs(est.mean - closed) <= 3.0 * est.std_error

    def test_single_expression_family_put(self):
        # boundary drops at the switch (case 1): the pre-change boundary is
        # the binding one and the policy jump at tau matters the other way
        params = MarketParams(r=0.05, lam=1.0, sigma_a=0.20, sigma_b=0.35,
                              delta_a=0.05, delta_b=0.05)
        from perpregime import Phase
        bnd = solve_boundaries(params, PUT)
        assert bnd.phase is Phase.CASE1 and bnd.h_a > bnd.h_b
        model = build_price_model(params, PUT)
        est = mc_price(params, PUT, bnd, QUICK, spot=1.0)
        closed = price(1.0, model)
        assert abs(est.mean - closed) <= 3.0 * est.std_error


class TestEstimatorQuality:
    def test_antithetic_reduces_variance(self):
        bnd = solve_boundaries(SWITCHY, PUT)
        plain = mc_price(SWITCHY, PUT, bnd, replace(QUICK, antithetic=False),
                         spot=1.0)
        anti = mc_price(SWITCHY, PUT, bnd, replace(QUICK, antithetic=True),
                        spot=1.0)
        assert anti.paths_used == plain.paths_used
        assert anti.std_error <= plain.std_error

    def test_refinement_stays_within_one_standard_error(self):
        """Halving dt and doubling the horizon moves the estimate by less
        than one standard error: discretization and truncation are minor."""
        bnd = solve_boundaries(SWITCHY, PUT)
        base = mc_price(SWITCHY, PUT, bnd,
                        McConfig(paths=20000, dt=2e-3, t_max=60.0, seed=5),
                        spot=1.0)
        fine = mc_price(SWITCHY, PUT, bnd,
                        McConfig(paths=20000, dt=1e-3, t_max=120.0, seed=5),
                        spot=1.0)
        assert abs(fine.mean - base.mean) <= max(base.std_error, fine.std_error)
