"""Shared draws and constructors for the test suite."""

from __future__ import annotations

import random

import pytest

from perpregime import MarketParams, OptionKind, OptionSpec, compute_exponents


def draw_params(rng: random.Random) -> tuple[MarketParams, OptionSpec]:
    """A random admissible market and contract covering every phase.

    Ranges are moderate (volatilities 12..60%, intensities up to 2/yr) so
    closed-form curvature at the boundary stays within the finite-difference
    tolerance used by the pasting checks.
    """
    kind = rng.choice([OptionKind.CALL, OptionKind.PUT])
    params = MarketParams(
        r=rng.uniform(0.01, 0.12),
        lam=rng.choice([0.0, rng.uniform(1e-3, 2.0)]),
        sigma_a=rng.uniform(0.12, 0.60),
        sigma_b=rng.uniform(0.12, 0.60),
        delta_a=rng.choice([0.0, rng.uniform(0.0, 0.10)]),
        delta_b=rng.choice([0.0, rng.uniform(0.0, 0.10)]),
    )
    return params, OptionSpec(kind, 1.0)


def delta_for_target_beta(target: float, r: float, sigma: float) -> float:
    """Dividend yield putting the kind-matched exponent at ``target``.

    From the characteristic equation: delta = sigma^2 (target - 1) / 2
    + r (1 - 1/target).  Negative results mean the target is infeasible.
    """
    return 0.5 * sigma * sigma * (target - 1.0) + r * (1.0 - 1.0 / target)


def equal_regime_put(r=0.04, lam=0.7, sigma_a=0.10, sigma_b=0.25,
                     delta_b=0.0175, target=-1.0) -> tuple[MarketParams, OptionSpec]:
    """Put market with different regimes but coinciding minus-exponents."""
    spec = OptionSpec(OptionKind.PUT, 1.0)
    probe = MarketParams(r=r, lam=lam, sigma_a=sigma_a, sigma_b=sigma_b,
                         delta_a=0.0, delta_b=delta_b)
    bb = compute_exponents(probe, spec).beta_minus_b
    da = delta_for_target_beta(bb, r, sigma_a)
    assert da >= 0.0, "infeasible equal-regime construction"
    return MarketParams(r=r, lam=lam, sigma_a=sigma_a, sigma_b=sigma_b,
                        delta_a=da, delta_b=delta_b), spec


def resonant_call(perturb: float = 0.0, r=0.04, lam=0.5, sigma_a=0.10,
                  delta_a=0.02, sigma_b=0.20) -> tuple[MarketParams, OptionSpec]:
    """Call market whose post-change exponent sits at gamma * (1 + perturb)."""
    spec = OptionSpec(OptionKind.CALL, 1.0)
    probe = MarketParams(r=r, lam=lam, sigma_a=sigma_a, sigma_b=sigma_b,
                         delta_a=delta_a, delta_b=0.05)
    target = compute_exponents(probe, spec).gamma_plus_a * (1.0 + perturb)
    db = delta_for_target_beta(target, r, sigma_b)
    assert db > 0.0
    return MarketParams(r=r, lam=lam, sigma_a=sigma_a, sigma_b=sigma_b,
                        delta_a=delta_a, delta_b=db), spec


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240811)
