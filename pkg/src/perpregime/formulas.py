"""Closed-form price branches as sums of power terms.

Every live branch of the solution is a finite sum of terms

    coef * (S / scale)^expo          and, in the resonant case,
    coef * (S / scale)^expo * ln(S / scale),

which makes values, spot-derivatives of any order, and differential-operator
residuals exact up to rounding.  Powers are evaluated as exp(expo * ln(ratio))
so that extreme exponents degrade to 0/inf instead of raising, and zero
coefficients short-circuit before the power is formed (0 * inf traps).

The builders below assemble the branch term lists from the solved boundaries.
Boundary arguments may be ``math.inf``; terms anchored on an infinite level
are the ones that vanish in that limit and are simply dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import DerivedExponents, MarketParams, OptionSpec


def pow_ratio(x: float, e: float) -> float:
    """x**e via exp-log, saturating to 0/inf instead of raising."""
    if x == 0.0:
        return 0.0 if e > 0.0 else math.inf
    if e == 0.0:
        return 1.0
    if e == 1.0:
        return x
    try:
        return math.exp(e * math.log(x))
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class Term:
    """coef * (S/scale)^expo, optionally times ln(S/scale)."""

    coef: float
    scale: float
    expo: float
    log: bool = False

    def value(self, spot: float) -> float:
        if self.coef == 0.0:
            return 0.0
        v = self.coef * pow_ratio(spot / self.scale, self.expo)
        if self.log:
            v *= math.log(spot / self.scale)
        return v

    def derivative(self) -> tuple["Term", ...]:
        c = self.coef / self.scale
        if not self.log:
            if self.expo == 0.0:
                return ()
            return (Term(c * self.expo, self.scale, self.expo - 1.0),)
        out = [Term(c, self.scale, self.expo - 1.0)]
        if self.expo != 0.0:
            out.append(Term(c * self.expo, self.scale, self.expo - 1.0, log=True))
        return tuple(out)


def eval_terms(terms: tuple[Term, ...], spot: float) -> float:
    return math.fsum(t.value(spot) for t in terms)


def differentiate(terms: tuple[Term, ...], order: int = 1) -> tuple[Term, ...]:
    for _ in range(order):
        terms = tuple(d for t in terms for d in t.derivative())
    return terms


def _term(coef: float, scale: float, expo: float, log: bool = False) -> tuple[Term, ...]:
    # Drop vanishing or infinitely-anchored contributions at build time.
    if coef == 0.0 or not math.isfinite(scale):
        return ()
    return (Term(coef, scale, expo, log),)


def post_change_terms(params: MarketParams, spec: OptionSpec, exps: DerivedExponents,
                      h_b: float) -> tuple[Term, ...]:
    """Live-side price after the change: +/-(H_b - K) (S/H_b)^beta_b, or S itself
    when the post-change call boundary is infinite (no dividends)."""
    s, k = spec.kind.sign, spec.strike
    if math.isinf(h_b):
        return _term(k, k, 1.0)  # coef*(S/K)^1 with coef=K is S itself
    return _term(s * (h_b - k), h_b, exps.beta_b(spec.kind))


def case1_terms(params: MarketParams, spec: OptionSpec, exps: DerivedExponents,
                h_a: float, h_b: float) -> tuple[Term, ...]:
    """Single-expression pre-change price (boundary on the near side of H_b)."""
    s, k = spec.kind.sign, spec.strike
    g = exps.gamma(spec.kind)
    b = exps.beta_b(spec.kind)
    lam = params.lam
    w = lam / (lam + exps.ell) if lam > 0.0 else 0.0
    pb = s * (h_b - k) * w
    return (
        _term(s * (h_a - k) - pb * pow_ratio(h_a / h_b, b), h_a, g)
        + _term(pb, h_b, b)
    )


def case2_inner_terms(params: MarketParams, spec: OptionSpec, exps: DerivedExponents,
                      h_a: float, h_b: float) -> tuple[Term, ...]:
    """Two-branch pre-change price on the far side of H_b (away from exercise)."""
    s, k = spec.kind.sign, spec.strike
    lam, r, da = params.lam, params.r, params.delta_a
    g = exps.gamma(spec.kind)
    g2 = exps.gamma_opposite(spec.kind)
    b = exps.beta_b(spec.kind)
    front = s * lam / (lam + r) * k / (g - g2)
    c_g = front * g2 / (g - b) * b / (g - 1.0)
    c_b = -front * g2 / (g - b) * g / (b - 1.0) * (g - g2) / (b - g2)
    c_tail = -front * g * b / ((1.0 - g2) * (b - g2))
    out = _term(c_b, h_b, b) + _term(c_g, h_b, g)
    if math.isfinite(h_a):
        out += _term(s * (da / (lam + da) * h_a - r / (lam + r) * k), h_a, g)
        out += _term(c_tail * pow_ratio(h_b / h_a, g - g2), h_b, g)
    return out


def case2_middle_terms(params: MarketParams, spec: OptionSpec, exps: DerivedExponents,
                       h_a: float, h_b: float) -> tuple[Term, ...]:
    """Two-branch pre-change price between the boundaries (the post-change side
    would exercise immediately, so the coupling source is the payoff)."""
    s, k = spec.kind.sign, spec.strike
    lam, r, da = params.lam, params.r, params.delta_a
    g = exps.gamma(spec.kind)
    g2 = exps.gamma_opposite(spec.kind)
    b = exps.beta_b(spec.kind)
    c = s * lam * k / (lam + r) * g * b / ((g - g2) * (1.0 - g2) * (b - g2))
    out = _term(c, h_b, g2)
    out += _term(s * lam / (lam + da) * k, k, 1.0)  # the linear-in-S piece
    out += _term(-s * lam / (lam + r) * k, k, 0.0)
    if math.isfinite(h_a):
        out += _term(s * (da / (lam + da) * h_a - r / (lam + r) * k)
                     - c * pow_ratio(h_a / h_b, g2), h_a, g)
    return out


def degenerate_inner_terms(params: MarketParams, spec: OptionSpec, exps: DerivedExponents,
                           h_a: float, h_b: float) -> tuple[Term, ...]:
    """Resonant limit beta_b -> gamma of the inner branch: a ln(S/H_b) term
    replaces the collided power."""
    s, k = spec.kind.sign, spec.strike
    lam, r, da = params.lam, params.r, params.delta_a
    g = exps.gamma(spec.kind)
    g2 = exps.gamma_opposite(spec.kind)
    front = s * lam / (lam + r) * k / (g - g2)
    c_alg = front * g2 / (g - 1.0) * ((1.0 - 2.0 * g) / (g - 1.0) - g / (g - g2))
    c_log = front * g2 / (g - 1.0) * g
    out = _term(c_alg, h_b, g) + _term(c_log, h_b, g, log=True)
    if math.isfinite(h_a):
        out += _term(s * (da / (lam + da) * h_a - r / (lam + r) * k), h_a, g)
        out += _term(-front * g * g / ((1.0 - g2) * (g - g2))
                     * pow_ratio(h_b / h_a, g - g2), h_b, g)
    return out


def div_stop_terms(params: MarketParams, spec: OptionSpec, exps: DerivedExponents,
                   h_a: float) -> tuple[Term, ...]:
    """Call price when dividends stop after the change (beta_b = 1, H_b infinite)."""
    k = spec.strike
    lam, da = params.lam, params.delta_a
    g = exps.gamma_plus_a
    out = _term(lam / (lam + da) * k, k, 1.0)
    if math.isfinite(h_a):
        out += _term(da / (lam + da) * h_a - k, h_a, g)
    return out
