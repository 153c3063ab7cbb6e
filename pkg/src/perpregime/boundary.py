"""Phase classification and the transcendental optimal-boundary solvers.

The post-change boundary is algebraic, H_b = beta_b K / (beta_b - 1).  The
pre-change boundary H_a solves a transcendental equation whose form depends
on the relative size of the kind-matched exponents:

* ``|beta_a| >= |beta_b|`` (case 1): H_a sits on the near side of H_b and
  eta_0 = H_a / H_b is the unique zero of

      G(eta) = A eta^(1 - beta_b) - eta^(-beta_b) -/+ B

  on (0, 1] for calls, [1, inf) for puts.

* ``|beta_a| < |beta_b|`` (case 2): H_a sits on the far side and
  chi_0 = H_a / H_b is the unique zero of

      H(chi) = chi^(-gamma_opp) -/+ C chi^(1 - gamma_opp) +/- D

  on (1, inf) for calls, (0, 1) for puts.

Both functions extended to the whole positive axis also drive the heuristic
(metastable) boundary: in case 1 the extended H always has exactly one zero;
in case 2 the extended G has two zeros or none, and past a critical intensity
the zeros disappear entirely.

Roots are found by sign-change bracketing (the end signs are pinned down
analytically, see the guards below), bisection to 1e-12 relative width, and
a short Newton polish with the analytic derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .errors import BracketError, DomainError, UnsupportedBranchError
from .formulas import case1_terms, eval_terms, pow_ratio
from .model import (
    EQ_TOL,
    DerivedExponents,
    MarketParams,
    OptionKind,
    OptionSpec,
    compute_exponents,
)

# Bisection runs until the bracket width is below this, relative to the root.
ROOT_RTOL = 1e-12
# Newton steps applied after bisection (brackets are proven, Newton only polishes).
NEWTON_STEPS = 5
# Geometric bracket growth factor and iteration cap; 2^1100 exceeds the float
# range, so the cap is equivalent to unbounded growth.
BRACKET_GROWTH = 2.0
MAX_BRACKET_STEPS = 1100
# Search range and absolute tolerance for the critical intensity.
LAMBDA_SEARCH_RANGE = (1e-6, 1e3)
LAMBDA_ATOL = 1e-6


class Phase(Enum):
    """Which formula family prices the pre-change regime."""

    EQUAL_REGIMES = "equal-regimes"
    CASE1 = "case1"
    CASE2 = "case2"
    CALL_NO_DIVIDEND_STOP = "call-no-dividend-stop"
    CALL_DIVIDEND_START = "call-dividend-start"
    NEVER_EXERCISE = "never-exercise"


@dataclass(frozen=True)
class BoundarySolution:
    """Solved exercise boundaries plus the heuristic counterpart.

    ``root`` is eta_0 (case 1) or chi_0 (case 2); it reproduces the boundary
    through H_a = root * H_b whenever both are finite.  The heuristic fields
    are populated only for case 1/2 phases with positive intensity; in case 2
    the extended auxiliary function may have two zeros, in which case the one
    whose single-expression price at S = K is larger is kept and the other is
    recorded in ``heuristic_discarded_root``.
    """

    phase: Phase
    h_b: float
    h_a: float
    root: float | None
    heuristic_exists: bool = False
    heuristic_h_a: float | None = None
    heuristic_root: float | None = None
    heuristic_discarded_root: float | None = None


def post_change_boundary(exps: DerivedExponents, spec: OptionSpec) -> float:
    """H_b = beta_b K / (beta_b - 1); infinite for calls when dividends stop."""
    b = exps.beta_b(spec.kind)
    if spec.kind is OptionKind.CALL and abs(b - 1.0) <= EQ_TOL * max(1.0, abs(b)):
        return math.inf
    return b / (b - 1.0) * spec.strike


def g_aux(eta: float, exps: DerivedExponents, spec: OptionSpec) -> float:
    """G(eta) = A eta^(1-beta_b) - eta^(-beta_b) -/+ B (upper sign: call)."""
    if not (eta > 0.0):
        raise DomainError(f"eta must be positive, got {eta}")
    if not exps.coeffs_finite:
        raise UnsupportedBranchError(
            "auxiliary coefficients are non-finite (post-change exponent at "
            "resonance); route to the dividend special cases instead")
    b = exps.beta_b(spec.kind)
    s = spec.kind.sign
    return (exps.coeff_a * pow_ratio(eta, 1.0 - b)
            - pow_ratio(eta, -b)
            - s * exps.coeff_b)


def _g_aux_deriv(eta: float, exps: DerivedExponents, spec: OptionSpec) -> float:
    b = exps.beta_b(spec.kind)
    return (exps.coeff_a * (1.0 - b) * pow_ratio(eta, -b)
            + b * pow_ratio(eta, -b - 1.0))


def h_aux(chi: float, exps: DerivedExponents, spec: OptionSpec) -> float:
    """H(chi) = chi^(-gamma_opp) -/+ C chi^(1-gamma_opp) +/- D (upper sign: call)."""
    if not (chi > 0.0):
        raise DomainError(f"chi must be positive, got {chi}")
    if not exps.coeffs_finite:
        raise UnsupportedBranchError(
            "auxiliary coefficients are non-finite (post-change exponent at "
            "resonance); route to the dividend special cases instead")
    g2 = exps.gamma_opposite(spec.kind)
    s = spec.kind.sign
    ct = 0.0 if exps.coeff_c == 0.0 else s * exps.coeff_c * pow_ratio(chi, 1.0 - g2)
    return pow_ratio(chi, -g2) - ct + s * exps.coeff_d


def _h_aux_deriv(chi: float, exps: DerivedExponents, spec: OptionSpec) -> float:
    g2 = exps.gamma_opposite(spec.kind)
    s = spec.kind.sign
    ct = 0.0 if exps.coeff_c == 0.0 else \
        s * exps.coeff_c * (1.0 - g2) * pow_ratio(chi, -g2)
    return -g2 * pow_ratio(chi, -g2 - 1.0) - ct


def g_aux_scale(eta: float, exps: DerivedExponents, spec: OptionSpec) -> float:
    """Natural floating-point scale of G near eta: term magnitudes inflated
    by the exp-log rounding factor |expo * ln eta|.  Residuals of a fully
    converged root sit at ~1e-16 of this scale."""
    b = exps.beta_b(spec.kind)
    l = abs(math.log(eta)) if eta > 0 else 0.0
    t1 = abs(exps.coeff_a) * pow_ratio(eta, 1.0 - b) * (1.0 + abs(1.0 - b) * l)
    t2 = pow_ratio(eta, -b) * (1.0 + abs(b) * l)
    return max(1.0, abs(exps.coeff_a), abs(exps.coeff_b), t1, t2)


def h_aux_scale(chi: float, exps: DerivedExponents, spec: OptionSpec) -> float:
    """Natural floating-point scale of H near chi (see ``g_aux_scale``)."""
    g2 = exps.gamma_opposite(spec.kind)
    l = abs(math.log(chi)) if chi > 0 else 0.0
    t1 = pow_ratio(chi, -g2) * (1.0 + abs(g2) * l)
    t2 = abs(exps.coeff_c) * pow_ratio(chi, 1.0 - g2) * (1.0 + abs(1.0 - g2) * l)
    return max(1.0, abs(exps.coeff_c), abs(exps.coeff_d), t1, t2)


def g_aux_extremum(exps: DerivedExponents, spec: OptionSpec) -> float:
    """Location of G's single stationary point, eta_M = gamma / (gamma - 1).

    A maximum for calls, a minimum for puts; it lies outside the case-1
    bracket for either kind, which is what makes the case-1 zero unique.
    """
    g = exps.gamma(spec.kind)
    return g / (g - 1.0)


def h_aux_extremum(exps: DerivedExponents, spec: OptionSpec) -> float | None:
    """Location of H's stationary point, (beta_b - 1) r / (beta_b delta_a)
    in market terms; ``None`` when delta_a = 0 (H is then monotone)."""
    if exps.coeff_c == 0.0:
        return None
    g2 = exps.gamma_opposite(spec.kind)
    s = spec.kind.sign
    return -g2 / (s * exps.coeff_c * (1.0 - g2))


def classify_phase(exps: DerivedExponents, params: MarketParams,
                   spec: OptionSpec) -> Phase:
    """Deterministic phase tag.

    Checked in order: the never-exercise call (both regimes dividend-free,
    which would otherwise be shadowed by the equal-regimes test since both
    exponents sit at 1), the call dividend special cases, coinciding
    kind-matched exponents, then the generic case split on |beta_a| vs
    |beta_b|.
    """
    ba = exps.beta_a(spec.kind)
    bb = exps.beta_b(spec.kind)
    if spec.kind is OptionKind.CALL:
        a_nodiv = abs(ba - 1.0) <= EQ_TOL * max(1.0, abs(ba))
        b_nodiv = abs(bb - 1.0) <= EQ_TOL * max(1.0, abs(bb))
        if a_nodiv and b_nodiv:
            return Phase.NEVER_EXERCISE
        if b_nodiv:
            return Phase.CALL_NO_DIVIDEND_STOP
        if a_nodiv:
            return Phase.CALL_DIVIDEND_START
    if abs(ba - bb) <= EQ_TOL * max(abs(ba), abs(bb)):
        return Phase.EQUAL_REGIMES
    return Phase.CASE1 if abs(ba) >= abs(bb) else Phase.CASE2


def _bisect_newton(f, fprime, lo: float, hi: float, flo: float) -> float:
    """Bisection on a sign-change bracket, then a clamped Newton polish."""
    for _ in range(200):
        if hi - lo <= ROOT_RTOL * max(abs(lo), abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            lo = hi = mid
            break
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(NEWTON_STEPS):
        d = fprime(x)
        if d == 0.0 or not math.isfinite(d):
            break
        step = f(x) / d
        if not math.isfinite(step):
            break
        xn = x - step
        if not (lo <= xn <= hi) or xn == x:
            break
        x = xn
    return x


def _grow(f, start: float, factor: float, want_positive: bool) -> float:
    """March start by the factor until f changes to the wanted sign."""
    x = start
    for _ in range(MAX_BRACKET_STEPS):
        x *= factor
        v = f(x)
        if math.isnan(v):
            break
        if (v > 0.0) == want_positive or v == 0.0:
            return x
    raise BracketError(
        f"no sign change while marching from {start} by factor {factor}")


def solve_case1_root(exps: DerivedExponents, spec: OptionSpec) -> float:
    """Unique zero eta_0 of G on (0, 1] for calls, [1, inf) for puts.

    The end signs are pinned by G(1) = +/- ell B / lam (non-negative for
    calls in case 1, non-positive for puts) and by the divergence of G at
    the far end of the bracket.
    """
    f = lambda eta: g_aux(eta, exps, spec)
    fp = lambda eta: _g_aux_deriv(eta, exps, spec)
    g1 = f(1.0)
    if g1 == 0.0:
        return 1.0
    if spec.kind is OptionKind.CALL:
        if g1 < 0.0:
            raise BracketError("G(1) < 0 for a call classified as case 1")
        lo = _grow(f, 1.0, 1.0 / BRACKET_GROWTH, want_positive=False)
        return _bisect_newton(f, fp, lo, 1.0, f(lo))
    if g1 > 0.0:
        raise BracketError("G(1) > 0 for a put classified as case 1")
    hi = _grow(f, 1.0, BRACKET_GROWTH, want_positive=True)
    return _bisect_newton(f, fp, 1.0, hi, g1)


def solve_case2_root(exps: DerivedExponents, spec: OptionSpec) -> float:
    """Unique zero chi_0 of H on (1, inf) for calls, (0, 1) for puts.

    For a call that currently pays no dividends (C = 0) the function is
    strictly positive and the maximal principle is only satisfied by an
    infinite boundary; ``math.inf`` is returned for that case.
    """
    f = lambda chi: h_aux(chi, exps, spec)
    fp = lambda chi: _h_aux_deriv(chi, exps, spec)
    h1 = f(1.0)
    if h1 == 0.0:
        return 1.0
    if spec.kind is OptionKind.CALL:
        if exps.coeff_c == 0.0:
            return math.inf
        if h1 < 0.0:
            raise BracketError("H(1) < 0 for a call classified as case 2")
        hi = _grow(f, 1.0, BRACKET_GROWTH, want_positive=False)
        return _bisect_newton(f, fp, 1.0, hi, h1)
    if h1 > 0.0:
        raise BracketError("H(1) > 0 for a put classified as case 2")
    lo = _grow(f, 1.0, 1.0 / BRACKET_GROWTH, want_positive=True)
    return _bisect_newton(f, fp, lo, 1.0, f(lo))


@dataclass(frozen=True)
class HeuristicResult:
    exists: bool
    h_a: float | None = None
    root: float | None = None
    discarded_root: float | None = None


def solve_heuristic(params: MarketParams, spec: OptionSpec, exps: DerivedExponents,
                    h_b: float, phase: Phase) -> HeuristicResult:
    """Metastable boundary from the out-of-domain auxiliary function.

    In case 1 the extended H has exactly one positive zero, so the heuristic
    always exists there.  In case 2 the extended G has two zeros when its
    interior extremum reaches past zero and none otherwise; with two zeros,
    the candidate with the larger single-expression price at S = K is kept
    (consistent with boundary maximality) and the other recorded.

    At lam = 0 the two formula families coincide and no separate metastable
    branch remains, so the heuristic is reported as non-existent.
    """
    if phase not in (Phase.CASE1, Phase.CASE2) or params.lam == 0.0:
        return HeuristicResult(exists=False)

    if phase is Phase.CASE1:
        f = lambda chi: h_aux(chi, exps, spec)
        fp = lambda chi: _h_aux_deriv(chi, exps, spec)
        h1 = f(1.0)
        if h1 == 0.0:
            root = 1.0
        elif spec.kind is OptionKind.CALL:
            # case-1 call: H(1) < 0 while H(0+) = +D > 0
            lo = _grow(f, 1.0, 1.0 / BRACKET_GROWTH, want_positive=True)
            root = _bisect_newton(f, fp, lo, 1.0, f(lo))
        else:
            # case-1 put: H(1) > 0 while H -> -D < 0 at infinity
            hi = _grow(f, 1.0, BRACKET_GROWTH, want_positive=False)
            root = _bisect_newton(f, fp, 1.0, hi, h1)
        return HeuristicResult(exists=True, h_a=root * h_b, root=root)

    # case 2: zeros of G around its single interior extremum, if any
    s = spec.kind.sign
    f = lambda eta: g_aux(eta, exps, spec)
    fp = lambda eta: _g_aux_deriv(eta, exps, spec)
    eta_m = g_aux_extremum(exps, spec)
    extremal = f(eta_m)
    if s * extremal < 0.0:
        return HeuristicResult(exists=False)
    if extremal == 0.0:
        return HeuristicResult(exists=True, h_a=eta_m * h_b, root=eta_m)
    # G carries the sign of the extremum at eta_M and the opposite sign at
    # both ends of the positive axis, one zero on each side of eta_M.
    outer_positive = extremal < 0.0
    left = _grow(f, eta_m, 1.0 / BRACKET_GROWTH, want_positive=outer_positive)
    right = _grow(f, eta_m, BRACKET_GROWTH, want_positive=outer_positive)
    z_left = _bisect_newton(f, fp, left, eta_m, f(left))
    z_right = _bisect_newton(f, fp, eta_m, right, extremal)

    def price_at_strike(root: float) -> float:
        terms = case1_terms(params, spec, exps, root * h_b, h_b)
        return eval_terms(terms, spec.strike)

    if price_at_strike(z_right) >= price_at_strike(z_left):
        chosen, discarded = z_right, z_left
    else:
        chosen, discarded = z_left, z_right
    return HeuristicResult(exists=True, h_a=chosen * h_b, root=chosen,
                           discarded_root=discarded)


def heuristic_exists_at(params: MarketParams, spec: OptionSpec) -> bool:
    """Whether the extended G still reaches zero (case-2 heuristic existence)."""
    exps = compute_exponents(params, spec)
    eta_m = g_aux_extremum(exps, spec)
    return spec.kind.sign * g_aux(eta_m, exps, spec) >= 0.0


def critical_lambda(params: MarketParams, spec: OptionSpec) -> float | None:
    """Intensity at which the case-2 heuristic branch disappears.

    The extended G loses its zeros when its interior extremum crosses zero;
    the crossing is located by a coarse logarithmic scan over
    ``LAMBDA_SEARCH_RANGE`` followed by bisection to ``LAMBDA_ATOL``.
    Returns ``None`` ("no transition") when the phase is not case 2 or the
    heuristic exists across the whole range.
    """
    exps = compute_exponents(params, spec)
    if classify_phase(exps, params, spec) is not Phase.CASE2:
        return None

    def exists(lam: float) -> bool:
        return heuristic_exists_at(replace(params, lam=lam), spec)

    lo_l, hi_l = LAMBDA_SEARCH_RANGE
    n_scan = 61
    grid = [lo_l * (hi_l / lo_l) ** (i / (n_scan - 1)) for i in range(n_scan)]
    flags = [exists(l) for l in grid]
    flip = next((i for i in range(1, n_scan) if flags[i] != flags[i - 1]), None)
    if flip is None:
        return None
    lo, hi = grid[flip - 1], grid[flip]
    flo = flags[flip - 1]
    while hi - lo > LAMBDA_ATOL:
        mid = 0.5 * (lo + hi)
        if exists(mid) == flo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _single_regime_boundary(params: MarketParams, spec: OptionSpec,
                            exps: DerivedExponents) -> float:
    """Pre-change boundary when the change never comes (lam = 0)."""
    ba = exps.beta_a(spec.kind)
    if spec.kind is OptionKind.CALL and abs(ba - 1.0) <= EQ_TOL * max(1.0, abs(ba)):
        return math.inf
    return ba / (ba - 1.0) * spec.strike


def solve_boundaries(params: MarketParams, spec: OptionSpec,
                     exps: DerivedExponents | None = None) -> BoundarySolution:
    """Classify the phase and solve both boundaries plus the heuristic."""
    if exps is None:
        exps = compute_exponents(params, spec)
    phase = classify_phase(exps, params, spec)
    h_b = post_change_boundary(exps, spec)
    k = spec.strike

    if phase is Phase.NEVER_EXERCISE:
        return BoundarySolution(phase, h_b, math.inf, None)
    if phase is Phase.CALL_NO_DIVIDEND_STOP:
        g = exps.gamma_plus_a
        h_a = g * (1.0 + params.lam / params.delta_a) / (g - 1.0) * k
        return BoundarySolution(phase, h_b, h_a, None)
    if phase is Phase.CALL_DIVIDEND_START:
        return BoundarySolution(phase, h_b, math.inf, math.inf)
    if phase is Phase.EQUAL_REGIMES:
        return BoundarySolution(phase, h_b, h_b, 1.0)

    if params.lam == 0.0:
        h_a = _single_regime_boundary(params, spec, exps)
        root = h_a / h_b
        return BoundarySolution(phase, h_b, h_a, root)

    if phase is Phase.CASE1:
        root = solve_case1_root(exps, spec)
    else:
        root = solve_case2_root(exps, spec)
    h_a = root * h_b
    heur = solve_heuristic(params, spec, exps, h_b, phase)
    return BoundarySolution(
        phase, h_b, h_a, root,
        heuristic_exists=heur.exists,
        heuristic_h_a=heur.h_a,
        heuristic_root=heur.root,
        heuristic_discarded_root=heur.discarded_root,
    )
