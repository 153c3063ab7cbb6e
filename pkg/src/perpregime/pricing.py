"""Piecewise closed-form price assembly and evaluation.

A ``PriceModel`` holds the solved boundaries and an ordered branch table that
partitions (0, inf) with breakpoints only at H_a and H_b.  Each live branch
carries its term list together with the data of its governing equation

    sigma^2/2 S^2 P'' + (r - delta) S P' - rate P + source(S) = 0,

where ``rate`` is r + lam before the change and r after it, and ``source`` is
lam times whatever the post-change side is worth there (its live form on the
far side of H_b, the payoff in between).  Exercise regions evaluate the
payoff literally rather than any analytic continuation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

from .boundary import BoundarySolution, Phase, solve_boundaries
from .errors import DomainError, UnsupportedBranchError
from .formulas import (
    Term,
    case1_terms,
    case2_inner_terms,
    case2_middle_terms,
    degenerate_inner_terms,
    differentiate,
    div_stop_terms,
    eval_terms,
    post_change_terms,
)
from .model import (
    EQ_TOL,
    DerivedExponents,
    MarketParams,
    OptionKind,
    OptionSpec,
    compute_exponents,
)

# Above EQ_TOL but below this, the regular and resonant inner forms are
# cross-checked at build time: cancellation in the regular form grows like
# the reciprocal exponent gap.
RESONANCE_CHECK_WINDOW = 1e-6
RESONANCE_CHECK_RTOL = 1e-4


class BranchTag(Enum):
    POST_CHANGE = "post-change"
    PRE_CASE1 = "pre-case1"
    PRE_CASE2_INNER = "pre-case2-inner"
    PRE_CASE2_MIDDLE = "pre-case2-middle"
    DEGENERATE = "degenerate"
    DIV_STOP = "div-stop"
    DIV_START_INNER = "div-start-inner"
    DIV_START_MIDDLE = "div-start-middle"
    INTRINSIC = "intrinsic"
    UNDERLYING = "underlying"


@dataclass(frozen=True)
class Branch:
    """One S-interval of the piecewise price, with its governing-equation data."""

    tag: BranchTag
    lo: float
    hi: float
    terms: tuple[Term, ...] | None  # None: evaluate the payoff directly
    sigma: float = 0.0
    delta: float = 0.0
    rate: float = 0.0
    source: tuple[Term, ...] = ()

    @property
    def is_live(self) -> bool:
        return self.terms is not None


@dataclass(frozen=True)
class PriceModel:
    params: MarketParams
    spec: OptionSpec
    exps: DerivedExponents
    boundary: BoundarySolution
    branches: tuple[Branch, ...]
    post_terms: tuple[Term, ...]
    heuristic_terms: tuple[Term, ...] | None = None

    def branch_at(self, spot: float) -> Branch:
        if not (isinstance(spot, (int, float)) and spot > 0.0 and math.isfinite(spot)):
            raise DomainError(f"spot must be a positive finite number, got {spot!r}")
        for br in self.branches[:-1]:
            if spot < br.hi:
                return br
        return self.branches[-1]


def _resonance_gap(exps: DerivedExponents, spec: OptionSpec) -> float:
    g = exps.gamma(spec.kind)
    b = exps.beta_b(spec.kind)
    return abs(b - g) / max(abs(b), abs(g))


def _scaled(terms: tuple[Term, ...], factor: float) -> tuple[Term, ...]:
    return tuple(Term(factor * t.coef, t.scale, t.expo, t.log) for t in terms)


def _payoff_source(params: MarketParams, spec: OptionSpec) -> tuple[Term, ...]:
    # lam * (+/-(S - K)) written as power terms
    lam, k, s = params.lam, spec.strike, spec.kind.sign
    if lam == 0.0:
        return ()
    return (Term(lam * s * k, k, 1.0), Term(-lam * s * k, k, 0.0))


def build_price_model(params: MarketParams, spec: OptionSpec) -> PriceModel:
    """Assemble phase, boundaries and the branch table for one contract.

    With lam = 0 the pre-change problem is the plain single-regime one; its
    price is what the case-1 expression degenerates to, so the live branch is
    tagged ``PRE_CASE1`` regardless of how the exponents classify.
    """
    exps = compute_exponents(params, spec)
    bnd = solve_boundaries(params, spec, exps)
    k = spec.strike
    call = spec.kind is OptionKind.CALL
    r, lam = params.r, params.lam
    sa, da = params.sigma_a, params.delta_a
    sb, db = params.sigma_b, params.delta_b
    post = post_change_terms(params, spec, exps, bnd.h_b)
    live_src = _scaled(post, lam)
    pay_src = _payoff_source(params, spec)
    h_a, h_b = bnd.h_a, bnd.h_b

    def live(tag, lo, hi, terms, post_regime=False, source=()):
        if post_regime:
            return Branch(tag, lo, hi, terms, sb, db, r, ())
        return Branch(tag, lo, hi, terms, sa, da, r + lam, source)

    def intrinsic(lo, hi):
        return Branch(BranchTag.INTRINSIC, lo, hi, None)

    phase = bnd.phase
    if phase is Phase.NEVER_EXERCISE:
        branches = (live(BranchTag.UNDERLYING, 0.0, math.inf,
                         (Term(k, k, 1.0),), source=live_src),)
    elif phase is Phase.EQUAL_REGIMES:
        # coinciding exponents collapse the pre-change price onto the
        # post-change one, so the single-regime regime-b branch set applies
        if call:
            branches = (live(BranchTag.POST_CHANGE, 0.0, h_b, post, post_regime=True),
                        intrinsic(h_b, math.inf))
        else:
            branches = (intrinsic(0.0, h_b),
                        live(BranchTag.POST_CHANGE, h_b, math.inf, post, post_regime=True))
    elif phase is Phase.CALL_NO_DIVIDEND_STOP:
        terms = div_stop_terms(params, spec, exps, h_a)
        branches = (live(BranchTag.DIV_STOP, 0.0, h_a, terms,
                         source=_scaled((Term(k, k, 1.0),), lam)),
                    intrinsic(h_a, math.inf))
    elif phase is Phase.CALL_DIVIDEND_START and lam == 0.0:
        # the dividend never actually starts: the call quotes as the stock
        branches = (live(BranchTag.UNDERLYING, 0.0, math.inf,
                         (Term(k, k, 1.0),), source=live_src),)
    elif phase is Phase.CALL_DIVIDEND_START:
        inner_tag, inner = _case2_inner(params, spec, exps, math.inf, h_b)
        if inner_tag is BranchTag.PRE_CASE2_INNER:
            inner_tag = BranchTag.DIV_START_INNER
        middle = case2_middle_terms(params, spec, exps, math.inf, h_b)
        branches = (live(inner_tag, 0.0, h_b, inner, source=live_src),
                    live(BranchTag.DIV_START_MIDDLE, h_b, math.inf, middle,
                         source=pay_src))
    elif phase is Phase.CASE1 or params.lam == 0.0:
        terms = case1_terms(params, spec, exps, h_a, h_b)
        if call:
            branches = (live(BranchTag.PRE_CASE1, 0.0, h_a, terms, source=live_src),
                        intrinsic(h_a, math.inf))
        else:
            branches = (intrinsic(0.0, h_a),
                        live(BranchTag.PRE_CASE1, h_a, math.inf, terms, source=live_src))
    else:  # CASE2
        inner_tag, inner = _case2_inner(params, spec, exps, h_a, h_b)
        middle = case2_middle_terms(params, spec, exps, h_a, h_b)
        if call:
            branches = (live(inner_tag, 0.0, h_b, inner, source=live_src),
                        live(BranchTag.PRE_CASE2_MIDDLE, h_b, h_a, middle, source=pay_src),
                        intrinsic(h_a, math.inf))
        else:
            branches = (intrinsic(0.0, h_a),
                        live(BranchTag.PRE_CASE2_MIDDLE, h_a, h_b, middle, source=pay_src),
                        live(inner_tag, h_b, math.inf, inner, source=live_src))

    heuristic_terms = None
    if bnd.heuristic_exists and bnd.heuristic_h_a is not None:
        if phase is Phase.CASE1:
            heuristic_terms = case2_inner_terms(params, spec, exps, bnd.heuristic_h_a, h_b)
        elif _resonance_gap(exps, spec) > EQ_TOL:
            # the single-expression form has a pole where the post-change
            # exponent collides with the shifted one; no metastable price there
            heuristic_terms = case1_terms(params, spec, exps, bnd.heuristic_h_a, h_b)

    return PriceModel(params, spec, exps, bnd, branches, post, heuristic_terms)


def _case2_inner(params: MarketParams, spec: OptionSpec, exps: DerivedExponents,
                 h_a: float, h_b: float):
    """Pick the regular or resonant inner form; cross-check near the window edge."""
    gap = _resonance_gap(exps, spec)
    if gap <= EQ_TOL:
        return BranchTag.DEGENERATE, degenerate_inner_terms(params, spec, exps, h_a, h_b)
    terms = case2_inner_terms(params, spec, exps, h_a, h_b)
    if gap <= RESONANCE_CHECK_WINDOW:
        res = degenerate_inner_terms(params, spec, exps, h_a, h_b)
        fracs = (0.35, 0.6, 0.9) if spec.kind is OptionKind.CALL else (1.1, 1.6, 2.5)
        for frac in fracs:
            spot = frac * h_b
            a, d = eval_terms(terms, spot), eval_terms(res, spot)
            if abs(a - d) > RESONANCE_CHECK_RTOL * max(abs(a), abs(d), 1e-300):
                warnings.warn(
                    "regular and resonant-limit inner forms disagree by more "
                    f"than {RESONANCE_CHECK_RTOL:g} near the exponent collision "
                    f"(relative gap {gap:.3e})", RuntimeWarning, stacklevel=3)
                break
    return BranchTag.PRE_CASE2_INNER, terms


def price(spot: float, model: PriceModel) -> float:
    """Option value at the given spot: closed form on the live side, the exact
    payoff in the exercise region (never the analytic continuation)."""
    br = model.branch_at(spot)
    if br.terms is None:
        return model.spec.payoff(spot)
    if br.tag is BranchTag.UNDERLYING:
        return float(spot)  # quotes as the stock, exactly
    return eval_terms(br.terms, spot)


def price_derivative(spot: float, model: PriceModel, order: int = 1) -> float:
    """Analytic spot-derivative of the branch containing the spot.

    In the exercise region the payoff is differentiated instead (away from
    the strike kink).
    """
    br = model.branch_at(spot)
    if br.terms is None:
        if order == 1:
            return float(model.spec.kind.sign) if model.spec.payoff(spot) > 0.0 else 0.0
        return 0.0
    return eval_terms(differentiate(br.terms, order), spot)


def ode_residual(spot: float, model: PriceModel, branch: Branch | None = None) -> float:
    """Residual of the governing equation at the spot (0 for a live branch up
    to rounding).  Raises on exercise-region branches, which solve no ODE."""
    br = branch if branch is not None else model.branch_at(spot)
    if br.terms is None:
        raise UnsupportedBranchError("exercise region carries no governing equation")
    p = eval_terms(br.terms, spot)
    dp = eval_terms(differentiate(br.terms, 1), spot)
    d2p = eval_terms(differentiate(br.terms, 2), spot)
    src = eval_terms(br.source, spot) if br.source else 0.0
    return (0.5 * br.sigma ** 2 * spot * spot * d2p
            + (model.params.r - br.delta) * spot * dp
            - br.rate * p + src)


def price_post_change(spot: float, model: PriceModel) -> float:
    """Value once the regime has switched: live form inside H_b, payoff beyond."""
    if spot <= 0.0:
        raise DomainError("spot must be positive")
    h_b = model.boundary.h_b
    s = model.spec.kind.sign
    on_live_side = spot <= h_b if s > 0 else spot >= h_b
    if on_live_side:
        return eval_terms(model.post_terms, spot)
    return model.spec.payoff(spot)


def _require_phase(model: PriceModel, *phases: Phase) -> None:
    if model.boundary.phase not in phases:
        raise UnsupportedBranchError(
            f"operation needs phase in {[p.value for p in phases]}, "
            f"model is {model.boundary.phase.value}")


def _eval_with_cutoff(spot: float, model: PriceModel) -> float:
    br = model.branch_at(spot)
    if br.terms is None:
        return model.spec.payoff(spot)
    return eval_terms(br.terms, spot)


def price_pre_case1(spot: float, model: PriceModel) -> float:
    """Single-expression pre-change price (case 1), payoff beyond H_a."""
    _require_phase(model, Phase.CASE1)
    return _eval_with_cutoff(spot, model)


def price_pre_case2(spot: float, model: PriceModel) -> float:
    """Two-branch pre-change price (case 2 or the dividend-start reduction)."""
    _require_phase(model, Phase.CASE2, Phase.CALL_DIVIDEND_START)
    return _eval_with_cutoff(spot, model)


def price_degenerate(spot: float, model: PriceModel) -> float:
    """Resonant-limit price; requires the inner branch to be the log form."""
    _require_phase(model, Phase.CASE2, Phase.CALL_DIVIDEND_START)
    if not any(br.tag is BranchTag.DEGENERATE for br in model.branches):
        raise UnsupportedBranchError(
            "exponents are not at resonance; the regular case-2 form applies")
    return _eval_with_cutoff(spot, model)


def price_call_div_stop(spot: float, model: PriceModel) -> float:
    """Call price when the dividend stops after the change."""
    _require_phase(model, Phase.CALL_NO_DIVIDEND_STOP)
    return _eval_with_cutoff(spot, model)


def price_call_div_start(spot: float, model: PriceModel) -> float:
    """Call price when the dividend starts after the change (H_a infinite)."""
    _require_phase(model, Phase.CALL_DIVIDEND_START)
    return _eval_with_cutoff(spot, model)


def heuristic_price(spot: float, model: PriceModel) -> float:
    """Metastable-branch price at the heuristic boundary, payoff beyond it.

    The value does not match the payoff at the heuristic boundary itself;
    the jump there is intrinsic to the construction.
    """
    if model.heuristic_terms is None:
        raise UnsupportedBranchError("no heuristic branch exists for this model")
    h_hat = model.boundary.heuristic_h_a
    s = model.spec.kind.sign
    live = spot <= h_hat if s > 0 else spot >= h_hat
    if live:
        return eval_terms(model.heuristic_terms, spot)
    return model.spec.payoff(spot)
