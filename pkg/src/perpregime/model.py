"""Market/contract data and the derived characteristic exponents.

The market has a single risk-free rate r and one stock whose volatility and
continuous dividend yield switch once, at an exponentially distributed random
time with intensity lambda, from regime a = (sigma_a, delta_a) to the known
regime b = (sigma_b, delta_b).

Every closed-form price in this package is assembled from the characteristic
exponents of the two regimes,

    beta^{+/-} = (-theta +/- sqrt(theta^2 + 2 r sigma^2)) / sigma^2,
    theta      = r - delta - sigma^2 / 2,

and from the lambda-shifted exponents gamma^{+/-} of regime a, obtained by
replacing r with r + lambda under the square root.  Calls use the ``+`` branch
throughout, puts the ``-`` branch.  The discriminant is always positive, so
both roots are real for every admissible parameter set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import DomainError

# Relative tolerance for the floating comparisons that switch formula
# families (beta_b = 1, beta_a = beta_b, beta_b = gamma_a).  These switches
# must be deterministic, so a single shared constant is used everywhere.
EQ_TOL = 1e-9


class OptionKind(Enum):
    CALL = "call"
    PUT = "put"

    @property
    def sign(self) -> int:
        """+1 for calls, -1 for puts: the sign in the payoff max(+/-(S-K), 0)."""
        return 1 if self is OptionKind.CALL else -1


@dataclass(frozen=True)
class MarketParams:
    """Exogenous model parameters, all per year (rates/yields as decimal fractions).

    ``lam`` is the regime-change intensity; its reciprocal is the expected
    time until the switch.  ``lam = 0`` means the change never happens and
    pricing reduces to the single-regime (regime a) problem.
    """

    r: float
    lam: float
    sigma_a: float
    sigma_b: float
    delta_a: float
    delta_b: float

    def __post_init__(self) -> None:
        for name in ("r", "lam", "sigma_a", "sigma_b", "delta_a", "delta_b"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise DomainError(f"{name} must be a finite number, got {v!r}")
        if self.r <= 0.0:
            raise DomainError(f"r must be positive, got {self.r}")
        if self.sigma_a <= 0.0 or self.sigma_b <= 0.0:
            raise DomainError("volatilities must be positive")
        if self.delta_a < 0.0 or self.delta_b < 0.0:
            raise DomainError("dividend yields must be non-negative")
        if self.lam < 0.0:
            raise DomainError(f"lam must be non-negative, got {self.lam}")


@dataclass(frozen=True)
class OptionSpec:
    """Contract data: option kind and strike."""

    kind: OptionKind
    strike: float

    def __post_init__(self) -> None:
        if not isinstance(self.kind, OptionKind):
            raise DomainError(f"kind must be an OptionKind, got {self.kind!r}")
        if not (isinstance(self.strike, (int, float)) and math.isfinite(self.strike)
                and self.strike > 0.0):
            raise DomainError(f"strike must be a positive finite number, got {self.strike!r}")

    def payoff(self, spot: float) -> float:
        return max(self.kind.sign * (spot - self.strike), 0.0)


def _char_root(sign: int, r: float, shift: float, sigma: float, delta: float) -> float:
    """Root of (sigma^2/2) x (x-1) + (r-delta) x - (r+shift) = 0 with the given sign."""
    if delta == 0.0 and shift == 0.0:
        # the discriminant is the perfect square (r + sigma^2/2)^2 here;
        # evaluating the roots in closed form keeps the zero-dividend
        # saturation (x+ = 1, x- = -2r/sigma^2) exact
        return 1.0 if sign > 0 else -2.0 * r / (sigma * sigma)
    theta = r - delta - 0.5 * sigma * sigma
    disc = theta * theta + 2.0 * (r + shift) * sigma * sigma
    return (-theta + sign * math.sqrt(disc)) / (sigma * sigma)


@dataclass(frozen=True)
class DerivedExponents:
    """Characteristic exponents and auxiliary-function coefficients.

    ``ell`` and the coefficients are specific to the option kind they were
    computed for: calls bind the ``+`` exponents, puts the ``-`` ones, and
    the "opposite" gamma enters coeff_b/coeff_c/coeff_d.  Coefficients whose
    defining denominators vanish (beta_b at 1, the opposite gamma at 1) are
    flagged as ``inf`` instead of being silently evaluated; callers must
    route those parameter sets to the matching special-case formulas.
    """

    theta_a: float
    theta_b: float
    beta_plus_a: float
    beta_minus_a: float
    beta_plus_b: float
    beta_minus_b: float
    gamma_plus_a: float
    gamma_minus_a: float
    ell: float
    coeff_a: float
    coeff_b: float
    coeff_c: float
    coeff_d: float

    def beta_a(self, kind: OptionKind) -> float:
        return self.beta_plus_a if kind is OptionKind.CALL else self.beta_minus_a

    def beta_b(self, kind: OptionKind) -> float:
        return self.beta_plus_b if kind is OptionKind.CALL else self.beta_minus_b

    def gamma(self, kind: OptionKind) -> float:
        """The kind-matched lambda-shifted exponent of regime a."""
        return self.gamma_plus_a if kind is OptionKind.CALL else self.gamma_minus_a

    def gamma_opposite(self, kind: OptionKind) -> float:
        return self.gamma_minus_a if kind is OptionKind.CALL else self.gamma_plus_a

    @property
    def coeffs_finite(self) -> bool:
        return all(math.isfinite(c) for c in
                   (self.coeff_a, self.coeff_b, self.coeff_c, self.coeff_d))


def compute_exponents(params: MarketParams, spec: OptionSpec) -> DerivedExponents:
    """Derive the exponents and coefficients coupling the two regimes.

    The coupling constant is

        ell = (beta_a - beta_b) (r / beta_a + sigma_a^2 beta_b / 2)

    with the kind-matched sign; it vanishes exactly when the two regimes
    share that exponent, in which case pre- and post-change prices coincide.
    """
    r, lam = params.r, params.lam
    theta_a = r - params.delta_a - 0.5 * params.sigma_a ** 2
    theta_b = r - params.delta_b - 0.5 * params.sigma_b ** 2
    bpa = _char_root(+1, r, 0.0, params.sigma_a, params.delta_a)
    bma = _char_root(-1, r, 0.0, params.sigma_a, params.delta_a)
    bpb = _char_root(+1, r, 0.0, params.sigma_b, params.delta_b)
    bmb = _char_root(-1, r, 0.0, params.sigma_b, params.delta_b)
    gpa = _char_root(+1, r, lam, params.sigma_a, params.delta_a)
    gma = _char_root(-1, r, lam, params.sigma_a, params.delta_a)

    s = spec.kind.sign
    ba = bpa if s > 0 else bma
    bb = bpb if s > 0 else bmb
    g = gpa if s > 0 else gma
    g2 = gma if s > 0 else gpa
    ell = (ba - bb) * (r / ba + 0.5 * params.sigma_a ** 2 * bb)

    # beta_b = 1 happens exactly for a call on a stock whose post-change
    # dividend stops (delta_b = 0); the opposite gamma hits 1 only at
    # lam = delta_a = 0 for a put.  Both poison the coefficients.
    bb_resonant = abs(bb - 1.0) <= EQ_TOL * max(1.0, abs(bb))
    g2_resonant = abs(g2 - 1.0) <= EQ_TOL * max(1.0, abs(g2))
    if bb_resonant:
        ca = cb = cc = cd = math.inf
    else:
        ca = (g - 1.0) / g * bb / (bb - 1.0)
        cb = -s / (bb - 1.0) * lam / (lam + r) * g2 / (bb - g2)
        if g2_resonant:
            cc = cd = math.inf
        else:
            cc = -s * g2 / (1.0 - g2) * bb / (bb - 1.0) * params.delta_a / r
            cd = s * lam / r * bb / ((bb - g2) * (1.0 - g2))

    return DerivedExponents(
        theta_a=theta_a, theta_b=theta_b,
        beta_plus_a=bpa, beta_minus_a=bma,
        beta_plus_b=bpb, beta_minus_b=bmb,
        gamma_plus_a=gpa, gamma_minus_a=gma,
        ell=ell, coeff_a=ca, coeff_b=cb, coeff_c=cc, coeff_d=cd,
    )


def order_parameter(exps: DerivedExponents, spec: OptionSpec) -> float:
    """|beta_a| / |beta_b| for the kind-matched sign.

    Values >= 1 select the single-expression pricing family (the pre-change
    boundary sits on the near side of the post-change one); values < 1
    select the two-branch family.
    """
    return abs(exps.beta_a(spec.kind)) / abs(exps.beta_b(spec.kind))
