"""Canonical example families and figure-data generation.

Four stock scenarios, all with r = 4% and strike 1 (prices in strike units,
spot expressed as moneyness S/K):

1. Dividend-risk calls: sigma 10% in both regimes, post-change yield 2.5%,
   mean change time 2 years; the pre-change yield sweeps {2%, 1%, 0.5%, 0}.
2. Volatility-risk puts, no dividends: sigma jumps 10% -> 25%; curves per
   mean change time {0.5, 1, 2, 5} years show the gap between the exact and
   metastable prices.
3. Volatility-drop puts: sigma 40% -> 25%, yields 1.75%; curves per
   intensity {0.1, 0.3, 0.4, 0.6}, the metastable branch dying between the
   last two.
4. Boundary-gap sweep: same market as 3 with the pre-change sigma swept so
   the exponent ratio crosses 1, per intensity {0.25, 0.5, 1.0}.

The intensity grids for 3 and 4 and the moneyness window are package
defaults; only the market constants above are pinned by the families.
All emitted numbers use shortest round-trip float formatting, so the CSV
output is byte-stable across runs.
"""

from __future__ import annotations

import math

from .boundary import critical_lambda
from .errors import DomainError
from .model import MarketParams, OptionKind, OptionSpec
from .pricing import build_price_model, heuristic_price, price

MONEYNESS_POINTS = 200
MONEYNESS_RANGE = (0.2, 3.0)

FIG1_DELTA_A = (0.02, 0.01, 0.005, 0.0)
FIG2_MEAN_TIMES = (0.5, 1.0, 2.0, 5.0)
FIG3_LAMBDAS = (0.1, 0.3, 0.4, 0.6)
FIG4_LAMBDAS = (0.25, 0.5, 1.0)
FIG4_SIGMA_A = tuple(0.10 + 0.01 * i for i in range(81))


def fig1_market(delta_a: float) -> MarketParams:
    return MarketParams(r=0.04, lam=0.5, sigma_a=0.10, sigma_b=0.10,
                        delta_a=delta_a, delta_b=0.025)


def fig2_market(lam: float) -> MarketParams:
    return MarketParams(r=0.04, lam=lam, sigma_a=0.10, sigma_b=0.25,
                        delta_a=0.0, delta_b=0.0)


def fig3_market(lam: float) -> MarketParams:
    return MarketParams(r=0.04, lam=lam, sigma_a=0.40, sigma_b=0.25,
                        delta_a=0.0175, delta_b=0.0175)


def fig4_market(lam: float, sigma_a: float) -> MarketParams:
    return MarketParams(r=0.04, lam=lam, sigma_a=sigma_a, sigma_b=0.25,
                        delta_a=0.0175, delta_b=0.0175)


def moneyness_grid(points: int = MONEYNESS_POINTS,
                   lo: float = MONEYNESS_RANGE[0],
                   hi: float = MONEYNESS_RANGE[1]) -> list[float]:
    """Log-spaced moneyness grid used by every figure and the curve command."""
    if not (points >= 2 and 0.0 < lo < hi and math.isfinite(hi)):
        raise DomainError("grid needs points >= 2 and 0 < lo < hi < inf")
    ratio = hi / lo
    return [lo * ratio ** (i / (points - 1)) for i in range(points)]


def property_suite_cases() -> tuple[list[tuple[MarketParams, OptionSpec]], list[str]]:
    """The default verification batch: one case per bundled example curve."""
    call = OptionSpec(OptionKind.CALL, 1.0)
    put = OptionSpec(OptionKind.PUT, 1.0)
    cases: list[tuple[MarketParams, OptionSpec]] = []
    ids: list[str] = []
    for da in FIG1_DELTA_A:
        cases.append((fig1_market(da), call))
        ids.append(f"fig1[da={da:g}]")
    for mt in FIG2_MEAN_TIMES:
        cases.append((fig2_market(1.0 / mt), put))
        ids.append(f"fig2[tau={mt:g}]")
    for lam in FIG3_LAMBDAS:
        cases.append((fig3_market(lam), put))
        ids.append(f"fig3[lam={lam:g}]")
    for lam in FIG4_LAMBDAS:
        for sa in (0.15, 0.30, 0.55):
            cases.append((fig4_market(lam, sa), put))
            ids.append(f"fig4[lam={lam:g},sa={sa:g}]")
    return cases, ids


def figure_data(n: int, points: int = MONEYNESS_POINTS,
                lo: float = MONEYNESS_RANGE[0],
                hi: float = MONEYNESS_RANGE[1]) -> tuple[list[str], list[list]]:
    """Header and rows for figure ``n``; empty cells where a metastable
    branch does not exist."""
    if n == 1:
        return _figure1(points, lo, hi)
    if n == 2:
        return _figure2(points, lo, hi)
    if n == 3:
        return _figure3(points, lo, hi)
    if n == 4:
        return _figure4()
    raise DomainError(f"figure number must be 1..4, got {n}")


def _figure1(points, lo, hi):
    spec = OptionSpec(OptionKind.CALL, 1.0)
    models = [build_price_model(fig1_market(da), spec) for da in FIG1_DELTA_A]
    header = ["moneyness", "payoff"] + [f"price_da_{da:g}" for da in FIG1_DELTA_A]
    rows = []
    for m in moneyness_grid(points, lo, hi):
        row = [m, spec.payoff(m)]
        row.extend(price(m, mod) for mod in models)
        rows.append(row)
    return header, rows


def _figure2(points, lo, hi):
    spec = OptionSpec(OptionKind.PUT, 1.0)
    models = [build_price_model(fig2_market(1.0 / mt), spec) for mt in FIG2_MEAN_TIMES]
    header = ["moneyness"] + [f"relgap_tau_{mt:g}" for mt in FIG2_MEAN_TIMES]
    rows = []
    for m in moneyness_grid(points, lo, hi):
        row = [m]
        for mod in models:
            p = price(m, mod)
            row.append((p - heuristic_price(m, mod)) / p)
        rows.append(row)
    return header, rows


def _figure3(points, lo, hi):
    spec = OptionSpec(OptionKind.PUT, 1.0)
    models = [build_price_model(fig3_market(lam), spec) for lam in FIG3_LAMBDAS]
    header = ["moneyness", "payoff"]
    for lam in FIG3_LAMBDAS:
        header += [f"exact_lam_{lam:g}", f"heur_lam_{lam:g}"]
    rows = []
    for m in moneyness_grid(points, lo, hi):
        row = [m, spec.payoff(m)]
        for mod in models:
            row.append(price(m, mod))
            if mod.heuristic_terms is not None:
                row.append(heuristic_price(m, mod))
            else:
                row.append("")
        rows.append(row)
    return header, rows


def _figure4():
    spec = OptionSpec(OptionKind.PUT, 1.0)
    header = ["sigma_a", "order_param"] + [f"gap_lam_{lam:g}" for lam in FIG4_LAMBDAS]
    rows = []
    for sa in FIG4_SIGMA_A:
        base = build_price_model(fig4_market(FIG4_LAMBDAS[0], sa), spec)
        ratio = abs(base.exps.beta_minus_a) / abs(base.exps.beta_minus_b)
        row = [sa, ratio]
        for lam in FIG4_LAMBDAS:
            mod = build_price_model(fig4_market(lam, sa), spec)
            bnd = mod.boundary
            if bnd.heuristic_exists and bnd.heuristic_h_a is not None:
                row.append((bnd.h_a - bnd.heuristic_h_a) / spec.strike)
            else:
                row.append("")
        rows.append(row)
    return header, rows


def fig3_critical_lambda() -> float | None:
    """Critical intensity of the family behind figures 3 and 4."""
    spec = OptionSpec(OptionKind.PUT, 1.0)
    return critical_lambda(fig3_market(0.4), spec)
