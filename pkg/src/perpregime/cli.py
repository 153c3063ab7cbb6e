"""Command-line interface: pricing, boundaries, curves, figure data, checks.

Commands
--------
price     one-spot valuation row: S, price, branch, phase, H_a, H_b
boundary  solved boundaries, phase, roots, heuristic and critical intensity
curve     price over a moneyness grid
figure    data behind the four bundled example figures (CSV columns fixed)
verify    property suite + Monte Carlo concordance, JSON report, exit 1 on failure
mc        Monte Carlo estimate vs the closed form at one spot

Conventions: rates and yields are decimal fractions per year (0.04, never
4); infinite boundaries serialize as the literal string "inf"; exit status
2 flags bad inputs or configs, 1 a failed verification.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field

from . import figures
from .boundary import critical_lambda, solve_boundaries
from .errors import PerpRegimeError
from .mc import McConfig, mc_price
from .model import MarketParams, OptionKind, OptionSpec, compute_exponents, order_parameter
from .pricing import build_price_model, price
from .verification import (
    VerificationReport,
    check_critical_lambda_reference,
    run_property_suite,
)

_MARKET_FIELDS = ("r", "lambda", "sigma_a", "sigma_b", "delta_a", "delta_b")


@dataclass(frozen=True)
class GridConfig:
    points: int = figures.MONEYNESS_POINTS
    lo: float = figures.MONEYNESS_RANGE[0]
    hi: float = figures.MONEYNESS_RANGE[1]


@dataclass(frozen=True)
class RunConfig:
    """File-configurable run settings; the JSON config mirrors this object."""

    market: MarketParams
    option: OptionSpec
    spot: float | None = None
    grid: GridConfig = field(default_factory=GridConfig)
    mc: McConfig | None = None
    out: str | None = None
    format: str = "csv"

    def to_json_dict(self) -> dict:
        d = {
            "market": {
                "r": self.market.r, "lambda": self.market.lam,
                "sigma_a": self.market.sigma_a, "sigma_b": self.market.sigma_b,
                "delta_a": self.market.delta_a, "delta_b": self.market.delta_b,
            },
            "option": {"kind": self.option.kind.value, "strike": self.option.strike},
            "grid": asdict(self.grid),
            "format": self.format,
        }
        if self.spot is not None:
            d["spot"] = self.spot
        if self.mc is not None:
            d["mc"] = asdict(self.mc)
        if self.out is not None:
            d["out"] = self.out
        return _encode_nonfinite(d)

    @staticmethod
    def from_json_dict(d: dict) -> "RunConfig":
        d = _decode_nonfinite(d)
        m = d["market"]
        market = MarketParams(r=m["r"], lam=m["lambda"], sigma_a=m["sigma_a"],
                              sigma_b=m["sigma_b"], delta_a=m["delta_a"],
                              delta_b=m["delta_b"])
        o = d["option"]
        option = OptionSpec(OptionKind(o["kind"]), o["strike"])
        grid = GridConfig(**d["grid"]) if "grid" in d else GridConfig()
        mc = McConfig(**d["mc"]) if "mc" in d else None
        return RunConfig(market=market, option=option, spot=d.get("spot"),
                         grid=grid, mc=mc, out=d.get("out"),
                         format=d.get("format", "csv"))


def _encode_nonfinite(obj):
    if isinstance(obj, dict):
        return {k: _encode_nonfinite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode_nonfinite(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        if math.isnan(obj):
            return "nan"
        return "inf" if obj > 0 else "-inf"
    return obj


def _decode_nonfinite(obj):
    if isinstance(obj, dict):
        return {k: _decode_nonfinite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode_nonfinite(v) for v in obj]
    if obj in ("inf", "-inf", "nan"):
        return float(obj)
    return obj


def _cell(value) -> str:
    """CSV cell formatting: shortest round-trip floats, 'inf' for infinities."""
    if value is None or value == "":
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def _write_table(header: list[str], rows: list[list], fmt: str, out: str | None) -> None:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
        text = buf.getvalue()
    else:
        payload = [dict(zip(header, (_encode_nonfinite(v) for v in row))) for row in rows]
        text = json.dumps(payload, indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _market_from_args(args) -> MarketParams:
    cfg = getattr(args, "_config", None)
    vals = {}
    for name in _MARKET_FIELDS:
        attr = "lam" if name == "lambda" else name
        flag = getattr(args, attr, None)
        if flag is not None:
            vals[attr] = flag
        elif cfg is not None:
            vals[attr] = getattr(cfg.market, attr)
        else:
            raise PerpRegimeError(
                f"missing market parameter --{name.replace('_', '-')} "
                "(flag or config file)")
    return MarketParams(**vals)


def _spec_from_args(args) -> OptionSpec:
    cfg = getattr(args, "_config", None)
    kind = args.kind
    strike = args.strike
    if kind is None:
        if cfg is None:
            raise PerpRegimeError("missing --kind (flag or config file)")
        kind = cfg.option.kind.value
    if strike is None:
        if cfg is None:
            raise PerpRegimeError("missing --strike (flag or config file)")
        strike = cfg.option.strike
    return OptionSpec(OptionKind(kind), strike)


def _spot_from_args(args) -> float:
    cfg = getattr(args, "_config", None)
    if args.spot is not None:
        return args.spot
    if cfg is not None and cfg.spot is not None:
        return cfg.spot
    raise PerpRegimeError("missing --spot (flag or config file)")


def cmd_price(args) -> int:
    params = _market_from_args(args)
    spec = _spec_from_args(args)
    spot = _spot_from_args(args)
    model = build_price_model(params, spec)
    br = model.branch_at(spot)
    header = ["S", "price", "branch", "phase", "H_a", "H_b"]
    row = [spot, price(spot, model), br.tag.value, model.boundary.phase.value,
           model.boundary.h_a, model.boundary.h_b]
    _write_table(header, [row], args.format, args.out)
    return 0


def cmd_boundary(args) -> int:
    params = _market_from_args(args)
    spec = _spec_from_args(args)
    exps = compute_exponents(params, spec)
    bnd = solve_boundaries(params, spec, exps)
    lam_bar = critical_lambda(params, spec)
    header = ["phase", "order_param", "H_b", "H_a", "root", "heuristic_exists",
              "heuristic_H_a", "heuristic_root", "heuristic_discarded_root",
              "critical_lambda"]
    row = [bnd.phase.value, order_parameter(exps, spec), bnd.h_b, bnd.h_a,
           bnd.root, bnd.heuristic_exists, bnd.heuristic_h_a,
           bnd.heuristic_root, bnd.heuristic_discarded_root, lam_bar]
    _write_table(header, [row], args.format, args.out)
    return 0


def cmd_curve(args) -> int:
    params = _market_from_args(args)
    spec = _spec_from_args(args)
    model = build_price_model(params, spec)
    grid = figures.moneyness_grid(args.points, args.lo, args.hi)
    header = ["S", "moneyness", "price", "branch"]
    rows = []
    for m in grid:
        s = m * spec.strike
        rows.append([s, m, price(s, model), model.branch_at(s).tag.value])
    _write_table(header, rows, args.format, args.out)
    return 0


def cmd_figure(args) -> int:
    header, rows = figures.figure_data(args.n, args.points, args.lo, args.hi)
    _write_table(header, rows, args.format, args.out)
    return 0


def cmd_mc(args) -> int:
    params = _market_from_args(args)
    spec = _spec_from_args(args)
    spot = _spot_from_args(args)
    cfg = _mc_config_from_args(args)
    bnd = solve_boundaries(params, spec)
    model = build_price_model(params, spec)
    est = mc_price(params, spec, bnd, cfg, spot=spot)
    closed = price(spot, model)
    err = abs(est.mean - closed)
    header = ["mean", "std_error", "paths_used", "truncated_paths",
              "truncation_bound", "closed_form", "abs_error", "within_3se"]
    row = [est.mean, est.std_error, est.paths_used, est.truncated_paths,
           est.truncation_bound, closed, err, err <= 3.0 * est.std_error]
    _write_table(header, [row], args.format, args.out)
    return 0


def _mc_config_from_args(args) -> McConfig:
    cfg = getattr(args, "_config", None)
    base = cfg.mc if cfg is not None and cfg.mc is not None else None
    paths = args.paths if args.paths is not None else (base.paths if base else 20000)
    dt = args.dt if args.dt is not None else (base.dt if base else 1e-3)
    t_max = args.t_max if args.t_max is not None else (base.t_max if base else None)
    seed = args.seed if args.seed is not None else (base.seed if base else 0)
    if args.antithetic is not None:
        anti = args.antithetic
    else:
        anti = base.antithetic if base else True
    return McConfig(paths=paths, dt=dt, t_max=t_max, seed=seed, antithetic=anti)


def cmd_verify(args) -> int:
    cases, ids = figures.property_suite_cases()
    report = run_property_suite(cases, tolerance_scale=args.tolerance_scale,
                                case_ids=ids)
    check_critical_lambda_reference(report)
    if not args.skip_mc:
        _verify_mc_benchmarks(report, args)
    text = report.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    if not report.all_passed:
        for r in report.failures():
            print(f"FAIL {r.case_id} {r.check}: measured {r.measured:.3e} "
                  f"> tolerance {r.tolerance:.3e}", file=sys.stderr)
        return 1
    return 0


def _verify_mc_benchmarks(report: VerificationReport, args) -> None:
    seed = args.seed if args.seed is not None else 0
    paths = args.paths if args.paths is not None else 20000
    # single-regime put against the no-switch closed form
    params = MarketParams(r=0.05, lam=0.0, sigma_a=0.30, sigma_b=0.30,
                          delta_a=0.0, delta_b=0.0)
    spec = OptionSpec(OptionKind.PUT, 1.0)
    _mc_bench(report, "mc-single-regime-put", params, spec, 1.0,
              McConfig(paths=paths, dt=1e-3, t_max=100.0, seed=seed))
    # regime-switch put from the volatility-drop family
    params = figures.fig3_market(0.4)
    _mc_bench(report, "mc-fig3-put", params, spec, 1.0,
              McConfig(paths=paths, dt=1e-3, t_max=200.0, seed=seed))


def _mc_bench(report: VerificationReport, case_id: str, params, spec, spot, cfg) -> None:
    bnd = solve_boundaries(params, spec)
    model = build_price_model(params, spec)
    est = mc_price(params, spec, bnd, cfg, spot=spot)
    closed = price(spot, model)
    gap = abs(est.mean - closed)
    report.add(case_id, "mc_within_3se", gap, 3.0 * est.std_error)


def _add_market_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--r", type=float, help="risk-free rate per year (decimal)")
    p.add_argument("--lambda", dest="lam", type=float,
                   help="regime-change intensity per year")
    p.add_argument("--sigma-a", type=float, help="pre-change volatility")
    p.add_argument("--sigma-b", type=float, help="post-change volatility")
    p.add_argument("--delta-a", type=float, help="pre-change dividend yield")
    p.add_argument("--delta-b", type=float, help="post-change dividend yield")
    p.add_argument("--kind", choices=["call", "put"], help="option kind")
    p.add_argument("--strike", type=float, help="strike price")


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file mirroring RunConfig")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--seed", type=int, default=None, help="RNG seed")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="perpregime",
        description="Perpetual American option pricing under a single "
                    "volatility/dividend regime change.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("price", help="price at one spot")
    _add_market_flags(p)
    _add_common_flags(p)
    p.add_argument("--spot", type=float, help="spot price")
    p.set_defaults(fn=cmd_price)

    p = sub.add_parser("boundary", help="solve boundaries and phase")
    _add_market_flags(p)
    _add_common_flags(p)
    p.set_defaults(fn=cmd_boundary)

    p = sub.add_parser("curve", help="price over a moneyness grid")
    _add_market_flags(p)
    _add_common_flags(p)
    p.add_argument("--points", type=int, default=figures.MONEYNESS_POINTS)
    p.add_argument("--lo", type=float, default=figures.MONEYNESS_RANGE[0])
    p.add_argument("--hi", type=float, default=figures.MONEYNESS_RANGE[1])
    p.set_defaults(fn=cmd_curve)

    p = sub.add_parser("figure", help="emit figure data (CSV schema fixed)")
    p.add_argument("n", type=int, choices=[1, 2, 3, 4])
    _add_common_flags(p)
    p.add_argument("--points", type=int, default=figures.MONEYNESS_POINTS)
    p.add_argument("--lo", type=float, default=figures.MONEYNESS_RANGE[0])
    p.add_argument("--hi", type=float, default=figures.MONEYNESS_RANGE[1])
    p.set_defaults(fn=cmd_figure)

    p = sub.add_parser("verify", help="run the verification suite")
    _add_common_flags(p)
    p.add_argument("--paths", type=int, default=None,
                   help="Monte Carlo paths per benchmark (default 20000)")
    p.add_argument("--skip-mc", action="store_true",
                   help="property checks only, no simulation")
    p.add_argument("--tolerance-scale", type=float, default=1.0,
                   help="rescale all tolerances (test hook)")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("mc", help="Monte Carlo estimate at one spot")
    _add_market_flags(p)
    _add_common_flags(p)
    p.add_argument("--spot", type=float, help="spot price")
    p.add_argument("--paths", type=int, default=None)
    p.add_argument("--dt", type=float, default=None, help="time step in years")
    p.add_argument("--t-max", type=float, default=None, help="horizon in years")
    anti = p.add_mutually_exclusive_group()
    anti.add_argument("--antithetic", dest="antithetic", action="store_true",
                      default=None)
    anti.add_argument("--plain", dest="antithetic", action="store_false")
    p.set_defaults(fn=cmd_mc)

    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                args._config = RunConfig.from_json_dict(json.load(fh))
        except (OSError, json.JSONDecodeError, KeyError, TypeError,
                PerpRegimeError) as exc:
            print(f"error: bad config {args.config}: {exc}", file=sys.stderr)
            return 2
    try:
        return args.fn(args)
    except PerpRegimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
