"""Perpetual American vanilla options under a single regime change.

The stock's volatility and dividend yield switch once, at an exponentially
distributed time, to values known in advance.  This package implements the
complete closed-form price family for perpetual calls and puts in that
market, the transcendental solvers for the optimal exercise boundaries, the
metastable (heuristic) branches with their critical intensity, and a Monte
Carlo oracle for independent verification.

Simulation (``perpregime.mc``) and the batch checks (``perpregime.verification``)
import lazily heavy dependencies; import them explicitly when needed.
"""

from .boundary import (
    BoundarySolution,
    HeuristicResult,
    Phase,
    classify_phase,
    critical_lambda,
    g_aux,
    h_aux,
    post_change_boundary,
    solve_boundaries,
    solve_case1_root,
    solve_case2_root,
    solve_heuristic,
)
from .errors import BracketError, DomainError, PerpRegimeError, UnsupportedBranchError
from .model import (
    DerivedExponents,
    MarketParams,
    OptionKind,
    OptionSpec,
    compute_exponents,
    order_parameter,
)
from .pricing import (
    Branch,
    BranchTag,
    PriceModel,
    build_price_model,
    heuristic_price,
    ode_residual,
    price,
    price_call_div_start,
    price_call_div_stop,
    price_degenerate,
    price_derivative,
    price_post_change,
    price_pre_case1,
    price_pre_case2,
)

__version__ = "0.1.0"

__all__ = [
    "BoundarySolution", "Branch", "BranchTag", "BracketError", "HeuristicResult",
    "DerivedExponents", "DomainError", "MarketParams", "OptionKind",
    "OptionSpec", "PerpRegimeError", "Phase", "PriceModel",
    "UnsupportedBranchError", "build_price_model", "classify_phase",
    "compute_exponents", "critical_lambda", "g_aux", "h_aux",
    "heuristic_price", "ode_residual", "order_parameter",
    "post_change_boundary", "price", "price_call_div_start",
    "price_call_div_stop", "price_degenerate", "price_derivative",
    "price_post_change", "price_pre_case1", "price_pre_case2",
    "solve_boundaries", "solve_case1_root", "solve_case2_root",
    "solve_heuristic",
]
