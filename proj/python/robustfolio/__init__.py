"""Minimax expected-utility portfolio optimization on finite-state markets.

The optimal portfolio is purely riskless exactly when the investor's prior
set contains an equivalent (super)martingale measure; `check` and `verify`
test that equivalence numerically, `solve`/`dual`/`reconcile` expose the
underlying primal and dual problems.
"""

from robustfolio._core import (
    SolverError,
    check,
    dow_werlang_interval,
    dual,
    enumerate_emm_vertices,
    find_emm,
    no_betting_set,
    oracle_value,
    reconcile,
    solve,
    solve_single_prior,
    verify,
)

__all__ = [
    "SolverError",
    "check",
    "dow_werlang_interval",
    "dual",
    "enumerate_emm_vertices",
    "find_emm",
    "no_betting_set",
    "oracle_value",
    "reconcile",
    "solve",
    "solve_single_prior",
    "verify",
]

__version__ = "0.1.0"
