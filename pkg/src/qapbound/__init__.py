"""Dual lower bounds for sparse incomplete quadratic assignment problems.

The package bundles an exact sparse solver for (dummy-label) linear
assignment problems, a linear-time shift of dual optima into the relative
interior of the dual optimal set, and an alternating dual-ascent scheme
that lower-bounds quadratic assignment objectives, together with readers
for the common benchmark formats and a CLI.
"""

from .model import (
    DUMMY,
    DualInfeasibleError,
    FeasibilityError,
    IlapDual,
    IlapInstance,
    IqapInstance,
    LapDual,
    LapInstance,
    Violation,
    check_feasible,
    dual_feasible,
    dual_objective,
    ilap_objective,
    iqap_objective,
    lap_objective,
    objective,
)
from .lap import EqualitySubgraph, equality_subgraph, solve_lap
from .relative_interior import (
    ExchangeDigraph,
    build_exchange_digraph,
    perfectly_matchable_edges,
    shift_to_relative_interior,
)
from .reduction import (
    ReducedLap,
    decompose_assignment,
    lift_assignment,
    map_dual,
    map_primal,
    reduce_ilap_to_lap,
    solve_ilap,
)
from .wcsp import IqapDualState, mplp_pp_edge_update, mplp_pp_pass, reparam_pairwise
from .beta_steps import beta_bca_pass, beta_coordinate_update, beta_exact_update
from .bounds import METHODS, BoundReport, SolverConfig, dual_bound, run
from .formats import (
    augment_instance,
    convert_qaplib_to_iqap,
    load_instance,
    parse_dd,
    parse_lap_file,
    parse_qaplib,
    serialize_dd,
    serialize_lap_file,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
