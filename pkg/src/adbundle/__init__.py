"""Adaptive proximal bundle solvers for nonsmooth convex composite problems."""

from .errors import (
    ConfigurationError,
    DegenerateInstanceError,
    DegenerateOracleError,
    InfeasiblePointError,
    InvalidBoxError,
    UnboundedDomainError,
)
from .objective import (
    CompositeObjective,
    Cut,
    FirstOrderResult,
    L1ResidualOracle,
    SimpleTerm,
    cut_at,
    eval_phi,
    linearization_value,
    sign,
)
from .models import (
    AggregateCut,
    MultiCutModel,
    TwoCutModel,
    model_value,
    multi_cut_update,
    two_cut_update,
    window_aggregate,
)
from .subproblems import (
    SubproblemSolution,
    min_affine_plus_h,
    simplex_project,
    solve_affine,
    solve_multi_cut,
    solve_two_cut,
)
from .solver import (
    AD_GPB,
    AD_GPB_STAR,
    AD_GPB_STAR2,
    GPB,
    POL_AD_GPB_STAR,
    POL_GPB,
    POL_SUBGRAD,
    VARIANTS,
    RunReport,
    SolverConfig,
    cycle_stop_test,
    iterate_once,
    polyak_stepsize,
    polyak_subgrad_run,
    run,
    stepsize_rule,
    variant_seed,
)
from .instances import (
    Instance,
    InstanceConstants,
    boxed_variant,
    compute_constants,
    export_matrix_market,
    gen_dense,
    gen_sparse,
    load_instance,
    make_objective,
    save_instance,
)
from .complexity import (
    BoundInputs,
    bad_iter_bound,
    cycle_len_bound,
    k_bar,
    k_hat,
    lambda_lower,
    q_bar,
    t_bar,
    total_iter_bound_general,
    total_iter_bound_known,
)

__version__ = "0.1.0"
