"""Variable screening for binary responses with a linear-programming Dantzig selector."""

__version__ = "0.1.0"

from .core import (
    ZERO_TOL,
    Dataset,
    ScreeningModel,
    Standardization,
    logistic,
    logit,
    standardize,
)
from .dantzig import (
    DantzigInstance,
    SlpResult,
    build_lp,
    delta_zero,
    score_residual,
    slp_refine,
    solve_dantzig,
)
from .diagnostics import (
    ApproxReport,
    brute_force_dantzig,
    max_cubic_coefficient,
    region_check,
    remainder_ratio,
)
from .errors import (
    ConstantColumnError,
    DegenerateDataError,
    DomainError,
    InvalidArgumentError,
    RefitFailedError,
    ScreeningError,
    SelectionError,
    SolverFailure,
    StratificationError,
    UndefinedAUCError,
)
from .lp import LpProblem, LpSolution, LpStatus, solve_lp, warm_start_solve
from .path import (
    Ranking,
    SolutionPath,
    compute_path,
    inclusion_set,
    make_grid,
    rank_variables,
    shrink_positions,
)
from .selection import (
    CvResult,
    auc,
    cross_validate,
    kfold_split,
    predict_prob,
    refit_logistic,
)
