"""Difference-of-convex programming toolkit.

Solvers for  min phi(x) - max_i psi_i(x)  with a prox-capable convex part:
the classical proximal DCA, an exhaustive epsilon-active-piece variant, and
a randomly perturbed DCA that reaches d-stationary points while solving a
single strongly convex subproblem per iteration. Ships sparse-regression and
k-medians problem instances with specialized exact subproblem solvers, plus
a command-line experiment harness (``python -m dcprog.cli``).
"""

from .algorithms import AlgoConfig, RunReport, run_active_set_dca, run_dca, run_pdca
from .core import (
    DcProblem,
    PieceSelection,
    SolverState,
    StopConfig,
    StopDecision,
    check_stop,
    objective,
    stationarity_residual,
)
from .data import Dataset, KsparseInstanceSpec, gen_ksparse, kmedians_baseline, load_csv
from .errors import (
    ActiveSetOverflowError,
    BoundednessError,
    DcprogError,
    InfeasibleIterateError,
    LineSearchError,
    NewtonBudgetError,
    RetryExhaustedError,
    SubproblemSolverError,
)
from .perturbation import (
    PerturbationSchedule,
    PerturbOutcome,
    perturb_until_singleton,
    sample_unit_sphere,
    schedule_alpha,
)
from .problems import (
    CappedL1Problem,
    KmediansProblem,
    KsparseProblem,
    Toy1dProblem,
    vector_k_norm,
)
from .subsolvers import (
    Pwq1dProblem,
    QuadL1Subproblem,
    SsnConfig,
    moreau_env_l1,
    prox_grad_solve,
    prox_l1,
    solve_1d_pwq,
    ssn_solve,
)

__version__ = "0.1.0"

__all__ = [
    "AlgoConfig",
    "RunReport",
    "run_dca",
    "run_pdca",
    "run_active_set_dca",
    "DcProblem",
    "PieceSelection",
    "SolverState",
    "StopConfig",
    "StopDecision",
    "check_stop",
    "objective",
    "stationarity_residual",
    "Dataset",
    "KsparseInstanceSpec",
    "gen_ksparse",
    "kmedians_baseline",
    "load_csv",
    "DcprogError",
    "ActiveSetOverflowError",
    "BoundednessError",
    "InfeasibleIterateError",
    "LineSearchError",
    "NewtonBudgetError",
    "RetryExhaustedError",
    "SubproblemSolverError",
    "PerturbationSchedule",
    "PerturbOutcome",
    "perturb_until_singleton",
    "sample_unit_sphere",
    "schedule_alpha",
    "CappedL1Problem",
    "KmediansProblem",
    "KsparseProblem",
    "Toy1dProblem",
    "vector_k_norm",
    "Pwq1dProblem",
    "QuadL1Subproblem",
    "SsnConfig",
    "moreau_env_l1",
    "prox_grad_solve",
    "prox_l1",
    "solve_1d_pwq",
    "ssn_solve",
]
