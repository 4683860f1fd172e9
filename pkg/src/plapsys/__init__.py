"""Coupled local/nonlocal p-Laplacian eigenpairs and their large-p limit."""

from .geometry import (
    Domain,
    GridFunction,
    build_disk,
    build_interval,
    build_rectangle,
    inradius,
    normalized_cone,
)
from .energy import (
    DegenerateConstraint,
    EnergyBreakdown,
    ProblemParams,
    constraint_G,
    gagliardo_energy,
    grad_G,
    grad_I,
    local_p_energy,
    rayleigh_Jp,
)
from .eig_solver import EigenPair, SolverOptions, solve_eigenpair, weak_residual
from .asymptotics import (
    LimitParams,
    SweepRecord,
    J_infinity,
    holder_seminorm,
    lambda_infinity,
    minmax_infimum,
    sup_gradient,
    sweep_p,
)
from .infinity_ops import (
    PointEval,
    ResidualReport,
    L_infinity_pm,
    discrete_Lp_pm,
    evaluate_point,
    infinity_laplacian,
    residuals_limit_system,
)
from .inequalities import (
    SampleBatch,
    check_hidden_convexity_pointwise,
    check_pnorm_sup_limit,
    check_product_power,
    check_quadruple_triangle,
    check_unit_cube_triangle,
    run_all_suites,
)

__version__ = "0.1.0"
