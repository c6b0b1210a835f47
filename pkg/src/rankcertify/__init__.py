"""Stationarity certification for low-rank matrix optimization over affine sets.

The package represents problems of the form

    minimize f(X)  subject to  <A_i, X> = b_i (i = 1..l),  rank(X) <= r,

computes tangent/normal cones of the rank constraint at a candidate point,
checks constraint qualifications, certifies first- and second-order
stationarity, and ships two reference solvers plus an HTTP service and CLI.
"""

from .affine import AffineSet, project_affine
from .exceptions import ConsistencyError, InfeasibleSetError, InputError
from .matcore import SvdPoint, numerical_rank, project_hankel, project_rank, svd_point
from .problems import (
    Objective,
    Problem,
    diagonal_problem,
    hankel_from_signal,
    hankel_problem,
    lrr_problem,
    quadratic_problem,
)
from .qualifications import QualificationReport, qualification_report
from .solvers import SolveTrace, alm_projected_gradient, alternating_projections
from .stationarity import (
    Certificate,
    beta_threshold,
    certify_F,
    certify_alpha,
    classify,
    second_order_necessary,
    second_order_sufficient,
)

__version__ = "0.1.0"

__all__ = [
    "AffineSet",
    "Certificate",
    "ConsistencyError",
    "InfeasibleSetError",
    "InputError",
    "Objective",
    "Problem",
    "QualificationReport",
    "SolveTrace",
    "SvdPoint",
    "alm_projected_gradient",
    "alternating_projections",
    "beta_threshold",
    "certify_F",
    "certify_alpha",
    "classify",
    "diagonal_problem",
    "hankel_from_signal",
    "hankel_problem",
    "lrr_problem",
    "numerical_rank",
    "project_affine",
    "project_hankel",
    "project_rank",
    "qualification_report",
    "quadratic_problem",
    "second_order_necessary",
    "second_order_sufficient",
    "svd_point",
]
