"""Constraint-qualification checks for the low-rank affine problem.

Two linear-independence conditions on projected constraint blocks play the
role of verifiable constraint qualifications: one keeps the full first
block-row and block-column of each constraint in the SVD basis, the stronger
one keeps only the leading (support x support) block.  The auxiliary
containment of the rank-cone inside the tangent space of the affine set is
what upgrades the inner approximation of the normal cone to an equality when
the rank bound is not active.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import affine as aff
from . import cones
from .matcore import SvdPoint, numerical_rank

INDEP_RANK_TOL = 1e-10


@dataclass
class QualificationReport:
    """Outcome of all qualification checks at one point.

    ``normal_in_tangent`` is a tri-state: "holds", "fails" or "not_applicable"
    (the latter when the rank bound is active, s = r).
    """

    assumption1: bool
    assumption2: bool
    dim_ok_1: bool
    dim_ok_2: bool
    normal_in_tangent: str
    sigma_min_T: float
    sigma_min_R: float
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "assumption1": self.assumption1,
            "assumption2": self.assumption2,
            "dim_ok_1": self.dim_ok_1,
            "dim_ok_2": self.dim_ok_2,
            "normal_in_tangent": self.normal_in_tangent,
            "sigma_min_T": "inf" if np.isinf(self.sigma_min_T) else self.sigma_min_T,
            "sigma_min_R": "inf" if np.isinf(self.sigma_min_R) else self.sigma_min_R,
            "notes": list(self.notes),
        }


def build_TR(P: SvdPoint, S: aff.AffineSet) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Projected constraint blocks in the SVD basis, as full m x n matrices.

    The T matrix of a constraint keeps the (support, support), (support,
    kernel) and (kernel, support) blocks of U^T A V; the R matrix keeps only
    the (support, support) block.  Everything else is zeroed.
    """
    gam = list(P.gamma)
    T_list, R_list = [], []
    for A in S.mats:
        Ai = P.to_internal(A)
        At = P.U.T @ Ai @ P.V
        T = np.zeros_like(At)
        T[gam, :] = At[gam, :]
        T[:, gam] = At[:, gam]
        R = np.zeros_like(At)
        R[np.ix_(gam, gam)] = At[np.ix_(gam, gam)]
        T_list.append(T)
        R_list.append(R)
    return T_list, R_list


def check_assumption(mats: list[np.ndarray], rank_tol: float = INDEP_RANK_TOL) -> tuple[bool, float]:
    """Linear independence of a matrix list, with the smallest stack singular value.

    An empty list is vacuously independent and reports +inf.
    """
    if not mats:
        return True, float("inf")
    stack = np.stack([M.ravel() for M in mats])
    sv = np.linalg.svd(stack, compute_uv=False)
    rank = numerical_rank(sv, rank_tol)
    smin = float(sv[min(len(mats), sv.size) - 1]) if sv.size else 0.0
    return rank == len(mats), smin


def check_dimension_conditions(P: SvdPoint, S: aff.AffineSet) -> tuple[bool, bool]:
    """Counting conditions necessary for the two independence assumptions."""
    m, n, s, l = P.m, P.n, P.s, S.l
    return l <= m * n - (m - s) * (n - s), l <= s * s


def check_normal_in_tangent(P: SvdPoint, S: aff.AffineSet, r: int, tol: float = aff.TANGENT_TOL) -> str:
    """Whether the rank-cone at P lies inside the tangent space of the affine set.

    Enumerates the finite orthonormal basis of the cone rather than sampling;
    vacuously holds when the cone is {0} (square matrix with rank deficit two
    or more).  Not applicable when the rank bound is active.
    """
    if P.s >= r:
        return "not_applicable"
    basis = cones.frechet_RXr_basis(P, r)
    if not basis:
        return "holds"
    for B in basis:
        if not aff.in_tangent_L(S, B, tol):
            return "fails"
    return "holds"


def qualification_report(P: SvdPoint, S: aff.AffineSet, r: int) -> QualificationReport:
    """Run every check and bundle the results."""
    T_list, R_list = build_TR(P, S)
    a1, smin_T = check_assumption(T_list)
    a2, smin_R = check_assumption(R_list)
    dim1, dim2 = check_dimension_conditions(P, S)
    nit = check_normal_in_tangent(P, S, r)
    notes = []
    if a1 and not dim1:
        notes.append("independence of T blocks contradicts the dimension count")
    if a2 and not dim2:
        notes.append("independence of R blocks contradicts the dimension count")
    return QualificationReport(
        assumption1=a1,
        assumption2=a2,
        dim_ok_1=dim1,
        dim_ok_2=dim2,
        normal_in_tangent=nit,
        sigma_min_T=smin_T,
        sigma_min_R=smin_R,
        notes=notes,
    )
