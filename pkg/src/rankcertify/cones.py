"""Cone representations and membership tests for the low-rank set.

Covers the fixed-rank tangent/normal spaces, the Bouligand / Frechet /
Mordukhovich cones of the rank-<=r set, the subspaces spanned by r columns of
U and V containing the support, and the Frechet normal cone of their union.

All tests are tolerance-based with scale-relative thresholds; exact zero tests
are meaningless in floating point.  Block ranks reuse the same numerical-rank
rule as :mod:`rankcertify.matcore` so the repository has one rank notion.

Results that involve the kernel columns of U and V (everything built on the
index family J) are defined relative to the completion stored in the
:class:`~rankcertify.matcore.SvdPoint`; at repeated or zero singular values a
different completion gives a different, equally valid answer.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from . import affine as aff
from .exceptions import InputError
from .matcore import SvdPoint, numerical_rank

MEMBER_TOL = 1e-8
J_CAP = 10_000


@dataclass(frozen=True)
class IndexFamily:
    """All r-element index subsets of {1..n} containing the support gamma.

    ``sets`` is in lexicographic order (0-based tuples); ``truncated`` is set
    when the enumeration was capped.
    """

    gamma: tuple[int, ...]
    r: int
    sets: list[tuple[int, ...]]
    truncated: bool


@dataclass(frozen=True)
class NormalConeElementDecomposition:
    """Blocks of a Frechet normal cone element of the J-union subspace.

    ``case`` is one of ``rank_full`` (s = r), ``rank_deficit_one`` (s = r-1,
    D carries the off-diagonal kernel block) or ``rank_deficit_two_plus``
    (s <= r-2, only the extra-row block H survives).
    """

    case: str
    D: np.ndarray | None = None   # (n-s) x (n-s), zero diagonal in case rank_deficit_one
    H: np.ndarray | None = None   # (m-n) x n, absent when the matrix is square


def _scale(M: np.ndarray) -> float:
    return 1.0 + float(np.linalg.norm(M))


def in_tangent_fixed_rank(P: SvdPoint, Xi: np.ndarray, tol: float = MEMBER_TOL) -> bool:
    """Membership in the tangent space of the fixed-rank manifold at P."""
    Xi = P.to_internal(Xi)
    block = P.U_gamma_m_perp.T @ Xi @ P.V_gamma_n_perp
    return float(np.linalg.norm(block)) <= tol * _scale(Xi)


def in_normal_fixed_rank(P: SvdPoint, W: np.ndarray, tol: float = MEMBER_TOL) -> bool:
    """Membership in the normal space of the fixed-rank manifold at P.

    Requires W to annihilate both the column span and the row span of X.
    """
    W = P.to_internal(W)
    if P.s == 0:
        return True
    sc = tol * _scale(W)
    return (
        float(np.linalg.norm(P.U_gamma.T @ W)) <= sc
        and float(np.linalg.norm(W @ P.V_gamma)) <= sc
    )


def in_bouligand_rank_set(P: SvdPoint, r: int, Xi: np.ndarray, tol: float = MEMBER_TOL) -> bool:
    """Membership in the Bouligand tangent cone of the rank-<=r set at P.

    The tangent-space component is unconstrained; the normal-space block must
    have numerical rank at most r - s.
    """
    if P.s > r:
        raise InputError(f"point has rank {P.s} > rank bound {r}")
    Xi = P.to_internal(Xi)
    B = P.U_gamma_m_perp.T @ Xi @ P.V_gamma_n_perp
    if B.size == 0:
        return True
    sv = np.linalg.svd(B, compute_uv=False)
    budget = r - P.s
    if budget == 0:
        return float(np.linalg.norm(B)) <= tol * _scale(Xi)
    if budget >= min(B.shape):
        return True
    # rank test relative to the direction's own scale
    return float(sv[budget]) <= tol * _scale(Xi)


def in_frechet_rank_set(P: SvdPoint, r: int, W: np.ndarray, tol: float = MEMBER_TOL) -> bool:
    """Membership in the Frechet normal cone of the rank-<=r set at P.

    Collapses to the fixed-rank normal space when s = r and to {0} when s < r.
    """
    if P.s > r:
        raise InputError(f"point has rank {P.s} > rank bound {r}")
    if P.s == r:
        return in_normal_fixed_rank(P, W, tol)
    W = P.to_internal(W)
    return float(np.linalg.norm(W)) <= tol


def in_mordukhovich_rank_set(P: SvdPoint, r: int, W: np.ndarray, tol: float = MEMBER_TOL) -> bool:
    """Membership in the Mordukhovich normal cone of the rank-<=r set at P."""
    if P.s > r:
        raise InputError(f"point has rank {P.s} > rank bound {r}")
    if not in_normal_fixed_rank(P, W, tol):
        return False
    Wi = P.to_internal(W)
    sv = np.linalg.svd(Wi, compute_uv=False)
    budget = P.n - r
    if budget >= min(Wi.shape):
        return True
    if budget == 0:
        return float(np.linalg.norm(Wi)) <= tol * _scale(Wi)
    return float(sv[budget]) <= tol * _scale(Wi)


def enumerate_J(P: SvdPoint, r: int, cap: int = J_CAP) -> IndexFamily:
    """Lexicographic enumeration of the index family {J : |J| = r, gamma in J}."""
    if P.s > r:
        raise InputError(f"point has rank {P.s} > rank bound {r}; no valid index sets")
    free = P.gamma_n_perp
    total = comb(len(free), r - P.s)
    truncated = total > cap
    sets: list[tuple[int, ...]] = []
    for extra in combinations(free, r - P.s):
        sets.append(tuple(sorted(P.gamma + extra)))
        if len(sets) == cap and truncated:
            break
    return IndexFamily(gamma=P.gamma, r=r, sets=sets, truncated=truncated)


def in_normal_RXJ(P: SvdPoint, J, W: np.ndarray, tol: float = MEMBER_TOL) -> bool:
    """Membership in the normal space of span{U_J A V_J^T}: U_J^T W V_J = 0."""
    W = P.to_internal(W)
    J = list(J)
    block = P.U[:, J].T @ W @ P.V[:, J]
    return float(np.linalg.norm(block)) <= tol * _scale(W)


def in_frechet_RXr(
    P: SvdPoint, r: int, W: np.ndarray, tol: float = MEMBER_TOL
) -> tuple[bool, NormalConeElementDecomposition]:
    """Membership in the Frechet normal cone of the union of the J-subspaces.

    Three cases by the rank deficit r - s: for s = r only the (gamma, gamma)
    block must vanish; for s = r-1 the kernel block D must have zero diagonal
    and the mixed blocks must vanish; for s <= r-2 everything inside the first
    n rows of the SVD basis must vanish, leaving only the extra-row block H.
    """
    if P.s > r:
        raise InputError(f"point has rank {P.s} > rank bound {r}")
    Wi = P.to_internal(W)
    sc = tol * _scale(Wi)
    Ug, Unp, Ux = P.U_gamma, P.U_gamma_n_perp, P.U_extra
    Vg, Vnp = P.V_gamma, P.V_gamma_n_perp
    H = Ux.T @ Wi @ P.V if Ux.shape[1] else None

    if P.s == r:
        ok = float(np.linalg.norm(Ug.T @ Wi @ Vg)) <= sc
        return ok, NormalConeElementDecomposition(case="rank_full")

    if P.s == r - 1:
        D = Unp.T @ Wi @ Vnp
        ok = (
            float(np.linalg.norm(Ug.T @ Wi @ Vg)) <= sc
            and float(np.linalg.norm(Unp.T @ Wi @ Vg)) <= sc
            and float(np.linalg.norm(Ug.T @ Wi @ Vnp)) <= sc
            and float(np.linalg.norm(np.diag(D))) <= sc
        )
        return ok, NormalConeElementDecomposition(case="rank_deficit_one", D=D, H=H)

    # s <= r - 2: W must live entirely in the extra rows of the SVD basis
    top = P.U[:, : P.n].T @ Wi @ P.V
    ok = float(np.linalg.norm(top)) <= sc
    return ok, NormalConeElementDecomposition(case="rank_deficit_two_plus", H=H)


def frechet_RXr_basis(P: SvdPoint, r: int) -> list[np.ndarray]:
    """Orthonormal basis (caller orientation) of the Frechet normal cone of the J-union.

    The cone is a linear subspace in every case.  For s < r it has at most
    (n-s)(n-s-1) off-diagonal kernel elements plus (m-n) n extra-row elements;
    for s = r it is the complement of the (gamma, gamma) block.
    """
    if P.s > r:
        raise InputError(f"point has rank {P.s} > rank bound {r}")
    out: list[np.ndarray] = []

    def unit(p: int, q: int) -> np.ndarray:
        return P.from_internal(np.outer(P.U[:, p], P.V[:, q]))

    if P.s == r:
        gset = set(P.gamma)
        for p in range(P.m):
            for q in range(P.n):
                if p in gset and q in gset:
                    continue
                out.append(unit(p, q))
        return out
    if P.s == r - 1:
        for p in P.gamma_n_perp:
            for q in P.gamma_n_perp:
                if p != q:
                    out.append(unit(p, q))
    for p in range(P.n, P.m):
        for q in range(P.n):
            out.append(unit(p, q))
    return out


def normal_fixed_rank_basis(P: SvdPoint) -> list[np.ndarray]:
    """Orthonormal basis (caller orientation) of the fixed-rank normal space."""
    out = []
    for p in P.gamma_m_perp:
        for q in P.gamma_n_perp:
            out.append(P.from_internal(np.outer(P.U[:, p], P.V[:, q])))
    return out


@dataclass(frozen=True)
class NormalSplit:
    """Least-squares split of W over span{A^i} + normal cone of the feasible set."""

    member: bool
    y: np.ndarray
    W2: np.ndarray
    residual: float
    qualified: bool


def in_frechet_normal_feasible(
    P: SvdPoint,
    S: aff.AffineSet,
    r: int,
    W: np.ndarray,
    tol: float = MEMBER_TOL,
    qualified: bool = True,
) -> NormalSplit:
    """Test W against the intersection rule N_L(X) + (rank cone at X).

    For s = r the rank cone is the fixed-rank normal space; for s < r it is
    the Frechet normal cone of the J-union subspace.  Without the matching
    constraint qualification the sum is only an inner approximation of the
    true normal cone; the result then carries ``qualified=False`` rather than
    raising.
    """
    W = np.asarray(W, dtype=float)
    if P.s == r:
        cone_basis = normal_fixed_rank_basis(P)
    else:
        cone_basis = frechet_RXr_basis(P, r)
    cols = [A.ravel() for A in S.mats] + [B.ravel() for B in cone_basis]
    design = np.stack(cols, axis=1) if cols else np.zeros((W.size, 0))
    coef, *_ = np.linalg.lstsq(design, W.ravel(), rcond=None)
    fit = design @ coef
    residual = float(np.linalg.norm(W.ravel() - fit))
    y = coef[: S.l]
    W2 = (design[:, S.l:] @ coef[S.l:]).reshape(W.shape) if len(cone_basis) else np.zeros_like(W)
    member = residual <= tol * _scale(W)
    return NormalSplit(member=member, y=y, W2=W2, residual=residual, qualified=qualified)


def block_rank(P: SvdPoint, M: np.ndarray) -> int:
    """Numerical rank of a block with the repository-wide rank rule."""
    if M.size == 0:
        return 0
    return numerical_rank(np.linalg.svd(M, compute_uv=False), P.rank_tol)
