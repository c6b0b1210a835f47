"""The affine set L = {X : <A^i, X> = b_i}: evaluation, adjoint, feasibility, projection.

An :class:`AffineSet` caches a factorization of the stacked constraint matrix at
construction; the cache is read-only afterwards, so instances can be shared
across threads.
"""

from __future__ import annotations

import numpy as np

from .exceptions import InfeasibleSetError, InputError

FEAS_TOL = 1e-8
TANGENT_TOL = 1e-8
GRAM_RANK_TOL = 1e-10


class AffineSet:
    """Constraints <A^i, X> = b_i, i = 1..l, on m x n matrices.

    Zero constraint matrices are rejected.  Redundant (linearly dependent)
    constraints are kept for evaluation but excluded from the least-squares
    basis used by projections; ``redundant`` flags their presence.
    """

    def __init__(self, mats, rhs):
        mats = [np.asarray(A, dtype=float) for A in mats]
        rhs = np.asarray(rhs, dtype=float).ravel()
        if len(mats) != rhs.size:
            raise InputError(f"{len(mats)} constraint matrices but {rhs.size} right-hand sides")
        if len(mats) == 0:
            raise InputError("an affine set needs at least one constraint")
        shape = mats[0].shape
        for i, A in enumerate(mats):
            if A.shape != shape:
                raise InputError(f"constraint {i} has shape {A.shape}, expected {shape}")
            if not np.all(np.isfinite(A)):
                raise InputError(f"constraint {i} has non-finite entries")
            if not np.any(A):
                raise InputError(f"constraint {i} is the zero matrix")
        self.mats = mats
        self.rhs = rhs
        self.m, self.n = shape
        self.l = len(mats)
        # stacked constraint operator, one vec'd A^i per row
        self._M = np.stack([A.ravel() for A in mats])
        u, sv, vt = np.linalg.svd(self._M, full_matrices=False)
        rank = int(np.sum(sv > GRAM_RANK_TOL * (sv[0] if sv[0] > 0 else 1.0)))
        self._svd = (u, sv, vt)
        self.rank = rank
        self.redundant = rank < self.l

    def __repr__(self):
        return f"AffineSet(l={self.l}, shape=({self.m}, {self.n}))"


def apply(S: AffineSet, X: np.ndarray) -> np.ndarray:
    """Evaluate the constraint map: component i is <A^i, X>."""
    X = np.asarray(X, dtype=float)
    if X.shape != (S.m, S.n):
        raise InputError(f"matrix shape {X.shape} does not match constraints ({S.m}, {S.n})")
    return S._M @ X.ravel()


def adjoint(S: AffineSet, y: np.ndarray) -> np.ndarray:
    """Adjoint of the constraint map: sum_i y_i A^i."""
    y = np.asarray(y, dtype=float).ravel()
    if y.size != S.l:
        raise InputError(f"multiplier vector has length {y.size}, expected {S.l}")
    return (S._M.T @ y).reshape(S.m, S.n)


def feasibility_residual(S: AffineSet, X: np.ndarray) -> float:
    """Euclidean norm of the constraint violation."""
    return float(np.linalg.norm(apply(S, X) - S.rhs))


def is_feasible(S: AffineSet, X: np.ndarray, feas_tol: float = FEAS_TOL) -> bool:
    return feasibility_residual(S, X) <= feas_tol * (1.0 + float(np.linalg.norm(S.rhs)))


def project_affine(S: AffineSet, X: np.ndarray) -> np.ndarray:
    """Frobenius-nearest point of L.

    Uses the pseudo-inverse of the stacked constraint operator so redundant
    constraints are handled by the minimum-norm correction.  Raises
    :class:`InfeasibleSetError` when the constraints are inconsistent.
    """
    X = np.asarray(X, dtype=float)
    resid = apply(S, X) - S.rhs
    u, sv, vt = S._svd
    inv = np.zeros_like(sv)
    inv[: S.rank] = 1.0 / sv[: S.rank]
    # minimum-norm solve of M M^T t = resid, correction = M^T t
    t = u @ (inv**2 * (u.T @ resid))
    Z = X - adjoint(S, t)
    if feasibility_residual(S, Z) > 1e-9 * (1.0 + float(np.linalg.norm(S.rhs))):
        raise InfeasibleSetError("constraints are inconsistent: no feasible point exists")
    return Z


def normal_space_basis(S: AffineSet) -> list[np.ndarray]:
    """Orthonormal basis of span{A^i} = N_L(X) (independent of X)."""
    _, _, vt = S._svd
    return [vt[k].reshape(S.m, S.n) for k in range(S.rank)]


def in_tangent_L(S: AffineSet, Xi: np.ndarray, tol: float = TANGENT_TOL) -> bool:
    """Whether a direction lies in T_L(X) = {Xi : <A^i, Xi> = 0 for all i}."""
    Xi = np.asarray(Xi, dtype=float)
    return float(np.linalg.norm(apply(S, Xi))) <= tol * (1.0 + float(np.linalg.norm(Xi)))


def split_tangent_normal(S: AffineSet, W: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal decomposition W = tangent part + normal part w.r.t. L."""
    W = np.asarray(W, dtype=float)
    _, _, vt = S._svd
    B = vt[: S.rank]                      # orthonormal rows spanning span{A^i}
    coeff = B @ W.ravel()
    normal = (B.T @ coeff).reshape(S.m, S.n)
    return W - normal, normal
