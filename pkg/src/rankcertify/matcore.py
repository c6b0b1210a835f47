"""Dense-matrix primitives: SVD points, numerical rank, rank-r projection, Hankel projection.

A :class:`SvdPoint` always stores the matrix in a "tall" orientation (rows >= cols);
inputs with more columns than rows are transposed on the way in and the flag
``transposed`` records it.  All public helpers accept and return matrices in the
caller's original orientation.  Everything here is a pure function of its inputs,
so concurrent use needs no synchronization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InputError

RANK_TOL = 1e-10
ABS_FLOOR = 1e-14
GAP_TOL = 1e-8


def numerical_rank(sigma: np.ndarray, rank_tol: float = RANK_TOL) -> int:
    """Count singular values above rank_tol * max(sigma_1, ABS_FLOOR).

    The absolute floor keeps the zero matrix at rank 0 instead of tripping on
    a relative threshold of 0.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.size == 0:
        return 0
    thresh = rank_tol * max(float(sigma[0]), ABS_FLOOR)
    return int(np.sum(sigma > thresh))


def _apply_sign_convention(U: np.ndarray, V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Make the largest-magnitude entry of each left singular vector positive.

    Ties break to the lowest row index (np.argmax already does).  Columns of V
    that pair with a flipped column of U are flipped too, preserving U S V^T.
    Columns of U beyond the number of singular values have no V partner.
    """
    U = U.copy()
    V = V.copy()
    n = V.shape[1]
    for j in range(U.shape[1]):
        i = int(np.argmax(np.abs(U[:, j])))
        if U[i, j] < 0:
            U[:, j] = -U[:, j]
            if j < n:
                V[:, j] = -V[:, j]
    return U, V


@dataclass(frozen=True)
class SvdPoint:
    """A matrix bundled with its full SVD, numerical rank and support set.

    Fields are in the internal (tall, m >= n) orientation.  ``gamma`` holds the
    0-based indices of numerically nonzero singular values; because ``sigma``
    is nonincreasing it is always ``(0, ..., s-1)``.
    """

    X: np.ndarray          # m x n, m >= n
    U: np.ndarray          # m x m orthogonal
    V: np.ndarray          # n x n orthogonal
    sigma: np.ndarray      # length n, nonincreasing, >= 0
    gamma: tuple[int, ...]
    s: int
    transposed: bool
    rank_tol: float = RANK_TOL

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]

    @property
    def gamma_m_perp(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.m) if i not in set(self.gamma))

    @property
    def gamma_n_perp(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if i not in set(self.gamma))

    # Column blocks of U / V used throughout the cone formulas.
    @property
    def U_gamma(self) -> np.ndarray:
        return self.U[:, list(self.gamma)]

    @property
    def U_gamma_m_perp(self) -> np.ndarray:
        return self.U[:, list(self.gamma_m_perp)]

    @property
    def U_gamma_n_perp(self) -> np.ndarray:
        """Columns of U indexed by the complement of gamma inside {1..n}."""
        return self.U[:, list(self.gamma_n_perp)]

    @property
    def U_extra(self) -> np.ndarray:
        """Columns n+1..m of U (empty when the matrix is square internally)."""
        return self.U[:, self.n:]

    @property
    def V_gamma(self) -> np.ndarray:
        return self.V[:, list(self.gamma)]

    @property
    def V_gamma_n_perp(self) -> np.ndarray:
        return self.V[:, list(self.gamma_n_perp)]

    def to_internal(self, M: np.ndarray) -> np.ndarray:
        """Bring a caller-orientation matrix into the internal orientation."""
        M = np.asarray(M, dtype=float)
        out = M.T if self.transposed else M
        if out.shape != (self.m, self.n):
            raise InputError(
                f"matrix of shape {M.shape} does not match point of shape "
                f"{(self.n, self.m) if self.transposed else (self.m, self.n)}"
            )
        return out

    def from_internal(self, M: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`to_internal`."""
        return M.T if self.transposed else M

    @property
    def original(self) -> np.ndarray:
        """The matrix in the caller's orientation."""
        return self.from_internal(self.X)

    def sigma_full(self) -> np.ndarray:
        """The m x n diagonal extension of sigma."""
        S = np.zeros((self.m, self.n))
        S[: self.n, : self.n] = np.diag(self.sigma)
        return S

    @staticmethod
    def from_factors(
        U: np.ndarray,
        sigma: np.ndarray,
        V: np.ndarray,
        rank_tol: float = RANK_TOL,
        transposed: bool = False,
    ) -> "SvdPoint":
        """Build a point from an explicit SVD (a chosen kernel completion).

        The subspaces R_X(J) depend on which completion of U, V is chosen when
        singular values repeat or vanish; this constructor lets the caller pin
        that choice instead of taking the one ``svd_point`` computes.
        """
        U = np.asarray(U, dtype=float)
        V = np.asarray(V, dtype=float)
        sigma = np.asarray(sigma, dtype=float)
        m, n = U.shape[0], V.shape[0]
        if m < n:
            raise InputError("from_factors expects the tall orientation (m >= n)")
        if U.shape != (m, m) or V.shape != (n, n) or sigma.shape != (n,):
            raise InputError("inconsistent factor shapes")
        if np.any(np.diff(sigma) > 0) or np.any(sigma < 0):
            raise InputError("sigma must be nonincreasing and nonnegative")
        for name, Q in (("U", U), ("V", V)):
            err = np.linalg.norm(Q.T @ Q - np.eye(Q.shape[0]))
            if err > 1e-10 * Q.shape[0]:
                raise InputError(f"{name} is not orthogonal (error {err:.2e})")
        X = U[:, :n] @ np.diag(sigma) @ V.T
        s = numerical_rank(sigma, rank_tol)
        return SvdPoint(
            X=X, U=U, V=V, sigma=sigma, gamma=tuple(range(s)), s=s,
            transposed=transposed, rank_tol=rank_tol,
        )


def svd_point(X: np.ndarray, rank_tol: float = RANK_TOL) -> SvdPoint:
    """Full SVD of X with a deterministic sign convention and numerical support set.

    If X has more columns than rows it is transposed internally so the stored
    matrix is tall; ``transposed`` records the swap and the U/V roles exchange
    on read-back.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise InputError(f"expected a 2-d array, got ndim={X.ndim}")
    if not np.all(np.isfinite(X)):
        raise InputError("matrix has non-finite entries")
    if rank_tol <= 0:
        raise InputError("rank_tol must be positive")

    transposed = X.shape[0] < X.shape[1]
    Xi = X.T.copy() if transposed else X.copy()
    U, sigma, Vt = np.linalg.svd(Xi, full_matrices=True)
    V = Vt.T
    U, V = _apply_sign_convention(U, V)
    s = numerical_rank(sigma, rank_tol)
    return SvdPoint(
        X=Xi, U=U, V=V, sigma=sigma, gamma=tuple(range(s)), s=s,
        transposed=transposed, rank_tol=rank_tol,
    )


def project_rank(
    X: np.ndarray,
    r: int,
    rank_tol: float = RANK_TOL,
    gap_tol: float = GAP_TOL,
) -> tuple[np.ndarray, bool]:
    """Frobenius-nearest matrix of rank <= r (truncated SVD).

    Returns ``(Xp, ambiguous)``; the flag fires when the singular values at the
    truncation boundary (nearly) tie, where the metric projection is set-valued
    and the SVD-order selection is one choice among many.
    """
    X = np.asarray(X, dtype=float)
    nmin = min(X.shape)
    if not (1 <= r <= nmin):
        raise InputError(f"rank bound r={r} out of range [1, {nmin}]")
    P = svd_point(X, rank_tol=rank_tol)
    sigma = P.sigma
    Ur = P.U[:, :r]
    Vr = P.V[:, :r]
    Xp = Ur @ np.diag(sigma[:r]) @ Vr.T
    ambiguous = False
    if r < len(sigma) and sigma[r] > 0:
        ambiguous = (sigma[r - 1] - sigma[r]) <= gap_tol * sigma[0]
    return P.from_internal(Xp), ambiguous


def project_hankel(X: np.ndarray) -> np.ndarray:
    """Replace each anti-diagonal by its arithmetic mean.

    This is the orthogonal projection onto the subspace of Hankel matrices
    (constant anti-diagonals); it is idempotent and nonexpansive.
    """
    X = np.asarray(X, dtype=float)
    m, n = X.shape
    out = np.empty_like(X)
    # anti-diagonal index k = i + j, k in 0..m+n-2
    idx = np.add.outer(np.arange(m), np.arange(n))
    means = np.bincount(idx.ravel(), weights=X.ravel()) / np.bincount(idx.ravel())
    out[:] = means[idx]
    return out
