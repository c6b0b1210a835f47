"""Objective abstraction and concrete problem builders.

Builders are pure; objective callbacks must be re-entrant (stateless), which
is what lets second-order sampling probe them concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .affine import AffineSet
from .exceptions import InputError


@dataclass(frozen=True)
class Objective:
    """A smooth objective with optional second-order information.

    ``hessian_quadform(X, Xi)`` evaluates the Hessian quadratic form; the
    bilinear form defaults to the polarization identity when not supplied.
    """

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian_quadform: Optional[Callable[[np.ndarray, np.ndarray], float]] = None
    hessian_bilinear: Optional[Callable[[np.ndarray, np.ndarray, np.ndarray], float]] = None
    convex: bool = False

    def bilinear(self, X: np.ndarray, Xi1: np.ndarray, Xi2: np.ndarray) -> float:
        if self.hessian_bilinear is not None:
            return self.hessian_bilinear(X, Xi1, Xi2)
        if self.hessian_quadform is None:
            raise InputError("objective provides no Hessian information")
        q = self.hessian_quadform
        return 0.25 * (q(X, Xi1 + Xi2) - q(X, Xi1 - Xi2))

    @property
    def has_hessian(self) -> bool:
        return self.hessian_quadform is not None or self.hessian_bilinear is not None


@dataclass(frozen=True)
class Problem:
    """Objective + affine constraints + rank bound."""

    objective: Objective
    constraints: AffineSet
    r: int
    name: str = "problem"
    structure: str = "dense"   # "diagonal" activates the structural guard in certify calls

    def __post_init__(self):
        n = min(self.constraints.m, self.constraints.n)
        if not 1 <= self.r < n:
            raise InputError(f"rank bound r={self.r} out of range for {self.constraints.m}x{self.constraints.n}")


def frobenius_distance_objective(H: np.ndarray) -> Objective:
    """f(X) = 1/2 ||H - X||_F^2 with identity Hessian form."""
    H = np.asarray(H, dtype=float)
    return Objective(
        value=lambda X: 0.5 * float(np.linalg.norm(H - X) ** 2),
        gradient=lambda X: np.asarray(X, dtype=float) - H,
        hessian_quadform=lambda X, Xi: float(np.linalg.norm(Xi) ** 2),
        hessian_bilinear=lambda X, Xi1, Xi2: float(np.sum(Xi1 * Xi2)),
        convex=True,
    )


def hankel_constraints(m: int, n: int) -> AffineSet:
    """The (m-1)(n-1) anti-diagonal equalities <E_kj - E_{k-1,j+1}, X> = 0."""
    mats = []
    for k in range(1, m):
        for j in range(n - 1):
            A = np.zeros((m, n))
            A[k, j] = 1.0
            A[k - 1, j + 1] = -1.0
            mats.append(A)
    return AffineSet(mats, np.zeros(len(mats)))


def hankel_problem(H: np.ndarray, r: int) -> Problem:
    """Nearest rank-<=r Hankel matrix to H, in Frobenius distance."""
    H = np.asarray(H, dtype=float)
    m, n = H.shape
    if r >= n:
        raise InputError(f"rank bound r={r} must be smaller than n={n}")
    return Problem(
        objective=frobenius_distance_objective(H),
        constraints=hankel_constraints(m, n),
        r=r,
        name="hankel",
    )


def hankel_from_signal(signal: np.ndarray, rows: int) -> np.ndarray:
    """Expand a length-(rows + cols - 1) signal into a rows x cols Hankel matrix."""
    signal = np.asarray(signal, dtype=float).ravel()
    cols = signal.size - rows + 1
    if cols < 1:
        raise InputError(f"signal of length {signal.size} too short for {rows} rows")
    return np.array([signal[i : i + cols] for i in range(rows)])


def lrr_problem(B_list: list[np.ndarray], r: int) -> Problem:
    """Low-rank representation over a manifold: row-wise quadratics, unit row sums.

    The gradient uses the symmetric part of each B^i, which is the correct
    derivative of the quadratic form when B^i is not symmetric.
    """
    B_list = [np.asarray(B, dtype=float) for B in B_list]
    N = len(B_list)
    if N == 0:
        raise InputError("need at least one row matrix")
    for i, B in enumerate(B_list):
        if B.shape != (N, N):
            raise InputError(f"B^{i} has shape {B.shape}, expected ({N}, {N})")
    if r <= 1:
        raise InputError("the low-rank representation model requires a rank bound r > 1")
    Bsym = [0.5 * (B + B.T) for B in B_list]
    convex = all(np.linalg.eigvalsh(B).min() >= -1e-12 * (1.0 + np.linalg.norm(B)) for B in Bsym)

    def value(W):
        W = np.asarray(W, dtype=float)
        return 0.5 * float(sum(W[i] @ B_list[i] @ W[i] for i in range(N)))

    def gradient(W):
        W = np.asarray(W, dtype=float)
        return np.stack([W[i] @ Bsym[i] for i in range(N)])

    def quadform(W, Xi):
        Xi = np.asarray(Xi, dtype=float)
        return float(sum(Xi[i] @ Bsym[i] @ Xi[i] for i in range(N)))

    def bilinear(W, Xi1, Xi2):
        return float(sum(Xi1[i] @ Bsym[i] @ Xi2[i] for i in range(N)))

    mats = []
    for i in range(N):
        E = np.zeros((N, N))
        E[i, :] = 1.0
        mats.append(E)
    constraints = AffineSet(mats, np.ones(N))
    return Problem(
        objective=Objective(value, gradient, quadform, bilinear, convex=convex),
        constraints=constraints,
        r=r,
        name="lrr",
    )


def quadratic_objective(Q: np.ndarray, C: np.ndarray) -> Objective:
    """f(X) = 1/2 vec(X)^T Q vec(X) + <C, X> with symmetric Q."""
    C = np.asarray(C, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (C.size, C.size):
        raise InputError(f"Q has shape {Q.shape}, expected ({C.size}, {C.size})")
    Qs = 0.5 * (Q + Q.T)
    convex = bool(np.linalg.eigvalsh(Qs).min() >= -1e-10 * (1.0 + np.linalg.norm(Qs)))

    def value(X):
        x = np.asarray(X, dtype=float).ravel()
        return 0.5 * float(x @ Qs @ x) + float(np.sum(C * np.asarray(X)))

    def gradient(X):
        x = np.asarray(X, dtype=float).ravel()
        return (Qs @ x).reshape(C.shape) + C

    def quadform(X, Xi):
        xi = np.asarray(Xi, dtype=float).ravel()
        return float(xi @ Qs @ xi)

    def bilinear(X, Xi1, Xi2):
        return float(np.asarray(Xi1).ravel() @ Qs @ np.asarray(Xi2).ravel())

    return Objective(value, gradient, quadform, bilinear, convex=convex)


def quadratic_problem(Q: np.ndarray, C: np.ndarray, constraints: AffineSet, r: int) -> Problem:
    return Problem(quadratic_objective(Q, C), constraints, r, name="quadratic")


def diagonal_problem(
    a_list: list[np.ndarray],
    b: np.ndarray,
    r: int,
    g_value: Callable[[np.ndarray], float],
    g_gradient: Callable[[np.ndarray], np.ndarray],
    g_hessian_quadform: Optional[Callable[[np.ndarray, np.ndarray], float]] = None,
    convex: bool = False,
) -> Problem:
    """Embed a sparsity-constrained vector problem into diagonal matrices.

    The rank of Diag(x) equals the number of nonzeros of x, so the rank bound
    becomes the sparsity bound.  The diagonal structure is enforced at the
    type boundary (a guard in certify calls rejects non-diagonal candidates)
    rather than with extra off-diagonal constraints.
    """
    a_list = [np.asarray(a, dtype=float).ravel() for a in a_list]
    n = a_list[0].size
    mats = [np.diag(a) for a in a_list]

    def value(X):
        return float(g_value(np.diag(np.asarray(X, dtype=float))))

    def gradient(X):
        return np.diag(np.asarray(g_gradient(np.diag(np.asarray(X, dtype=float)))))

    quadform = None
    if g_hessian_quadform is not None:
        def quadform(X, Xi):  # noqa: F811
            return float(g_hessian_quadform(np.diag(np.asarray(X)), np.diag(np.asarray(Xi))))

    return Problem(
        objective=Objective(value, gradient, quadform, convex=convex),
        constraints=AffineSet(mats, b),
        r=r,
        name="diagonal",
        structure="diagonal",
    )


def check_structure(prob: Problem, X: np.ndarray, tol: float = 1e-12) -> None:
    """Structural guard: diagonal problems only accept diagonal candidates."""
    if prob.structure == "diagonal":
        X = np.asarray(X, dtype=float)
        off = X - np.diag(np.diag(X))
        if np.linalg.norm(off) > tol * (1.0 + np.linalg.norm(X)):
            raise InputError("candidate point must be diagonal for this problem")
