"""Independent brute-force and finite-difference oracles for tests.

No production code depends on this module; it exists to refute, not to prove.
Every function takes an explicit seed so concurrent use stays reproducible.
"""

from __future__ import annotations

import numpy as np

from . import cones
from .matcore import SvdPoint
from .problems import Objective


def random_rank_r(m: int, n: int, r: int, seed: int) -> np.ndarray:
    """Product of standard-normal m x r and r x n factors; rank r almost surely."""
    rng = np.random.default_rng(seed)
    return rng.standard_normal((m, r)) @ rng.standard_normal((r, n))


def projection_oracle(X: np.ndarray, r: int, trials: int, seed: int) -> float:
    """Best Frobenius distance to rank-r over random candidates with ALS polish.

    Each random factor pair gets 20 alternating least-squares sweeps; the
    returned distance can approach but never beat the metric projection.
    Returns +inf when trials = 0.
    """
    if trials == 0:
        return float("inf")
    X = np.asarray(X, dtype=float)
    m, n = X.shape
    rng = np.random.default_rng(seed)
    best = float("inf")
    for _ in range(trials):
        A = rng.standard_normal((m, r))
        B = rng.standard_normal((r, n))
        for _ in range(20):
            A = np.linalg.lstsq(B.T, X.T, rcond=None)[0].T
            B = np.linalg.lstsq(A, X, rcond=None)[0]
        best = min(best, float(np.linalg.norm(X - A @ B)))
    return best


def sample_bouligand(P: SvdPoint, r: int, count: int, seed: int) -> list[np.ndarray]:
    """Random Bouligand-cone directions: tangent part + rank-(r-s) normal part."""
    rng = np.random.default_rng(seed)
    out = []
    deficit = r - P.s
    Ump, Vnp = P.U_gamma_m_perp, P.V_gamma_n_perp
    for _ in range(count):
        T = rng.standard_normal((P.m, P.n))
        # strip the normal-space block to get a pure tangent sample
        T -= Ump @ (Ump.T @ T @ Vnp) @ Vnp.T
        Xi = T
        if deficit > 0 and Ump.shape[1] and Vnp.shape[1]:
            k = min(deficit, Ump.shape[1], Vnp.shape[1])
            G1 = rng.standard_normal((Ump.shape[1], k))
            G2 = rng.standard_normal((k, Vnp.shape[1]))
            Xi = T + Ump @ G1 @ G2 @ Vnp.T
        out.append(P.from_internal(Xi))
    return out


def frechet_samples(P: SvdPoint, r: int, count: int, seed: int) -> list[np.ndarray]:
    """Random elements of the Frechet normal cone of the rank-<=r set at P."""
    if P.s < r:
        return [np.zeros_like(P.original) for _ in range(count)]
    rng = np.random.default_rng(seed)
    Ump, Vnp = P.U_gamma_m_perp, P.V_gamma_n_perp
    out = []
    for _ in range(count):
        D = rng.standard_normal((Ump.shape[1], Vnp.shape[1]))
        out.append(P.from_internal(Ump @ D @ Vnp.T))
    return out


def fd_gradient(obj: Objective, X: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient, step scaled by the matrix size."""
    X = np.asarray(X, dtype=float)
    step = h * (1.0 + float(np.linalg.norm(X)))
    G = np.zeros_like(X)
    for i in range(X.shape[0]):
        for j in range(X.shape[1]):
            E = np.zeros_like(X)
            E[i, j] = step
            G[i, j] = (obj.value(X + E) - obj.value(X - E)) / (2 * step)
    return G


def fd_quadform(obj: Objective, X: np.ndarray, Xi: np.ndarray, h: float = 1e-5) -> float:
    """Second central difference of the objective along a direction."""
    X = np.asarray(X, dtype=float)
    Xi = np.asarray(Xi, dtype=float)
    step = h * (1.0 + float(np.linalg.norm(X)))
    return (obj.value(X + step * Xi) - 2 * obj.value(X) + obj.value(X - step * Xi)) / step**2


def stack_sigma_min(mats: list[np.ndarray]) -> float:
    """Smallest singular value of a vectorized matrix stack (recomputed independently)."""
    if not mats:
        return float("inf")
    stack = np.stack([np.asarray(M, dtype=float).ravel() for M in mats])
    sv = np.linalg.svd(stack, compute_uv=False)
    return float(sv[-1])
