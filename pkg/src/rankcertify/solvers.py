"""Candidate-point solvers: alternating projections and an ALM projected gradient.

Neither method carries a convergence guarantee; the contract is that whatever
they return is handed to the certification pipeline, and the certificate is
attached to the trace.  A solve is single-threaded and deterministic given a
seed; distinct solves share no state.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import affine as aff
from .exceptions import InputError
from .matcore import project_hankel, project_rank, svd_point
from .problems import Problem, frobenius_distance_objective, hankel_problem
from .stationarity import Certificate, classify, lagrangian_grad

RHO0 = 1.0
RHO_GROWTH = 2.0
RHO_CAP = 1e8
ARMIJO = 1e-4
STEP_FLOOR = 1e-12


@dataclass
class SolveTrace:
    """Iteration log: (iteration, objective, feasibility residual, step size)."""

    rows: list[tuple[int, float, float, float]] = field(default_factory=list)
    converged: bool = False
    stop_reason: str = "max_iter"
    tie_events: int = 0
    certificate: Optional[Certificate] = None

    def log(self, it: int, obj: float, feas: float, step: float) -> None:
        self.rows.append((it, float(obj), float(feas), float(step)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["iter", "objective", "feas_residual", "step"])
        for row in self.rows:
            writer.writerow(row)
        return buf.getvalue()


def alternating_projections(
    H: np.ndarray,
    r: int,
    max_iter: int = 2000,
    tol: float = 1e-10,
) -> tuple[np.ndarray, SolveTrace]:
    """Alternate the rank-r truncation with the Hankel (anti-diagonal mean) projection.

    The Hankel projection runs last, so the output is Hankel-feasible by
    construction; its rank is only approximately r, to within the convergence
    tolerance.
    """
    H = np.asarray(H, dtype=float)
    m, n = H.shape
    if r >= min(m, n):
        raise InputError(f"rank bound r={r} must be below min(m, n)={min(m, n)}")
    prob = hankel_problem(H, r)
    trace = SolveTrace()
    X = project_hankel(H)
    scale = 1.0 + float(np.linalg.norm(H))
    for it in range(1, max_iter + 1):
        Y, ambiguous = project_rank(X, r)
        if ambiguous:
            trace.tie_events += 1
        X_next = project_hankel(Y)
        step = float(np.linalg.norm(X_next - X))
        trace.log(it, prob.objective.value(X_next), aff.feasibility_residual(prob.constraints, X_next), step)
        X = X_next
        if step <= tol * scale:
            trace.converged = True
            trace.stop_reason = "tol_met"
            break
    return X, trace


def _augmented_grad(prob: Problem, X: np.ndarray, y: np.ndarray, rho: float) -> np.ndarray:
    S = prob.constraints
    resid = aff.apply(S, X) - S.rhs
    return prob.objective.gradient(X) + aff.adjoint(S, y + rho * resid)


def _augmented_value(prob: Problem, X: np.ndarray, y: np.ndarray, rho: float) -> float:
    S = prob.constraints
    resid = aff.apply(S, X) - S.rhs
    return prob.objective.value(X) + float(y @ resid) + 0.5 * rho * float(resid @ resid)


def alm_projected_gradient(
    prob: Problem,
    X0: np.ndarray,
    rho: float = RHO0,
    rho_growth: float = RHO_GROWTH,
    alpha0: float = 1.0,
    max_outer: int = 30,
    max_inner: int = 200,
    tol: float = 1e-8,
    feas_tol: float = 1e-8,
    certify: bool = True,
) -> tuple[np.ndarray, np.ndarray, SolveTrace]:
    """Augmented-Lagrangian loop around a projected-gradient inner solver.

    Inner steps are rank-r projections of a backtracking (Armijo, halving)
    gradient step on the augmented Lagrangian.  Dual updates run after every
    inner loop; the penalty grows only while feasibility stagnates.  On
    convergence the final pair is classified and the certificate attached to
    the trace.
    """
    if min(rho, rho_growth, alpha0, tol) <= 0 or max_outer <= 0 or max_inner <= 0:
        raise InputError("solver parameters must be positive")
    S = prob.constraints
    X = np.asarray(X0, dtype=float)
    if X.shape != (S.m, S.n):
        raise InputError(f"X0 has shape {X.shape}, expected ({S.m}, {S.n})")
    # start near both sets
    X, _ = project_rank(aff.project_affine(S, X), prob.r)
    y = np.zeros(S.l)
    trace = SolveTrace()
    it = 0
    scale = 1.0 + float(np.linalg.norm(S.rhs))
    last_inner_stalled = False
    prev_feas = None
    for _outer in range(max_outer):
        alpha = alpha0
        for _inner in range(max_inner):
            Xn = X
            g = _augmented_grad(prob, X, y, rho)
            if not np.all(np.isfinite(g)):
                trace.stop_reason = "stalled"
                raise InputError("objective returned non-finite values during the solve")
            val = _augmented_value(prob, X, y, rho)
            accepted = False
            while alpha >= STEP_FLOOR:
                Xn, ambiguous = project_rank(X - alpha * g, prob.r)
                if ambiguous:
                    trace.tie_events += 1
                new_val = _augmented_value(prob, Xn, y, rho)
                if new_val <= val - ARMIJO * alpha * float(np.linalg.norm(g) ** 2) or new_val <= val - 1e-16:
                    accepted = True
                    break
                alpha *= 0.5
            it += 1
            step = float(np.linalg.norm(Xn - X)) if accepted else 0.0
            trace.log(it, prob.objective.value(X), aff.feasibility_residual(S, X), step)
            if not accepted:
                last_inner_stalled = True
                break  # step floor reached: inner stall
            last_inner_stalled = False
            moved = step > tol * (1.0 + float(np.linalg.norm(X)))
            X = Xn
            if not moved:
                break
            alpha = min(alpha * 2.0, alpha0)
        resid = aff.apply(S, X) - S.rhs
        feas = float(np.linalg.norm(resid))
        gradL = lagrangian_grad(prob, X, y + rho * resid)
        grad_ok = _inner_stationary(prob, X, gradL, tol)
        if feas <= feas_tol * scale and grad_ok:
            trace.converged = True
            trace.stop_reason = "tol_met"
            y = y + rho * resid
            break
        y = y + rho * resid
        # grow the penalty only when feasibility is not improving fast enough
        if prev_feas is None or feas > 0.25 * prev_feas:
            rho = min(rho * rho_growth, RHO_CAP)
        prev_feas = feas
    if not trace.converged:
        trace.stop_reason = "stalled" if last_inner_stalled else "max_iter"
    if certify:
        trace.certificate = classify(prob, X)
    return X, y, trace


def _inner_stationary(prob: Problem, X: np.ndarray, gradL: np.ndarray, tol: float) -> bool:
    """Cheap first-order check: the Lagrangian gradient has no usable component."""
    P = svd_point(X)
    scale = 1.0 + float(np.linalg.norm(gradL))
    if P.s < prob.r:
        return float(np.linalg.norm(gradL)) <= 10 * tol * scale
    g = P.to_internal(gradL)
    resid = np.sqrt(
        np.linalg.norm(P.U_gamma.T @ g) ** 2 + np.linalg.norm(g @ P.V_gamma) ** 2
    )
    return float(resid) <= 10 * tol * scale
