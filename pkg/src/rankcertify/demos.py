"""Bundled worked examples, runnable end to end.

Three demos ship with the package: a 3x3 Hankel approximation certified at a
known stationary point, a 4x4 low-rank representation instance whose certified
point is a global minimizer, and a 5x4 cone-membership walkthrough at a rank-2
point with rank bound 3.
"""

from __future__ import annotations

import numpy as np

from . import cones
from .exceptions import InputError
from .matcore import SvdPoint
from .problems import hankel_problem, lrr_problem
from .qualifications import build_TR, check_assumption, check_normal_in_tangent
from .serialize import matrix_to_json
from .stationarity import classify

DEMO_NAMES = ("hankel3", "lrr4", "example21")


def hankel3_setup():
    H = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    Xbar = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    return hankel_problem(H, 2), Xbar


def lrr4_setup():
    N = 4
    prob = lrr_problem([np.eye(N) for _ in range(N)], 2)
    Wbar = np.full((N, N), 1.0 / N)
    return prob, Wbar


def example21_point() -> SvdPoint:
    """The 5x4 rank-2 point with the identity completion of U and V."""
    U = np.eye(5)
    V = np.eye(4)
    sigma = np.array([1.0, 1.0, 0.0, 0.0])
    return SvdPoint.from_factors(U, sigma, V)


def example21_constraints():
    from .affine import AffineSet

    A1 = np.zeros((5, 4))
    A1[0, 0] = 1.0
    A2 = np.zeros((5, 4))
    A2[1, 1] = 1.0
    return AffineSet([A1, A2], np.array([1.0, 1.0]))


def run_demo(name: str) -> dict:
    """Execute one bundled demo and return a JSON-safe report."""
    if name == "hankel3":
        prob, Xbar = hankel3_setup()
        H = -prob.objective.gradient(np.zeros((3, 3)))
        cert = classify(prob, Xbar)
        return {
            "name": name,
            "description": "3x3 Hankel approximation: certify the known rank-2 stationary point",
            "setup": {
                "problem": {"type": "hankel", "rank": 2, "params": {"H": matrix_to_json(H)}},
                "point": matrix_to_json(Xbar),
            },
            "expected": {
                "feasible": True,
                "rank_s": 2,
                "multipliers": [0.0, 0.0, 0.0, 0.0],
                "f_stationary": True,
                "beta": 1.0,
                "global_min_scope": "restricted_to_RXGamma",
            },
            "certificate": cert.to_dict(),
        }

    if name == "lrr4":
        prob, Wbar = lrr4_setup()
        cert = classify(prob, Wbar)
        return {
            "name": name,
            "description": "low-rank representation, 4 identity row matrices: certify the uniform point",
            "setup": {
                "problem": {"type": "lrr", "rank": 2, "params": {"N": 4}},
                "point": matrix_to_json(Wbar),
            },
            "expected": {
                "feasible": True,
                "rank_s": 1,
                "multipliers": [-0.25, -0.25, -0.25, -0.25],
                "f_stationary": True,
                "global_min_scope": "global",
            },
            "certificate": cert.to_dict(),
        }

    if name == "example21":
        P = example21_point()
        S = example21_constraints()
        _, R_list = build_TR(P, S)
        indep, smin = check_assumption(R_list)
        generators = []
        checks = []
        for (i, j) in ((2, 3), (3, 2)):
            W = np.zeros((5, 4))
            W[i, j] = 1.0
            generators.append(W)
        W5 = np.zeros((5, 4))
        W5[4, :] = np.arange(1.0, 5.0)
        generators.append(W5)
        for k, W in enumerate(generators):
            member, dec = cones.in_frechet_RXr(P, 3, W)
            checks.append(
                {
                    "generator": k,
                    "in_frechet_cone": bool(member),
                    "diag_D_zero": bool(dec.D is None or float(np.abs(np.diag(dec.D)).max()) < 1e-12),
                }
            )
        nit = check_normal_in_tangent(P, S, 3)
        return {
            "name": name,
            "description": "5x4 cone-membership walkthrough at a rank-2 point with rank bound 3",
            "setup": {"point": matrix_to_json(P.X), "rank": 3},
            "expected": {
                "R_blocks_independent": True,
                "generators_in_cone": True,
                "normal_in_tangent": "holds",
            },
            "results": {
                "R_blocks_independent": bool(indep),
                "sigma_min_R": smin,
                "generator_checks": checks,
                "normal_in_tangent": nit,
            },
        }

    raise InputError(f"unknown demo {name!r}; available: {', '.join(DEMO_NAMES)}")
