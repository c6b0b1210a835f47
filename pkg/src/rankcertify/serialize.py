"""JSON exchange formats: matrices, affine sets, problems.

Formats:
  matrix      {"rows": m, "cols": n, "data": [[row-major reals]]}
  affine set  {"constraints": [{"A": <matrix>, "b": <real>}, ...]}
  problem     {"type": "hankel"|"lrr"|"quadratic"|"diagonal", "params": {...}, "rank": r}
"""

from __future__ import annotations

import numpy as np

from .affine import AffineSet
from .exceptions import InputError
from .problems import (
    Problem,
    diagonal_problem,
    hankel_from_signal,
    hankel_problem,
    lrr_problem,
    quadratic_problem,
)


def matrix_to_json(X: np.ndarray) -> dict:
    X = np.asarray(X, dtype=float)
    return {"rows": int(X.shape[0]), "cols": int(X.shape[1]), "data": [list(map(float, row)) for row in X]}


def matrix_from_json(obj: dict) -> np.ndarray:
    if not isinstance(obj, dict) or not {"rows", "cols", "data"} <= set(obj):
        raise InputError("matrix object must have rows, cols and data fields")
    rows, cols, data = obj["rows"], obj["cols"], obj["data"]
    if len(data) != rows:
        raise InputError(f"matrix declares {rows} rows but data has {len(data)}")
    for i, row in enumerate(data):
        if len(row) != cols:
            raise InputError(f"row {i} has {len(row)} entries, expected {cols} (ragged rows rejected)")
    X = np.asarray(data, dtype=float)
    if not np.all(np.isfinite(X)):
        raise InputError("matrix has non-finite entries")
    return X


def affine_to_json(S: AffineSet) -> dict:
    return {
        "constraints": [
            {"A": matrix_to_json(A), "b": float(b)} for A, b in zip(S.mats, S.rhs)
        ]
    }


def affine_from_json(obj: dict) -> AffineSet:
    if "constraints" not in obj:
        raise InputError("affine set object must have a constraints field")
    mats, rhs = [], []
    for c in obj["constraints"]:
        mats.append(matrix_from_json(c["A"]))
        rhs.append(float(c["b"]))
    return AffineSet(mats, np.asarray(rhs))


def problem_from_json(obj: dict) -> Problem:
    if not isinstance(obj, dict) or "type" not in obj or "rank" not in obj:
        raise InputError("problem object must have type and rank fields")
    kind = obj["type"]
    params = obj.get("params", {})
    r = int(obj["rank"])
    if r < 1:
        raise InputError(f"rank bound must be positive, got {r}")

    if kind == "hankel":
        if "H" in params:
            H = matrix_from_json(params["H"])
        elif "signal" in params and "rows" in params:
            H = hankel_from_signal(np.asarray(params["signal"], dtype=float), int(params["rows"]))
        else:
            raise InputError("hankel params need either H or signal+rows")
        return hankel_problem(H, r)

    if kind == "lrr":
        if "B_list" in params:
            B_list = [matrix_from_json(B) for B in params["B_list"]]
        elif "N" in params:
            B_list = [np.eye(int(params["N"])) for _ in range(int(params["N"]))]
        else:
            raise InputError("lrr params need either B_list or N")
        return lrr_problem(B_list, r)

    if kind == "quadratic":
        if not {"Q", "C", "constraints"} <= set(params):
            raise InputError("quadratic params need Q, C and constraints")
        Q = matrix_from_json(params["Q"])
        C = matrix_from_json(params["C"])
        S = affine_from_json({"constraints": params["constraints"]})
        return quadratic_problem(Q, C, S, r)

    if kind == "diagonal":
        if not {"a_list", "b", "gQ", "gc"} <= set(params):
            raise InputError("diagonal params need a_list, b, gQ and gc")
        gQ = matrix_from_json(params["gQ"])
        gc = np.asarray(params["gc"], dtype=float)
        gQs = 0.5 * (gQ + gQ.T)
        convex = bool(np.linalg.eigvalsh(gQs).min() >= -1e-10 * (1.0 + np.linalg.norm(gQs)))
        return diagonal_problem(
            [np.asarray(a, dtype=float) for a in params["a_list"]],
            np.asarray(params["b"], dtype=float),
            r,
            g_value=lambda x: 0.5 * float(x @ gQs @ x) + float(gc @ x),
            g_gradient=lambda x: gQs @ x + gc,
            g_hessian_quadform=lambda x, xi: float(xi @ gQs @ xi),
            convex=convex,
        )

    raise InputError(f"unknown problem type {kind!r}")
