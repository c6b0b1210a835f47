"""FastAPI service exposing certification, solving and the bundled demos."""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import demos
from ..exceptions import ConsistencyError, InfeasibleSetError, InputError
from ..matcore import project_hankel
from ..problems import hankel_from_signal
from ..serialize import matrix_from_json, matrix_to_json, problem_from_json
from ..solvers import alm_projected_gradient, alternating_projections
from ..stationarity import classify
from .schemas import (
    CertificateModel,
    CertifyRequest,
    DemoListResponse,
    MatrixModel,
    SolveRequest,
    SolveResponse,
    TraceRowModel,
)

app = FastAPI(
    title="rankcertify",
    description="Stationarity certification for low-rank matrix optimization over affine sets",
    version="0.1.0",
)


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/certify", response_model=CertificateModel)
def certify(req: CertifyRequest) -> CertificateModel:
    try:
        prob = problem_from_json(req.problem.model_dump())
        X = matrix_from_json(req.point.model_dump())
        cert = classify(prob, X, alpha=req.alpha, tol=req.tol, rank_tol=req.rank_tol)
    except (InputError, InfeasibleSetError) as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    except ConsistencyError as exc:
        raise HTTPException(status_code=500, detail=f"internal consistency error: {exc}")
    return CertificateModel(**cert.to_dict())


def _hankel_target(params: dict) -> np.ndarray:
    if "H" in params:
        return matrix_from_json(params["H"])
    if "signal" in params and "rows" in params:
        return hankel_from_signal(np.asarray(params["signal"], dtype=float), int(params["rows"]))
    raise InputError("hankel params need either H or signal+rows")


@app.post("/solve", response_model=SolveResponse)
def solve(req: SolveRequest) -> SolveResponse:
    try:
        prob = problem_from_json(req.problem.model_dump())
        p = req.params
        if req.solver == "ap":
            if req.problem.type != "hankel":
                raise InputError("the alternating-projections solver only handles hankel problems")
            H = _hankel_target(req.problem.params)
            X, trace = alternating_projections(H, prob.r, max_iter=p.max_iter, tol=p.tol)
            y = np.zeros(prob.constraints.l)
            trace.certificate = classify(prob, X, rank_tol=max(1e-10, 10 * p.tol))
        else:
            rng = np.random.default_rng(req.seed)
            if req.x0 is not None:
                X0 = matrix_from_json(req.x0.model_dump())
            else:
                X0 = rng.standard_normal((prob.constraints.m, prob.constraints.n))
                X0 = project_hankel(X0) if req.problem.type == "hankel" else X0
            X, y, trace = alm_projected_gradient(
                prob,
                X0,
                rho=p.rho,
                rho_growth=p.rho_growth,
                alpha0=p.alpha0,
                max_outer=p.max_outer,
                max_inner=p.max_inner,
                tol=p.tol,
            )
    except (InputError, InfeasibleSetError) as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    except ConsistencyError as exc:
        raise HTTPException(status_code=500, detail=f"internal consistency error: {exc}")
    return SolveResponse(
        point=MatrixModel(**matrix_to_json(X)),
        multipliers=[float(v) for v in y],
        converged=trace.converged,
        stop_reason=trace.stop_reason,
        trace=[
            TraceRowModel(iter=i, objective=o, feas_residual=f, step=s)
            for (i, o, f, s) in trace.rows
        ],
        certificate=CertificateModel(**trace.certificate.to_dict()),
    )


@app.get("/demos", response_model=DemoListResponse)
def list_demos() -> DemoListResponse:
    return DemoListResponse(demos=list(demos.DEMO_NAMES))


@app.get("/demos/{name}")
def run_demo(name: str) -> dict:
    if name not in demos.DEMO_NAMES:
        raise HTTPException(status_code=404, detail=f"unknown demo {name!r}")
    return demos.run_demo(name)
