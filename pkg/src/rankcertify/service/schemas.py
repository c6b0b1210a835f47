"""Pydantic request/response models for the certification service."""

from __future__ import annotations

from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, Field


class MatrixModel(BaseModel):
    rows: int
    cols: int
    data: list[list[float]]


class ProblemModel(BaseModel):
    type: Literal["hankel", "lrr", "quadratic", "diagonal"]
    rank: int
    params: dict[str, Any] = Field(default_factory=dict)


class CertifyRequest(BaseModel):
    problem: ProblemModel
    point: MatrixModel
    alpha: Optional[float] = None
    tol: float = 1e-8
    rank_tol: float = 1e-10


class QualificationModel(BaseModel):
    assumption1: bool
    assumption2: bool
    dim_ok_1: bool
    dim_ok_2: bool
    normal_in_tangent: str
    sigma_min_T: Union[float, str]
    sigma_min_R: Union[float, str]
    notes: list[str] = Field(default_factory=list)


class CertificateModel(BaseModel):
    feasible: bool
    rank_s: int
    multipliers: list[float]
    stationary_residual: Union[float, Literal["inf"]]
    f_stationary: bool
    alpha: float
    beta: Union[float, Literal["inf"]]
    alpha_stationary: bool
    sonc: str
    sosc: str
    global_min_scope: str
    qualification: Optional[QualificationModel] = None
    notes: list[str] = Field(default_factory=list)


class SolverParams(BaseModel):
    rho: float = 1.0
    rho_growth: float = 2.0
    alpha0: float = 1.0
    max_outer: int = 30
    max_inner: int = 200
    max_iter: int = 2000
    tol: float = 1e-8


class SolveRequest(BaseModel):
    problem: ProblemModel
    solver: Literal["ap", "alm"] = "alm"
    x0: Optional[MatrixModel] = None
    params: SolverParams = Field(default_factory=SolverParams)
    seed: int = 0


class TraceRowModel(BaseModel):
    iter: int
    objective: float
    feas_residual: float
    step: float


class SolveResponse(BaseModel):
    point: MatrixModel
    multipliers: list[float]
    converged: bool
    stop_reason: str
    trace: list[TraceRowModel]
    certificate: CertificateModel


class DemoListResponse(BaseModel):
    demos: list[str]
