"""FastAPI application exposing the optimization engine.

Error mapping: malformed payloads come back as 422 (FastAPI validation) or
400 with a stable error code; infeasible stage models map to 409 so
clients can distinguish a modeling outcome from a bad request.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..milp.encodings import DataError, EncodingError
from ..milp.solver import SolverError
from ..orchestrator.config import ConfigError
from ..reporting.metrics import ReportError
from ..stages.extract import ExtractionError
from ..stages.types import StageError, StageInfeasibleError
from . import handlers, schemas
from .handlers import ServiceError


def create_app() -> FastAPI:
    app = FastAPI(
        title="flexopt service",
        description="Two-stage rolling-horizon optimization for flexible energy resources",
    )

    @app.exception_handler(ServiceError)
    async def _service_error(_: Request, exc: ServiceError) -> JSONResponse:
        return _error_response(exc.code, exc.message, exc.http_status)

    @app.exception_handler(StageInfeasibleError)
    async def _infeasible(_: Request, exc: StageInfeasibleError) -> JSONResponse:
        return _error_response("infeasible", str(exc), 409)

    @app.exception_handler(StageError)
    async def _stage_error(_: Request, exc: StageError) -> JSONResponse:
        return _error_response("stage", str(exc), 500)

    @app.exception_handler(ConfigError)
    async def _config_error(_: Request, exc: ConfigError) -> JSONResponse:
        return _error_response("config", str(exc), 400)

    @app.exception_handler(DataError)
    async def _data_error(_: Request, exc: DataError) -> JSONResponse:
        return _error_response("data", str(exc), 400)

    @app.exception_handler(EncodingError)
    async def _encoding_error(_: Request, exc: EncodingError) -> JSONResponse:
        return _error_response("encoding", str(exc), 400)

    @app.exception_handler(ReportError)
    async def _report_error(_: Request, exc: ReportError) -> JSONResponse:
        return _error_response("report", str(exc), 400)

    @app.exception_handler(ExtractionError)
    async def _extraction_error(_: Request, exc: ExtractionError) -> JSONResponse:
        return _error_response("extraction", str(exc), 500)

    @app.exception_handler(SolverError)
    async def _solver_error(_: Request, exc: SolverError) -> JSONResponse:
        return _error_response("solver", str(exc), 500)

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return handlers.health()

    @app.post("/system/validate", response_model=schemas.ValidateResponse)
    def validate(request: schemas.ValidateRequest) -> schemas.ValidateResponse:
        return handlers.validate(request)

    @app.post("/stages/swo", response_model=schemas.SwoSolveResponse)
    def solve_swo(request: schemas.SwoSolveRequest) -> schemas.SwoSolveResponse:
        return handlers.solve_swo(request)

    @app.post("/stages/rto", response_model=schemas.RtoSolveResponse)
    def solve_rto(request: schemas.RtoSolveRequest) -> schemas.RtoSolveResponse:
        return handlers.solve_rto(request)

    @app.post("/experiments/run", response_model=schemas.RunResponse)
    def run(request: schemas.RunRequest) -> schemas.RunResponse:
        return handlers.run(request)

    @app.post("/plant/simulate", response_model=schemas.SimulateResponse)
    def simulate(request: schemas.SimulateRequest) -> schemas.SimulateResponse:
        return handlers.simulate(request)

    @app.post("/reports/compute", response_model=schemas.ReportResponse)
    def report(request: schemas.ReportRequest) -> schemas.ReportResponse:
        return handlers.report(request)

    return app


def _error_response(code: str, message: str, status: int) -> JSONResponse:
    body = schemas.ErrorResponse(error=schemas.ErrorBody(code=code, message=message))
    return JSONResponse(status_code=status, content=body.model_dump())


app = create_app()
