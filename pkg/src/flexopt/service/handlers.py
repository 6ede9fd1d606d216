"""Service operations as plain functions over the request/response models.

The FastAPI routes and the CLI's in-process mode both dispatch through
these, so both transports exercise identical validation and behavior.
"""

from __future__ import annotations

from .. import __version__
from ..environment.plant import Setpoint, SimulatedPlant
from ..environment.series import ActualSeries
from ..model_core.validation import validate_system
from ..orchestrator.runner import run_experiment
from ..reporting.metrics import compute_metrics
from ..stages.rto import build_and_solve_rto
from ..stages.swo import build_and_solve_swo
from . import schemas


class ServiceError(Exception):
    """Error with a stable machine code for transport-independent mapping."""

    def __init__(self, code: str, message: str, http_status: int = 400):
        super().__init__(message)
        self.code = code
        self.message = message
        self.http_status = http_status


def health() -> schemas.HealthResponse:
    return schemas.HealthResponse(version=__version__)


def validate(request: schemas.ValidateRequest) -> schemas.ValidateResponse:
    violations = tuple(validate_system(request.system))
    return schemas.ValidateResponse(valid=not violations, violations=violations)


def solve_swo(request: schemas.SwoSolveRequest) -> schemas.SwoSolveResponse:
    plan = build_and_solve_swo(
        request.system, request.time_grid, request.prices,
        list(request.re_forecast_kw), request.history, request.gap,
    )
    return schemas.SwoSolveResponse(plan=plan)


def solve_rto(request: schemas.RtoSolveRequest) -> schemas.RtoSolveResponse:
    sos = build_and_solve_rto(
        request.system, request.time_grid, request.plan, request.tau_index,
        list(request.re_forecast_kw), request.history, request.gap,
        slack_penalty=request.slack_penalty,
    )
    return schemas.RtoSolveResponse(sos=sos)


def run(request: schemas.RunRequest) -> schemas.RunResponse:
    log = run_experiment(request.config, quiet=request.quiet)
    metrics = compute_metrics(log) if log.status == "completed" else None
    return schemas.RunResponse(log=log, metrics=metrics)


def simulate(request: schemas.SimulateRequest) -> schemas.SimulateResponse:
    """Replay a setpoint schedule through a fresh plant."""
    if len(request.actual_re_kw) < len(request.sos.steps):
        raise ServiceError(
            "data", f"{len(request.actual_re_kw)} renewable values for "
                    f"{len(request.sos.steps)} setpoints",
        )
    try:
        trace = ActualSeries(values=request.actual_re_kw, resolution_hours=request.delta_t)
    except ValueError as exc:
        raise ServiceError("data", f"invalid renewable trace: {exc}") from exc
    plant = SimulatedPlant(request.system, trace)
    measurements = []
    for k, step in enumerate(request.sos.steps):
        setpoints = [
            Setpoint(resource=r, state=rs.state, p_input_kw=rs.p_input)
            for r, rs in enumerate(step.resources)
        ]
        measurements.append(plant.apply(k, setpoints))
    return schemas.SimulateResponse(measurements=tuple(measurements))


def report(request: schemas.ReportRequest) -> schemas.ReportResponse:
    return schemas.ReportResponse(metrics=compute_metrics(request.log))
