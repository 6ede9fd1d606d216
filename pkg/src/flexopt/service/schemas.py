"""Request/response models of the HTTP service.

The wire format reuses the core pydantic types directly; these wrappers
only add the envelope fields each endpoint needs.
"""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from ..environment.plant import Measurement
from ..model_core.types import SystemSpec, TimeGrid
from ..model_core.validation import ValidationIssue
from ..orchestrator.config import ExperimentConfig
from ..orchestrator.logbook import ExperimentLog
from ..reporting.metrics import MetricsReport
from ..stages.types import FixedHistory, Plan, PriceSeries, SoS


class HealthResponse(BaseModel):
    status: str = "ok"
    version: str


class ValidateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    system: SystemSpec


class ValidateResponse(BaseModel):
    valid: bool
    violations: tuple[ValidationIssue, ...]


class SwoSolveRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    system: SystemSpec
    time_grid: TimeGrid
    prices: PriceSeries
    re_forecast_kw: tuple[float, ...] = Field(
        description="renewable forecast per planning step, kW"
    )
    history: Optional[FixedHistory] = None
    gap: float = 1e-3


class SwoSolveResponse(BaseModel):
    plan: Plan


class RtoSolveRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    system: SystemSpec
    time_grid: TimeGrid
    plan: Plan
    tau_index: int = Field(ge=0)
    re_forecast_kw: tuple[float, ...] = Field(
        description="renewable forecast per dispatch step, kW"
    )
    history: Optional[FixedHistory] = None
    gap: float = 1e-3
    slack_penalty: Optional[float] = None


class RtoSolveResponse(BaseModel):
    sos: SoS


class RunRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: ExperimentConfig
    quiet: bool = True


class RunResponse(BaseModel):
    log: ExperimentLog
    metrics: Optional[MetricsReport] = None


class SimulateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    system: SystemSpec
    sos: SoS
    actual_re_kw: tuple[float, ...] = Field(
        description="realized renewable availability per dispatch step, kW"
    )
    delta_t: float = Field(gt=0, default=0.025)


class SimulateResponse(BaseModel):
    measurements: tuple[Measurement, ...]


class ReportRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    log: ExperimentLog


class ReportResponse(BaseModel):
    metrics: MetricsReport


class ErrorBody(BaseModel):
    code: str
    message: str


class ErrorResponse(BaseModel):
    error: ErrorBody
