"""Structured record of a full experiment.

Serialization is byte-stable for a given configuration and seed: nothing
time- or host-dependent is stored (solver wall times go to stdout and the
timing sidecar, never in here).
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..environment.plant import Measurement
from ..model_core.types import Trajectory, TrajectoryStep
from ..stages.types import Plan, PriceSeries, SoS
from .config import ExperimentConfig


class SolveRecord(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    stage: Literal["swo", "rto"]
    tau: int
    k: Optional[int] = None
    status: str
    objective: Optional[float] = None
    gap: Optional[float] = None
    used_slack: bool = False


def _ok(record: SolveRecord) -> bool:
    return record.status in ("optimal", "feasible-within-gap")


class TauRecord(BaseModel):
    """Everything produced while executing one planning step."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    tau: int
    plan: Plan
    setpoint_schedules: tuple[SoS, ...]
    measurements: tuple[Measurement, ...]
    realized: TrajectoryStep
    planned_output_kwh: float
    realized_output_kwh: float
    deviation_pct: Optional[float] = None
    slack_kwh: float = 0.0


class ExperimentLog(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    config: ExperimentConfig
    prices: PriceSeries
    status: Literal["completed", "failed"]
    failure: Optional[str] = None
    tau_records: tuple[TauRecord, ...] = ()
    realized_swo: Trajectory
    realized_rto: Trajectory
    solves: tuple[SolveRecord, ...] = ()
    re_forecast_initial: tuple[float, ...] = Field(
        default=(), description="long-term renewable forecast at first issue, kW per planning step"
    )
    re_actual_per_tau: tuple[float, ...] = Field(
        default=(), description="realized renewable availability, kW per planning step"
    )

    @property
    def n_swo_solves(self) -> int:
        """Accepted planning solutions (one per executed planning step)."""
        return sum(1 for s in self.solves if s.stage == "swo" and _ok(s))

    @property
    def n_rto_solves(self) -> int:
        """Accepted dispatch solutions (one per executed dispatch step,
        whether or not the accepted solve needed budget slack)."""
        return sum(1 for s in self.solves if s.stage == "rto" and _ok(s))

    @property
    def initial_plan(self) -> Plan:
        return self.tau_records[0].plan

    def to_json(self) -> str:
        return self.model_dump_json(indent=2) + "\n"
