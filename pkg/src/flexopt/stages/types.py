"""Stage inputs and outputs: price series, plans, setpoint schedules, history."""

from __future__ import annotations

import csv
import io
import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..model_core.types import Trajectory, TrajectoryStep


class PriceSeries(BaseModel):
    """Electricity price per executed planning step, EUR/MWh (may be negative)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    values: tuple[float, ...]

    @field_validator("values")
    @classmethod
    def _finite(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        for i, x in enumerate(v):
            if not math.isfinite(x):
                raise ValueError(f"price at step {i} is not finite: {x}")
        return v

    def __len__(self) -> int:
        return len(self.values)


class Plan(BaseModel):
    """Planning-stage schedule over the whole coarse horizon.

    ``steps[j]`` is planning step j (0-based); steps before ``issue_index``
    reproduce realized history verbatim. ``initial`` is the boundary
    condition the horizon starts from.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    issue_index: int = Field(ge=0)
    objective_eur: float
    initial: TrajectoryStep
    steps: tuple[TrajectoryStep, ...]
    solver_status: str = "optimal"
    achieved_gap: Optional[float] = None

    def grid_energy_kwh(self, tau: int, delta_tau: float) -> float:
        return self.steps[tau].p_grid * delta_tau

    def as_trajectory(self) -> Trajectory:
        return Trajectory(steps=(self.initial,) + self.steps)


class SoS(BaseModel):
    """Dispatch-stage set of setpoints for one planning step.

    ``steps[k]`` is dispatch step k within planning step ``tau_index``;
    ``issue_k`` is the dispatch step at which this schedule was produced.
    ``slack_kwh`` is nonzero only when the grid-energy budget had to be
    relaxed to restore feasibility.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    tau_index: int = Field(ge=0)
    issue_k: int = Field(ge=0)
    objective_kwh: float
    initial: TrajectoryStep
    steps: tuple[TrajectoryStep, ...]
    slack_kwh: float = 0.0
    solver_status: str = "optimal"
    achieved_gap: Optional[float] = None

    def grid_energy_kwh(self, delta_t: float) -> float:
        return sum(s.p_grid for s in self.steps) * delta_t

    def output_energy_kwh(self, delta_t: float) -> float:
        return sum(r.p_output for s in self.steps for r in s.resources) * delta_t

    def as_trajectory(self) -> Trajectory:
        return Trajectory(steps=(self.initial,) + self.steps)


class FixedHistory(BaseModel):
    """Realized steps to pin, keyed by executed step index starting at 0.

    Keys must form a contiguous block ``0..m-1`` strictly preceding the
    first free step.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    steps: dict[int, TrajectoryStep] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _contiguous(self) -> "FixedHistory":
        keys = sorted(self.steps)
        if keys and keys != list(range(len(keys))):
            raise ValueError(f"history indices {keys} are not contiguous from 0")
        return self

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def first_free(self) -> int:
        return len(self.steps)


def schedule_to_csv(steps: tuple[TrajectoryStep, ...], resource_names: list[str]) -> str:
    """Flat CSV, one row per step per resource; supply columns repeat per row."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["step", "resource", "state", "p_input_kw", "p_output_kw", "p_grid_kw", "p_re_used_kw"]
    )
    for t, step in enumerate(steps):
        for r, rs in enumerate(step.resources):
            writer.writerow(
                [t, resource_names[r], rs.state, repr(rs.p_input), repr(rs.p_output),
                 repr(step.p_grid), repr(step.p_re_used)]
            )
    return buf.getvalue()


class StageError(RuntimeError):
    """A stage could not produce a schedule."""

    def __init__(self, message: str, *, status: Optional[str] = None):
        super().__init__(message)
        self.status = status


class StageInfeasibleError(StageError):
    """The stage model is infeasible under the supplied data."""
