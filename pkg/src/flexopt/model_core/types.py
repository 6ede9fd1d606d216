"""Domain types for fleets of flexible energy resources.

Conventions used throughout the package: power in kW, energy in kWh,
durations in hours, holding times in counts of discretization steps,
prices in EUR/MWh. All types are immutable after construction; anything
beyond per-field checks lives in :mod:`flexopt.model_core.validation`.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

# Relative tolerance for the nesting identity n_rto * delta_t == delta_tau.
GRID_NESTING_RTOL = 1e-12


class TimeGrid(BaseModel):
    """The two nested time discretizations of the control hierarchy.

    The planning stage runs at coarse steps of ``delta_tau`` hours over
    ``n_swo`` steps; each planning step is refined into ``n_rto`` dispatch
    steps of ``delta_t`` hours. The dispatch steps of one planning step must
    tile it exactly.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    delta_tau: float = Field(gt=0, description="planning step length, hours")
    delta_t: float = Field(gt=0, description="dispatch step length, hours")
    n_swo: int = Field(gt=0, description="planning steps in the horizon")
    n_rto: int = Field(gt=0, description="dispatch steps per planning step")

    @model_validator(mode="after")
    def _check_nesting(self) -> "TimeGrid":
        lhs = self.n_rto * self.delta_t
        if abs(lhs - self.delta_tau) > GRID_NESTING_RTOL * max(abs(lhs), abs(self.delta_tau)):
            raise ValueError(
                f"n_rto * delta_t = {lhs!r} does not tile delta_tau = {self.delta_tau!r}"
            )
        return self

    @property
    def n_slots(self) -> int:
        """Total dispatch steps across the whole horizon."""
        return self.n_swo * self.n_rto

    def slot_of(self, tau: int, k: int) -> int:
        """Global dispatch-step index of step ``k`` within planning step ``tau``."""
        return tau * self.n_rto + k

    def tau_of_slot(self, slot: int) -> int:
        return slot // self.n_rto


class Segment(BaseModel):
    """One affine piece of the input/output map: out = a * p_in + b on [lb, ub]."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    lb: float
    ub: float
    a: float
    b: float


class SegmentTable(BaseModel):
    """Ordered, contiguous affine segments approximating the conversion curve."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    segments: tuple[Segment, ...]

    @property
    def lo(self) -> float:
        return self.segments[0].lb

    @property
    def hi(self) -> float:
        return self.segments[-1].ub


class StateSpec(BaseModel):
    """An operating state and the constraints it imposes.

    ``followers`` lists the states a resource may transition *into* from this
    state. ``hold_min``/``hold_max`` bound the number of consecutive steps the
    state persists once entered (``hold_max=None`` means unbounded). Ramp
    limits are in kW/h and apply to the step-to-step input power change while
    the state is active.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    id: int = Field(ge=0)
    name: str
    p_in_min: float
    p_in_max: float
    p_out_max: float
    hold_min: int = Field(ge=1)
    hold_max: Optional[int] = None
    followers: frozenset[int]
    ramp_min: float = 0.0
    ramp_max: float


class ResourceSpec(BaseModel):
    """Static description of one flexible resource."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    segment_table: SegmentTable
    states: tuple[StateSpec, ...]
    operation_state_id: int
    initial_state: int
    initial_input: float = 0.0
    p_min: float = 0.0
    p_max: float

    def state(self, state_id: int) -> StateSpec:
        for s in self.states:
            if s.id == state_id:
                return s
        raise KeyError(f"resource {self.name!r} has no state {state_id}")

    @property
    def state_ids(self) -> tuple[int, ...]:
        return tuple(s.id for s in self.states)


class SystemSpec(BaseModel):
    """A fleet of resources behind one grid connection plus a renewable feed."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    resources: tuple[ResourceSpec, ...]
    grid_p_max: float
    allow_curtailment: bool = True
    demand: Optional[float] = Field(default=None, description="energy target, kWh")
    demand_applies_to: Literal["input", "output"] = "output"


class ResourceStep(BaseModel):
    """Realized or planned operating point of one resource at one step."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    state: int
    p_input: float
    p_output: float


class TrajectoryStep(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    resources: tuple[ResourceStep, ...]
    p_grid: float = 0.0
    p_re_used: float = 0.0


class Trajectory(BaseModel):
    """A time series of system operating points at a single resolution.

    Index 0 is the boundary condition the horizon starts from; indices
    1..len-1 are the steps actually inside the horizon.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    steps: tuple[TrajectoryStep, ...]

    def __len__(self) -> int:
        return len(self.steps)
