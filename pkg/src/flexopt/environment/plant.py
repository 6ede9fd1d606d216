"""Simulated electrolyzer plant.

The plant owns the realized renewable trace and the true resource states.
It executes one setpoint per dispatch step: a commanded state change is
adopted only when the transition is legal under the follower sets and the
resource's own dwell counter; otherwise the resource holds its state and
the rejection is flagged in the measurement. Inputs are clipped into the
realized state's range, and output follows the conversion map exactly
(optionally perturbed by seeded bounded actuator noise).
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..model_core.piecewise import eval_piecewise
from ..model_core.types import SystemSpec
from .forecast import DOMAIN_PLANT_NOISE
from .series import ActualSeries


class ResourceMeasurement(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    state: int
    p_input: float
    p_output: float
    rejected: bool = False
    clipped: bool = False


class Measurement(BaseModel):
    """Realized values captured after writing one set of control variables."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    step: int = Field(ge=0)
    resources: tuple[ResourceMeasurement, ...]
    re_available: float


class Setpoint(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    resource: int
    state: int
    p_input_kw: float


class PlantError(RuntimeError):
    """Transport-level plant failure (not a physical rejection)."""


class SimulatedPlant:
    """Stateful plant; processes one request at a time."""

    def __init__(
        self,
        system: SystemSpec,
        actual_re: ActualSeries,
        *,
        input_noise_kw: float = 0.0,
        noise_seed: int = 0,
    ) -> None:
        self._system = system
        self._trace = actual_re
        self._noise = input_noise_kw
        self._seed = noise_seed
        # Dwell counters start saturated: the initial state has been held
        # long enough that an immediate legal transition is permitted.
        self._states = [res.initial_state for res in system.resources]
        self._dwell = [res.state(res.initial_state).hold_min for res in system.resources]
        self._inputs = [res.initial_input for res in system.resources]

    @property
    def states(self) -> list[int]:
        return list(self._states)

    def re_available(self, step: int) -> float:
        return self._trace.values[step]

    def apply(self, step: int, setpoints: Sequence[Setpoint]) -> Measurement:
        """Execute one dispatch step and capture the realized values."""
        by_resource: dict[int, Setpoint] = {}
        for sp in setpoints:
            if not 0 <= sp.resource < len(self._system.resources):
                raise PlantError(f"no resource {sp.resource}")
            by_resource[sp.resource] = sp

        measurements = []
        for r, res in enumerate(self._system.resources):
            sp = by_resource.get(r)
            commanded_state = sp.state if sp is not None else self._states[r]
            commanded_input = sp.p_input_kw if sp is not None else self._inputs[r]

            current = self._states[r]
            rejected = False
            if commanded_state != current:
                legal = (
                    commanded_state in res.state(current).followers
                    and self._dwell[r] >= res.state(current).hold_min
                )
                if legal:
                    self._states[r] = commanded_state
                    self._dwell[r] = 1
                else:
                    rejected = True
                    self._dwell[r] += 1
            else:
                self._dwell[r] += 1

            realized_state = self._states[r]
            sspec = res.state(realized_state)
            p_in = commanded_input
            if self._noise > 0:
                rng = np.random.default_rng([self._seed, DOMAIN_PLANT_NOISE, step, r])
                p_in += float(rng.uniform(-self._noise, self._noise))
            clipped_in = min(max(p_in, sspec.p_in_min), sspec.p_in_max)
            clipped = abs(clipped_in - commanded_input) > 0.0
            self._inputs[r] = clipped_in

            if realized_state == res.operation_state_id:
                p_out = eval_piecewise(
                    min(max(clipped_in, res.segment_table.lo), res.segment_table.hi),
                    res.segment_table,
                )
            else:
                p_out = 0.0
            measurements.append(ResourceMeasurement(
                state=realized_state, p_input=clipped_in, p_output=p_out,
                rejected=rejected, clipped=clipped,
            ))

        return Measurement(
            step=step,
            resources=tuple(measurements),
            re_available=self.re_available(step),
        )


def plant_apply(
    plant: SimulatedPlant, step: int, setpoints: Sequence[Setpoint]
) -> Measurement:
    """Function-style binding over the stateful plant."""
    return plant.apply(step, setpoints)


def split_supply(
    measurement: Measurement, scheduled_re_used: Optional[float] = None
) -> tuple[float, float]:
    """Attribute realized total input between grid draw and renewable feed.

    The schedule's renewable usage acts as the curtailment order: the plant
    feeds in scheduled renewable power up to what is actually available,
    and the grid covers the rest. Without a schedule, availability alone
    caps the renewable share.
    """
    total_in = sum(m.p_input for m in measurement.resources)
    re_used = min(measurement.re_available, total_in)
    if scheduled_re_used is not None:
        re_used = min(re_used, max(scheduled_re_used, 0.0))
    return total_in - re_used, re_used
