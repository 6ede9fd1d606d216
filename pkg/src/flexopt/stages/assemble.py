"""Shared construction of the whole-system stage model."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from ..milp.encodings import (
    InitialCondition,
    PinnedStep,
    encode_balance,
    encode_demand,
    encode_resource,
)
from ..milp.model import ModelHandle, VarMap
from ..model_core.types import SystemSpec, TrajectoryStep
from .types import FixedHistory


@dataclass(frozen=True)
class SystemModel:
    model: ModelHandle
    varmap: VarMap
    n_steps: int
    resource_indices: tuple[int, ...]
    first_free: int  # first time index that is not pinned (boundary + history)


def build_system_model(
    system: SystemSpec,
    n_steps: int,
    delta: float,
    initials: Sequence[InitialCondition],
    re_series: Sequence[float],
    boundary: TrajectoryStep,
    history: Optional[FixedHistory],
    *,
    include_demand: bool = False,
) -> SystemModel:
    """Encode the full fleet over ``n_steps`` indices (index 0 = boundary).

    ``re_series`` bounds renewable use per index (entry 0 is pinned, not
    bounded). ``history`` pins executed steps; executed step j maps to time
    index j + 1.
    """
    model = ModelHandle()
    varmap = VarMap()
    rids = tuple(range(len(system.resources)))

    history_steps = history.steps if history is not None else {}
    balance_pins: dict[int, tuple[float, float]] = {
        0: (boundary.p_grid, boundary.p_re_used)
    }
    for label, step in history_steps.items():
        balance_pins[label + 1] = (step.p_grid, step.p_re_used)

    for r, res in enumerate(system.resources):
        fixed = {
            label + 1: PinnedStep(
                state=step.resources[r].state,
                p_input=step.resources[r].p_input,
                p_output=step.resources[r].p_output,
            )
            for label, step in history_steps.items()
        }
        encode_resource(
            model, res, n_steps, delta, initials[r],
            resource_index=r, varmap=varmap, fixed=fixed,
        )

    encode_balance(
        model, varmap, rids, n_steps,
        system.grid_p_max, list(re_series), system.allow_curtailment,
        fixed=balance_pins,
    )

    if include_demand and system.demand is not None:
        encode_demand(
            model, varmap, rids, n_steps, system.demand, delta, system.demand_applies_to
        )

    first_free = 1 + len(history_steps)
    return SystemModel(
        model=model, varmap=varmap, n_steps=n_steps,
        resource_indices=rids, first_free=first_free,
    )
