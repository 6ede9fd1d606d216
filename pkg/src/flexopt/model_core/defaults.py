"""Bundled reference parameter set: a small PEM electrolyzer fleet.

The segment table and state machine below describe a 2.4 kW electrolyzer
with off / stand-by / operation states, derived from measured operating
data. The package ships the same fleet as ``data/default_system.json``.
"""

from __future__ import annotations

import json
from importlib import resources as importlib_resources
from pathlib import Path
from typing import Optional

from .types import ResourceSpec, Segment, SegmentTable, StateSpec, SystemSpec

OFF, STAND_BY, OPERATION = 0, 1, 2

DEFAULT_SEGMENTS = (
    Segment(lb=0.0, ub=0.6, a=0.52, b=-0.06),
    Segment(lb=0.6, ub=1.2, a=0.83, b=-0.14),
    Segment(lb=1.2, ub=1.8, a=0.56, b=0.16),
    Segment(lb=1.8, ub=2.4, a=0.56, b=0.15),
)

DEFAULT_STATES = (
    StateSpec(
        id=OFF, name="off",
        p_in_min=0.0, p_in_max=0.0, p_out_max=0.0,
        hold_min=4, hold_max=None, followers=frozenset({OPERATION}),
        ramp_min=0.0, ramp_max=25000.0,
    ),
    StateSpec(
        id=STAND_BY, name="stand-by",
        p_in_min=0.19, p_in_max=0.19, p_out_max=0.0,
        hold_min=2, hold_max=None, followers=frozenset({OFF, OPERATION}),
        ramp_min=0.0, ramp_max=3456.0,
    ),
    StateSpec(
        id=OPERATION, name="operation",
        p_in_min=0.19, p_in_max=2.4, p_out_max=1.5,
        hold_min=4, hold_max=None, followers=frozenset({OFF, STAND_BY}),
        ramp_min=0.0, ramp_max=3456.0,
    ),
)


def default_resource(name: str = "electrolyzer") -> ResourceSpec:
    return ResourceSpec(
        name=name,
        segment_table=SegmentTable(segments=DEFAULT_SEGMENTS),
        states=DEFAULT_STATES,
        operation_state_id=OPERATION,
        initial_state=OFF,
        initial_input=0.0,
        p_min=0.0,
        p_max=2.4,
    )


def default_system(
    n_resources: int = 3,
    *,
    grid_p_max: float = 10.0,
    demand: Optional[float] = None,
    demand_applies_to: str = "output",
    allow_curtailment: bool = True,
) -> SystemSpec:
    """The bundled fleet: ``n_resources`` identical electrolyzers."""
    return SystemSpec(
        resources=tuple(
            default_resource(f"electrolyzer_{i + 1}") for i in range(n_resources)
        ),
        grid_p_max=grid_p_max,
        allow_curtailment=allow_curtailment,
        demand=demand,
        demand_applies_to=demand_applies_to,  # type: ignore[arg-type]
    )


def load_system(path: str | Path) -> SystemSpec:
    return SystemSpec.model_validate_json(Path(path).read_text())


def save_system(spec: SystemSpec, path: str | Path) -> None:
    Path(path).write_text(spec.model_dump_json(indent=2) + "\n")


def bundled_system_json() -> str:
    """Raw JSON of the shipped default fleet description."""
    return (
        importlib_resources.files("flexopt")
        .joinpath("data/default_system.json")
        .read_text()
    )


def bundled_system() -> SystemSpec:
    return SystemSpec.model_validate(json.loads(bundled_system_json()))
