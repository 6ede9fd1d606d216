"""Reference checks on realized or planned trajectories.

`check_trajectory` re-verifies every operating rule directly on the time
series, without any optimization machinery, so it can serve as an
independent oracle for solver output and as the rulebook for the plant
simulator.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict

from .piecewise import eval_piecewise
from .types import ResourceSpec, SystemSpec, TimeGrid, Trajectory

DEFAULT_TOL = 1e-6


class Violation(BaseModel):
    model_config = ConfigDict(frozen=True)

    code: str
    resource: Optional[int] = None
    step: Optional[int] = None
    message: str


class UndefinedEfficiencyError(ValueError):
    """Efficiency is undefined because total input energy is zero."""


def _runs(states: list[int], start: int) -> list[tuple[int, int, int]]:
    """Maximal constant-state runs of ``states[start:]`` as (state, first, last)."""
    runs = []
    first = start
    for t in range(start + 1, len(states)):
        if states[t] != states[first]:
            runs.append((states[first], first, t - 1))
            first = t
    runs.append((states[first], first, len(states) - 1))
    return runs


def _check_resource(
    traj: Trajectory,
    res: ResourceSpec,
    r: int,
    delta: float,
    start: int,
    tol: float,
) -> list[Violation]:
    out: list[Violation] = []
    n = len(traj)
    states = [step.resources[r].state for step in traj.steps]
    inputs = [step.resources[r].p_input for step in traj.steps]
    outputs = [step.resources[r].p_output for step in traj.steps]
    known = set(res.state_ids)

    for t in range(n):
        if states[t] not in known:
            out.append(Violation(
                code="unknown_state", resource=r, step=t,
                message=f"state {states[t]} is not declared",
            ))
    if any(v.code == "unknown_state" for v in out):
        return out

    for t in range(max(start + 1, 1), n):
        s = res.state(states[t])
        if inputs[t] < s.p_in_min - tol or inputs[t] > s.p_in_max + tol:
            out.append(Violation(
                code="input_bounds", resource=r, step=t,
                message=f"input {inputs[t]} kW outside [{s.p_in_min}, {s.p_in_max}] "
                        f"of state {s.name}",
            ))
        if inputs[t] < res.p_min - tol or inputs[t] > res.p_max + tol:
            out.append(Violation(
                code="resource_bounds", resource=r, step=t,
                message=f"input {inputs[t]} kW outside resource range "
                        f"[{res.p_min}, {res.p_max}]",
            ))
        prev = res.state(states[t - 1])
        if states[t] != states[t - 1] and states[t] not in prev.followers:
            out.append(Violation(
                code="illegal_transition", resource=r, step=t,
                message=f"{prev.name} may not hand over to {s.name}",
            ))
        diff = abs(inputs[t] - inputs[t - 1])
        if diff > delta * s.ramp_max + tol:
            out.append(Violation(
                code="ramp_max_exceeded", resource=r, step=t,
                message=f"|dP| = {diff} kW exceeds {delta * s.ramp_max} kW "
                        f"allowed in state {s.name}",
            ))
        if s.ramp_min > 0 and diff < delta * s.ramp_min - tol:
            out.append(Violation(
                code="ramp_min_violated", resource=r, step=t,
                message=f"|dP| = {diff} kW below required {delta * s.ramp_min} kW",
            ))

    for state_id, first, last in _runs(states, start):
        s = res.state(state_id)
        length = last - first + 1
        # Entries at the boundary index carry no observable entry point, and
        # runs cut off by the horizon end are allowed to be short.
        if first > start and last < n - 1 and length < s.hold_min:
            out.append(Violation(
                code="min_holding", resource=r, step=first,
                message=f"state {s.name} held {length} step(s), minimum is {s.hold_min}",
            ))
        if s.hold_max is not None and length > s.hold_max:
            out.append(Violation(
                code="max_holding", resource=r, step=first,
                message=f"state {s.name} held {length} step(s), maximum is {s.hold_max}",
            ))

    op = res.operation_state_id
    for t in range(max(start + 1, 1), n):
        s = res.state(states[t])
        if states[t] == op:
            expected = eval_piecewise(min(max(inputs[t], res.segment_table.lo),
                                          res.segment_table.hi),
                                      res.segment_table)
            if abs(outputs[t] - expected) > tol:
                out.append(Violation(
                    code="output_mismatch", resource=r, step=t,
                    message=f"output {outputs[t]} kW but conversion map gives {expected} kW",
                ))
        elif abs(outputs[t]) > tol:
            out.append(Violation(
                code="output_nonzero", resource=r, step=t,
                message=f"output {outputs[t]} kW in non-producing state {s.name}",
            ))
        if outputs[t] > s.p_out_max + tol:
            out.append(Violation(
                code="output_cap", resource=r, step=t,
                message=f"output {outputs[t]} kW exceeds cap {s.p_out_max} kW of {s.name}",
            ))
    return out


def check_trajectory(
    traj: Trajectory,
    spec: SystemSpec,
    grid: TimeGrid,
    level: Literal["swo", "rto"],
    *,
    start: int = 0,
    tol: float = DEFAULT_TOL,
) -> list[Violation]:
    """All rule violations in ``traj``; an empty list means fully compliant.

    ``start`` marks the boundary-condition index: state sequencing, holding
    and ramp rules are checked from ``start + 1`` onward so that a verified
    prefix (realized history) can be skipped while the hand-over at the
    boundary is still covered.
    """
    if len(traj) < 2:
        raise ValueError("trajectory must contain at least the boundary step and one more")

    out: list[Violation] = []
    delta = grid.delta_tau if level == "swo" else grid.delta_t
    expected_lens = (
        {grid.n_swo + 1} if level == "swo" else {grid.n_rto + 1, grid.n_slots + 1}
    )
    if len(traj) not in expected_lens:
        out.append(Violation(
            code="horizon_length",
            message=f"trajectory has {len(traj)} steps, expected one of {sorted(expected_lens)}",
        ))

    for t, step in enumerate(traj.steps):
        if len(step.resources) != len(spec.resources):
            out.append(Violation(
                code="resource_count", step=t,
                message=f"{len(step.resources)} resource entries for "
                        f"{len(spec.resources)} resources",
            ))
            return out
        if step.p_grid < -tol or step.p_re_used < -tol:
            out.append(Violation(
                code="negative_power", step=t,
                message=f"grid {step.p_grid} kW / renewable {step.p_re_used} kW",
            ))
        for r, rs in enumerate(step.resources):
            if rs.p_input < -tol or rs.p_output < -tol:
                out.append(Violation(
                    code="negative_power", resource=r, step=t,
                    message=f"input {rs.p_input} kW / output {rs.p_output} kW",
                ))

    for r, res in enumerate(spec.resources):
        out.extend(_check_resource(traj, res, r, delta, start, tol))
    return out


def efficiency(traj: Trajectory) -> float:
    """Total output energy over total input energy of the trajectory."""
    total_in = sum(rs.p_input for step in traj.steps for rs in step.resources)
    total_out = sum(rs.p_output for step in traj.steps for rs in step.resources)
    if total_in <= 0:
        raise UndefinedEfficiencyError("no input energy consumed")
    return total_out / total_in
