"""Turning solver output back into typed schedules."""

from __future__ import annotations

from typing import Mapping, Optional

from ..milp.model import VarMap
from ..milp.solver import INTEGRALITY_TOL, Solution
from ..model_core.piecewise import eval_piecewise
from ..model_core.types import ResourceStep, SystemSpec, TrajectoryStep

# Solver values this close to a bound or breakpoint are snapped onto it, so
# downstream exact comparisons see the intended operating point rather than
# basis noise.
SNAP_TOL = 1e-7


class ExtractionError(RuntimeError):
    """Solver values cannot be read back as a valid schedule."""


def _snap(value: float, candidates: list[float]) -> float:
    best = min(candidates, key=lambda c: abs(value - c), default=None)
    if best is not None and abs(value - best) <= SNAP_TOL:
        return best
    return value


def extract_steps(
    solution: Solution,
    varmap: VarMap,
    system: SystemSpec,
    n_steps: int,
    boundary: TrajectoryStep,
    pinned: Optional[Mapping[int, TrajectoryStep]] = None,
) -> tuple[TrajectoryStep, tuple[TrajectoryStep, ...]]:
    """Read a full schedule out of ``solution``.

    Index 0 returns ``boundary`` and pinned indices return their history
    entries verbatim; free indices are decoded from the solution, with
    binaries rounded (rejecting anything further than the integrality
    tolerance from 0/1) and outputs recomputed through the conversion map
    so they are exactly consistent with the extracted inputs.
    """
    if not solution.ok:
        raise ExtractionError(f"cannot extract from a {solution.status.value} solution")
    pins = dict(pinned or {})

    steps: list[TrajectoryStep] = []
    for t in range(1, n_steps):
        if t in pins:
            steps.append(pins[t])
            continue
        resources: list[ResourceStep] = []
        for r, res in enumerate(system.resources):
            active: list[int] = []
            for s in res.state_ids:
                raw = solution.value(varmap.get(r, t, "state_active", sub=s))
                if abs(raw - round(raw)) > INTEGRALITY_TOL:
                    raise ExtractionError(
                        f"state flag for resource {r}, step {t}, state {s} "
                        f"is fractional: {raw}"
                    )
                if round(raw) == 1:
                    active.append(s)
            if len(active) != 1:
                raise ExtractionError(
                    f"resource {r} has {len(active)} active states at step {t}"
                )
            state = active[0]
            sspec = res.state(state)
            p_in = solution.value(varmap.get(r, t, "p_input"))
            candidates = [sspec.p_in_min, sspec.p_in_max, res.p_min, res.p_max]
            candidates += [seg.lb for seg in res.segment_table.segments]
            candidates += [seg.ub for seg in res.segment_table.segments]
            p_in = _snap(p_in, candidates)
            if state == res.operation_state_id:
                clamped = min(max(p_in, res.segment_table.lo), res.segment_table.hi)
                p_out = eval_piecewise(clamped, res.segment_table)
            else:
                p_out = 0.0
            resources.append(ResourceStep(state=state, p_input=p_in, p_output=p_out))

        p_grid = solution.value(varmap.get(None, t, "p_grid"))
        p_re = solution.value(varmap.get(None, t, "p_re_used"))
        steps.append(TrajectoryStep(
            resources=tuple(resources),
            p_grid=0.0 if -1e-9 < p_grid < 0.0 else p_grid,
            p_re_used=0.0 if -1e-9 < p_re < 0.0 else p_re,
        ))
    return boundary, tuple(steps)
