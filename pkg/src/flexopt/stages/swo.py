"""Planning stage: minimum-cost procurement over the coarse horizon."""

from __future__ import annotations

from typing import Optional, Sequence

from ..milp.encodings import DataError, InitialCondition
from ..milp.solver import DEFAULT_GAP, SolveStatus, solve
from ..model_core.piecewise import eval_piecewise
from ..model_core.trajectory import check_trajectory
from ..model_core.types import ResourceStep, SystemSpec, TimeGrid, Trajectory, TrajectoryStep
from .assemble import build_system_model
from .extract import ExtractionError, extract_steps
from .types import FixedHistory, Plan, PriceSeries, StageError, StageInfeasibleError

EUR_PER_MWH_TO_EUR_PER_KWH = 1e-3


def cold_start_boundary(system: SystemSpec) -> TrajectoryStep:
    """Boundary step implied by each resource's declared initial condition."""
    resources = []
    for res in system.resources:
        if res.initial_state == res.operation_state_id:
            p_out = eval_piecewise(
                min(max(res.initial_input, res.segment_table.lo), res.segment_table.hi),
                res.segment_table,
            )
        else:
            p_out = 0.0
        resources.append(ResourceStep(
            state=res.initial_state, p_input=res.initial_input, p_output=p_out,
        ))
    return TrajectoryStep(
        resources=tuple(resources),
        p_grid=sum(r.p_input for r in resources),
        p_re_used=0.0,
    )


def build_and_solve_swo(
    system: SystemSpec,
    grid: TimeGrid,
    prices: PriceSeries,
    re_forecast: Sequence[float],
    history: Optional[FixedHistory] = None,
    gap: float = DEFAULT_GAP,
    *,
    initial_dwells: Optional[Sequence[Optional[int]]] = None,
) -> Plan:
    """Solve the procurement plan for the full horizon, past steps pinned.

    The objective is the cost of grid energy, sum over planning steps of
    price * grid power * step length, with the EUR/MWh to kWh conversion
    applied. The returned plan covers every planning step including the
    pinned past.
    """
    if len(prices) != grid.n_swo:
        raise DataError(f"{len(prices)} prices for {grid.n_swo} planning steps")
    if len(re_forecast) != grid.n_swo:
        raise DataError(f"{len(re_forecast)} renewable values for {grid.n_swo} planning steps")
    history = history or FixedHistory()
    if len(history) >= grid.n_swo:
        raise DataError("history covers the whole horizon; nothing left to plan")

    n = grid.n_swo + 1
    boundary = cold_start_boundary(system)
    dwells = list(initial_dwells) if initial_dwells is not None else [None] * len(system.resources)
    initials = [
        InitialCondition(state=res.initial_state, p_input=res.initial_input, dwell=dwells[r])
        for r, res in enumerate(system.resources)
    ]
    sm = build_system_model(
        system, n, grid.delta_tau, initials,
        [0.0] + list(re_forecast), boundary, history,
        include_demand=True,
    )
    sm.model.set_objective(
        [
            (prices.values[t - 1] * grid.delta_tau * EUR_PER_MWH_TO_EUR_PER_KWH,
             sm.varmap.get(None, t, "p_grid"))
            for t in range(1, n)
        ],
        "min",
    )

    solution = solve(sm.model, gap)
    if solution.status is SolveStatus.INFEASIBLE:
        raise StageInfeasibleError(
            "planning stage came back infeasible", status=solution.status.value,
        )
    if not solution.ok:
        raise StageError(
            f"planning stage came back {solution.status.value}",
            status=solution.status.value,
        )

    pinned = {label + 1: step for label, step in history.steps.items()}
    boundary, steps = extract_steps(solution, sm.varmap, system, n, boundary, pinned)
    violations = check_trajectory(
        Trajectory(steps=(boundary,) + steps), system, grid, "swo",
        start=sm.first_free - 1,
    )
    if violations:
        raise ExtractionError(
            f"extracted plan violates operating rules: {violations[0].message}"
        )
    return Plan(
        issue_index=len(history),
        objective_eur=solution.objective,
        initial=boundary,
        steps=steps,
        solver_status=solution.status.value,
        achieved_gap=solution.gap,
    )
