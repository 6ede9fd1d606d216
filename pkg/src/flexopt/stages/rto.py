"""Dispatch stage: output maximization under the plan's grid-energy budget."""

from __future__ import annotations

from typing import Optional, Sequence

from ..milp.encodings import DataError, InitialCondition
from ..milp.solver import DEFAULT_GAP, SolveStatus, solve
from ..model_core.trajectory import check_trajectory
from ..model_core.types import SystemSpec, TimeGrid, Trajectory
from .assemble import build_system_model
from .extract import ExtractionError, extract_steps
from .types import FixedHistory, Plan, SoS, StageError, StageInfeasibleError


def build_and_solve_rto(
    system: SystemSpec,
    grid: TimeGrid,
    plan: Plan,
    tau_index: int,
    re_forecast_short: Sequence[float],
    history: Optional[FixedHistory] = None,
    gap: float = DEFAULT_GAP,
    *,
    anchor_dwells: Optional[Sequence[Optional[int]]] = None,
    slack_penalty: Optional[float] = None,
) -> SoS:
    """Solve the setpoint schedule for one planning step.

    The schedule starts from the plan's entry for ``tau_index`` and must
    source exactly the grid energy the plan procured for that step; executed
    dispatch steps in ``history`` are pinned. With ``slack_penalty`` set, the
    energy coupling may be exceeded by a non-negative slack that is charged
    against the output objective.
    """
    if not 0 <= tau_index < len(plan.steps):
        raise DataError(f"plan has no step {tau_index}")
    if len(re_forecast_short) != grid.n_rto:
        raise DataError(
            f"{len(re_forecast_short)} renewable values for {grid.n_rto} dispatch steps"
        )
    history = history or FixedHistory()
    if len(history) >= grid.n_rto:
        raise DataError("history covers the whole dispatch horizon")

    n = grid.n_rto + 1
    boundary = plan.steps[tau_index]
    dwells = list(anchor_dwells) if anchor_dwells is not None else [None] * len(system.resources)
    initials = [
        InitialCondition(
            state=boundary.resources[r].state,
            p_input=boundary.resources[r].p_input,
            dwell=dwells[r],
        )
        for r in range(len(system.resources))
    ]
    sm = build_system_model(
        system, n, grid.delta_t, initials,
        [0.0] + list(re_forecast_short), boundary, history,
        include_demand=False,
    )

    budget_kwh = plan.grid_energy_kwh(tau_index, grid.delta_tau)
    budget_terms = [
        (grid.delta_t, sm.varmap.get(None, t, "p_grid")) for t in range(1, n)
    ]
    slack_var: Optional[int] = None
    if slack_penalty is not None:
        slack_var = sm.model.add_continuous(0.0, float("inf"), "budget_slack_kwh")
        budget_terms.append((-1.0, slack_var))
    sm.model.add_constraint(budget_terms, "=", budget_kwh, "grid_energy_budget")

    objective = [
        (grid.delta_t, sm.varmap.get(r, t, "p_output"))
        for r in sm.resource_indices
        for t in range(1, n)
    ]
    if slack_var is not None:
        objective.append((-float(slack_penalty), slack_var))
    sm.model.set_objective(objective, "max")

    solution = solve(sm.model, gap)
    if solution.status is SolveStatus.INFEASIBLE:
        raise StageInfeasibleError(
            f"dispatch stage came back infeasible; the grid-energy coupling to "
            f"the plan ({budget_kwh} kWh for step {tau_index}) is the usual "
            f"binding constraint when realized renewables fall short",
            status=solution.status.value,
        )
    if not solution.ok:
        raise StageError(
            f"dispatch stage came back {solution.status.value}",
            status=solution.status.value,
        )

    slack_kwh = 0.0
    if slack_var is not None:
        slack_kwh = solution.value(slack_var)
        if slack_kwh < 1e-9:
            slack_kwh = 0.0

    pinned = {label + 1: step for label, step in history.steps.items()}
    boundary_out, steps = extract_steps(solution, sm.varmap, system, n, boundary, pinned)
    violations = check_trajectory(
        Trajectory(steps=(boundary_out,) + steps), system, grid, "rto",
        start=sm.first_free - 1,
    )
    if violations:
        raise ExtractionError(
            f"extracted setpoint schedule violates operating rules: {violations[0].message}"
        )

    objective_kwh = solution.objective
    if slack_var is not None:
        objective_kwh += float(slack_penalty) * slack_kwh
    return SoS(
        tau_index=tau_index,
        issue_k=len(history),
        objective_kwh=objective_kwh,
        initial=boundary_out,
        steps=steps,
        slack_kwh=slack_kwh,
        solver_status=solution.status.value,
        achieved_gap=solution.gap,
    )
