"""The cyclic solve-plan-execute loop.

One experiment runs the planning stage once per planning step (full
horizon, realized past pinned), then walks that step's dispatch horizon:
re-solving the dispatch stage before every dispatch step, writing the
current setpoints to the plant, capturing measurements, and feeding the
realized values back as fixed history. Realized dispatch results are
aggregated (energy-preserving mean, end-of-interval state) into the
planning-resolution history for the next planning solve.
"""

from __future__ import annotations

import logging
import time
from pathlib import Path
from typing import Optional, Protocol, Sequence

from ..environment.forecast import DOMAIN_LONG_TERM, DOMAIN_SHORT_TERM, make_forecast
from ..environment.plant import Measurement, PlantError, Setpoint, SimulatedPlant, split_supply
from ..environment.series import ActualSeries
from ..model_core.types import ResourceStep, SystemSpec, TimeGrid, Trajectory, TrajectoryStep
from ..model_core.validation import validate_system
from ..reporting.metrics import deviation_pct
from ..stages.rto import build_and_solve_rto
from ..stages.swo import build_and_solve_swo, cold_start_boundary
from ..stages.types import FixedHistory, Plan, SoS, StageInfeasibleError
from .config import ConfigError, ExperimentConfig
from .logbook import ExperimentLog, SolveRecord, TauRecord

logger = logging.getLogger(__name__)


class PlantLike(Protocol):
    def apply(self, step: int, setpoints: Sequence[Setpoint]) -> Measurement: ...


def long_term_re_forecast(
    actual: ActualSeries, grid: TimeGrid, issue_tau: int,
    sigma0: float, sigma1: float, seed: int,
) -> list[float]:
    """Renewable forecast per planning step, noisier the further out.

    Noise is injected per dispatch step and mean-aggregated to planning
    steps; the sigma schedule advances per planning step of lead. Past
    planning steps reproduce the realized values.
    """
    issue_slot = issue_tau * grid.n_rto
    fc = make_forecast(
        actual, issue_slot, grid.n_slots - issue_slot, sigma0, sigma1, seed,
        domain=DOMAIN_LONG_TERM, lead_unit=grid.n_rto,
    )
    out = []
    for tau in range(grid.n_swo):
        base = tau * grid.n_rto
        if tau < issue_tau:
            out.append(actual.mean(base, grid.n_rto))
        else:
            chunk = fc.values[base - issue_slot: base - issue_slot + grid.n_rto]
            out.append(sum(chunk) / len(chunk))
    return out


def short_term_re_forecast(
    actual: ActualSeries, grid: TimeGrid, tau: int, k: int,
    sigma0: float, sigma1: float, seed: int,
) -> list[float]:
    """Renewable forecast per dispatch step of one planning step."""
    issue_slot = grid.slot_of(tau, k)
    fc = make_forecast(
        actual, issue_slot, grid.n_rto - k, sigma0, sigma1, seed,
        domain=DOMAIN_SHORT_TERM, lead_unit=1,
    )
    out = []
    for m in range(grid.n_rto):
        g = grid.slot_of(tau, m)
        if m < k:
            out.append(actual.values[g])
        else:
            out.append(fc.values[g - issue_slot])
    return out


def feedback_to_swo(slots: Sequence[TrajectoryStep]) -> TrajectoryStep:
    """Aggregate realized dispatch steps to one planning-resolution step.

    Powers take the energy-preserving mean; states take the end-of-interval
    value, so holding runs carry into the next planning solve through the
    fixed history.
    """
    n = len(slots)
    n_res = len(slots[0].resources)
    resources = []
    for r in range(n_res):
        resources.append(ResourceStep(
            state=slots[-1].resources[r].state,
            p_input=sum(s.resources[r].p_input for s in slots) / n,
            p_output=sum(s.resources[r].p_output for s in slots) / n,
        ))
    return TrajectoryStep(
        resources=tuple(resources),
        p_grid=sum(s.p_grid for s in slots) / n,
        p_re_used=sum(s.p_re_used for s in slots) / n,
    )


def anchor_dwells_for(
    system: SystemSpec,
    boundary: TrajectoryStep,
    realized_taus: Sequence[TrajectoryStep],
    plan_step: TrajectoryStep,
    n_rto: int,
) -> list[Optional[int]]:
    """Dispatch-step dwell each resource brings into a dispatch horizon.

    Counts how long the planned state has already been held at planning
    resolution; a run reaching back to the horizon boundary is unobserved
    and imposes no carry-over.
    """
    dwells: list[Optional[int]] = []
    for r in range(len(system.resources)):
        target = plan_step.resources[r].state
        past = [boundary.resources[r].state] + [s.resources[r].state for s in realized_taus]
        matched = 0
        for state in reversed(past):
            if state == target:
                matched += 1
            else:
                break
        if matched == len(past):
            dwells.append(None)
        else:
            dwells.append(matched * n_rto)
    return dwells


def relax_rto_on_infeasibility(
    system: SystemSpec,
    grid: TimeGrid,
    plan: Plan,
    tau_index: int,
    re_forecast_short: Sequence[float],
    history: FixedHistory,
    gap: float,
    penalty: float,
    *,
    anchor_dwells: Optional[Sequence[Optional[int]]] = None,
) -> SoS:
    """Re-solve a failed dispatch stage with the energy coupling slackened.

    The slack is extra grid energy beyond the plan's budget, charged
    against the output objective at ``penalty`` per kWh; still-infeasible
    models (state-machine dead ends) propagate.
    """
    if penalty == 0:
        logger.warning(
            "relaxation penalty is 0; slack energy is free, which makes the "
            "budget coupling meaningless"
        )
    return build_and_solve_rto(
        system, grid, plan, tau_index, re_forecast_short, history, gap,
        anchor_dwells=anchor_dwells, slack_penalty=penalty,
    )


def _setpoints_from(step: TrajectoryStep) -> list[Setpoint]:
    return [
        Setpoint(resource=r, state=rs.state, p_input_kw=rs.p_input)
        for r, rs in enumerate(step.resources)
    ]


def _apply_with_retry(plant: PlantLike, step: int, setpoints: list[Setpoint]) -> Measurement:
    try:
        return plant.apply(step, setpoints)
    except PlantError:
        logger.warning("plant transport failed at step %d, retrying once", step)
        return plant.apply(step, setpoints)


def run_experiment(
    cfg: ExperimentConfig,
    *,
    plant: Optional[PlantLike] = None,
    base_dir: Optional[Path] = None,
    quiet: bool = False,
) -> ExperimentLog:
    """Execute the full two-stage rolling loop and return the complete log.

    Stage infeasibility that survives the relaxation, or a plant transport
    failure after one retry, aborts the run with a partial log flagged
    failed. Identical configuration and seed reproduce the log byte for
    byte (solve wall times go to stdout only).
    """
    system = cfg.build_system(base_dir)
    issues = validate_system(system)
    if issues:
        raise ConfigError(f"system spec invalid: {issues[0].message}")
    grid = cfg.time_grid
    prices = cfg.build_prices(base_dir)
    actual = cfg.build_trace(base_dir)
    if plant is None:
        plant = SimulatedPlant(
            system, actual,
            input_noise_kw=cfg.plant.input_noise_kw, noise_seed=cfg.seed,
        )
    sigma0, sigma1 = cfg.forecast.sigma0, cfg.forecast.sigma1
    gap = cfg.solver.gap

    def emit(line: str) -> None:
        if not quiet:
            print(line)

    boundary = cold_start_boundary(system)
    swo_history = FixedHistory()
    realized_swo: list[TrajectoryStep] = [boundary]
    realized_rto: list[TrajectoryStep] = [boundary]
    tau_records: list[TauRecord] = []
    solves: list[SolveRecord] = []
    plan0: Optional[Plan] = None
    re_forecast_initial: tuple[float, ...] = ()
    failure: Optional[str] = None

    def build_log(status: str) -> ExperimentLog:
        return ExperimentLog(
            config=cfg.without_output(),
            prices=prices,
            status=status,  # type: ignore[arg-type]
            failure=failure,
            tau_records=tuple(tau_records),
            realized_swo=Trajectory(steps=tuple(realized_swo)),
            realized_rto=Trajectory(steps=tuple(realized_rto)),
            solves=tuple(solves),
            re_forecast_initial=re_forecast_initial,
            re_actual_per_tau=tuple(
                actual.mean(tau * grid.n_rto, grid.n_rto) for tau in range(grid.n_swo)
            ),
        )

    for j in range(grid.n_swo):
        lt_forecast = long_term_re_forecast(actual, grid, j, sigma0, sigma1, cfg.seed)
        if j == 0:
            re_forecast_initial = tuple(lt_forecast)
        started = time.perf_counter()
        try:
            plan = build_and_solve_swo(system, grid, prices, lt_forecast, swo_history, gap)
        except StageInfeasibleError as exc:
            solves.append(SolveRecord(stage="swo", tau=j, status=exc.status or "infeasible"))
            failure = f"planning stage failed at step {j}: {exc}"
            return build_log("failed")
        emit(
            f"SWO tau={j} status={plan.solver_status} obj={plan.objective_eur:.4f} "
            f"time={time.perf_counter() - started:.2f}s"
        )
        solves.append(SolveRecord(
            stage="swo", tau=j, status=plan.solver_status,
            objective=plan.objective_eur, gap=plan.achieved_gap,
        ))
        if j == 0:
            plan0 = plan

        dwells = anchor_dwells_for(
            system, boundary, realized_swo[1:], plan.steps[j], grid.n_rto
        )
        rto_history = FixedHistory()
        sos_list: list[SoS] = []
        measurements: list[Measurement] = []
        tau_slots: list[TrajectoryStep] = []
        slack_tau = 0.0

        for k in range(grid.n_rto):
            st_forecast = short_term_re_forecast(actual, grid, j, k, sigma0, sigma1, cfg.seed)
            used_slack = False
            started = time.perf_counter()
            try:
                sos = build_and_solve_rto(
                    system, grid, plan, j, st_forecast, rto_history, gap,
                    anchor_dwells=dwells,
                )
            except StageInfeasibleError:
                try:
                    sos = relax_rto_on_infeasibility(
                        system, grid, plan, j, st_forecast, rto_history, gap,
                        cfg.relaxation_penalty, anchor_dwells=dwells,
                    )
                    used_slack = True
                except StageInfeasibleError as exc:
                    solves.append(SolveRecord(
                        stage="rto", tau=j, k=k, status=exc.status or "infeasible",
                        used_slack=True,
                    ))
                    failure = f"dispatch stage failed at step {j}.{k} even with slack: {exc}"
                    return build_log("failed")
            emit(
                f"RTO tau={j} k={k} status={sos.solver_status} "
                f"obj={sos.objective_kwh:.4f} time={time.perf_counter() - started:.2f}s"
            )
            solves.append(SolveRecord(
                stage="rto", tau=j, k=k, status=sos.solver_status,
                objective=sos.objective_kwh, gap=sos.achieved_gap, used_slack=used_slack,
            ))
            slack_tau += sos.slack_kwh

            global_slot = grid.slot_of(j, k)
            command = sos.steps[k]
            try:
                measurement = _apply_with_retry(plant, global_slot, _setpoints_from(command))
            except PlantError as exc:
                failure = f"plant transport failed twice at step {j}.{k}: {exc}"
                return build_log("failed")
            grid_kw, re_kw = split_supply(measurement, command.p_re_used)
            realized_step = TrajectoryStep(
                resources=tuple(
                    ResourceStep(state=m.state, p_input=m.p_input, p_output=m.p_output)
                    for m in measurement.resources
                ),
                p_grid=grid_kw,
                p_re_used=re_kw,
            )
            sos_list.append(sos)
            measurements.append(measurement)
            tau_slots.append(realized_step)
            realized_rto.append(realized_step)
            rto_history = FixedHistory(steps={**rto_history.steps, k: realized_step})

        realized_tau = feedback_to_swo(tau_slots)
        realized_swo.append(realized_tau)
        swo_history = FixedHistory(steps={**swo_history.steps, j: realized_tau})

        assert plan0 is not None
        planned_kwh = (
            sum(r.p_output for r in plan0.steps[j].resources) * grid.delta_tau
        )
        realized_kwh = (
            sum(r.p_output for s in tau_slots for r in s.resources) * grid.delta_t
        )
        tau_records.append(TauRecord(
            tau=j,
            plan=plan,
            setpoint_schedules=tuple(sos_list),
            measurements=tuple(measurements),
            realized=realized_tau,
            planned_output_kwh=planned_kwh,
            realized_output_kwh=realized_kwh,
            deviation_pct=deviation_pct(planned_kwh, realized_kwh),
            slack_kwh=slack_tau,
        ))

    return build_log("completed")
