"""Metric computation over a completed experiment log."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict

from ..model_core.trajectory import UndefinedEfficiencyError, efficiency
from ..orchestrator.logbook import ExperimentLog

COST_CROSS_CHECK_TOL_EUR = 1e-6
DEVIATION_FLOOR_KWH = 1e-12


def deviation_pct(planned_kwh: float, realized_kwh: float) -> Optional[float]:
    """Relative output deviation in percent; None (undefined) for zero plans."""
    if planned_kwh <= DEVIATION_FLOOR_KWH:
        return None
    return 100.0 * (realized_kwh - planned_kwh) / planned_kwh


class ReportError(RuntimeError):
    """The log is incomplete or inconsistent with a report."""


class TauMetrics(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    tau: int
    planned_kwh: float
    realized_kwh: float
    deviation_pct: Optional[float] = None
    deviation_undefined: bool = False
    slack_kwh: float = 0.0


class MetricsReport(BaseModel):
    """Per-step and aggregate outcomes of one experiment.

    Planned values come from the first-issue plan; realized values from the
    executed dispatch results. Efficiencies are flagged undefined (None)
    when no input energy was consumed at the respective resolution.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    per_tau: tuple[TauMetrics, ...]
    mean_deviation_pct: Optional[float] = None
    min_deviation_pct: Optional[float] = None
    max_deviation_pct: Optional[float] = None
    efficiency_planned: Optional[float] = None
    efficiency_realized: Optional[float] = None
    total_grid_cost_eur: float
    solver_cost_eur: float
    cost_cross_check_ok: bool
    total_re_used_kwh: float
    total_planned_kwh: float
    total_realized_kwh: float
    had_slack: bool


def compute_metrics(log: ExperimentLog) -> MetricsReport:
    """Summarize a completed log; raises `ReportError` on partial logs."""
    if log.status != "completed":
        raise ReportError(f"log is {log.status}: {log.failure or 'no detail'}")
    if not log.tau_records:
        raise ReportError("log has no executed planning steps")

    grid = log.config.time_grid
    per_tau = []
    defined: list[float] = []
    for rec in log.tau_records:
        undefined = rec.deviation_pct is None
        if not undefined:
            defined.append(rec.deviation_pct)
        per_tau.append(TauMetrics(
            tau=rec.tau,
            planned_kwh=rec.planned_output_kwh,
            realized_kwh=rec.realized_output_kwh,
            deviation_pct=rec.deviation_pct,
            deviation_undefined=undefined,
            slack_kwh=rec.slack_kwh,
        ))

    try:
        eff_planned = efficiency(log.initial_plan.as_trajectory())
    except UndefinedEfficiencyError:
        eff_planned = None
    try:
        eff_realized = efficiency(log.realized_rto)
    except UndefinedEfficiencyError:
        eff_realized = None

    realized_cost = sum(
        rec.realized.p_grid * grid.delta_tau * log.prices.values[rec.tau] * 1e-3
        for rec in log.tau_records
    )
    solver_cost = log.tau_records[-1].plan.objective_eur
    had_slack = any(rec.slack_kwh > 0 for rec in log.tau_records)
    cross_ok = had_slack or abs(realized_cost - solver_cost) <= COST_CROSS_CHECK_TOL_EUR

    total_re = sum(
        rec.realized.p_re_used * grid.delta_tau for rec in log.tau_records
    )
    return MetricsReport(
        per_tau=tuple(per_tau),
        mean_deviation_pct=sum(defined) / len(defined) if defined else None,
        min_deviation_pct=min(defined) if defined else None,
        max_deviation_pct=max(defined) if defined else None,
        efficiency_planned=eff_planned,
        efficiency_realized=eff_realized,
        total_grid_cost_eur=realized_cost,
        solver_cost_eur=solver_cost,
        cost_cross_check_ok=cross_ok,
        total_re_used_kwh=total_re,
        total_planned_kwh=sum(m.planned_kwh for m in per_tau),
        total_realized_kwh=sum(m.realized_kwh for m in per_tau),
        had_slack=had_slack,
    )
