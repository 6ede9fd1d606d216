"""Figure-data CSV emission for completed experiments.

One CSV per analysis: fleet input power (planned vs realized), conversion
efficiency, renewable forecast vs realized availability, and per-step
output deviation. Plotting itself is out of scope; the CSVs use '.' as the
decimal separator, UTF-8, and a header row.
"""

from __future__ import annotations

import csv
from pathlib import Path

from ..model_core.trajectory import UndefinedEfficiencyError, efficiency
from ..model_core.types import Trajectory, TrajectoryStep
from ..orchestrator.logbook import ExperimentLog
from .metrics import MetricsReport


def _sum_input(step: TrajectoryStep) -> float:
    return sum(r.p_input for r in step.resources)


def _step_efficiency(step: TrajectoryStep) -> float | None:
    try:
        return efficiency(Trajectory(steps=(step, step)))
    except UndefinedEfficiencyError:
        return None


def write_figure_csvs(log: ExperimentLog, metrics: MetricsReport, out_dir: str | Path) -> list[Path]:
    """Write the four figure-data CSVs into ``out_dir`` and return their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    plan0 = log.initial_plan
    written = []

    path = out / "sum_input.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tau", "planned_sum_input_kw", "realized_sum_input_kw"])
        for rec in log.tau_records:
            w.writerow([rec.tau,
                        repr(_sum_input(plan0.steps[rec.tau])),
                        repr(_sum_input(rec.realized))])
    written.append(path)

    path = out / "efficiency.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tau", "planned_efficiency", "realized_efficiency"])
        for rec in log.tau_records:
            planned = _step_efficiency(plan0.steps[rec.tau])
            realized = _step_efficiency(rec.realized)
            w.writerow([rec.tau,
                        "" if planned is None else repr(planned),
                        "" if realized is None else repr(realized)])
    written.append(path)

    path = out / "re_forecast_vs_realized.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tau", "forecast_kw", "realized_available_kw", "realized_used_kw"])
        for rec in log.tau_records:
            forecast = (
                log.re_forecast_initial[rec.tau]
                if rec.tau < len(log.re_forecast_initial) else ""
            )
            available = (
                log.re_actual_per_tau[rec.tau]
                if rec.tau < len(log.re_actual_per_tau) else ""
            )
            w.writerow([rec.tau,
                        forecast if forecast == "" else repr(forecast),
                        available if available == "" else repr(available),
                        repr(rec.realized.p_re_used)])
    written.append(path)

    path = out / "deviation.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tau", "planned_kwh", "realized_kwh", "deviation_pct"])
        for m in metrics.per_tau:
            w.writerow([m.tau, repr(m.planned_kwh), repr(m.realized_kwh),
                        "" if m.deviation_pct is None else repr(m.deviation_pct)])
    written.append(path)

    return written
