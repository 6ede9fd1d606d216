"""Metric computation and figure-data emission."""

from .figures import write_figure_csvs
from .metrics import MetricsReport, ReportError, TauMetrics, compute_metrics

__all__ = [
    "MetricsReport",
    "ReportError",
    "TauMetrics",
    "compute_metrics",
    "write_figure_csvs",
]
