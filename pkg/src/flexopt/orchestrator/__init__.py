"""Experiment configuration, the rolling loop, and its structured log."""

from .config import (
    ConfigError,
    ExperimentConfig,
    ForecastConfig,
    OutputConfig,
    PlantConfig,
    PricesConfig,
    SolverConfig,
    SystemConfig,
    TraceConfig,
    load_config,
)
from .logbook import ExperimentLog, SolveRecord, TauRecord
from .runner import (
    anchor_dwells_for,
    feedback_to_swo,
    long_term_re_forecast,
    relax_rto_on_infeasibility,
    run_experiment,
    short_term_re_forecast,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentLog",
    "ForecastConfig",
    "OutputConfig",
    "PlantConfig",
    "PricesConfig",
    "SolveRecord",
    "SolverConfig",
    "SystemConfig",
    "TauRecord",
    "TraceConfig",
    "anchor_dwells_for",
    "feedback_to_swo",
    "load_config",
    "long_term_re_forecast",
    "relax_rto_on_infeasibility",
    "run_experiment",
    "short_term_re_forecast",
]
