"""Assembly and solving of the two optimization stages."""

from .assemble import SystemModel, build_system_model
from .extract import ExtractionError, extract_steps
from .rto import build_and_solve_rto
from .swo import build_and_solve_swo, cold_start_boundary
from .types import (
    FixedHistory,
    Plan,
    PriceSeries,
    SoS,
    StageError,
    StageInfeasibleError,
    schedule_to_csv,
)

__all__ = [
    "ExtractionError",
    "FixedHistory",
    "Plan",
    "PriceSeries",
    "SoS",
    "StageError",
    "StageInfeasibleError",
    "SystemModel",
    "build_and_solve_rto",
    "build_and_solve_swo",
    "build_system_model",
    "cold_start_boundary",
    "extract_steps",
    "schedule_to_csv",
]
