"""Domain types, validation, and reference rule checks."""

from .defaults import (
    OFF,
    OPERATION,
    STAND_BY,
    bundled_system,
    default_resource,
    default_system,
    load_system,
    save_system,
)
from .piecewise import PiecewiseRangeError, eval_piecewise, segment_index_for
from .trajectory import (
    UndefinedEfficiencyError,
    Violation,
    check_trajectory,
    efficiency,
)
from .types import (
    ResourceSpec,
    ResourceStep,
    Segment,
    SegmentTable,
    StateSpec,
    SystemSpec,
    TimeGrid,
    Trajectory,
    TrajectoryStep,
)
from .validation import ValidationIssue, validate_system

__all__ = [
    "OFF",
    "OPERATION",
    "STAND_BY",
    "PiecewiseRangeError",
    "ResourceSpec",
    "ResourceStep",
    "Segment",
    "SegmentTable",
    "StateSpec",
    "SystemSpec",
    "TimeGrid",
    "Trajectory",
    "TrajectoryStep",
    "UndefinedEfficiencyError",
    "ValidationIssue",
    "Violation",
    "bundled_system",
    "check_trajectory",
    "default_resource",
    "default_system",
    "efficiency",
    "eval_piecewise",
    "load_system",
    "save_system",
    "segment_index_for",
    "validate_system",
]
