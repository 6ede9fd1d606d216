"""Linear model construction and the exact solving backend."""

from .encodings import (
    DataError,
    EncodingError,
    InitialCondition,
    PinnedStep,
    encode_balance,
    encode_demand,
    encode_resource,
)
from .model import BINARY, CONTINUOUS, ConstraintDef, ModelError, ModelHandle, VarDef, VarMap
from .solver import (
    DEFAULT_GAP,
    FEASIBILITY_TOL,
    INTEGRALITY_TOL,
    Solution,
    SolveStatus,
    SolverError,
    solve,
)

__all__ = [
    "BINARY",
    "CONTINUOUS",
    "ConstraintDef",
    "DEFAULT_GAP",
    "DataError",
    "EncodingError",
    "FEASIBILITY_TOL",
    "INTEGRALITY_TOL",
    "InitialCondition",
    "ModelError",
    "ModelHandle",
    "PinnedStep",
    "Solution",
    "SolveStatus",
    "SolverError",
    "VarDef",
    "VarMap",
    "encode_balance",
    "encode_demand",
    "encode_resource",
    "solve",
]
