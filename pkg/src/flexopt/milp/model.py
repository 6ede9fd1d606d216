"""Solver-agnostic linear model container.

A `ModelHandle` accumulates variables, linear constraints, and one linear
objective. It knows nothing about any backend; `flexopt.milp.solver`
translates it for the bundled exact solver. Construction order is
deterministic, so two identically-built models dump identical text.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Literal, Optional

Sense = Literal["<=", "=", ">="]

CONTINUOUS = "continuous"
BINARY = "binary"


class ModelError(ValueError):
    """Malformed model construction (undeclared variable, bad bounds, ...)."""


@dataclass(frozen=True)
class VarDef:
    id: int
    kind: str
    lb: float
    ub: float
    name: str


@dataclass(frozen=True)
class ConstraintDef:
    terms: tuple[tuple[float, int], ...]  # (coefficient, variable id)
    sense: Sense
    rhs: float
    name: str


@dataclass
class Objective:
    terms: tuple[tuple[float, int], ...] = ()
    direction: Literal["min", "max"] = "min"


@dataclass
class ModelHandle:
    variables: list[VarDef] = field(default_factory=list)
    constraints: list[ConstraintDef] = field(default_factory=list)
    objective: Optional[Objective] = None

    def add_var(self, kind: str, lb: float, ub: float, name: str) -> int:
        if kind == BINARY and not (lb >= 0.0 and ub <= 1.0):
            raise ModelError(f"binary variable {name!r} has bounds [{lb}, {ub}] outside [0, 1]")
        if lb > ub:
            raise ModelError(f"variable {name!r} has empty domain [{lb}, {ub}]")
        vid = len(self.variables)
        self.variables.append(VarDef(id=vid, kind=kind, lb=lb, ub=ub, name=name))
        return vid

    def add_continuous(self, lb: float, ub: float, name: str) -> int:
        return self.add_var(CONTINUOUS, lb, ub, name)

    def add_binary(self, name: str) -> int:
        return self.add_var(BINARY, 0.0, 1.0, name)

    def add_constraint(
        self,
        terms: Iterable[tuple[float, int]],
        sense: Sense,
        rhs: float,
        name: str,
    ) -> int:
        resolved = tuple((float(c), v) for c, v in terms)
        for _, v in resolved:
            if not 0 <= v < len(self.variables):
                raise ModelError(f"constraint {name!r} references undeclared variable {v}")
        if sense not in ("<=", "=", ">="):
            raise ModelError(f"constraint {name!r} has unknown sense {sense!r}")
        cid = len(self.constraints)
        self.constraints.append(
            ConstraintDef(terms=resolved, sense=sense, rhs=float(rhs), name=name)
        )
        return cid

    def pin(self, var_id: int, value: float, name: str) -> int:
        """Fix a variable with an explicit equality row."""
        return self.add_constraint([(1.0, var_id)], "=", value, name)

    def set_objective(
        self, terms: Iterable[tuple[float, int]], direction: Literal["min", "max"]
    ) -> None:
        resolved = tuple((float(c), v) for c, v in terms)
        for _, v in resolved:
            if not 0 <= v < len(self.variables):
                raise ModelError(f"objective references undeclared variable {v}")
        self.objective = Objective(terms=resolved, direction=direction)

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    def n_binaries(self) -> int:
        return sum(1 for v in self.variables if v.kind == BINARY)

    def to_lp_text(self) -> str:
        """LP-format-compatible dump with deterministic ordering, for debugging."""
        lines: list[str] = []
        obj = self.objective or Objective()
        lines.append("Maximize" if obj.direction == "max" else "Minimize")
        expr = " + ".join(f"{c} {self.variables[v].name}" for c, v in obj.terms) or "0"
        lines.append(f" obj: {expr}")
        lines.append("Subject To")
        for con in self.constraints:
            expr = " + ".join(f"{c} {self.variables[v].name}" for c, v in con.terms)
            op = {"<=": "<=", "=": "=", ">=": ">="}[con.sense]
            lines.append(f" {con.name}: {expr} {op} {con.rhs}")
        lines.append("Bounds")
        for v in self.variables:
            lines.append(f" {v.lb} <= {v.name} <= {v.ub}")
        binaries = [v.name for v in self.variables if v.kind == BINARY]
        if binaries:
            lines.append("Binary")
            lines.extend(f" {name}" for name in binaries)
        lines.append("End")
        return "\n".join(lines) + "\n"


class VarMap:
    """Lookup from (resource, time index, role[, sub-index]) to variable id.

    System-level roles (grid and renewable feed) use ``resource=None``.
    """

    def __init__(self) -> None:
        self._map: dict[tuple, int] = {}

    @staticmethod
    def _key(resource: Optional[int], t: int, role: str, sub: Optional[int]) -> tuple:
        return (resource, t, role, sub)

    def set(
        self, resource: Optional[int], t: int, role: str, var_id: int, sub: Optional[int] = None
    ) -> None:
        key = self._key(resource, t, role, sub)
        if key in self._map:
            raise ModelError(f"variable role {key} is already mapped")
        self._map[key] = var_id

    def get(
        self, resource: Optional[int], t: int, role: str, sub: Optional[int] = None
    ) -> int:
        return self._map[self._key(resource, t, role, sub)]

    def has(
        self, resource: Optional[int], t: int, role: str, sub: Optional[int] = None
    ) -> bool:
        return self._key(resource, t, role, sub) in self._map

    def count(self, role: str) -> int:
        return sum(1 for key in self._map if key[2] == role)

    def __len__(self) -> int:
        return len(self._map)
