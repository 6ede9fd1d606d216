"""Exact solving backend for `ModelHandle` instances.

Backed by the HiGHS branch-and-cut solver via `scipy.optimize.milp`. All
models this package builds stay small (a few thousand variables), so a
single exact backend suffices; the translation layer below is the only
place that touches scipy.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds, LinearConstraint, milp

from .model import BINARY, ModelHandle

DEFAULT_GAP = 1e-3
INTEGRALITY_TOL = 1e-6
FEASIBILITY_TOL = 1e-6


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    FEASIBLE_WITHIN_GAP = "feasible-within-gap"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class SolverError(RuntimeError):
    """The backend failed in a way that is not an infeasible/unbounded verdict."""


@dataclass(frozen=True)
class Solution:
    status: SolveStatus
    objective: Optional[float]
    values: Optional[np.ndarray]
    gap: Optional[float]
    wall_time: float

    @property
    def ok(self) -> bool:
        return self.status in (SolveStatus.OPTIMAL, SolveStatus.FEASIBLE_WITHIN_GAP)

    def value(self, var_id: int) -> float:
        if self.values is None:
            raise SolverError("no variable values on a non-feasible solution")
        return float(self.values[var_id])

    def check_within_bounds(self, model: ModelHandle, tol: float = FEASIBILITY_TOL) -> bool:
        """True when every value respects its declared domain (integrality included)."""
        if self.values is None:
            return False
        for v in model.variables:
            x = self.values[v.id]
            if x < v.lb - tol or x > v.ub + tol:
                return False
            if v.kind == BINARY and abs(x - round(x)) > INTEGRALITY_TOL:
                return False
        return True


def solve(model: ModelHandle, gap: float = DEFAULT_GAP) -> Solution:
    """Solve to proven optimality or the requested relative gap.

    Deterministic: the same model and gap always produce the same solution.
    Infeasible and unbounded models are reported through the status, never
    raised; only backend failures raise `SolverError`.
    """
    if model.objective is None:
        raise SolverError("model has no objective")
    if model.n_vars == 0:
        raise SolverError("model has no variables")

    n = model.n_vars
    c = np.zeros(n)
    sign = -1.0 if model.objective.direction == "max" else 1.0
    for coef, vid in model.objective.terms:
        c[vid] += sign * coef

    integrality = np.zeros(n)
    lb = np.empty(n)
    ub = np.empty(n)
    for v in model.variables:
        lb[v.id] = v.lb
        ub[v.id] = v.ub
        if v.kind == BINARY:
            integrality[v.id] = 1

    constraints = None
    if model.constraints:
        rows: list[int] = []
        cols: list[int] = []
        data: list[float] = []
        lo = np.empty(len(model.constraints))
        hi = np.empty(len(model.constraints))
        for i, con in enumerate(model.constraints):
            for coef, vid in con.terms:
                rows.append(i)
                cols.append(vid)
                data.append(coef)
            if con.sense == "<=":
                lo[i], hi[i] = -np.inf, con.rhs
            elif con.sense == ">=":
                lo[i], hi[i] = con.rhs, np.inf
            else:
                lo[i], hi[i] = con.rhs, con.rhs
        a = sp.csc_array(
            sp.coo_array((data, (rows, cols)), shape=(len(model.constraints), n))
        )
        constraints = LinearConstraint(a, lo, hi)

    started = time.perf_counter()
    res = milp(
        c=c,
        constraints=constraints,
        integrality=integrality,
        bounds=Bounds(lb, ub),
        options={"mip_rel_gap": float(gap)},
    )
    elapsed = time.perf_counter() - started

    if res.status == 2:
        return Solution(SolveStatus.INFEASIBLE, None, None, None, elapsed)
    if res.status == 3:
        return Solution(SolveStatus.UNBOUNDED, None, None, None, elapsed)
    if res.status != 0 or res.x is None:
        raise SolverError(f"backend failure: {res.message}")

    achieved = float(res.mip_gap) if res.mip_gap is not None else 0.0
    status = SolveStatus.OPTIMAL if achieved <= 1e-12 else SolveStatus.FEASIBLE_WITHIN_GAP
    objective = float(res.fun) * sign
    return Solution(status, objective, np.asarray(res.x, dtype=float), achieved, elapsed)
