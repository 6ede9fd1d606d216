"""Structural validation of system specifications.

Violations are returned as data, never raised: an invalid spec is a normal
input for tooling such as the service's validate endpoint.
"""

from __future__ import annotations

from collections import deque

from pydantic import BaseModel, ConfigDict

from .types import ResourceSpec, SystemSpec

# Tolerance for checking that adjacent segment bounds coincide.
_SEG_JOIN_TOL = 1e-9


class ValidationIssue(BaseModel):
    model_config = ConfigDict(frozen=True)

    code: str
    where: str
    message: str


def _issue(code: str, where: str, message: str) -> ValidationIssue:
    return ValidationIssue(code=code, where=where, message=message)


def _validate_resource(res: ResourceSpec, where: str) -> list[ValidationIssue]:
    issues: list[ValidationIssue] = []
    segs = res.segment_table.segments
    if not segs:
        issues.append(_issue("empty_segment_table", where, "segment table has no segments"))
    for k, seg in enumerate(segs):
        if not seg.lb < seg.ub:
            issues.append(
                _issue("segment_bounds_order", f"{where}.segments[{k}]",
                       f"lb {seg.lb} must be < ub {seg.ub}")
            )
        if k > 0 and abs(seg.lb - segs[k - 1].ub) > _SEG_JOIN_TOL:
            issues.append(
                _issue("non_contiguous_segments", f"{where}.segments[{k}]",
                       f"segment starts at {seg.lb} but previous ends at {segs[k - 1].ub}")
            )

    ids = [s.id for s in res.states]
    if len(set(ids)) != len(ids):
        issues.append(_issue("duplicate_state_id", where, f"state ids {ids} are not unique"))
    known = set(ids)
    for s in res.states:
        swhere = f"{where}.states[{s.id}]"
        if s.p_in_min > s.p_in_max:
            issues.append(
                _issue("state_input_bounds_order", swhere,
                       f"p_in_min {s.p_in_min} > p_in_max {s.p_in_max}")
            )
        if s.ramp_min > s.ramp_max:
            issues.append(
                _issue("ramp_bounds_order", swhere,
                       f"ramp_min {s.ramp_min} > ramp_max {s.ramp_max}")
            )
        if s.hold_max is not None and s.hold_max < s.hold_min:
            issues.append(
                _issue("hold_bounds_order", swhere,
                       f"hold_max {s.hold_max} < hold_min {s.hold_min}")
            )
        for f in sorted(s.followers):
            if f not in known:
                issues.append(
                    _issue("unknown_follower", swhere,
                           f"follower {f} is not a declared state")
                )

    if res.operation_state_id not in known:
        issues.append(
            _issue("unknown_operation_state", where,
                   f"operation state {res.operation_state_id} is not declared")
        )
    if res.initial_state not in known:
        issues.append(
            _issue("unknown_initial_state", where,
                   f"initial state {res.initial_state} is not declared")
        )
    if res.p_min > res.p_max:
        issues.append(
            _issue("resource_bounds_order", where, f"p_min {res.p_min} > p_max {res.p_max}")
        )

    # The segment cover must span the operation state's input range.
    if segs and res.operation_state_id in known:
        op = res.state(res.operation_state_id)
        if (op.p_in_min < res.segment_table.lo - _SEG_JOIN_TOL
                or op.p_in_max > res.segment_table.hi + _SEG_JOIN_TOL):
            issues.append(
                _issue("segment_cover_gap", where,
                       f"segments cover [{res.segment_table.lo}, {res.segment_table.hi}] "
                       f"but operation input range is [{op.p_in_min}, {op.p_in_max}]")
            )

    # The operation state must be reachable from the initial state. With
    # unknown followers present this would only echo that defect, so skip.
    has_unknown_followers = any(i.code == "unknown_follower" for i in issues)
    if (res.operation_state_id in known and res.initial_state in known
            and not has_unknown_followers):
        seen = {res.initial_state}
        frontier = deque(seen)
        while frontier:
            cur = frontier.popleft()
            for f in res.state(cur).followers:
                if f in known and f not in seen:
                    seen.add(f)
                    frontier.append(f)
        if res.operation_state_id not in seen:
            issues.append(
                _issue("operation_unreachable", where,
                       f"operation state {res.operation_state_id} cannot be reached "
                       f"from initial state {res.initial_state} via follower sets")
            )
    return issues


def validate_system(spec: SystemSpec) -> list[ValidationIssue]:
    """Every structural violation in ``spec``; an empty list means valid."""
    issues: list[ValidationIssue] = []
    if not spec.resources:
        issues.append(_issue("no_resources", "system", "at least one resource is required"))
    if spec.grid_p_max < 0:
        issues.append(
            _issue("grid_limit_negative", "system", f"grid_p_max {spec.grid_p_max} < 0")
        )
    if spec.demand is not None and spec.demand < 0:
        issues.append(_issue("demand_negative", "system", f"demand {spec.demand} < 0"))
    for i, res in enumerate(spec.resources):
        issues.extend(_validate_resource(res, f"resources[{i}]"))
    return issues
