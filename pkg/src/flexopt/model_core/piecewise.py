"""Evaluation of the piecewise-affine input/output map."""

from __future__ import annotations

from .types import SegmentTable


class PiecewiseRangeError(ValueError):
    """Input power lies outside the range covered by the segment table."""


def eval_piecewise(p_input: float, table: SegmentTable) -> float:
    """Output power for ``p_input`` under the segment table.

    At a boundary shared by two segments both candidate values exist; the
    larger one is returned so that this function agrees with an
    output-maximizing optimizer choosing the active segment. Note the table
    values need not join continuously, so the map is only guaranteed
    monotone within a segment, not across boundaries.
    """
    if p_input < table.lo or p_input > table.hi:
        raise PiecewiseRangeError(
            f"input {p_input} kW outside segment cover [{table.lo}, {table.hi}]"
        )
    candidates = [
        seg.a * p_input + seg.b
        for seg in table.segments
        if seg.lb <= p_input <= seg.ub
    ]
    return max(candidates)


def segment_index_for(p_input: float, table: SegmentTable) -> int:
    """Index of the segment `eval_piecewise` would attribute ``p_input`` to."""
    best_k = -1
    best = -float("inf")
    for k, seg in enumerate(table.segments):
        if seg.lb <= p_input <= seg.ub:
            value = seg.a * p_input + seg.b
            if value > best:
                best = value
                best_k = k
    if best_k < 0:
        raise PiecewiseRangeError(
            f"input {p_input} kW outside segment cover [{table.lo}, {table.hi}]"
        )
    return best_k
