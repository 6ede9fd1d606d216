"""Linear encodings of the resource operating rules and system balance.

Every rule enforced here has a twin in `flexopt.model_core.trajectory`,
which re-checks solver output on the extracted time series. Time index 0
of every encoded horizon is the boundary condition; realized history can
be pinned on later indices, in which case the per-step structural rows for
those indices are omitted (the pins carry the realized data, which -- when
it was aggregated from a finer resolution -- need not satisfy the
coarse-step rules) while rows coupling history to free steps are kept.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from ..model_core.piecewise import eval_piecewise
from ..model_core.types import ResourceSpec
from .model import ModelHandle, VarMap


class EncodingError(ValueError):
    """The requested model cannot be encoded (bad horizon, degenerate big-M)."""


class DataError(ValueError):
    """Exogenous series handed to an encoding are malformed."""


@dataclass(frozen=True)
class InitialCondition:
    """Boundary condition pinned on time index 0.

    ``dwell`` is the number of completed steps the state was already held
    before the boundary; ``None`` means long enough that no minimum-holding
    carry-over applies.
    """

    state: int
    p_input: float
    dwell: Optional[int] = None


@dataclass(frozen=True)
class PinnedStep:
    """Realized values fixed on one time index."""

    state: int
    p_input: float
    p_output: float


def _pin_resource_step(
    model: ModelHandle,
    vm: VarMap,
    spec: ResourceSpec,
    r: int,
    t: int,
    state: int,
    p_input: float,
    p_output: float,
) -> None:
    for s in spec.state_ids:
        model.pin(vm.get(r, t, "state_active", sub=s), 1.0 if s == state else 0.0,
                  f"r{r}_t{t}_pin_state{s}")
    model.pin(vm.get(r, t, "p_input"), p_input, f"r{r}_t{t}_pin_input")
    model.pin(vm.get(r, t, "p_output"), p_output, f"r{r}_t{t}_pin_output")
    # Segment machinery is bypassed on pinned steps; the output pin carries
    # the realized conversion, which for aggregated history may sit off the map.
    for k in range(len(spec.segment_table.segments)):
        model.pin(vm.get(r, t, "seg_active", sub=k), 0.0, f"r{r}_t{t}_pin_seg{k}_on")
        model.pin(vm.get(r, t, "seg_input", sub=k), 0.0, f"r{r}_t{t}_pin_seg{k}_input")


def encode_resource(
    model: ModelHandle,
    spec: ResourceSpec,
    n_steps: int,
    delta: float,
    initial: InitialCondition,
    *,
    resource_index: int = 0,
    varmap: Optional[VarMap] = None,
    fixed: Optional[Mapping[int, PinnedStep]] = None,
) -> VarMap:
    """Add one resource's variables and operating rules over ``n_steps`` indices.

    Index 0 is pinned to ``initial``; indices listed in ``fixed`` are pinned
    to their realized values. ``delta`` is the step length in hours (it
    scales the ramp limits).
    """
    if n_steps < 2:
        raise EncodingError(f"horizon of {n_steps} steps has no free step beyond the boundary")
    needs_ramp_floor = any(s.ramp_min > 0 for s in spec.states)
    if needs_ramp_floor and spec.p_max <= 0:
        raise EncodingError("ramp floor requires a positive input range for its big-M")

    vm = varmap if varmap is not None else VarMap()
    r = resource_index
    segs = spec.segment_table.segments
    state_ids = spec.state_ids
    op = spec.operation_state_id
    out_lb = min(0.0, min(min(s.a * s.lb + s.b, s.a * s.ub + s.b) for s in segs))
    out_ub = max(s.p_out_max for s in spec.states)
    ramp_span = spec.p_max - spec.p_min

    for t in range(n_steps):
        vm.set(r, t, "p_input",
               model.add_continuous(spec.p_min, spec.p_max, f"r{r}_t{t}_p_input"))
        for k, seg in enumerate(segs):
            vm.set(r, t, "seg_input",
                   model.add_continuous(min(0.0, seg.lb), max(0.0, seg.ub),
                                        f"r{r}_t{t}_seg{k}_input"),
                   sub=k)
        for k in range(len(segs)):
            vm.set(r, t, "seg_active", model.add_binary(f"r{r}_t{t}_seg{k}_on"), sub=k)
        for s in state_ids:
            vm.set(r, t, "state_active", model.add_binary(f"r{r}_t{t}_state{s}_on"), sub=s)
        vm.set(r, t, "p_output",
               model.add_continuous(out_lb, out_ub, f"r{r}_t{t}_p_output"))
        if t >= 1:
            vm.set(r, t, "ramp_abs",
                   model.add_continuous(0.0, ramp_span, f"r{r}_t{t}_ramp_abs"))
            if needs_ramp_floor:
                vm.set(r, t, "ramp_dir", model.add_binary(f"r{r}_t{t}_ramp_dir"))

    pinned: dict[int, PinnedStep] = {}
    init_output = (
        eval_piecewise(min(max(initial.p_input, spec.segment_table.lo),
                           spec.segment_table.hi), spec.segment_table)
        if initial.state == op
        else 0.0
    )
    pinned[0] = PinnedStep(state=initial.state, p_input=initial.p_input,
                           p_output=init_output)
    if fixed:
        for t, step in fixed.items():
            if not 0 < t < n_steps:
                raise EncodingError(f"fixed step {t} outside horizon 1..{n_steps - 1}")
            pinned[t] = step

    for t, step in sorted(pinned.items()):
        _pin_resource_step(model, vm, spec, r, t, step.state, step.p_input, step.p_output)

    def free(t: int) -> bool:
        return t not in pinned

    first_free = 0
    while first_free in pinned:
        first_free += 1

    # Dwell of the state active at the pinned/free boundary: the length of
    # its run across the pinned prefix, extended by the pre-horizon dwell
    # when the run reaches the boundary condition (None = unobserved entry,
    # no obligation carried).
    boundary_state = pinned[first_free - 1].state
    boundary_run = 0
    t_back = first_free - 1
    while t_back >= 0 and pinned[t_back].state == boundary_state:
        boundary_run += 1
        t_back -= 1
    boundary_dwell: Optional[int]
    if t_back < 0:
        boundary_dwell = None if initial.dwell is None else boundary_run + initial.dwell
    else:
        boundary_dwell = boundary_run

    for t in range(1, n_steps):
        if not free(t):
            continue
        p = vm.get(r, t, "p_input")
        out_v = vm.get(r, t, "p_output")
        x_state = {s: vm.get(r, t, "state_active", sub=s) for s in state_ids}
        x_seg = {k: vm.get(r, t, "seg_active", sub=k) for k in range(len(segs))}
        p_seg = {k: vm.get(r, t, "seg_input", sub=k) for k in range(len(segs))}

        model.add_constraint([(1.0, x) for x in x_state.values()], "=", 1.0,
                             f"r{r}_t{t}_state_onehot")
        model.add_constraint(
            [(1.0, p)] + [(-spec.state(s).p_in_min, x_state[s]) for s in state_ids],
            ">=", 0.0, f"r{r}_t{t}_input_floor")
        model.add_constraint(
            [(1.0, p)] + [(-spec.state(s).p_in_max, x_state[s]) for s in state_ids],
            "<=", 0.0, f"r{r}_t{t}_input_ceil")

        for k, seg in enumerate(segs):
            model.add_constraint([(1.0, p_seg[k]), (-seg.lb, x_seg[k])], ">=", 0.0,
                                 f"r{r}_t{t}_seg{k}_lb")
            model.add_constraint([(1.0, p_seg[k]), (-seg.ub, x_seg[k])], "<=", 0.0,
                                 f"r{r}_t{t}_seg{k}_ub")
        model.add_constraint(
            [(1.0, x) for x in x_seg.values()] + [(-1.0, x_state[op])], "=", 0.0,
            f"r{r}_t{t}_seg_onehot")
        # Segment inputs add up to the resource input exactly while producing;
        # otherwise they collapse to zero and the input is governed by the
        # state bounds alone.
        model.add_constraint(
            [(1.0, pk) for pk in p_seg.values()] + [(-1.0, p)], "<=", 0.0,
            f"r{r}_t{t}_seg_sum_ub")
        model.add_constraint(
            [(1.0, p)] + [(-1.0, pk) for pk in p_seg.values()]
            + [(spec.p_max, x_state[op])],
            "<=", spec.p_max, f"r{r}_t{t}_seg_sum_lb")
        model.add_constraint(
            [(1.0, out_v)]
            + [(-segs[k].a, p_seg[k]) for k in range(len(segs))]
            + [(-segs[k].b, x_seg[k]) for k in range(len(segs))],
            "=", 0.0, f"r{r}_t{t}_output_def")
        model.add_constraint(
            [(1.0, out_v)] + [(-spec.state(s).p_out_max, x_state[s]) for s in state_ids],
            "<=", 0.0, f"r{r}_t{t}_output_cap")

    # Transition legality: leaving a state hands over to one of its followers.
    for t in range(1, n_steps):
        if not free(t):
            continue
        for s in state_ids:
            followers = spec.state(s).followers
            terms = [(-1.0, vm.get(r, t - 1, "state_active", sub=s)),
                     (1.0, vm.get(r, t, "state_active", sub=s))]
            terms += [(1.0, vm.get(r, t, "state_active", sub=f)) for f in sorted(followers)]
            model.add_constraint(terms, ">=", 0.0, f"r{r}_t{t}_follow_s{s}")

    # Minimum holding: an entry observed in the free region keeps the state
    # active over the (horizon-truncated) window that follows. Entries
    # buried inside pinned history are data, not obligations; only the run
    # still active at the boundary carries over (below).
    for t in range(first_free, n_steps):
        for s in state_ids:
            h = spec.state(s).hold_min
            if h <= 1:
                continue
            window = range(t, min(t + h, n_steps))
            # the required run shrinks with the window at the horizon end,
            # admitting short final stays
            need = float(len(window))
            terms = [(need, vm.get(r, t, "state_active", sub=s)),
                     (-need, vm.get(r, t - 1, "state_active", sub=s))]
            terms += [(-1.0, vm.get(r, q, "state_active", sub=s)) for q in window]
            model.add_constraint(terms, "<=", 0.0, f"r{r}_t{t}_hold_min_s{s}")

    # Carry-over of the boundary run's unfinished minimum hold.
    if boundary_dwell is not None:
        h = spec.state(boundary_state).hold_min
        remaining = h - boundary_dwell
        for q in range(first_free, min(first_free + remaining, n_steps)):
            model.add_constraint(
                [(1.0, vm.get(r, q, "state_active", sub=boundary_state))], ">=", 1.0,
                f"r{r}_t{q}_hold_carry")

    # Maximum holding: within any fully-free window one step longer than the
    # cap, the state must pause at least once; the boundary run's remaining
    # allowance is carried separately.
    for s in state_ids:
        cap = spec.state(s).hold_max
        if cap is None:
            continue
        for t in range(first_free + cap, n_steps):
            window = range(t - cap, t + 1)
            model.add_constraint(
                [(1.0, vm.get(r, q, "state_active", sub=s)) for q in window],
                "<=", float(cap), f"r{r}_t{t}_hold_max_s{s}")
    if boundary_dwell is not None:
        cap = spec.state(boundary_state).hold_max
        if cap is not None:
            allowed = max(0, cap - boundary_dwell)
            window = range(first_free, min(first_free + allowed + 1, n_steps))
            if len(window) == allowed + 1:
                model.add_constraint(
                    [(1.0, vm.get(r, q, "state_active", sub=boundary_state)) for q in window],
                    "<=", float(allowed), f"r{r}_hold_max_carry")

    # Ramp limits on the step-to-step input change, scaled by the step length.
    big_m = ramp_span + delta * max((s.ramp_min for s in spec.states), default=0.0)
    for t in range(1, n_steps):
        if not free(t):
            continue
        p_now = vm.get(r, t, "p_input")
        p_prev = vm.get(r, t - 1, "p_input")
        u = vm.get(r, t, "ramp_abs")
        x_state = {s: vm.get(r, t, "state_active", sub=s) for s in state_ids}
        model.add_constraint([(1.0, u), (-1.0, p_now), (1.0, p_prev)], ">=", 0.0,
                             f"r{r}_t{t}_ramp_abs_up")
        model.add_constraint([(1.0, u), (1.0, p_now), (-1.0, p_prev)], ">=", 0.0,
                             f"r{r}_t{t}_ramp_abs_dn")
        model.add_constraint(
            [(1.0, u)] + [(-delta * spec.state(s).ramp_max, x_state[s]) for s in state_ids],
            "<=", 0.0, f"r{r}_t{t}_ramp_ceiling")
        if needs_ramp_floor:
            d = vm.get(r, t, "ramp_dir")
            floor_terms = [(-delta * spec.state(s).ramp_min, x_state[s]) for s in state_ids]
            model.add_constraint(
                [(1.0, p_now), (-1.0, p_prev)] + floor_terms + [(big_m, d)],
                ">=", 0.0, f"r{r}_t{t}_ramp_floor_up")
            model.add_constraint(
                [(1.0, p_prev), (-1.0, p_now)] + floor_terms + [(-big_m, d)],
                ">=", -big_m, f"r{r}_t{t}_ramp_floor_dn")

    return vm


def encode_balance(
    model: ModelHandle,
    varmap: VarMap,
    resource_indices: Sequence[int],
    n_steps: int,
    grid_limit: float,
    re_available: Sequence[float],
    allow_curtailment: bool,
    *,
    fixed: Optional[Mapping[int, tuple[float, float]]] = None,
) -> VarMap:
    """Couple resource inputs to grid draw and renewable feed-in per step.

    ``fixed`` pins realized (grid, renewable) values on history indices;
    index 0 must always be covered by it (the boundary condition).
    """
    if len(re_available) != n_steps:
        raise DataError(f"renewable series has {len(re_available)} entries for {n_steps} steps")
    for t, value in enumerate(re_available):
        if value < 0:
            raise DataError(f"renewable availability {value} kW at step {t} is negative")
    pins = dict(fixed or {})
    if 0 not in pins:
        raise DataError("balance needs pinned grid/renewable values for the boundary index 0")

    for t in range(n_steps):
        g_ub = grid_limit if t not in pins else max(grid_limit, pins[t][0])
        g = model.add_continuous(0.0, g_ub, f"t{t}_p_grid")
        varmap.set(None, t, "p_grid", g)
        if t in pins:
            re_lb, re_ub = 0.0, max(re_available[t], pins[t][1], 0.0)
        elif allow_curtailment:
            re_lb, re_ub = 0.0, max(re_available[t], 0.0)
        else:
            re_lb, re_ub = re_available[t], max(re_available[t], 0.0)
        re_v = model.add_continuous(re_lb, re_ub, f"t{t}_p_re_used")
        varmap.set(None, t, "p_re_used", re_v)

    for t, (g_val, re_val) in sorted(pins.items()):
        model.pin(varmap.get(None, t, "p_grid"), g_val, f"t{t}_pin_grid")
        model.pin(varmap.get(None, t, "p_re_used"), re_val, f"t{t}_pin_re")

    for t in range(1, n_steps):
        if t in pins:
            continue
        terms = [(1.0, varmap.get(r, t, "p_input")) for r in resource_indices]
        terms += [(-1.0, varmap.get(None, t, "p_grid")),
                  (-1.0, varmap.get(None, t, "p_re_used"))]
        model.add_constraint(terms, "=", 0.0, f"t{t}_balance")
    return varmap


def encode_demand(
    model: ModelHandle,
    varmap: VarMap,
    resource_indices: Sequence[int],
    n_steps: int,
    demand: float,
    delta: float,
    applies_to: str,
) -> int:
    """Total energy target over the horizon (boundary index excluded)."""
    if demand < 0:
        raise DataError(f"demand {demand} kWh is negative")
    role = "p_output" if applies_to == "output" else "p_input"
    terms = [
        (delta, varmap.get(r, t, role))
        for r in resource_indices
        for t in range(1, n_steps)
    ]
    return model.add_constraint(terms, "=", demand, "energy_target")
