"""Planning and dispatch stage assembly, coupling, history, and extraction."""

import pytest

from flexopt.milp import DataError
from flexopt.model_core import (
    OFF,
    OPERATION,
    ResourceStep,
    TimeGrid,
    TrajectoryStep,
    default_system,
    eval_piecewise,
)
from flexopt.stages import (
    FixedHistory,
    Plan,
    PriceSeries,
    SoS,
    StageInfeasibleError,
    build_and_solve_rto,
    build_and_solve_swo,
    schedule_to_csv,
)
from flexopt.stages.extract import ExtractionError

FULL_OUT = 1.494
GRID = TimeGrid(delta_tau=0.25, delta_t=0.025, n_swo=10, n_rto=10)


def full_load_demand(n_resources: int, n_taus: int = 10) -> float:
    return n_resources * FULL_OUT * 0.25 * n_taus


class TestSwo:
    def test_zero_demand_stays_off_at_zero_cost(self):
        system = default_system(1, demand=0.0)
        plan = build_and_solve_swo(
            system, GRID, PriceSeries(values=(50.0,) * 10), [0.0] * 10)
        assert plan.objective_eur == pytest.approx(0.0, abs=1e-9)
        for step in plan.steps:
            assert step.resources[0].state == OFF
            assert step.p_grid == pytest.approx(0.0, abs=1e-9)

    def test_forced_full_load_cost_arithmetic(self):
        # 10 steps of 0.25 h at 2.4 kW and 50 EUR/MWh cost exactly 0.30 EUR
        system = default_system(1, demand=full_load_demand(1))
        plan = build_and_solve_swo(
            system, GRID, PriceSeries(values=(50.0,) * 10), [0.0] * 10)
        assert plan.objective_eur == pytest.approx(0.30, abs=1e-9)
        for step in plan.steps:
            assert step.resources[0].p_input == pytest.approx(2.4, abs=1e-9)
            assert step.resources[0].p_output == pytest.approx(FULL_OUT, abs=1e-9)

    def test_renewable_cover_makes_energy_free(self):
        system = default_system(1, demand=full_load_demand(1))
        plan = build_and_solve_swo(
            system, GRID, PriceSeries(values=(50.0,) * 10), [2.4] * 10)
        assert plan.objective_eur == pytest.approx(0.0, abs=1e-9)
        for step in plan.steps:
            assert step.p_re_used == pytest.approx(2.4, abs=1e-9)
            assert step.p_grid == pytest.approx(0.0, abs=1e-9)

    def test_objective_matches_recomputation_from_plan(self):
        system = default_system(2, demand=full_load_demand(2) * 0.6)
        prices = PriceSeries(values=(20.0, 30.0, 25.0, 90.0, 80.0, 10.0, 15.0, 70.0, 60.0, 5.0))
        plan = build_and_solve_swo(system, GRID, prices, [0.05] * 10)
        recomputed = sum(
            step.p_grid * GRID.delta_tau * price * 1e-3
            for step, price in zip(plan.steps, prices.values)
        )
        assert recomputed == pytest.approx(plan.objective_eur, abs=1e-6)

    def test_infeasible_demand_raises_stage_error(self):
        system = default_system(1, demand=full_load_demand(1) + 1.0)
        with pytest.raises(StageInfeasibleError):
            build_and_solve_swo(
                system, GRID, PriceSeries(values=(50.0,) * 10), [0.0] * 10)

    def test_length_mismatch_is_a_data_error(self):
        system = default_system(1)
        with pytest.raises(DataError):
            build_and_solve_swo(system, GRID, PriceSeries(values=(50.0,) * 3), [0.0] * 10)
        with pytest.raises(DataError):
            build_and_solve_swo(system, GRID, PriceSeries(values=(50.0,) * 10), [0.0] * 3)

    def test_history_prefix_is_reproduced_verbatim(self):
        system = default_system(1, demand=full_load_demand(1))
        prices = PriceSeries(values=(50.0,) * 10)
        first = build_and_solve_swo(system, GRID, prices, [0.0] * 10)
        realized = first.steps[0]
        history = FixedHistory(steps={0: realized})
        second = build_and_solve_swo(system, GRID, prices, [0.0] * 10, history)
        assert second.issue_index == 1
        assert second.steps[0] == realized  # bit-identical, copied not re-solved
        assert second.steps[1].resources[0].p_input == pytest.approx(2.4, abs=1e-9)


class TestRto:
    @pytest.fixture()
    def full_plan(self):
        system = default_system(1, demand=full_load_demand(1))
        plan = build_and_solve_swo(
            system, GRID, PriceSeries(values=(50.0,) * 10), [0.0] * 10)
        return system, plan

    def test_replicates_plan_under_identical_information(self, full_plan):
        system, plan = full_plan
        sos = build_and_solve_rto(system, GRID, plan, 4, [0.0] * 10)
        planned_out = sum(r.p_output for r in plan.steps[4].resources) * GRID.delta_tau
        assert sos.output_energy_kwh(GRID.delta_t) == pytest.approx(planned_out, abs=1e-9)
        for step in sos.steps:
            assert step.resources[0].p_input == pytest.approx(2.4, abs=1e-9)
            assert step.p_grid == pytest.approx(plan.steps[4].p_grid, abs=1e-7)

    def test_budget_residual_is_tiny(self, full_plan):
        system, plan = full_plan
        sos = build_and_solve_rto(system, GRID, plan, 7, [0.0] * 10)
        residual = abs(
            sos.grid_energy_kwh(GRID.delta_t) - plan.grid_energy_kwh(7, GRID.delta_tau)
        )
        assert residual <= 1e-6

    def test_surplus_renewables_lift_output_with_headroom(self):
        # a plan at the efficient 1.2 kW point leaves headroom to 2.4 kW
        target = eval_piecewise(1.2, default_system(1).resources[0].segment_table)
        system = default_system(1, demand=target * 0.25 * 10)
        plan = build_and_solve_swo(
            system, GRID, PriceSeries(values=(50.0,) * 10), [1.0] * 10)
        planned_out = sum(r.p_output for r in plan.steps[2].resources) * GRID.delta_tau
        sos = build_and_solve_rto(system, GRID, plan, 2, [2.0] * 10)
        assert sos.output_energy_kwh(GRID.delta_t) > planned_out + 1e-6

    def test_surplus_never_hurts(self, full_plan):
        system, plan = full_plan
        base = build_and_solve_rto(system, GRID, plan, 3, [0.0] * 10)
        richer = build_and_solve_rto(system, GRID, plan, 3, [0.5] * 10)
        assert (richer.output_energy_kwh(GRID.delta_t)
                >= base.output_energy_kwh(GRID.delta_t) - 1e-9)

    def test_bad_tau_or_lengths_rejected(self, full_plan):
        system, plan = full_plan
        with pytest.raises(DataError):
            build_and_solve_rto(system, GRID, plan, 99, [0.0] * 10)
        with pytest.raises(DataError):
            build_and_solve_rto(system, GRID, plan, 0, [0.0] * 3)


def _plan_slice(system, state, p_input, p_grid, p_re):
    res = system.resources[0]
    out = eval_piecewise(p_input, res.segment_table) if state == OPERATION else 0.0
    step = TrajectoryStep(
        resources=(ResourceStep(state=state, p_input=p_input, p_output=out),),
        p_grid=p_grid, p_re_used=p_re,
    )
    return Plan(
        issue_index=0, objective_eur=0.0,
        initial=step, steps=(step,) * GRID.n_swo,
    )


class TestSlackRelaxation:
    """A renewable-covered producing step whose wind disappears."""

    def _inputs(self):
        system = default_system(1)
        plan = _plan_slice(system, OPERATION, 0.19, 0.0, 0.19)
        realized = TrajectoryStep(
            resources=(ResourceStep(
                state=OPERATION, p_input=0.19,
                p_output=eval_piecewise(0.19, system.resources[0].segment_table)),),
            p_grid=0.0, p_re_used=0.19,
        )
        history = FixedHistory(steps={0: realized, 1: realized})
        forecast = [0.19, 0.19] + [0.0] * 8  # wind dies from dispatch step 2 on
        return system, plan, history, forecast

    def test_infeasible_without_slack(self):
        system, plan, history, forecast = self._inputs()
        with pytest.raises(StageInfeasibleError) as err:
            build_and_solve_rto(system, GRID, plan, 0, forecast, history,
                                anchor_dwells=[0])
        assert "grid-energy" in str(err.value)

    def test_slack_equals_the_closed_form_shortfall(self):
        system, plan, history, forecast = self._inputs()
        sos = build_and_solve_rto(system, GRID, plan, 0, forecast, history,
                                  anchor_dwells=[0], slack_penalty=10.0)
        # entered at the boundary and held 3 dispatch steps so far: one more
        # producing step at the 0.19 kW minimum must be bought from the grid
        assert sos.slack_kwh == pytest.approx(0.19 * GRID.delta_t, abs=1e-9)
        assert sos.steps[2].resources[0].state == OPERATION
        assert sos.steps[3].resources[0].state == OFF

    def test_slack_stays_zero_when_feasible(self):
        system = default_system(1)
        plan = _plan_slice(system, OPERATION, 2.4, 2.4, 0.0)
        relaxed = build_and_solve_rto(system, GRID, plan, 0, [0.0] * 10,
                                      slack_penalty=10.0)
        strict = build_and_solve_rto(system, GRID, plan, 0, [0.0] * 10)
        assert relaxed.slack_kwh == 0.0
        assert relaxed.steps == strict.steps


class TestExtraction:
    def test_corrupted_two_active_states_rejected(self):
        from flexopt.milp import InitialCondition, ModelHandle, VarMap, encode_balance, encode_resource, solve
        from flexopt.stages.extract import extract_steps
        from flexopt.stages.swo import cold_start_boundary

        system = default_system(1)
        res = system.resources[0]
        n = 4
        model = ModelHandle()
        vm = VarMap()
        encode_resource(model, res, n, 0.25,
                        InitialCondition(state=OFF, p_input=0.0), varmap=vm)
        encode_balance(model, vm, [0], n, 10.0, [0.0] * n, True, fixed={0: (0.0, 0.0)})
        model.set_objective([(0.25, vm.get(0, t, "p_output")) for t in range(1, n)], "max")
        solution = solve(model)
        assert solution.ok
        solution.values[vm.get(0, 2, "state_active", sub=OFF)] = 1.0
        solution.values[vm.get(0, 2, "state_active", sub=OPERATION)] = 1.0
        with pytest.raises(ExtractionError):
            extract_steps(solution, vm, system, n, cold_start_boundary(system))

        solution.values[vm.get(0, 2, "state_active", sub=OPERATION)] = 0.4
        with pytest.raises(ExtractionError):
            extract_steps(solution, vm, system, n, cold_start_boundary(system))

    def test_plan_round_trips_through_json(self):
        system = default_system(1, demand=full_load_demand(1))
        plan = build_and_solve_swo(
            system, GRID, PriceSeries(values=(50.0,) * 10), [0.0] * 10)
        again = Plan.model_validate_json(plan.model_dump_json())
        assert again == plan

    def test_schedule_csv_layout(self):
        system = default_system(2, demand=full_load_demand(2))
        plan = build_and_solve_swo(
            system, GRID, PriceSeries(values=(50.0,) * 10), [0.0] * 10)
        text = schedule_to_csv(plan.steps, [r.name for r in system.resources])
        lines = text.strip().splitlines()
        assert lines[0] == "step,resource,state,p_input_kw,p_output_kw,p_grid_kw,p_re_used_kw"
        assert len(lines) == 1 + 10 * 2
        assert lines[1].startswith("0,electrolyzer_1,2,")

    def test_sos_round_trips_through_json(self):
        system = default_system(1)
        plan = _plan_slice(system, OPERATION, 2.4, 2.4, 0.0)
        sos = build_and_solve_rto(system, GRID, plan, 0, [0.0] * 10)
        assert SoS.model_validate_json(sos.model_dump_json()) == sos
