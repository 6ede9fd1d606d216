"""Trace ingestion, forecast generation, the simulated plant, and its transport."""

import numpy as np
import pytest

from flexopt.environment import (
    ActualSeries,
    PlantClient,
    PlantError,
    PlantServer,
    Setpoint,
    SimulatedPlant,
    SyntheticTraceParams,
    TraceError,
    load_prices,
    load_trace,
    make_forecast,
    mean_per_block,
    split_supply,
    synthetic_trace,
)
from flexopt.environment.forecast import DOMAIN_SHORT_TERM
from flexopt.model_core import (
    OFF,
    OPERATION,
    STAND_BY,
    ResourceStep,
    TimeGrid,
    Trajectory,
    TrajectoryStep,
    check_trajectory,
    default_system,
)


def write_trace(path, rows):
    path.write_text("time,power_kw\n" + "\n".join(f"{t},{p}" for t, p in rows) + "\n")
    return path


class TestLoadTrace:
    def test_constant_one_hertz_trace(self, tmp_path):
        # 90 s at 1 Hz collapse into one 0.025 h bucket of the same value
        rows = [(float(i), 3.6) for i in range(90)]
        series = load_trace(write_trace(tmp_path / "t.csv", rows), 0.025)
        assert len(series) == 1
        assert series.values[0] == pytest.approx(3.6)

    def test_alternating_samples_average(self, tmp_path):
        rows = [(float(i), 2.0 if i % 2 else 0.0) for i in range(180)]
        series = load_trace(write_trace(tmp_path / "t.csv", rows), 0.025)
        assert list(series.values) == pytest.approx([1.0, 1.0])

    def test_energy_preserved_over_kept_span(self, tmp_path):
        rng = np.random.default_rng(99)
        rows = [(float(i), float(v)) for i, v in enumerate(rng.uniform(0, 5, size=360))]
        series = load_trace(write_trace(tmp_path / "t.csv", rows), 0.025)
        raw_energy = sum(p for _, p in rows) * (1.0 / 3600.0)
        assert series.energy_kwh() == pytest.approx(raw_energy, rel=1e-12)

    def test_negative_power_rejected(self, tmp_path):
        rows = [(0.0, 1.0), (1.0, -1.0), (2.0, 1.0)]
        with pytest.raises(TraceError):
            load_trace(write_trace(tmp_path / "t.csv", rows), 0.025)

    def test_non_monotone_time_rejected(self, tmp_path):
        rows = [(0.0, 1.0), (2.0, 1.0), (1.0, 1.0)]
        with pytest.raises(TraceError):
            load_trace(write_trace(tmp_path / "t.csv", rows), 0.025)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("time,power_kw\n")
        with pytest.raises(TraceError):
            load_trace(path, 0.025)

    def test_wrong_header_rejected(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("when,kw\n0,1\n")
        with pytest.raises(TraceError):
            load_trace(path, 0.025)

    def test_non_integer_bucket_rejected(self, tmp_path):
        rows = [(float(i) * 7.0, 1.0) for i in range(100)]
        with pytest.raises(TraceError):
            load_trace(write_trace(tmp_path / "t.csv", rows), 0.025)


class TestSyntheticTrace:
    def test_deterministic_per_seed(self):
        a = synthetic_trace(100, 0.025, 42)
        b = synthetic_trace(100, 0.025, 42)
        c = synthetic_trace(100, 0.025, 43)
        assert a == b
        assert a != c

    def test_respects_floor(self):
        params = SyntheticTraceParams(mean_kw=0.01, amplitude_kw=0.5, floor_kw=0.004)
        series = synthetic_trace(200, 0.025, 5, params)
        assert min(series.values) >= 0.004


class TestPrices:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("tau,eur_per_mwh\n0,30.5\n1,-4.0\n2,80.0\n")
        series = load_prices(path)
        assert series.values == (30.5, -4.0, 80.0)

    def test_gap_in_tau_rejected(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("tau,eur_per_mwh\n0,30.5\n2,80.0\n")
        with pytest.raises(TraceError):
            load_prices(path)


class TestMakeForecast:
    @pytest.fixture()
    def actual(self):
        rng = np.random.default_rng(3)
        return ActualSeries(
            values=tuple(float(v) for v in rng.uniform(0.2, 1.0, size=120)),
            resolution_hours=0.025,
        )

    def test_zero_sigma_reproduces_actuals(self, actual):
        fc = make_forecast(actual, 10, 20, 0.0, 0.0, seed=42)
        assert fc.values == actual.values[10:30]

    def test_lead_zero_is_exact(self, actual):
        fc = make_forecast(actual, 17, 12, 0.05, 0.1, seed=42)
        assert fc.values[0] == actual.values[17]
        assert fc.leads[0] == 0

    def test_documented_rng_recipe_reproduced_independently(self, actual):
        """Re-derive the values from the published recipe, draw by draw."""
        seed, issue, sigma0, sigma1 = 42, 9, 0.01, 0.02
        fc = make_forecast(actual, issue, 15, sigma0, sigma1, seed,
                           domain=DOMAIN_SHORT_TERM)
        for offset in range(15):
            j = issue + offset
            if offset == 0:
                expected = actual.values[j]
            else:
                eps = np.random.default_rng(
                    [seed, DOMAIN_SHORT_TERM, issue, j]).standard_normal()
                sigma = sigma0 + sigma1 * offset
                expected = actual.values[j] * max(0.0, 1.0 + float(eps) * sigma)
            assert fc.values[offset] == pytest.approx(expected, abs=0.0)

    def test_error_spread_grows_with_lead(self):
        """Empirical relative-error spread is strictly increasing in lead."""
        flat = ActualSeries(values=(1.0,) * 6, resolution_hours=0.025)
        draws = 10_000
        by_lead = {lead: [] for lead in (1, 2, 3, 4)}
        for seed in range(draws):
            fc = make_forecast(flat, 0, 5, 0.01, 0.02, seed=seed)
            for lead in by_lead:
                by_lead[lead].append(fc.values[lead] - 1.0)
        spreads = [float(np.std(by_lead[lead])) for lead in (1, 2, 3, 4)]
        assert spreads == sorted(spreads)
        assert spreads[0] < spreads[3]

    def test_values_never_negative(self, actual):
        fc = make_forecast(actual, 0, 100, 1.0, 2.0, seed=11)
        assert min(fc.values) >= 0.0

    def test_window_beyond_series_rejected(self, actual):
        with pytest.raises(ValueError):
            make_forecast(actual, 100, 30, 0.01, 0.02, seed=1)

    def test_lead_unit_coarsens_the_schedule(self, actual):
        fine = make_forecast(actual, 0, 40, 0.01, 0.02, seed=4, lead_unit=1)
        coarse = make_forecast(actual, 0, 40, 0.01, 0.02, seed=4, lead_unit=10)
        assert coarse.leads[9] == 0  # still inside the first planning step
        assert coarse.leads[10] == 1
        assert fine.leads[10] == 10
        # lead 0 slots reproduce actuals exactly under the coarse unit
        assert coarse.values[:10] == actual.values[:10]


def trace(values, dt=0.025):
    return ActualSeries(values=tuple(values), resolution_hours=dt)


class TestPlant:
    def test_commanded_operating_point(self):
        system = default_system(1)
        plant = SimulatedPlant(system, trace([0.5] * 10))
        m = plant.apply(0, [Setpoint(resource=0, state=OPERATION, p_input_kw=2.0)])
        assert m.resources[0].state == OPERATION
        # fourth segment: 0.56 * 2.0 + 0.15
        assert m.resources[0].p_output == pytest.approx(1.27, abs=1e-12)
        assert m.re_available == pytest.approx(0.5)

    def test_illegal_transition_is_rejected_and_held(self):
        system = default_system(1)
        plant = SimulatedPlant(system, trace([0.0] * 10))
        m = plant.apply(0, [Setpoint(resource=0, state=STAND_BY, p_input_kw=0.19)])
        assert m.resources[0].rejected
        assert m.resources[0].state == OFF
        assert m.resources[0].p_input == 0.0  # clipped to the held state's range

    def test_input_clipped_into_state_range(self):
        system = default_system(1)
        plant = SimulatedPlant(system, trace([0.0] * 10))
        m = plant.apply(0, [Setpoint(resource=0, state=OPERATION, p_input_kw=3.0)])
        assert m.resources[0].clipped
        assert m.resources[0].p_input == pytest.approx(2.4)

    def test_minimum_dwell_blocks_early_exit(self):
        system = default_system(1)
        plant = SimulatedPlant(system, trace([0.0] * 10))
        plant.apply(0, [Setpoint(resource=0, state=OPERATION, p_input_kw=1.0)])
        m = plant.apply(1, [Setpoint(resource=0, state=OFF, p_input_kw=0.0)])
        assert m.resources[0].rejected  # operation entered one step ago, hold is 4
        assert m.resources[0].state == OPERATION
        for step in range(2, 4):
            plant.apply(step, [Setpoint(resource=0, state=OPERATION, p_input_kw=1.0)])
        m = plant.apply(4, [Setpoint(resource=0, state=OFF, p_input_kw=0.0)])
        assert not m.resources[0].rejected
        assert m.resources[0].state == OFF

    def test_realized_trajectories_always_satisfy_the_rules(self):
        """The plant is the rulebook embodied: whatever is commanded, the
        realized series passes the checker."""
        rng = np.random.default_rng(31)
        system = default_system(2)
        grid = TimeGrid(delta_tau=0.25, delta_t=0.025, n_swo=10, n_rto=10)
        plant = SimulatedPlant(system, trace(list(rng.uniform(0, 1, size=100))))
        steps = [TrajectoryStep(resources=tuple(
            ResourceStep(state=OFF, p_input=0.0, p_output=0.0)
            for _ in system.resources))]
        for k in range(grid.n_slots):
            commands = [
                Setpoint(
                    resource=r,
                    state=int(rng.choice([OFF, STAND_BY, OPERATION])),
                    p_input_kw=float(rng.uniform(0, 3)),
                )
                for r in range(2)
            ]
            m = plant.apply(k, commands)
            steps.append(TrajectoryStep(resources=tuple(
                ResourceStep(state=x.state, p_input=x.p_input, p_output=x.p_output)
                for x in m.resources)))
        violations = check_trajectory(
            Trajectory(steps=tuple(steps)), system, grid, "rto")
        assert violations == []


class TestPlantNoise:
    def test_bounded_perturbation_is_seeded_and_clipped(self):
        system = default_system(1)
        command = [Setpoint(resource=0, state=OPERATION, p_input_kw=2.39)]
        noisy_a = SimulatedPlant(system, trace([0.0] * 4), input_noise_kw=0.05, noise_seed=3)
        noisy_b = SimulatedPlant(system, trace([0.0] * 4), input_noise_kw=0.05, noise_seed=3)
        clean = SimulatedPlant(system, trace([0.0] * 4))
        a = noisy_a.apply(0, command).resources[0]
        b = noisy_b.apply(0, command).resources[0]
        c = clean.apply(0, command).resources[0]
        assert a == b  # same seed, same perturbation
        assert a.p_input != c.p_input
        assert abs(a.p_input - 2.39) <= 0.05
        assert 0.19 <= a.p_input <= 2.4

    def test_series_rejects_negative_power(self):
        with pytest.raises(ValueError):
            ActualSeries(values=(1.0, -0.1), resolution_hours=0.025)


class TestSplitSupply:
    def _measurement(self, total_in, available):
        system = default_system(1)
        plant = SimulatedPlant(system, trace([available] * 4))
        return plant.apply(0, [Setpoint(resource=0, state=OPERATION, p_input_kw=total_in)])

    def test_schedule_order_is_followed(self):
        m = self._measurement(2.0, available=1.0)
        grid_kw, re_kw = split_supply(m, scheduled_re_used=0.4)
        assert re_kw == pytest.approx(0.4)
        assert grid_kw == pytest.approx(1.6)

    def test_availability_caps_the_schedule(self):
        m = self._measurement(2.0, available=0.3)
        grid_kw, re_kw = split_supply(m, scheduled_re_used=0.8)
        assert re_kw == pytest.approx(0.3)
        assert grid_kw == pytest.approx(1.7)

    def test_without_schedule_availability_rules(self):
        m = self._measurement(2.0, available=0.5)
        grid_kw, re_kw = split_supply(m)
        assert re_kw == pytest.approx(0.5)
        assert grid_kw == pytest.approx(1.5)


class TestTransport:
    def test_round_trip_matches_in_process(self):
        system = default_system(1)
        remote = SimulatedPlant(system, trace([0.7] * 10))
        local = SimulatedPlant(system, trace([0.7] * 10))
        server = PlantServer(remote)
        server.start()
        try:
            client = PlantClient(*server.address)
            commands = [Setpoint(resource=0, state=OPERATION, p_input_kw=2.4)]
            over_wire = client.apply(0, commands)
            in_process = local.apply(0, commands)
            assert over_wire == in_process
            client.close()
        finally:
            server.stop()

    def test_bad_request_surfaces_as_plant_error(self):
        system = default_system(1)
        server = PlantServer(SimulatedPlant(system, trace([0.0] * 10)))
        server.start()
        try:
            client = PlantClient(*server.address)
            with pytest.raises(PlantError):
                client.apply(0, [Setpoint(resource=5, state=OFF, p_input_kw=0.0)])
            client.close()
        finally:
            server.stop()


def test_mean_per_block():
    assert mean_per_block([4.0, 0.0, 2.0, 2.0], 2) == [2.0, 2.0]
    with pytest.raises(ValueError):
        mean_per_block([1.0, 2.0, 3.0], 2)
