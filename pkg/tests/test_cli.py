"""The thin-client CLI: subcommands, artifacts, exit codes, and server mode."""

import json
import socket
import threading
import time

import pytest
from click.testing import CliRunner

from flexopt.cli import main
from flexopt.model_core import default_system
from flexopt.service import schemas

from conftest import DEFAULT_CONFIG

GRID = {"delta_tau": 0.25, "delta_t": 0.025, "n_swo": 10, "n_rto": 10}
FULL_DEMAND = 1.494 * 0.25 * 10


@pytest.fixture()
def runner():
    return CliRunner()


def swo_request_file(tmp_path, demand=FULL_DEMAND):
    request = schemas.SwoSolveRequest(
        system=default_system(1, demand=demand),
        time_grid=GRID,
        prices={"values": [50.0] * 10},
        re_forecast_kw=[0.0] * 10,
    )
    path = tmp_path / "swo_request.json"
    path.write_text(request.model_dump_json())
    return path


class TestRunCommand:
    def test_run_writes_all_artifacts(self, runner, tmp_path):
        out = tmp_path / "run1"
        result = runner.invoke(main, [
            "run", "--config", str(DEFAULT_CONFIG), "--output", str(out), "--quiet",
        ])
        assert result.exit_code == 0, result.output
        for name in ("experiment_log.json", "metrics.json", "plan_initial.csv",
                     "realized_swo.csv", "realized_rto.csv"):
            assert (out / name).exists()
        for name in ("sum_input.csv", "efficiency.csv",
                     "re_forecast_vs_realized.csv", "deviation.csv"):
            assert (out / "figures" / name).exists()

    def test_identical_runs_produce_identical_logs(self, runner, tmp_path):
        outs = [tmp_path / "a", tmp_path / "b"]
        for out in outs:
            result = runner.invoke(main, [
                "run", "--config", str(DEFAULT_CONFIG), "--output", str(out), "--quiet",
            ])
            assert result.exit_code == 0, result.output
        first = (outs[0] / "experiment_log.json").read_bytes()
        second = (outs[1] / "experiment_log.json").read_bytes()
        assert first == second

    def test_missing_config_exits_2(self, runner, tmp_path):
        result = runner.invoke(main, ["run", "--config", str(tmp_path / "nope.json")])
        assert result.exit_code == 2
        assert "error code=config" in result.output or "error code=config" in (
            result.stderr if hasattr(result, "stderr") else "")

    def test_unknown_config_key_exits_2(self, runner, tmp_path):
        raw = json.loads(DEFAULT_CONFIG.read_text())
        raw["surprise"] = True
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(raw))
        result = runner.invoke(main, ["run", "--config", str(path)])
        assert result.exit_code == 2


class TestStageCommands:
    def test_swo_solve_to_file(self, runner, tmp_path):
        request = swo_request_file(tmp_path)
        out = tmp_path / "plan.json"
        result = runner.invoke(main, [
            "swo", "--request", str(request), "--output", str(out)])
        assert result.exit_code == 0, result.output
        plan = json.loads(out.read_text())
        assert plan["objective_eur"] == pytest.approx(0.30, abs=1e-9)

    def test_infeasible_swo_exits_3(self, runner, tmp_path):
        request = swo_request_file(tmp_path, demand=FULL_DEMAND + 1.0)
        result = runner.invoke(main, ["swo", "--request", str(request)])
        assert result.exit_code == 3

    def test_rto_simulate_report_pipeline(self, runner, tmp_path):
        request = swo_request_file(tmp_path)
        plan_path = tmp_path / "plan.json"
        assert runner.invoke(main, [
            "swo", "--request", str(request), "--output", str(plan_path),
        ]).exit_code == 0

        rto_request = schemas.RtoSolveRequest(
            system=default_system(1, demand=FULL_DEMAND),
            time_grid=GRID,
            plan=json.loads(plan_path.read_text()),
            tau_index=0,
            re_forecast_kw=[0.0] * 10,
        )
        rto_path = tmp_path / "rto_request.json"
        rto_path.write_text(rto_request.model_dump_json())
        sos_path = tmp_path / "sos.json"
        assert runner.invoke(main, [
            "rto", "--request", str(rto_path), "--output", str(sos_path),
        ]).exit_code == 0

        sim_request = schemas.SimulateRequest(
            system=default_system(1),
            sos=json.loads(sos_path.read_text()),
            actual_re_kw=[0.0] * 10,
            delta_t=0.025,
        )
        sim_path = tmp_path / "sim_request.json"
        sim_path.write_text(sim_request.model_dump_json())
        result = runner.invoke(main, ["simulate", "--request", str(sim_path)])
        assert result.exit_code == 0
        measurements = json.loads(result.output)["measurements"]
        assert len(measurements) == 10

    def test_report_command_with_figures(self, runner, tmp_path):
        out = tmp_path / "run"
        assert runner.invoke(main, [
            "run", "--config", str(DEFAULT_CONFIG), "--output", str(out), "--quiet",
        ]).exit_code == 0
        figures = tmp_path / "figs"
        result = runner.invoke(main, [
            "report", "--log", str(out / "experiment_log.json"),
            "--output", str(tmp_path / "metrics.json"),
            "--figures-dir", str(figures),
        ])
        assert result.exit_code == 0, result.output
        assert (figures / "deviation.csv").exists()
        metrics = json.loads((tmp_path / "metrics.json").read_text())
        assert metrics["cost_cross_check_ok"] is True

    def test_bad_request_file_exits_2(self, runner, tmp_path):
        path = tmp_path / "req.json"
        path.write_text("{\"not\": \"a request\"}")
        assert runner.invoke(main, ["swo", "--request", str(path)]).exit_code == 2


class TestServerMode:
    @pytest.fixture(scope="class")
    def server_url(self):
        import uvicorn

        from flexopt.service.app import create_app

        with socket.socket() as probe:
            probe.bind(("127.0.0.1", 0))
            port = probe.getsockname()[1]
        config = uvicorn.Config(create_app(), host="127.0.0.1", port=port,
                                log_level="error")
        server = uvicorn.Server(config)
        thread = threading.Thread(target=server.run, daemon=True)
        thread.start()
        deadline = time.time() + 10
        while not server.started and time.time() < deadline:
            time.sleep(0.02)
        assert server.started
        yield f"http://127.0.0.1:{port}"
        server.should_exit = True
        thread.join(timeout=5)

    def test_swo_against_a_live_server(self, runner, tmp_path, server_url):
        request = swo_request_file(tmp_path)
        result = runner.invoke(main, [
            "swo", "--request", str(request), "--server", server_url])
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["objective_eur"] == pytest.approx(0.30, abs=1e-9)

    def test_infeasible_maps_to_3_over_http(self, runner, tmp_path, server_url):
        request = swo_request_file(tmp_path, demand=FULL_DEMAND + 1.0)
        result = runner.invoke(main, [
            "swo", "--request", str(request), "--server", server_url])
        assert result.exit_code == 3

    def test_unreachable_server_exits_4(self, runner, tmp_path):
        request = swo_request_file(tmp_path)
        result = runner.invoke(main, [
            "swo", "--request", str(request), "--server", "http://127.0.0.1:9"])
        assert result.exit_code == 4
