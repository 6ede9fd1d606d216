"""Command-line client for the optimization service.

Every subcommand builds the same request model the HTTP endpoint accepts
and either calls the service handler in-process (default) or posts it to a
running server (``--server URL``). Exit codes: 0 success, 2 configuration
or input error, 3 infeasible, 4 transport error, 5 internal error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Callable, Optional, TypeVar

import click
import httpx
from pydantic import BaseModel, ValidationError

from .milp.encodings import DataError, EncodingError
from .milp.solver import SolverError
from .orchestrator.config import ConfigError, load_config, resolve_config_paths
from .orchestrator.logbook import ExperimentLog
from .reporting.figures import write_figure_csvs
from .reporting.metrics import ReportError
from .service import handlers, schemas
from .service.handlers import ServiceError
from .stages.types import StageInfeasibleError, schedule_to_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_TRANSPORT = 4
EXIT_INTERNAL = 5

_HTTP_EXIT = {400: EXIT_CONFIG, 404: EXIT_CONFIG, 409: EXIT_INFEASIBLE, 422: EXIT_CONFIG}

R = TypeVar("R", bound=BaseModel)


class CliFailure(Exception):
    def __init__(self, exit_code: int, code: str, message: str):
        super().__init__(message)
        self.exit_code = exit_code
        self.code = code
        self.message = message


def _fail(exit_code: int, code: str, message: str) -> "CliFailure":
    return CliFailure(exit_code, code, message)


def _dispatch(
    server: Optional[str],
    path: str,
    request: BaseModel,
    response_type: type[R],
    local: Callable[..., BaseModel],
) -> R:
    """Run a service call either in-process or against a remote server."""
    if server is None:
        try:
            return response_type.model_validate(local(request).model_dump())
        except (ConfigError, DataError, EncodingError, ReportError, ValidationError) as exc:
            raise _fail(EXIT_CONFIG, "config", str(exc)) from exc
        except ServiceError as exc:
            raise _fail(EXIT_CONFIG, exc.code, exc.message) from exc
        except StageInfeasibleError as exc:
            raise _fail(EXIT_INFEASIBLE, "infeasible", str(exc)) from exc
        except SolverError as exc:
            raise _fail(EXIT_INTERNAL, "solver", str(exc)) from exc
    try:
        reply = httpx.post(
            server.rstrip("/") + path,
            json=request.model_dump(mode="json"),
            timeout=600.0,
        )
    except httpx.HTTPError as exc:
        raise _fail(EXIT_TRANSPORT, "transport", f"cannot reach {server}: {exc}") from exc
    if reply.status_code != 200:
        code, message = _decode_error(reply)
        raise _fail(_HTTP_EXIT.get(reply.status_code, EXIT_INTERNAL), code, message)
    return response_type.model_validate(reply.json())


def _decode_error(reply: httpx.Response) -> tuple[str, str]:
    try:
        body = reply.json()
        if "error" in body:
            return body["error"]["code"], body["error"]["message"]
        return "validation", json.dumps(body.get("detail", body))
    except Exception:
        return "http", f"status {reply.status_code}"


def _load_request(path: str, model: type[R]) -> R:
    try:
        return model.model_validate_json(Path(path).read_text())
    except FileNotFoundError as exc:
        raise _fail(EXIT_CONFIG, "config", f"request file not found: {path}") from exc
    except ValidationError as exc:
        raise _fail(EXIT_CONFIG, "config", f"request file {path} is invalid: {exc}") from exc


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _run_cli(body: Callable[[], int]) -> None:
    try:
        sys.exit(body())
    except CliFailure as exc:
        print(f"error code={exc.code} message={json.dumps(exc.message)}", file=sys.stderr)
        sys.exit(exc.exit_code)
    except Exception as exc:  # anything unmapped is an internal error
        print(f"error code=internal message={json.dumps(str(exc))}", file=sys.stderr)
        sys.exit(EXIT_INTERNAL)


@click.group()
def main() -> None:
    """Two-stage rolling-horizon optimization for flexible energy fleets."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="experiment JSON")
@click.option("--seed", type=int, default=None, help="override the config seed")
@click.option("--output", "output_dir", type=click.Path(), default=None,
              help="artifact directory (default from config)")
@click.option("--server", default=None, help="service URL; default runs in-process")
@click.option("--quiet/--no-quiet", default=False, help="suppress per-solve progress lines")
def run(config_path: str, seed: Optional[int], output_dir: Optional[str],
        server: Optional[str], quiet: bool) -> None:
    """Run a full experiment and write its artifacts."""

    def body() -> int:
        try:
            cfg = load_config(config_path)
        except ConfigError as exc:
            raise _fail(EXIT_CONFIG, "config", str(exc)) from exc
        cfg = resolve_config_paths(cfg, Path(config_path).resolve().parent)
        if seed is not None:
            cfg = cfg.model_copy(update={"seed": seed})
        out = Path(output_dir or (cfg.output.dir if cfg.output else "runs/experiment"))

        response = _dispatch(
            server, "/experiments/run",
            schemas.RunRequest(config=cfg, quiet=quiet or server is not None),
            schemas.RunResponse, handlers.run,
        )
        log = response.log
        names = [res.name for res in cfg.build_system().resources]
        _write(out / "experiment_log.json", log.to_json())
        _write(out / "plan_initial.csv",
               schedule_to_csv(log.initial_plan.steps, names))
        _write(out / "realized_swo.csv",
               schedule_to_csv(log.realized_swo.steps[1:], names))
        _write(out / "realized_rto.csv",
               schedule_to_csv(log.realized_rto.steps[1:], names))
        if log.status != "completed":
            raise _fail(EXIT_INFEASIBLE, "failed", log.failure or "run failed")
        assert response.metrics is not None
        _write(out / "metrics.json", response.metrics.model_dump_json(indent=2) + "\n")
        write_figure_csvs(log, response.metrics, out / "figures")
        print(f"run complete: {out / 'experiment_log.json'}")
        return EXIT_OK

    _run_cli(body)


@main.command()
@click.option("--request", "request_path", required=True, type=click.Path(),
              help="SwoSolveRequest JSON")
@click.option("--output", "output_path", type=click.Path(), default=None)
@click.option("--server", default=None)
def swo(request_path: str, output_path: Optional[str], server: Optional[str]) -> None:
    """Solve a single planning stage from a serialized request."""

    def body() -> int:
        request = _load_request(request_path, schemas.SwoSolveRequest)
        response = _dispatch(server, "/stages/swo", request,
                             schemas.SwoSolveResponse, handlers.solve_swo)
        text = response.plan.model_dump_json(indent=2) + "\n"
        if output_path:
            _write(Path(output_path), text)
        else:
            print(text, end="")
        return EXIT_OK

    _run_cli(body)


@main.command()
@click.option("--request", "request_path", required=True, type=click.Path(),
              help="RtoSolveRequest JSON")
@click.option("--output", "output_path", type=click.Path(), default=None)
@click.option("--server", default=None)
def rto(request_path: str, output_path: Optional[str], server: Optional[str]) -> None:
    """Solve a single dispatch stage from a serialized request."""

    def body() -> int:
        request = _load_request(request_path, schemas.RtoSolveRequest)
        response = _dispatch(server, "/stages/rto", request,
                             schemas.RtoSolveResponse, handlers.solve_rto)
        text = response.sos.model_dump_json(indent=2) + "\n"
        if output_path:
            _write(Path(output_path), text)
        else:
            print(text, end="")
        return EXIT_OK

    _run_cli(body)


@main.command()
@click.option("--request", "request_path", required=True, type=click.Path(),
              help="SimulateRequest JSON")
@click.option("--output", "output_path", type=click.Path(), default=None)
@click.option("--server", default=None)
def simulate(request_path: str, output_path: Optional[str], server: Optional[str]) -> None:
    """Replay a setpoint schedule through the simulated plant."""

    def body() -> int:
        request = _load_request(request_path, schemas.SimulateRequest)
        response = _dispatch(server, "/plant/simulate", request,
                             schemas.SimulateResponse, handlers.simulate)
        text = response.model_dump_json(indent=2) + "\n"
        if output_path:
            _write(Path(output_path), text)
        else:
            print(text, end="")
        return EXIT_OK

    _run_cli(body)


@main.command()
@click.option("--log", "log_path", required=True, type=click.Path(),
              help="experiment_log.json of a completed run")
@click.option("--output", "output_path", type=click.Path(), default=None,
              help="metrics JSON destination (default: stdout)")
@click.option("--figures-dir", type=click.Path(), default=None,
              help="emit figure-data CSVs into this directory")
@click.option("--server", default=None)
def report(log_path: str, output_path: Optional[str], figures_dir: Optional[str],
           server: Optional[str]) -> None:
    """Compute metrics (and optionally figure data) from an experiment log."""

    def body() -> int:
        try:
            log = ExperimentLog.model_validate_json(Path(log_path).read_text())
        except FileNotFoundError as exc:
            raise _fail(EXIT_CONFIG, "config", f"log file not found: {log_path}") from exc
        except ValidationError as exc:
            raise _fail(EXIT_CONFIG, "config", f"log file {log_path} is invalid: {exc}") from exc
        response = _dispatch(server, "/reports/compute",
                             schemas.ReportRequest(log=log),
                             schemas.ReportResponse, handlers.report)
        text = response.metrics.model_dump_json(indent=2) + "\n"
        if output_path:
            _write(Path(output_path), text)
        else:
            print(text, end="")
        if figures_dir:
            write_figure_csvs(log, response.metrics, figures_dir)
        return EXIT_OK

    _run_cli(body)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host: str, port: int) -> None:
    """Start the HTTP service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
