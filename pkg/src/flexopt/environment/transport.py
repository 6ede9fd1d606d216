"""Optional line-delimited JSON plant transport over a local socket.

One request per line: ``{"step": N, "setpoints": [{"resource": R, "state":
S, "p_input_kw": P}, ...]}``; the response line is the Measurement JSON (or
``{"error": {"message": ...}}``). The in-process call is the default
binding; this transport exists for running the plant as a separate
process.
"""

from __future__ import annotations

import json
import socket
import socketserver
import threading
from typing import Sequence

from .plant import Measurement, PlantError, Setpoint, SimulatedPlant


class PlantServer:
    """Serves one `SimulatedPlant` over TCP; requests are serialized."""

    def __init__(self, plant: SimulatedPlant, host: str = "127.0.0.1", port: int = 0):
        self._plant = plant
        self._lock = threading.Lock()
        outer = self

        class Handler(socketserver.StreamRequestHandler):
            def handle(self) -> None:
                for raw in self.rfile:
                    line = raw.decode("utf-8").strip()
                    if not line:
                        continue
                    try:
                        request = json.loads(line)
                        setpoints = [
                            Setpoint(
                                resource=sp["resource"],
                                state=sp["state"],
                                p_input_kw=sp["p_input_kw"],
                            )
                            for sp in request.get("setpoints", [])
                        ]
                        with outer._lock:
                            measurement = outer._plant.apply(request["step"], setpoints)
                        payload = measurement.model_dump_json()
                    except Exception as exc:  # reported to the client, not raised here
                        payload = json.dumps({"error": {"message": str(exc)}})
                    self.wfile.write(payload.encode("utf-8") + b"\n")
                    self.wfile.flush()

        class Server(socketserver.ThreadingTCPServer):
            allow_reuse_address = True
            daemon_threads = True

        self._server = Server((host, port), Handler)
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> tuple[str, int]:
        host, port = self._server.server_address[:2]
        return str(host), int(port)

    def start(self) -> None:
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)


class PlantClient:
    """Line-delimited JSON client; mirrors `SimulatedPlant.apply`."""

    def __init__(self, host: str, port: int, timeout: float = 5.0):
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._reader = self._sock.makefile("rb")

    def apply(self, step: int, setpoints: Sequence[Setpoint]) -> Measurement:
        request = {
            "step": step,
            "setpoints": [
                {"resource": sp.resource, "state": sp.state, "p_input_kw": sp.p_input_kw}
                for sp in setpoints
            ],
        }
        try:
            self._sock.sendall(json.dumps(request).encode("utf-8") + b"\n")
            line = self._reader.readline()
        except OSError as exc:
            raise PlantError(f"plant transport failure: {exc}") from exc
        if not line:
            raise PlantError("plant closed the connection")
        payload = json.loads(line)
        if "error" in payload:
            raise PlantError(payload["error"].get("message", "plant error"))
        return Measurement.model_validate(payload)

    def close(self) -> None:
        try:
            self._reader.close()
        finally:
            self._sock.close()
