"""Experiment configuration.

One JSON document with sections {system, time_grid, forecast, prices,
trace, solver, output}; unknown keys anywhere are errors, since a silently
ignored typo can corrupt a whole study. All randomness in an experiment
flows from the single top-level seed (see `flexopt.environment.forecast`
for the per-domain key layout).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..environment.series import (
    ActualSeries,
    SyntheticTraceParams,
    load_prices,
    load_trace,
    synthetic_trace,
)
from ..model_core.defaults import bundled_system, load_system
from ..model_core.types import SystemSpec, TimeGrid
from ..stages.types import PriceSeries


class ConfigError(ValueError):
    """Configuration file is missing, malformed, or inconsistent."""


class SystemConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    source: str = "default"
    n_resources: int = Field(default=3, gt=0)
    demand_kwh: Optional[float] = None
    demand_applies_to: str = "output"
    grid_p_max: float = 10.0
    allow_curtailment: bool = True


class ForecastConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    sigma0: float = Field(default=0.01, ge=0)
    sigma1: float = Field(default=0.02, ge=0)


class PricesConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    values: Optional[tuple[float, ...]] = None
    csv: Optional[str] = None

    @model_validator(mode="after")
    def _one_source(self) -> "PricesConfig":
        if (self.values is None) == (self.csv is None):
            raise ValueError("prices need exactly one of 'values' or 'csv'")
        return self


class TraceConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    synthetic: Optional[SyntheticTraceParams] = None
    csv: Optional[str] = None

    @model_validator(mode="after")
    def _one_source(self) -> "TraceConfig":
        if (self.synthetic is None) == (self.csv is None):
            raise ValueError("trace needs exactly one of 'synthetic' or 'csv'")
        return self


class SolverConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    gap: float = Field(default=1e-3, gt=0)


class OutputConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    dir: str = "runs/experiment"


class PlantConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    input_noise_kw: float = Field(default=0.0, ge=0)


class ExperimentConfig(BaseModel):
    """Everything a run needs; seed fixed means the whole run is deterministic."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = 0
    time_grid: TimeGrid
    system: SystemConfig = SystemConfig()
    forecast: ForecastConfig = ForecastConfig()
    prices: PricesConfig
    trace: TraceConfig
    solver: SolverConfig = SolverConfig()
    plant: PlantConfig = PlantConfig()
    relaxation_penalty: float = Field(default=10.0, ge=0)
    output: Optional[OutputConfig] = None

    def without_output(self) -> "ExperimentConfig":
        """The experiment identity: same config minus delivery paths."""
        return self.model_copy(update={"output": None})

    def build_system(self, base_dir: Path | None = None) -> SystemSpec:
        if self.system.source == "default":
            base = bundled_system()
            resources = tuple(
                base.resources[i % len(base.resources)].model_copy(
                    update={"name": f"electrolyzer_{i + 1}"}
                )
                for i in range(self.system.n_resources)
            )
        else:
            path = _resolve(self.system.source, base_dir)
            resources = load_system(path).resources
        return SystemSpec(
            resources=resources,
            grid_p_max=self.system.grid_p_max,
            allow_curtailment=self.system.allow_curtailment,
            demand=self.system.demand_kwh,
            demand_applies_to=self.system.demand_applies_to,  # type: ignore[arg-type]
        )

    def build_prices(self, base_dir: Path | None = None) -> PriceSeries:
        if self.prices.values is not None:
            series = PriceSeries(values=self.prices.values)
        else:
            series = load_prices(_resolve(self.prices.csv, base_dir))
        if len(series) != self.time_grid.n_swo:
            raise ConfigError(
                f"{len(series)} prices for {self.time_grid.n_swo} planning steps"
            )
        return series

    def build_trace(self, base_dir: Path | None = None) -> ActualSeries:
        grid = self.time_grid
        if self.trace.synthetic is not None:
            series = synthetic_trace(
                grid.n_slots, grid.delta_t, self.seed, self.trace.synthetic
            )
        else:
            series = load_trace(_resolve(self.trace.csv, base_dir), grid.delta_t)
        if len(series) < grid.n_slots:
            raise ConfigError(
                f"trace provides {len(series)} dispatch steps, horizon needs {grid.n_slots}"
            )
        return series


def _resolve(path: str | None, base_dir: Path | None) -> Path:
    assert path is not None
    p = Path(path)
    if not p.is_absolute() and base_dir is not None:
        p = base_dir / p
    return p


def resolve_config_paths(cfg: ExperimentConfig, base_dir: Path) -> ExperimentConfig:
    """Rewrite relative file references against ``base_dir`` (the config's home)."""
    updates: dict = {}
    if cfg.system.source != "default":
        updates["system"] = cfg.system.model_copy(
            update={"source": str(_resolve(cfg.system.source, base_dir))}
        )
    if cfg.prices.csv is not None:
        updates["prices"] = cfg.prices.model_copy(
            update={"csv": str(_resolve(cfg.prices.csv, base_dir))}
        )
    if cfg.trace.csv is not None:
        updates["trace"] = cfg.trace.model_copy(
            update={"csv": str(_resolve(cfg.trace.csv, base_dir))}
        )
    return cfg.model_copy(update=updates) if updates else cfg


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(f"config file {path} is invalid: {exc}") from exc
