"""Shared fixtures: the bundled fleet, small grids, and experiment configs."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from flexopt.model_core import TimeGrid, default_system
from flexopt.orchestrator import ExperimentConfig, load_config

REPO_ROOT = Path(__file__).resolve().parent.parent
DEFAULT_CONFIG = REPO_ROOT / "configs" / "default_experiment.json"
WINDY_CONFIG = REPO_ROOT / "configs" / "windy_experiment.json"


@pytest.fixture(scope="session")
def default_grid() -> TimeGrid:
    return TimeGrid(delta_tau=0.25, delta_t=0.025, n_swo=10, n_rto=10)


@pytest.fixture(scope="session")
def single_resource_system():
    return default_system(1)


@pytest.fixture(scope="session")
def fleet_system():
    return default_system(3)


@pytest.fixture(scope="session")
def default_config() -> ExperimentConfig:
    return load_config(DEFAULT_CONFIG)


@pytest.fixture()
def tiny_config(tmp_path) -> ExperimentConfig:
    """One planning step, one dispatch step, nothing to do."""
    raw = json.loads(DEFAULT_CONFIG.read_text())
    raw["time_grid"] = {"delta_tau": 0.25, "delta_t": 0.25, "n_swo": 1, "n_rto": 1}
    raw["prices"] = {"values": [10.0]}
    raw["trace"]["synthetic"]["mean_kw"] = 0.0
    raw["trace"]["synthetic"]["amplitude_kw"] = 0.0
    raw["trace"]["synthetic"]["second_amplitude_kw"] = 0.0
    raw["trace"]["synthetic"]["noise_kw"] = 0.0
    raw["trace"]["synthetic"]["floor_kw"] = 0.0
    raw["output"] = {"dir": str(tmp_path / "tiny")}
    return ExperimentConfig.model_validate(raw)
