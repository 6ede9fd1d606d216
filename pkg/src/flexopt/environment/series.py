"""Exogenous time series: wind traces and price data.

Wind traces are carried at the dispatch resolution. Raw files are CSV with
header ``time,power_kw`` (time in seconds, uniform spacing); prices use
``tau,eur_per_mwh``. Since the original measurement campaign data cannot be
redistributed, a seeded synthetic generator produces traces of the same
shape for self-contained runs.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..stages.types import PriceSeries

SECONDS_PER_HOUR = 3600.0


class TraceError(ValueError):
    """Raw trace file is unusable (empty, non-monotone, negative power...)."""


class ActualSeries(BaseModel):
    """Realized renewable power at a fixed resolution."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    values: tuple[float, ...]
    resolution_hours: float = Field(gt=0)
    origin: float = 0.0

    @field_validator("values")
    @classmethod
    def _non_negative(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        for i, x in enumerate(v):
            if x < 0:
                raise ValueError(f"power at index {i} is negative: {x}")
        return v

    def __len__(self) -> int:
        return len(self.values)

    def energy_kwh(self) -> float:
        return sum(self.values) * self.resolution_hours

    def mean(self, start: int, count: int) -> float:
        chunk = self.values[start:start + count]
        return sum(chunk) / len(chunk)


def load_trace(path: str | Path, target_resolution_hours: float) -> ActualSeries:
    """Load a raw trace and mean-downsample it to the target resolution.

    Downsampling preserves energy over the kept span; a trailing remainder
    that does not fill a whole bucket is dropped.
    """
    rows: list[tuple[float, float]] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) != {"time", "power_kw"}:
            raise TraceError(f"{path}: expected header 'time,power_kw'")
        for line in reader:
            rows.append((float(line["time"]), float(line["power_kw"])))
    if not rows:
        raise TraceError(f"{path}: no samples")

    times = np.array([t for t, _ in rows])
    powers = np.array([p for _, p in rows])
    if np.any(np.diff(times) <= 0):
        raise TraceError(f"{path}: time column is not strictly increasing")
    if np.any(powers < 0):
        bad = int(np.argmax(powers < 0))
        raise TraceError(f"{path}: negative power {powers[bad]} at row {bad}")

    if len(times) > 1:
        dt_s = float(np.diff(times).mean())
        if np.any(np.abs(np.diff(times) - dt_s) > 1e-6 * max(dt_s, 1.0)):
            raise TraceError(f"{path}: sample spacing is not uniform")
    else:
        dt_s = target_resolution_hours * SECONDS_PER_HOUR

    bucket = target_resolution_hours * SECONDS_PER_HOUR / dt_s
    bucket_n = int(round(bucket))
    if bucket_n < 1 or abs(bucket - bucket_n) > 1e-9 * max(bucket, 1.0):
        raise TraceError(
            f"{path}: target resolution {target_resolution_hours} h is not an "
            f"integer multiple of the {dt_s} s sample spacing"
        )
    n_buckets = len(powers) // bucket_n
    if n_buckets == 0:
        raise TraceError(f"{path}: fewer samples than one {target_resolution_hours} h bucket")
    downsampled = powers[: n_buckets * bucket_n].reshape(n_buckets, bucket_n).mean(axis=1)
    return ActualSeries(
        values=tuple(float(v) for v in downsampled),
        resolution_hours=target_resolution_hours,
        origin=float(times[0]),
    )


class SyntheticTraceParams(BaseModel):
    """Parameters of the bundled trace generator: sinusoid mix plus seeded noise."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    mean_kw: float = 0.06
    amplitude_kw: float = 0.03
    period_steps: float = 40.0
    second_amplitude_kw: float = 0.01
    second_period_steps: float = 7.0
    noise_kw: float = 0.004
    floor_kw: float = 0.0


def synthetic_trace(
    n_steps: int,
    resolution_hours: float,
    seed: int,
    params: SyntheticTraceParams | None = None,
) -> ActualSeries:
    """Deterministic synthetic wind trace (RNG key: [seed, 2])."""
    p = params or SyntheticTraceParams()
    rng = np.random.default_rng([seed, 2])
    t = np.arange(n_steps)
    values = (
        p.mean_kw
        + p.amplitude_kw * np.sin(2 * np.pi * t / p.period_steps)
        + p.second_amplitude_kw * np.sin(2 * np.pi * t / p.second_period_steps + 1.0)
        + p.noise_kw * rng.standard_normal(n_steps)
    )
    values = np.clip(values, p.floor_kw, None)
    return ActualSeries(
        values=tuple(float(v) for v in values),
        resolution_hours=resolution_hours,
    )


def load_prices(path: str | Path) -> PriceSeries:
    """Prices from CSV with header ``tau,eur_per_mwh``, ordered by tau."""
    entries: list[tuple[int, float]] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) != {"tau", "eur_per_mwh"}:
            raise TraceError(f"{path}: expected header 'tau,eur_per_mwh'")
        for line in reader:
            entries.append((int(line["tau"]), float(line["eur_per_mwh"])))
    if not entries:
        raise TraceError(f"{path}: no prices")
    entries.sort()
    if [tau for tau, _ in entries] != list(range(len(entries))):
        raise TraceError(f"{path}: tau column must cover 0..{len(entries) - 1}")
    return PriceSeries(values=tuple(p for _, p in entries))


def mean_per_block(values: Sequence[float], block: int) -> list[float]:
    """Energy-preserving aggregation of dispatch-step values to planning steps."""
    if len(values) % block != 0:
        raise ValueError(f"{len(values)} values do not tile into blocks of {block}")
    out = []
    for i in range(0, len(values), block):
        out.append(sum(values[i:i + block]) / block)
    return out
