"""Exogenous data and the simulated plant."""

from .forecast import (
    DOMAIN_LONG_TERM,
    DOMAIN_PLANT_NOISE,
    DOMAIN_SHORT_TERM,
    DOMAIN_TRACE,
    ForecastSeries,
    make_forecast,
    noise_draw,
)
from .plant import (
    Measurement,
    PlantError,
    ResourceMeasurement,
    Setpoint,
    SimulatedPlant,
    plant_apply,
    split_supply,
)
from .series import (
    ActualSeries,
    SyntheticTraceParams,
    TraceError,
    load_prices,
    load_trace,
    mean_per_block,
    synthetic_trace,
)
from .transport import PlantClient, PlantServer

__all__ = [
    "ActualSeries",
    "DOMAIN_LONG_TERM",
    "DOMAIN_PLANT_NOISE",
    "DOMAIN_SHORT_TERM",
    "DOMAIN_TRACE",
    "ForecastSeries",
    "Measurement",
    "PlantClient",
    "PlantError",
    "PlantServer",
    "ResourceMeasurement",
    "Setpoint",
    "SimulatedPlant",
    "SyntheticTraceParams",
    "TraceError",
    "load_prices",
    "load_trace",
    "make_forecast",
    "mean_per_block",
    "noise_draw",
    "plant_apply",
    "split_supply",
    "synthetic_trace",
]
