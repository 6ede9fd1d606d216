"""Lead-time-dependent forecast generation.

The error process is multiplicative truncated-Gaussian: the forecast for a
step at lead L is ``actual * max(0, 1 + e)`` with ``e ~ N(0, sigma0 +
sigma1 * L)``; lead 0 (and anything already in the past) reproduces the
actual value exactly. Every draw comes from a counter-based generator
keyed as ``numpy.random.default_rng([seed, domain, issue, index])``, so any
single value can be regenerated in isolation and the whole process is
reproducible from one experiment seed. Domains separate independent
consumers of the seed: 0 = long-term forecasts, 1 = short-term forecasts,
2 = synthetic traces, 3 = plant actuator noise.
"""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .series import ActualSeries

DOMAIN_LONG_TERM = 0
DOMAIN_SHORT_TERM = 1
DOMAIN_TRACE = 2
DOMAIN_PLANT_NOISE = 3


class ForecastSeries(BaseModel):
    """Forecast values with issue-time semantics."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    issue: int = Field(ge=0, description="index the forecast was generated at")
    first_index: int
    values: tuple[float, ...]
    leads: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.values)


def noise_draw(seed: int, domain: int, issue: int, index: int) -> float:
    """The documented single-draw recipe behind every forecast value."""
    return float(np.random.default_rng([seed, domain, issue, index]).standard_normal())


def make_forecast(
    actual: ActualSeries,
    issue: int,
    horizon: int,
    sigma0: float,
    sigma1: float,
    seed: int,
    *,
    domain: int = DOMAIN_SHORT_TERM,
    lead_unit: int = 1,
) -> ForecastSeries:
    """Forecast for indices ``issue .. issue + horizon - 1``.

    ``lead_unit`` counts how many series indices make up one lead step for
    the sigma schedule; long-term forecasts over dispatch-resolution data
    pass the number of dispatch steps per planning step so that uncertainty
    grows per planning step.
    """
    if issue + horizon > len(actual):
        raise ValueError(
            f"forecast window {issue}..{issue + horizon - 1} exceeds series "
            f"length {len(actual)}"
        )
    values = []
    leads = []
    for j in range(issue, issue + horizon):
        lead = (j - issue) // lead_unit
        if lead <= 0:
            value = actual.values[j]
        else:
            sigma = sigma0 + sigma1 * lead
            eps = noise_draw(seed, domain, issue, j) * sigma
            value = actual.values[j] * max(0.0, 1.0 + eps)
        values.append(float(value))
        leads.append(lead)
    return ForecastSeries(
        issue=issue, first_index=issue, values=tuple(values), leads=tuple(leads)
    )
