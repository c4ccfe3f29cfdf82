"""Gaussian-kernel density estimation at a single point.

Both the batch-means and regenerative intervals divide by a squared density
estimate at the quantile point, so this is a shared dependency.  The
bandwidth auto-rule is Silverman's: 0.9 * min(sd, IQR/1.34) * n^(-1/5).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .trace import DegenerateDataError, InvalidInputError, ScalarTrace

__all__ = ["KdeConfig", "silverman_bandwidth", "resolve_bandwidth", "kde_at"]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class KdeConfig:
    """Bandwidth is either an explicit positive number or "silverman"."""

    bandwidth: float | str = "silverman"

    def __post_init__(self):
        if isinstance(self.bandwidth, str):
            if self.bandwidth != "silverman":
                raise InvalidInputError(f"unknown bandwidth rule {self.bandwidth!r}")
        elif not self.bandwidth > 0:
            raise InvalidInputError("explicit bandwidth must be positive")


def silverman_bandwidth(values: np.ndarray) -> float:
    n = values.size
    sd = float(np.std(values, ddof=1)) if n > 1 else 0.0
    q75, q25 = np.percentile(values, [75.0, 25.0])
    iqr = float(q75 - q25)
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    return 0.9 * spread * n ** (-0.2)


def resolve_bandwidth(trace: ScalarTrace, config: KdeConfig) -> float:
    if isinstance(config.bandwidth, str):
        h = silverman_bandwidth(trace.values)
        if not h > 0:
            raise DegenerateDataError(
                "automatic bandwidth is zero (constant or near-constant trace)"
            )
        return h
    return float(config.bandwidth)


def kde_at(trace: ScalarTrace, x: float, config: KdeConfig = KdeConfig()) -> float:
    """Gaussian KDE evaluated at the single point x: (nh)^-1 sum phi((x-Y_i)/h).

    Exact O(n) summation; strictly positive and finite for finite inputs.
    """
    h = resolve_bandwidth(trace, config)
    z = (x - trace.values) / h
    return float(np.mean(np.exp(-0.5 * z * z))) / (h * _SQRT_2PI)
