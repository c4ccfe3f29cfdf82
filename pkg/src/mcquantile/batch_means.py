"""Batch-means variance estimation for the quantile CI.

The chain is cut into a_n consecutive batches of b_n iterations.  Batch means
of the indicator I(Y <= threshold) estimate the asymptotic variance of the
empirical CDF at the threshold; dividing by a squared density estimate turns
that into an asymptotic variance for the quantile itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .density import KdeConfig, kde_at, resolve_bandwidth
from .trace import (
    DegenerateDataError,
    InvalidInputError,
    QuantileEstimate,
    QuantileSpec,
    ScalarTrace,
    empirical_quantile,
)

__all__ = ["BatchLayout", "default_batch_layout", "bm_sigma2", "bm_quantile_ci"]


@dataclass(frozen=True)
class BatchLayout:
    """a_n batches of b_n iterations; the trailing n - a_n*b_n are unused."""

    batch_count: int
    batch_size: int

    def __post_init__(self):
        if self.batch_count < 2:
            raise InvalidInputError("need at least 2 batches")
        if self.batch_size < 1:
            raise InvalidInputError("batch size must be >= 1")

    @property
    def used_length(self) -> int:
        return self.batch_count * self.batch_size


def default_batch_layout(n: int) -> BatchLayout:
    """b_n = floor(sqrt(n)), a_n = floor(n / b_n); remainder truncated."""
    b = math.isqrt(n)
    if b < 1 or n // b < 2:
        raise InvalidInputError(f"trace of length {n} is too short for batch means")
    return BatchLayout(batch_count=n // b, batch_size=b)


def bm_sigma2(trace: ScalarTrace, threshold: float, layout: BatchLayout) -> float:
    """Batch-means estimate of the asymptotic variance of F_n(threshold):
    (b_n/(a_n-1)) * sum_k (Ubar_k - Fbar)^2, Fbar the ECDF over the used
    prefix so that the batch means center exactly."""
    a, b = layout.batch_count, layout.batch_size
    if layout.used_length > len(trace):
        raise InvalidInputError(
            f"layout uses {layout.used_length} iterations but trace has {len(trace)}"
        )
    ind = (trace.values[: a * b] <= threshold).astype(float)
    batch_means = ind.reshape(a, b).mean(axis=1)
    fbar = ind.mean()
    return float(b / (a - 1) * np.sum((batch_means - fbar) ** 2))


def bm_quantile_ci(
    trace: ScalarTrace,
    spec: QuantileSpec,
    confidence: float = 0.95,
    kde: KdeConfig = KdeConfig(),
    layout: BatchLayout | None = None,
) -> QuantileEstimate:
    """Quantile point estimate with a batch-means interval: point +/-
    z_{alpha/2} * sqrt(avar) / sqrt(n), avar = bm_sigma2 / kde_at^2."""
    n = len(trace)
    if n < 4:
        raise InvalidInputError("batch-means interval needs at least 4 iterations")
    if not (0.0 < confidence < 1.0):
        raise InvalidInputError("confidence must be in (0, 1)")
    if layout is None:
        layout = default_batch_layout(n)
    point = empirical_quantile(trace, spec)
    sigma2 = bm_sigma2(trace, point, layout)
    if sigma2 == 0.0:
        # degenerate spread (e.g. constant trace): the interval collapses and
        # no density estimate is needed
        avar, h = 0.0, None
    else:
        h = resolve_bandwidth(trace, kde)
        fhat = kde_at(trace, point, KdeConfig(bandwidth=h))
        if fhat <= 0.0:
            raise DegenerateDataError("density estimate at the quantile is zero")
        avar = sigma2 / fhat**2
    z = float(ndtri(0.5 + confidence / 2.0))
    mcse = math.sqrt(avar / n)
    half = z * mcse
    return QuantileEstimate(
        point=point,
        method="BM",
        avar=avar,
        mcse=mcse,
        ci_low=point - half,
        ci_high=point + half,
        confidence=confidence,
        details={
            "batch_count": layout.batch_count,
            "batch_size": layout.batch_size,
            "bandwidth": h,
            "n": n,
        },
    )
