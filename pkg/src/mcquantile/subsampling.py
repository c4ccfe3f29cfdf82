"""Subsampling bootstrap variance estimation for the quantile CI.

The trace is split into all n-b+1 overlapping blocks of length b; the
quantile is recomputed over each block and the dispersion of the block
estimates, scaled by b, estimates the asymptotic variance directly -- no
density estimate is needed.  Recomputing an order statistic per block is the
expensive part, so the blocks are swept with a sliding multiset that supports
insert, delete-by-value and select-by-rank in logarithmic time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .trace import (
    InvalidInputError,
    QuantileEstimate,
    QuantileSpec,
    ScalarTrace,
    empirical_quantile,
    quantile_index,
)

__all__ = [
    "SubsampleLayout",
    "default_subsample_layout",
    "SlidingQuantileWindow",
    "block_quantiles",
    "sbm_gamma2",
    "sbm_quantile_ci",
]


@dataclass(frozen=True)
class SubsampleLayout:
    """Overlapping blocks of length b; there are n - b + 1 of them."""

    block_length: int

    def __post_init__(self):
        if self.block_length < 2:
            raise InvalidInputError("block length must be >= 2")

    def block_count(self, n: int) -> int:
        if self.block_length >= n:
            raise InvalidInputError(
                f"block length {self.block_length} must be < trace length {n}"
            )
        return n - self.block_length + 1


def default_subsample_layout(n: int) -> SubsampleLayout:
    """b = floor(sqrt(n)), the same rule used for batch means."""
    b = math.isqrt(n)
    if b < 2 or b >= n:
        raise InvalidInputError(f"trace of length {n} is too short for subsampling")
    return SubsampleLayout(block_length=b)


class SlidingQuantileWindow:
    """Multiset over a fixed universe of candidate values, backed by a Fenwick
    tree of per-value counts.  Duplicated values are held as counts, so
    deletion by value is unambiguous under ties and select(k) agrees with a
    full sort of the current contents.
    """

    def __init__(self, universe):
        self._keys = np.unique(np.asarray(universe, dtype=float))
        if self._keys.size == 0:
            raise InvalidInputError("universe must be nonempty")
        self._tree = [0] * (self._keys.size + 1)
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def _rank_of(self, value: float) -> int:
        i = int(np.searchsorted(self._keys, value))
        if i >= self._keys.size or self._keys[i] != value:
            raise InvalidInputError(f"value {value!r} is not in the window universe")
        return i

    def _update(self, rank: int, delta: int) -> None:
        i = rank + 1
        tree = self._tree
        while i < len(tree):
            tree[i] += delta
            i += i & (-i)
        self._size += delta

    def insert(self, value: float) -> None:
        self._update(self._rank_of(value), 1)

    def remove(self, value: float) -> None:
        rank = self._rank_of(value)
        i = rank + 1
        total = 0
        tree = self._tree
        while i > 0:  # prefix count up to and including this value
            total += tree[i]
            i -= i & (-i)
        j = rank
        one_less = 0
        jj = j
        while jj > 0:
            one_less += tree[jj]
            jj -= jj & (-jj)
        if total - one_less <= 0:
            raise InvalidInputError(f"value {value!r} is not currently in the window")
        self._update(rank, -1)

    def select(self, k: int) -> float:
        """k-th smallest of the current contents, 1-based."""
        if not 1 <= k <= self._size:
            raise InvalidInputError(f"rank {k} out of range for window of size {self._size}")
        tree = self._tree
        pos = 0
        step = 1 << (len(tree).bit_length() - 1)
        remaining = k
        while step > 0:
            nxt = pos + step
            if nxt < len(tree) and tree[nxt] < remaining:
                pos = nxt
                remaining -= tree[nxt]
            step >>= 1
        return float(self._keys[pos])


def block_quantiles(
    trace: ScalarTrace, spec: QuantileSpec, layout: SubsampleLayout
) -> np.ndarray:
    """Rank-j order statistic (j-1 < bq <= j) of every overlapping block of
    length b, in O(n log n) total via a sliding multiset."""
    values = trace.values
    n = values.size
    b = layout.block_length
    count = layout.block_count(n)
    j = quantile_index(b, spec.q)

    keys = np.unique(values)
    ranks = np.searchsorted(keys, values)
    tree = [0] * (keys.size + 1)
    treelen = len(tree)
    topstep = 1 << (treelen.bit_length() - 1)

    def update(rank, delta):
        i = rank + 1
        while i < treelen:
            tree[i] += delta
            i += i & (-i)

    out = np.empty(count)
    for i in range(b):
        update(ranks[i], 1)
    for i in range(count):
        # Fenwick descent for the j-th smallest
        pos = 0
        step = topstep
        remaining = j
        while step > 0:
            nxt = pos + step
            if nxt < treelen and tree[nxt] < remaining:
                pos = nxt
                remaining -= tree[nxt]
            step >>= 1
        out[i] = keys[pos]
        if i + 1 < count:
            update(ranks[i], -1)
            update(ranks[i + b], 1)
    return out


def sbm_gamma2(trace: ScalarTrace, spec: QuantileSpec, layout: SubsampleLayout) -> float:
    """(b/(n-b+1)) * sum_i (xi*_i - mean(xi*))^2 over the block quantiles."""
    xi = block_quantiles(trace, spec, layout)
    b = layout.block_length
    return float(b / xi.size * np.sum((xi - xi.mean()) ** 2))


def sbm_quantile_ci(
    trace: ScalarTrace,
    spec: QuantileSpec,
    confidence: float = 0.95,
    layout: SubsampleLayout | None = None,
) -> QuantileEstimate:
    """Quantile point estimate with a subsampling interval: point +/-
    z_{alpha/2} * sqrt(gamma2_S) / sqrt(n)."""
    n = len(trace)
    if n < 9:
        raise InvalidInputError("subsampling interval needs at least 9 iterations")
    if not (0.0 < confidence < 1.0):
        raise InvalidInputError("confidence must be in (0, 1)")
    if layout is None:
        layout = default_subsample_layout(n)
    point = empirical_quantile(trace, spec)
    gamma2 = sbm_gamma2(trace, spec, layout)
    z = float(ndtri(0.5 + confidence / 2.0))
    mcse = math.sqrt(gamma2 / n)
    half = z * mcse
    return QuantileEstimate(
        point=point,
        method="SBM",
        avar=gamma2,
        mcse=mcse,
        ci_low=point - half,
        ci_high=point + half,
        confidence=confidence,
        details={"block_length": layout.block_length, "n": n},
    )
