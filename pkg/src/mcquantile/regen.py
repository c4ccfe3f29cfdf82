"""Split-chain regenerative simulation: tour bookkeeping, the ratio-based
variance estimator and its quantile CI, plus the retrospective regeneration
probability for the Normal-proposal Metropolis random walk on a t(v) target.

Regeneration flags are decided retrospectively: after an accepted jump from x
to y the flag is Bernoulli with the minorization ratio r_A(x, y); rejected
moves never regenerate.  Tours between regenerations are i.i.d., which makes
the variance estimator a plain ratio-estimator dispersion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .density import KdeConfig, kde_at, resolve_bandwidth
from .samplers import t_quantile
from .trace import (
    DegenerateDataError,
    InvalidInputError,
    QuantileEstimate,
    QuantileSpec,
    ScalarTrace,
    empirical_quantile,
)

__all__ = [
    "RwRegenParams",
    "RegenTrace",
    "regen_prob_accepted",
    "run_regenerative_rw",
    "rs_cdf_at",
    "rs_gamma_hat",
    "rs_quantile_ci",
]


@dataclass(frozen=True)
class RwRegenParams:
    """Minorization ingredients for the random-walk sampler on t(df).

    Defaults: center 0, window half-width 2*sqrt(df/(df-2)) (two target
    standard deviations) and threshold c at the median of df + X^2 under the
    target, i.e. df + Q_t(0.75)^2.
    """

    df: float
    scale: float
    center: float = 0.0
    half_width: float | None = None
    threshold: float | None = None

    def __post_init__(self):
        if self.scale <= 0:
            raise InvalidInputError("proposal scale must be positive")
        if self.half_width is None:
            if self.df <= 2:
                raise InvalidInputError(
                    "default window half-width needs df > 2 (finite target variance)"
                )
            object.__setattr__(self, "half_width", 2.0 * math.sqrt(self.df / (self.df - 2.0)))
        if self.threshold is None:
            object.__setattr__(self, "threshold", self.df + t_quantile(self.df, 0.75) ** 2)
        if not self.half_width > 0:
            raise InvalidInputError("window half-width must be positive")
        if not self.threshold > self.df:
            raise InvalidInputError("threshold must exceed df (attained only when x=0)")


def regen_prob_accepted(x: float, y: float, params: RwRegenParams) -> float:
    """Probability of regeneration on the accepted jump x -> y.

    Zero outside the window [center - d, center + d]; otherwise the product of
    a proposal-ratio factor and a clipped acceptance-ratio factor, each <= 1.
    """
    v = params.df
    xt = params.center
    d = params.half_width
    c = params.threshold
    if not (xt - d <= y <= xt + d):
        return 0.0
    dx = x - xt
    expo = math.exp(-(dx * (y - xt) + d * abs(dx)) / params.scale ** 2)
    a = v + x * x
    b = v + y * y
    bracket = (min(a, c) * b) / (min(a, b) * max(b, c))
    r = expo * bracket ** ((v + 1.0) / 2.0)
    if not (0.0 <= r <= 1.0 + 1e-12):
        raise AssertionError(f"regeneration probability {r} outside [0, 1]")
    return r


class RegenTrace:
    """Chain output with per-step regeneration flags, already aligned so the
    run starts at a regeneration and ends at the R-th one (last flag is 1)."""

    __slots__ = ("_values", "_flags", "_taus")

    def __init__(self, values, flags):
        vals = np.array(values, dtype=float)
        flg = np.array(flags, dtype=np.int8)
        if vals.ndim != 1 or flg.shape != vals.shape:
            raise InvalidInputError("values and flags must be equal-length 1-d sequences")
        if vals.size < 1:
            raise InvalidInputError("trace must contain at least one value")
        if not np.all(np.isfinite(vals)):
            raise InvalidInputError("trace values must be finite")
        if not np.all((flg == 0) | (flg == 1)):
            raise InvalidInputError("regeneration flags must be 0 or 1")
        if flg[-1] != 1:
            raise InvalidInputError("trace must terminate at a regeneration (last flag 1)")
        vals.setflags(write=False)
        flg.setflags(write=False)
        self._values = vals
        self._flags = flg
        # delta_{i-1} = 1 marks a regeneration at time i; tour t spans
        # [tau_{t-1}, tau_t)
        self._taus = np.flatnonzero(flg == 1) + 1
        self._taus.setflags(write=False)

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def flags(self) -> np.ndarray:
        return self._flags

    @property
    def regeneration_times(self) -> np.ndarray:
        return self._taus

    @property
    def tour_count(self) -> int:
        return self._taus.size

    @property
    def total_length(self) -> int:
        return self._values.size

    def tour_lengths(self) -> np.ndarray:
        return np.diff(self._taus, prepend=0)

    def tour_indicator_sums(self, y: float) -> np.ndarray:
        """S_t(y) = count of values <= y within each tour."""
        cs = np.concatenate(([0], np.cumsum(self._values <= y)))
        starts = np.concatenate(([0], self._taus[:-1]))
        return cs[self._taus] - cs[starts]

    def as_scalar_trace(self) -> ScalarTrace:
        return ScalarTrace(self._values)

    def __repr__(self) -> str:
        return f"RegenTrace(n={self.total_length}, tours={self.tour_count})"


def rs_cdf_at(trace: RegenTrace, y: float) -> float:
    """Ratio estimator sum_t S_t(y) / sum_t N_t; identical to the plain ECDF
    over the retained values."""
    return float(np.count_nonzero(trace.values <= y)) / trace.total_length


def rs_gamma_hat(trace: RegenTrace, y: float) -> float:
    """(1/(R*Nbar^2)) * sum_t (S_t(y) - Fhat(y)*N_t)^2."""
    R = trace.tour_count
    if R < 2:
        raise InvalidInputError("need at least 2 tours")
    s = trace.tour_indicator_sums(y).astype(float)
    n_t = trace.tour_lengths().astype(float)
    fhat = rs_cdf_at(trace, y)
    nbar = trace.total_length / R
    return float(np.sum((s - fhat * n_t) ** 2) / (R * nbar * nbar))


def rs_quantile_ci(
    trace: RegenTrace,
    spec: QuantileSpec,
    confidence: float = 0.95,
    kde: KdeConfig = KdeConfig(),
) -> QuantileEstimate:
    """Quantile point estimate over the retained values with a regenerative
    interval: point +/- t_{R-1, alpha/2} * sqrt(avar) / sqrt(R) where
    avar = Gamma_hat(point) / kde_at(point)^2."""
    R = trace.tour_count
    if R < 3:
        raise InvalidInputError("regenerative interval needs at least 3 tours")
    if not (0.0 < confidence < 1.0):
        raise InvalidInputError("confidence must be in (0, 1)")
    scalar = trace.as_scalar_trace()
    point = empirical_quantile(scalar, spec)
    gam = rs_gamma_hat(trace, point)
    if gam == 0.0:
        avar, h = 0.0, None
    else:
        h = resolve_bandwidth(scalar, kde)
        fhat = kde_at(scalar, point, KdeConfig(bandwidth=h))
        if fhat <= 0.0:
            raise DegenerateDataError("density estimate at the quantile is zero")
        avar = gam / fhat**2
    tq = t_quantile(R - 1, 0.5 + confidence / 2.0)
    mcse = math.sqrt(avar / R)
    half = tq * mcse
    return QuantileEstimate(
        point=point,
        method="RS",
        avar=avar,
        mcse=mcse,
        ci_low=point - half,
        ci_high=point + half,
        confidence=confidence,
        details={"tours": R, "total_length": trace.total_length, "bandwidth": h},
    )


_CHUNK = 8192


def run_regenerative_rw(
    df: float,
    scale: float,
    tours: int,
    seed,
    return_stats: bool = False,
):
    """Run the Normal-proposal Metropolis random walk on t(df) with
    retrospective regeneration, for exactly `tours` regenerations.

    The chain starts at 0 and everything before the first regeneration is
    discarded, so the retained trace begins with a draw from the small
    measure.  Output is bitwise-reproducible for a fixed seed.  When
    return_stats is true, also returns (acceptance_rate, total_steps) counted
    over the retained portion.
    """
    if df <= 2:
        raise InvalidInputError("df must exceed 2 for the default regeneration window")
    if tours < 2:
        raise InvalidInputError("need at least 2 tours")
    params = RwRegenParams(df=df, scale=scale)
    rng = np.random.default_rng(seed)

    v = df
    halfexp = (v + 1.0) / 2.0
    xt = params.center
    d = params.half_width
    c = params.threshold
    inv_s2 = 1.0 / (scale * scale)
    lo, hi = xt - d, xt + d

    values: list[float] = []
    flags: list[int] = []
    append_v = values.append
    append_f = flags.append

    x = 0.0
    started = False
    regens = 0
    accepted = 0
    steps = 0
    exp_ = math.exp

    while regens < tours:
        zs = rng.standard_normal(_CHUNK) * scale
        u_acc = rng.random(_CHUNK)
        u_reg = rng.random(_CHUNK)
        for i in range(_CHUNK):
            y = x + zs[i]
            a = v + x * x
            b = v + y * y
            delta = 0
            if a >= b or u_acc[i] < (a / b) ** halfexp:
                # accepted; retrospective regeneration draw
                if lo <= y <= hi:
                    dx = x - xt
                    r = exp_(-(dx * (y - xt) + d * abs(dx)) * inv_s2) * (
                        (min(a, c) * b) / (min(a, b) * max(b, c))
                    ) ** halfexp
                    if u_reg[i] < r:
                        delta = 1
                if started:
                    accepted += 1
                x_prev = x
                x = y
            else:
                x_prev = x
            if started:
                append_v(x_prev)
                append_f(delta)
                steps += 1
                if delta:
                    regens += 1
                    if regens == tours:
                        break
            elif delta:
                started = True

    trace = RegenTrace(values, flags)
    if return_stats:
        return trace, {"acceptance_rate": accepted / steps, "total_steps": steps}
    return trace
