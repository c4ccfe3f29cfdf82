"""Student-t target functions and the two example samplers: a two-block
linchpin sampler (independence Metropolis on x, exact conditional draw of y)
and a Normal-proposal Metropolis random walk on a t(v) target.

All stochastic functions take an explicit numpy Generator so replications
are reproducible and can run on independent child streams.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import betainc, gammaln

from .trace import InvalidInputError

__all__ = [
    "StudentT",
    "t_pdf",
    "t_cdf",
    "t_quantile",
    "LinchpinState",
    "metropolis_rw_step",
    "linchpin_step",
    "run_linchpin_chain",
    "gamma_sample",
]


def t_pdf(v: float, x: float):
    """Student-t density with v degrees of freedom."""
    if v <= 0:
        raise InvalidInputError("degrees of freedom must be positive")
    logc = gammaln((v + 1.0) / 2.0) - gammaln(v / 2.0) - 0.5 * math.log(v * math.pi)
    return np.exp(logc - 0.5 * (v + 1.0) * np.log1p(np.asarray(x) ** 2 / v))


def t_cdf(v: float, x: float):
    """Student-t CDF via the regularized incomplete beta function."""
    if v <= 0:
        raise InvalidInputError("degrees of freedom must be positive")
    x = np.asarray(x, dtype=float)
    tail = 0.5 * betainc(v / 2.0, 0.5, v / (v + x * x))
    return np.where(x >= 0, 1.0 - tail, tail)[()]


def t_quantile(v: float, p: float) -> float:
    """Inverse of t_cdf, by bracketing root-finding."""
    if not (0.0 < p < 1.0):
        raise InvalidInputError(f"quantile level must be in (0, 1), got {p}")
    if p == 0.5:
        return 0.0
    hi = 1.0
    while t_cdf(v, hi) < max(p, 1.0 - p):
        hi *= 2.0
    return float(brentq(lambda x: t_cdf(v, x) - p, -hi, hi, xtol=1e-13, rtol=1e-15))


@dataclass(frozen=True)
class StudentT:
    """t(v) target distribution."""

    df: float

    def __post_init__(self):
        if self.df <= 0:
            raise InvalidInputError("degrees of freedom must be positive")

    def pdf(self, x):
        return t_pdf(self.df, x)

    def cdf(self, x):
        return t_cdf(self.df, x)

    def quantile(self, p):
        return t_quantile(self.df, p)


def metropolis_rw_step(x: float, v: float, sigma: float, rng: np.random.Generator):
    """One Metropolis random-walk step on a t(v) target with N(0, sigma^2)
    jump proposals.  Returns (next state, accepted flag, proposal)."""
    if sigma <= 0:
        raise InvalidInputError("proposal scale must be positive")
    y = x + sigma * rng.standard_normal()
    ratio = ((v + x * x) / (v + y * y)) ** ((v + 1.0) / 2.0)
    if ratio >= 1.0 or rng.random() < ratio:
        return y, True, y
    return x, False, y


@dataclass(frozen=True)
class LinchpinState:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise InvalidInputError("y must be positive")


def gamma_sample(rate: float, rng: np.random.Generator, shape: float = 2.5) -> float:
    """Exact Gamma(shape, rate) draw (numpy's rejection sampler, scale=1/rate)."""
    if rate <= 0:
        raise InvalidInputError("rate must be positive")
    return float(rng.gamma(shape, 1.0 / rate))


def _log_weight(x):
    # log of f4(x)/q3(x), the independence-sampler importance ratio
    return _LOGC4 - 2.5 * np.log1p(x * x / 4.0) - (_LOGC3 - 2.0 * np.log1p(x * x / 3.0))


_LOGC4 = float(gammaln(2.5) - gammaln(2.0) - 0.5 * math.log(4.0 * math.pi))
_LOGC3 = float(gammaln(2.0) - gammaln(1.5) - 0.5 * math.log(3.0 * math.pi))


def linchpin_step(state: LinchpinState, rng: np.random.Generator) -> LinchpinState:
    """One update of the two-block sampler: independence Metropolis on x with
    a t(3) proposal targeting the t(4) marginal, then y ~ Gamma(5/2, 2 + x^2/2)
    at the post-update x."""
    x = state.x
    xp = float(rng.standard_t(3))
    log_ratio = _log_weight(xp) - _log_weight(x)
    if log_ratio >= 0.0 or rng.random() < math.exp(log_ratio):
        x = xp
    y = gamma_sample(2.0 + x * x / 2.0, rng)
    return LinchpinState(x, y)


def run_linchpin_chain(n: int, rng: np.random.Generator, init: str = "zero") -> np.ndarray:
    """Run the linchpin sampler for n updates and return the x-marginal.

    init="zero" starts at x=0; init="stationary" draws x0 ~ t(4) directly.
    Random draws are made in vectorized blocks, so the stream differs from
    repeated linchpin_step calls; the law of the chain is identical.
    """
    if n < 1:
        raise InvalidInputError("chain length must be >= 1")
    if init == "zero":
        x = 0.0
    elif init == "stationary":
        x = float(rng.standard_t(4))
    else:
        raise InvalidInputError(f"unknown init {init!r}")
    proposals = rng.standard_t(3, size=n)
    log_w = _log_weight(proposals)
    uniforms = rng.random(size=n)
    # Gamma(5/2, rate) = Gamma(5/2, 1) / rate
    gammas = rng.gamma(2.5, 1.0, size=n)
    out = np.empty(n)
    lw = float(_log_weight(x))
    for i in range(n):
        lwp = log_w[i]
        if lwp >= lw or uniforms[i] < math.exp(lwp - lw):
            x = proposals[i]
            lw = lwp
        out[i] = x
    # the y-block draws do not feed back into x; Gamma(5/2, r) = Gamma(5/2, 1)/r
    _ = gammas / (2.0 + out * out / 2.0)
    return out
