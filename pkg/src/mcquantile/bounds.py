"""Finite-sample error bounds for the quantile estimate and their inversion
into required sample sizes.

Three bound functions are provided: a general one under polynomial-rate total
variation convergence, its specialization to uniformly ergodic chains, and a
sharper Hoeffding-style bound for uniformly ergodic chains that holds beyond
a validity threshold in n.  Bounds can exceed 1; they are reported verbatim
with a vacuous flag rather than clamped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .trace import InvalidInputError

__all__ = [
    "PolynomialErgodicity",
    "UniformErgodicity",
    "TargetCdf",
    "BoundDomainError",
    "gamma_eps",
    "bound_polynomial",
    "bound_uniform",
    "bound_uniform_improved",
    "a_grid",
    "min_sample_size",
]

_MAX_N = 2**62


class BoundDomainError(ValueError):
    """n is below the bound's validity threshold; carries the threshold."""

    def __init__(self, message: str, threshold: float):
        super().__init__(message)
        self.threshold = threshold


@dataclass(frozen=True)
class PolynomialErgodicity:
    """TV distance decays like moment * n^(-order)."""

    order: float
    moment: float  # E_pi M

    def __post_init__(self):
        if self.order <= 0 or self.moment <= 0:
            raise InvalidInputError("order and moment must be positive")


@dataclass(frozen=True)
class UniformErgodicity:
    """One-shot minorization: P^{n0}(x, .) >= lam * phi(.) for all x."""

    lam: float
    n0: int = 1

    def __post_init__(self):
        if not (0.0 < self.lam <= 1.0):
            raise InvalidInputError("lam must be in (0, 1]")
        if self.n0 < 1:
            raise InvalidInputError("n0 must be >= 1")


@dataclass(frozen=True)
class TargetCdf:
    """Distribution function of the functional, with the quantile under study."""

    cdf: Callable[[float], float]
    quantile: float


def gamma_eps(target: TargetCdf, q: float, eps: float, delta: float) -> float:
    """min{ F(xi+eps) - q, delta * (q - F(xi-eps)) }; must be positive."""
    if eps <= 0:
        raise InvalidInputError("eps must be positive")
    if not (0.0 < delta < 1.0):
        raise InvalidInputError("delta must be in (0, 1)")
    xi = target.quantile
    upper = float(target.cdf(xi + eps)) - q
    lower = delta * (q - float(target.cdf(xi - eps)))
    g = min(upper, lower)
    if g <= 0:
        raise InvalidInputError(
            f"gamma = {g} is not positive; eps too small for a flat CDF region"
        )
    return g


def _check_a(n: int, a: int) -> None:
    if not (1 <= a <= n / 2):
        raise InvalidInputError(f"a must lie in [1, n/2], got a={a}, n={n}")


def _hoeffding_term(a: int, gamma: float) -> float:
    return 8.0 * math.exp(-a * gamma * gamma / 8.0)


def bound_polynomial(n: int, a: int, gamma: float, profile: PolynomialErgodicity) -> float:
    """8 exp(-a g^2/8) + 22 a sqrt(1 + 4/g) * floor(n/2a)^(-m) * E_pi M."""
    _check_a(n, a)
    psi = float(n // (2 * a)) ** (-profile.order)
    return _hoeffding_term(a, gamma) + 22.0 * a * math.sqrt(1.0 + 4.0 / gamma) * psi * profile.moment


def bound_uniform(n: int, a: int, gamma: float, profile: UniformErgodicity) -> float:
    """8 exp(-a g^2/8) + 22 a sqrt(1 + 4/g) * (1-lam)^floor(n/(2 a n0))."""
    _check_a(n, a)
    tv = (1.0 - profile.lam) ** (n // (2 * a * profile.n0))
    return _hoeffding_term(a, gamma) + 22.0 * a * math.sqrt(1.0 + 4.0 / gamma) * tv


def bound_uniform_improved(n: int, gamma: float, profile: UniformErgodicity) -> float:
    """2 exp(-lam^2 (n g - 2 n0/lam)^2 / (2 n n0^2)), valid for
    n > 2 n0 / (lam g)."""
    threshold = 2.0 * profile.n0 / (profile.lam * gamma)
    if not n > threshold:
        raise BoundDomainError(
            f"bound requires n > {threshold:.6g}, got n={n}", threshold
        )
    lam, n0 = profile.lam, profile.n0
    return 2.0 * math.exp(-(lam * lam) * (n * gamma - 2.0 * n0 / lam) ** 2 / (2.0 * n * n0 * n0))


def a_grid(n: int):
    """Candidate block counts {floor(n/2), floor(n/4), ..., 1}, deduplicated."""
    seen = set()
    k = 2
    while True:
        a = n // k
        if a < 1:
            break
        if a not in seen:
            seen.add(a)
            yield a
        k *= 2
    if 1 not in seen and n >= 2:
        yield 1


def _evaluate(kind: str, n: int, gamma: float, profile, a) -> float:
    if kind == "uniform-improved":
        return bound_uniform_improved(n, gamma, profile)
    fn = bound_polynomial if kind == "polynomial" else bound_uniform
    if a is not None:
        return fn(n, a, gamma, profile)
    return min(fn(n, cand, gamma, profile) for cand in a_grid(n))


def min_sample_size(
    kind: str,
    gamma: float,
    profile,
    target: float,
    a: int | None = None,
) -> int:
    """Smallest n with bound <= target, located by bracketing and bisection on
    the decreasing tail.  kind is one of "polynomial", "uniform",
    "uniform-improved"; for the first two, a=None optimizes over the
    power-of-two a-grid at each n.
    """
    if kind not in ("polynomial", "uniform", "uniform-improved"):
        raise InvalidInputError(f"unknown bound kind {kind!r}")
    if not (0.0 < target):
        raise InvalidInputError("target must be positive")

    if kind == "uniform-improved":
        start = int(math.floor(2.0 * profile.n0 / (profile.lam * gamma))) + 1
    else:
        start = 2
    hi = start
    while True:
        try:
            if _evaluate(kind, hi, gamma, profile, a) <= target:
                break
        except (InvalidInputError, BoundDomainError):
            pass
        if hi >= _MAX_N:
            raise InvalidInputError(
                f"no n <= 2^62 achieves the target {target} for kind {kind!r}"
            )
        hi = min(hi * 2, _MAX_N)
    lo = start - 1  # below the domain or known/assumed to fail
    while hi - lo > 1:
        mid = (lo + hi) // 2
        try:
            ok = _evaluate(kind, mid, gamma, profile, a) <= target
        except (InvalidInputError, BoundDomainError):
            ok = False
        if ok:
            hi = mid
        else:
            lo = mid
    return hi
