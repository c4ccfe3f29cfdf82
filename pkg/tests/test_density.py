import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcquantile import (
    DegenerateDataError,
    InvalidInputError,
    KdeConfig,
    ScalarTrace,
    kde_at,
    resolve_bandwidth,
    silverman_bandwidth,
)


def test_single_point_kernel_value():
    # one sample at 0, h=1 -> standard normal density at the point
    trace = ScalarTrace([0.0])
    cfg = KdeConfig(bandwidth=1.0)
    assert kde_at(trace, 0.0, cfg) == pytest.approx(1 / math.sqrt(2 * math.pi))
    assert kde_at(trace, 1.0, cfg) == pytest.approx(math.exp(-0.5) / math.sqrt(2 * math.pi))


def test_silverman_formula_direct():
    rng = np.random.default_rng(5)
    x = rng.normal(size=500)
    sd = float(np.std(x, ddof=1))
    iqr = float(np.subtract(*np.percentile(x, [75, 25])))
    expect = 0.9 * min(sd, iqr / 1.34) * 500 ** (-0.2)
    assert silverman_bandwidth(x) == pytest.approx(expect, rel=1e-12)


def test_kde_normal_density_oracle():
    # 1e5 standard normals, evaluate at 0: phi(0) = 0.39894 within 0.01
    rng = np.random.default_rng(2024)
    x = rng.normal(size=10**5)
    est = kde_at(ScalarTrace(x), 0.0)
    assert abs(est - 1 / math.sqrt(2 * math.pi)) < 0.01


def test_kde_brute_force_oracle():
    rng = np.random.default_rng(9)
    x = rng.normal(size=300)
    h = 0.37
    trace = ScalarTrace(x)
    for point in (-1.2, 0.0, 0.85):
        brute = float(
            np.mean(np.exp(-0.5 * ((point - x) / h) ** 2)) / (h * math.sqrt(2 * math.pi))
        )
        assert kde_at(trace, point, KdeConfig(bandwidth=h)) == pytest.approx(brute, rel=1e-12)


def test_constant_sample_auto_bandwidth_raises():
    trace = ScalarTrace(np.full(50, 3.0))
    with pytest.raises(DegenerateDataError):
        resolve_bandwidth(trace, KdeConfig())
    with pytest.raises(DegenerateDataError):
        kde_at(trace, 3.0, KdeConfig())


def test_invalid_bandwidth():
    with pytest.raises(InvalidInputError):
        KdeConfig(bandwidth=-1.0)
    with pytest.raises(InvalidInputError):
        KdeConfig(bandwidth="scott")


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3))
def test_kde_permutation_invariant(seed, point):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=40)
    a = kde_at(ScalarTrace(x), point)
    b = kde_at(ScalarTrace(np.sort(x)[::-1].copy()), point)
    assert a == pytest.approx(b, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10.0))
def test_kde_scaling_covariance(seed, c):
    # if X' = cX then f'(cx) = f(x)/c under the Silverman auto-bandwidth
    rng = np.random.default_rng(seed)
    x = rng.normal(size=60)
    point = float(x.mean())
    a = kde_at(ScalarTrace(x), point)
    b = kde_at(ScalarTrace(c * x), c * point)
    assert b == pytest.approx(a / c, rel=1e-9)
