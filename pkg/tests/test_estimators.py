import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from mcquantile import (
    BatchMeansQuantileCI,
    QuantileSpec,
    RegenerativeQuantileCI,
    ScalarTrace,
    SubsamplingQuantileCI,
    bm_quantile_ci,
    rs_quantile_ci,
    run_regenerative_rw,
    sbm_quantile_ci,
)
from mcquantile.regen import RegenTrace


@pytest.fixture(scope="module")
def trace_values():
    return np.random.default_rng(1).normal(size=3000)


def test_bm_estimator_matches_function(trace_values):
    est = BatchMeansQuantileCI(q=0.7).fit(trace_values)
    want = bm_quantile_ci(ScalarTrace(trace_values), QuantileSpec(0.7))
    assert est.point_ == want.point
    assert est.ci_ == (want.ci_low, want.ci_high)
    assert est.mcse_ == want.mcse
    assert est.predict() == want.point
    assert est.estimate_.method == "BM"


def test_sbm_estimator_matches_function(trace_values):
    est = SubsamplingQuantileCI(q=0.25, confidence=0.9).fit(trace_values)
    want = sbm_quantile_ci(ScalarTrace(trace_values), QuantileSpec(0.25), 0.9)
    assert est.point_ == want.point
    assert est.ci_ == (want.ci_low, want.ci_high)


def test_rs_estimator_matches_function():
    trace = run_regenerative_rw(30, 2.5, tours=300, seed=2)
    est = RegenerativeQuantileCI(q=0.5).fit(trace.values, trace.flags)
    want = rs_quantile_ci(trace, QuantileSpec(0.5))
    assert est.point_ == want.point
    assert est.ci_ == (want.ci_low, want.ci_high)
    assert est.estimate_.details["tours"] == 300


def test_estimator_params_and_clone(trace_values):
    est = BatchMeansQuantileCI(q=0.3, confidence=0.9, bandwidth=0.25)
    params = est.get_params()
    assert params == {"q": 0.3, "confidence": 0.9, "bandwidth": 0.25}
    cloned = clone(est)
    assert cloned.get_params() == params
    est.set_params(q=0.6)
    assert est.q == 0.6
    # fit respects the explicit bandwidth
    est2 = BatchMeansQuantileCI(q=0.5, bandwidth=0.25).fit(trace_values)
    assert est2.estimate_.details["bandwidth"] == 0.25


def test_unfitted_predict_raises(trace_values):
    with pytest.raises(NotFittedError):
        BatchMeansQuantileCI().predict()
    with pytest.raises(NotFittedError):
        SubsamplingQuantileCI().predict()
    with pytest.raises(NotFittedError):
        RegenerativeQuantileCI().predict()


def test_estimator_input_validation():
    with pytest.raises(Exception):
        BatchMeansQuantileCI().fit(np.ones((5, 2)))
    with pytest.raises(Exception):
        RegenerativeQuantileCI().fit([1.0, 2.0], [0, 0])  # no terminal regeneration


def test_regen_estimator_accepts_lists():
    trace = RegenTrace([1.0, 2.0, 3.0, 0.5, 1.5, 2.5, 0.7, 2.2], [0, 0, 1, 0, 0, 1, 0, 1])
    est = RegenerativeQuantileCI(q=0.5).fit(list(trace.values), list(trace.flags))
    want = rs_quantile_ci(trace, QuantileSpec(0.5))
    assert est.point_ == want.point
