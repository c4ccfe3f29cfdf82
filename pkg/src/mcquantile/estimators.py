"""Scikit-learn style wrappers so the interval methods compose with
pipelines and parameter search: construct with hyperparameters, fit on a
1-d array of chain output, read fitted attributes with trailing underscores.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import column_or_1d

from .batch_means import bm_quantile_ci
from .density import KdeConfig
from .regen import RegenTrace, rs_quantile_ci
from .subsampling import sbm_quantile_ci
from .trace import QuantileSpec, ScalarTrace

__all__ = [
    "BatchMeansQuantileCI",
    "SubsamplingQuantileCI",
    "RegenerativeQuantileCI",
]


class _QuantileCIBase(BaseEstimator):
    def __init__(self, q=0.5, confidence=0.95):
        self.q = q
        self.confidence = confidence

    def _store(self, est):
        self.estimate_ = est
        self.point_ = est.point
        self.avar_ = est.avar
        self.mcse_ = est.mcse
        self.ci_ = (est.ci_low, est.ci_high)
        return self

    def _check_fitted(self):
        if not hasattr(self, "estimate_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet")

    def predict(self, X=None):
        """Fitted quantile point estimate (X is ignored; sklearn signature)."""
        self._check_fitted()
        return self.point_


class BatchMeansQuantileCI(_QuantileCIBase):
    """Quantile point estimate and batch-means confidence interval."""

    def __init__(self, q=0.5, confidence=0.95, bandwidth="silverman"):
        super().__init__(q=q, confidence=confidence)
        self.bandwidth = bandwidth

    def fit(self, y):
        values = column_or_1d(np.asarray(y, dtype=float))
        est = bm_quantile_ci(
            ScalarTrace(values),
            QuantileSpec(self.q),
            self.confidence,
            KdeConfig(bandwidth=self.bandwidth),
        )
        return self._store(est)


class SubsamplingQuantileCI(_QuantileCIBase):
    """Quantile point estimate and subsampling-bootstrap confidence interval."""

    def fit(self, y):
        values = column_or_1d(np.asarray(y, dtype=float))
        est = sbm_quantile_ci(ScalarTrace(values), QuantileSpec(self.q), self.confidence)
        return self._store(est)


class RegenerativeQuantileCI(_QuantileCIBase):
    """Quantile point estimate and regenerative-simulation confidence
    interval; fit takes the chain output and the per-step regeneration
    flags."""

    def __init__(self, q=0.5, confidence=0.95, bandwidth="silverman"):
        super().__init__(q=q, confidence=confidence)
        self.bandwidth = bandwidth

    def fit(self, y, regen):
        values = column_or_1d(np.asarray(y, dtype=float))
        flags = column_or_1d(np.asarray(regen))
        est = rs_quantile_ci(
            RegenTrace(values, flags),
            QuantileSpec(self.q),
            self.confidence,
            KdeConfig(bandwidth=self.bandwidth),
        )
        return self._store(est)
