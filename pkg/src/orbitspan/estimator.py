"""A scikit-learn style wrapper around the greedy cover."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .covering import SampleSet, greedy_span, span_profile
from .systems import DynamicalSystem


class GreedyCover(BaseEstimator):
    """Greedy eps-cover of a sample, in the base metric or an orbit metric.

    ``fit`` stores the chosen centres (``centers_``, the points themselves,
    and ``center_indices_``); ``predict`` sends each query point to the
    index of the first centre within eps in the base metric, or to the
    nearest centre when none is that close.
    """

    def __init__(self, eps: float = 0.1, system: DynamicalSystem | None = None,
                 metric: str = "bowen", n: int = 1):
        self.eps = eps
        self.system = system
        self.metric = metric
        self.n = n

    def fit(self, X, y=None):
        sample = X if isinstance(X, SampleSet) else SampleSet(np.asarray(X, float), "measure-sample")
        if self.system is None:
            est = greedy_span(sample, eps=self.eps)
        else:
            est = span_profile(self.system, sample, self.metric, [self.n], [self.eps]).rows[0].estimate
        self.estimate_ = est
        self.center_indices_ = np.array(est.centers, dtype=np.int64)
        self.centers_ = sample.points[self.center_indices_]
        self.n_centers_ = len(self.center_indices_)
        return self

    def predict(self, X) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(X, float))
        d = np.abs(pts[:, None, :] - self.centers_[None, :, :]) % 1.0
        d = np.minimum(d, 1.0 - d).sum(axis=2)
        inside = d < self.eps
        first = np.argmax(inside, axis=1)
        return np.where(inside.any(axis=1), first, np.argmin(d, axis=1))


__all__ = ["GreedyCover"]
