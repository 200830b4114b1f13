import numpy as np
import pytest
from sklearn.base import clone

from orbitspan.covering import greedy_span, uniform_grid
from orbitspan.estimator import GreedyCover
from orbitspan.systems import Doubling, Rotation


def test_fit_matches_greedy_span():
    X = uniform_grid(1, 40)
    est = GreedyCover(eps=0.1).fit(X)
    assert est.n_centers_ == greedy_span(X, eps=0.1).greedy_count
    assert est.centers_.shape == (est.n_centers_, 1)


def test_predict_assigns_within_eps():
    X = np.random.default_rng(0).random((200, 2))
    est = GreedyCover(eps=0.2).fit(X)
    labels = est.predict(X)
    assert labels.shape == (200,)
    d = np.abs(X - est.centers_[labels]) % 1.0
    assert np.all(np.minimum(d, 1 - d).sum(axis=1) < 0.2)


def test_orbit_metric_fit():
    X = uniform_grid(1, 256)
    short = GreedyCover(eps=0.1, system=Doubling(), n=1).fit(X).n_centers_
    long = GreedyCover(eps=0.1, system=Doubling(), n=6).fit(X).n_centers_
    assert long > short
    rot = GreedyCover(eps=0.1, system=Rotation("golden"), n=50).fit(X).n_centers_
    assert rot == GreedyCover(eps=0.1).fit(X).n_centers_


def test_params_and_clone():
    est = GreedyCover(eps=0.3, metric="mean", n=7)
    assert est.get_params() == {"eps": 0.3, "system": None, "metric": "mean", "n": 7}
    c = clone(est)
    assert c is not est and c.get_params() == est.get_params()
    est.set_params(eps=0.05)
    assert est.eps == 0.05
