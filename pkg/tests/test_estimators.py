"""Estimator adapters: sklearn parameter plumbing around the pipeline."""

import numpy as np
import pytest
from sklearn.base import clone

from conftest import box_grid
from harmo.errors import AdmissionError, ConfigurationError
from harmo.estimators import HarmonicCoordinateEstimator, MetricMollifier, as_metric
from harmo.generators import conformal
from harmo.metric import flat_metric


def test_get_set_params_roundtrip():
    est = HarmonicCoordinateEstimator(admission_threshold=0.5, relax_steps=50)
    params = est.get_params()
    assert params["admission_threshold"] == 0.5
    assert params["relax_steps"] == 50
    est.set_params(tol=1e-10)
    assert est.tol == 1e-10
    cloned = clone(est)
    assert cloned.get_params() == est.get_params()


def test_fit_transform_identity_on_flat_metric():
    grid = box_grid(3, 9)
    est = HarmonicCoordinateEstimator().fit(flat_metric(grid))
    assert est.report_.deviation_barw <= 1e-8
    pts = grid.coordinates()[2:-2:2, 2:-2:2, 2:-2:2].reshape(-1, 3)
    out = est.transform(pts)
    assert np.max(np.abs(out - pts)) < 1e-8
    assert np.array_equal(est.predict(pts), out)


def test_inverse_transform_roundtrip():
    grid = box_grid(3, 11)
    g, _ = conformal(grid, 0.02)
    est = HarmonicCoordinateEstimator(admission_threshold=1.0).fit(g)
    pts = grid.coordinates()[3:-3:2, 3:-3:2, 3:-3:2].reshape(-1, 3)
    back = est.inverse_transform(est.transform(pts))
    assert np.max(np.abs(back - pts)) < 1e-8


def test_fit_respects_admission_threshold():
    g, _ = conformal(box_grid(3, 11), 0.05)
    with pytest.raises(AdmissionError):
        HarmonicCoordinateEstimator(admission_threshold=1e-6).fit(g)


def test_transform_before_fit_is_rejected():
    with pytest.raises(ConfigurationError):
        HarmonicCoordinateEstimator().transform(np.zeros((1, 3)))


def test_as_metric_validates_input():
    grid = box_grid(3, 9)
    g = flat_metric(grid)
    assert as_metric(g) is g
    rebuilt = as_metric(g.values, grid)
    assert np.array_equal(rebuilt.values, g.values)
    with pytest.raises(ConfigurationError):
        as_metric(g.values)  # raw array without a grid


def test_mollifier_smooths_and_validates():
    grid = box_grid(3, 17)
    pts = grid.coordinates()
    vals = np.broadcast_to(np.eye(3), grid.shape + (3, 3)).copy()
    vals[..., 0, 0] += 0.05 * np.sin(8 * np.pi * pts[..., 0])
    g = as_metric(vals, grid)
    smooth = MetricMollifier(delta=0.2).fit_transform(g)
    assert smooth.deviation_from_flat() < g.deviation_from_flat()
    with pytest.raises(ConfigurationError):
        MetricMollifier(delta=-1.0).fit(g)
