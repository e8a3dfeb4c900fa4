"""Estimator-style wrappers around the coordinate pipeline and smoothing.

These are thin adapters exposing a fit/transform surface with ``get_params``
/ ``set_params`` so the pipeline can sit inside parameter searches and
generic tooling; all numerics live in :mod:`harmo.coords` and
:mod:`harmo.metric`.  ``fit`` consumes a :class:`~harmo.metric.MetricField`
(or a raw component array together with a grid) rather than a sample matrix.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .coords import invert_map, run_pipeline
from .errors import ConfigurationError
from .grid import GridSpec
from .metric import MetricField, mollify_metric

__all__ = ["as_metric", "HarmonicCoordinateEstimator", "MetricMollifier"]


def as_metric(X, grid: GridSpec | None = None) -> MetricField:
    """Coerce input into a MetricField, validating shape and symmetry."""
    if isinstance(X, MetricField):
        return X
    if grid is None:
        raise ConfigurationError("raw component arrays need an explicit grid")
    values = np.asarray(X, dtype=float)
    return MetricField(grid, values)


class HarmonicCoordinateEstimator(BaseEstimator):
    """Fit almost-harmonic coordinates for a metric; transform maps points.

    Parameters mirror :func:`harmo.coords.run_pipeline`.  After ``fit``,
    ``report_`` holds the certification report and ``map_`` the corrected
    coordinate map; ``transform`` evaluates the map at sample points and
    ``inverse_transform`` inverts it by Newton iteration.
    """

    def __init__(
        self,
        coulomb: bool = False,
        admission_threshold: float = 0.1,
        tol: float = 1e-12,
        certificate_tol: float | None = None,
        relax_steps: int = 200,
    ):
        self.coulomb = coulomb
        self.admission_threshold = admission_threshold
        self.tol = tol
        self.certificate_tol = certificate_tol
        self.relax_steps = relax_steps

    def fit(self, X, y=None, grid: GridSpec | None = None):
        g = as_metric(X, grid)
        report, (ymap, zmap) = run_pipeline(
            g,
            coulomb=self.coulomb,
            admission_threshold=self.admission_threshold,
            tol=self.tol,
            certificate_tol=self.certificate_tol,
            relax_steps=self.relax_steps,
            return_map=True,
        )
        self.report_ = report
        self.ymap_ = ymap
        self.zmap_ = zmap
        return self

    def _require_fitted(self):
        if not hasattr(self, "ymap_"):
            raise ConfigurationError("estimator is not fitted")

    def transform(self, X):
        self._require_fitted()
        points = np.asarray(X, dtype=float)
        return self.zmap_(self.ymap_(points))

    def predict(self, X):
        return self.transform(X)

    def inverse_transform(self, X):
        self._require_fitted()
        points = np.asarray(X, dtype=float)
        return invert_map(self.ymap_, invert_map(self.zmap_, points))


class MetricMollifier(BaseEstimator):
    """Transformer smoothing a metric at a fixed length scale ``delta``."""

    def __init__(self, delta: float = 0.1):
        self.delta = delta

    def fit(self, X, y=None, grid: GridSpec | None = None):
        if self.delta <= 0:
            raise ConfigurationError("mollification scale must be positive")
        self._validated = True
        return self

    def transform(self, X, grid: GridSpec | None = None):
        return mollify_metric(as_metric(X, grid), self.delta)

    def fit_transform(self, X, y=None, grid: GridSpec | None = None):
        return self.fit(X, grid=grid).transform(X, grid=grid)
