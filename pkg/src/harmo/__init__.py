"""Numerical toolkit for harmonic coordinates on discretized metrics.

Builds and certifies almost-harmonic coordinate systems for grid-sampled
Riemannian metrics with small curvature, and for metrics induced by
immersions into Euclidean space: Lorentz-space norms, covariant calculus,
Coulomb coframes, elliptic solvers, the coordinate pipeline, immersion
geometry, and extension-by-gluing, plus a batch CLI (``harmo``).
"""

from .errors import HarmoError
from .grid import GridSpec, TensorField, scalar_field
from .lorentz import LorentzExponent, WeightedSample, lorentz_norm
from .metric import (
    MetricField,
    RiemannField,
    christoffel,
    curvature_lorentz_norm,
    flat_metric,
    mollify_metric,
    riemann_direct,
    riemann_from_christoffel,
    scale_metric,
)
from .frames import (
    CoframeField,
    connection_forms,
    coulomb_relax,
    coulomb_residual,
    gram_schmidt_coframe,
)
from .coords import (
    CoordinateMap,
    PipelineReport,
    build_y,
    harmonic_correction,
    pullback_metric,
    run_pipeline,
)
from .immersion import (
    ImmersionField,
    brendle_sobolev_check,
    energy_En,
    gauss_codazzi_residual,
    sobolev_constant,
)
from .extension import (
    BoundaryGraphData,
    glue_extension,
    hermite_trace_extension,
    junction_report,
    metric_extension_glue,
    spherical_cap_data,
)
from .estimators import HarmonicCoordinateEstimator, MetricMollifier

__version__ = "0.1.0"

__all__ = [
    "HarmoError",
    "GridSpec",
    "TensorField",
    "scalar_field",
    "LorentzExponent",
    "WeightedSample",
    "lorentz_norm",
    "MetricField",
    "RiemannField",
    "christoffel",
    "curvature_lorentz_norm",
    "flat_metric",
    "mollify_metric",
    "riemann_direct",
    "riemann_from_christoffel",
    "scale_metric",
    "CoframeField",
    "connection_forms",
    "coulomb_relax",
    "coulomb_residual",
    "gram_schmidt_coframe",
    "CoordinateMap",
    "PipelineReport",
    "build_y",
    "harmonic_correction",
    "pullback_metric",
    "run_pipeline",
    "ImmersionField",
    "brendle_sobolev_check",
    "energy_En",
    "gauss_codazzi_residual",
    "sobolev_constant",
    "BoundaryGraphData",
    "glue_extension",
    "hermite_trace_extension",
    "junction_report",
    "metric_extension_glue",
    "spherical_cap_data",
    "HarmonicCoordinateEstimator",
    "MetricMollifier",
    "__version__",
]
