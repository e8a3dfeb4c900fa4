"""Metric calculus: Christoffel symbols, curvature tensors, mollification, scaling."""

import numpy as np
import pytest

from conftest import box_grid
from harmo.errors import EllipticityError, SymmetryError
from harmo.grid import GridSpec
from harmo.generators import conformal, stereographic
from harmo.metric import (
    MetricField,
    christoffel,
    curvature_lorentz_norm,
    flat_metric,
    harmonic_defect,
    mollify_metric,
    ricci,
    riemann_direct,
    riemann_from_christoffel,
    scale_metric,
)


def _conformal_christoffel_oracle(grid, phi_grad):
    """Gamma^k_ij = delta_ki d_j phi + delta_kj d_i phi - delta_ij d_k phi."""
    n = grid.dim
    gamma = np.zeros(grid.shape + (n, n, n))
    for k in range(n):
        for i in range(n):
            for j in range(n):
                val = 0.0
                if k == i:
                    val = val + phi_grad[..., j]
                if k == j:
                    val = val + phi_grad[..., i]
                if i == j:
                    val = val - phi_grad[..., k]
                gamma[..., k, i, j] = val
    return gamma


def test_flat_metric_has_no_connection_or_curvature():
    g = flat_metric(box_grid(3, 7))
    assert np.max(np.abs(christoffel(g).values)) == 0.0
    assert riemann_from_christoffel(g).sup_norm() == 0.0
    assert riemann_direct(g).sup_norm() == 0.0
    assert np.max(np.abs(harmonic_defect(g).values)) == 0.0


def test_christoffel_matches_conformal_closed_form():
    errs = []
    for size in (17, 33):
        grid = box_grid(3, size)
        g, info = conformal(grid, 0.05)
        oracle = _conformal_christoffel_oracle(grid, info["dphi"])
        errs.append(np.max(np.abs(christoffel(g).values - oracle)))
    assert errs[0] < 5e-3
    assert errs[0] / errs[1] > 3.0  # second-order finite differences


def test_stereographic_has_unit_sectional_curvature():
    """|Riem|_g = sqrt(2 n (n-1)) pointwise for curvature-one metrics."""
    n = 3
    h = 0.4 / 32
    grid = GridSpec(n, (33,) * n, (h,) * n, "box", origin=(-0.2,) * n)
    g, _ = stereographic(grid)
    riem = riemann_from_christoffel(g)
    mag = riem.pointwise_norm(g)
    interior = mag[4:-4, 4:-4, 4:-4]
    assert np.allclose(interior, np.sqrt(2 * n * (n - 1)), atol=2e-3)


def test_ricci_of_stereographic_is_twice_the_metric():
    n = 3
    h = 0.4 / 24
    grid = GridSpec(n, (25,) * n, (h,) * n, "box", origin=(-0.2,) * n)
    g, _ = stereographic(grid)
    ric = ricci(g).values
    sl = (slice(3, -3),) * n
    assert np.allclose(ric[sl], (n - 1) * g.values[sl], atol=5e-3)


def test_symmetry_residuals_shrink_under_refinement():
    res = []
    for size in (17, 33):
        g, _ = conformal(box_grid(3, size), 0.05)
        res.append(riemann_from_christoffel(g).symmetry_residuals())
    for key in ("antisym_kl", "pair"):
        assert res[0][key] / max(res[1][key], 1e-300) > 3.0
    # first-slot antisymmetry and first Bianchi hold identically for this formula
    assert res[1]["antisym_ij"] < 1e-12
    assert res[1]["bianchi"] < 1e-12


def test_metric_validation():
    grid = box_grid(2, 5)
    vals = np.broadcast_to(np.eye(2), grid.shape + (2, 2)).copy()
    vals[..., 0, 1] = 0.3  # asymmetric
    with pytest.raises(SymmetryError):
        MetricField(grid, vals)
    bad = np.broadcast_to(np.diag([1.0, -1.0]), grid.shape + (2, 2)).copy()
    with pytest.raises(EllipticityError):
        MetricField(grid, bad)
    with pytest.raises(SymmetryError):
        MetricField(grid, np.zeros(grid.shape + (3, 3)))


def test_mollify_preserves_flat_and_smooths_wiggles(rng):
    grid = box_grid(3, 17)
    flat = flat_metric(grid)
    assert np.allclose(mollify_metric(flat, 0.1).values, flat.values, atol=1e-12)

    pts = grid.coordinates()
    wig = 0.05 * np.sin(8 * np.pi * pts[..., 0]) * np.sin(8 * np.pi * pts[..., 1])
    vals = np.broadcast_to(np.eye(3), grid.shape + (3, 3)).copy()
    vals[..., 0, 0] += wig
    g = MetricField(grid, vals)
    smooth = mollify_metric(g, 0.2)
    assert smooth.deviation_from_flat() < 0.5 * g.deviation_from_flat()


def test_scale_metric_identity_and_flat_invariance():
    grid = box_grid(3, 9)
    flat = flat_metric(grid)
    assert np.allclose(scale_metric(flat, 0.7).values, np.eye(3), atol=1e-12)
    g, _ = conformal(grid, 0.03)
    assert np.allclose(scale_metric(g, 1.0).values, g.values, atol=1e-10)


def test_curvature_norm_zero_only_for_flat():
    grid = box_grid(3, 11)
    assert curvature_lorentz_norm(flat_metric(grid)) == 0.0
    g, _ = conformal(grid, 0.05)
    assert curvature_lorentz_norm(g) > 0.0


def test_ellipticity_bound_is_recorded():
    grid = box_grid(2, 5)
    g = MetricField(grid, np.broadcast_to(np.diag([4.0, 0.25]), grid.shape + (2, 2)).copy())
    assert g.ellipticity == pytest.approx(4.0)
