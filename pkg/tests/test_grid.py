"""Grid containers, finite differences, quadrature, interpolation."""

import numpy as np
import pytest

from conftest import box_grid, torus_grid
from harmo.errors import OutOfDomainError
from harmo.grid import (
    FieldInterpolator,
    GridSpec,
    TensorField,
    gradient_values,
    integrate_values,
    refined,
    sample_function,
    scalar_field,
)


def test_axis_coordinates_and_extent():
    g = box_grid(2, 11, extent=2.0, origin=-1.0)
    x = g.axis_coordinates(0)
    assert x[0] == -1.0
    assert np.isclose(x[-1], 1.0)
    assert np.isclose(g.extent(0), 2.0)
    assert g.n_nodes == 121


def test_box_quadrature_weights_sum_to_volume():
    g = box_grid(3, 9, extent=1.5)
    assert np.isclose(np.sum(g.quadrature_weights()), 1.5**3, rtol=0, atol=1e-12)


def test_torus_quadrature_weights_are_uniform():
    g = torus_grid(2, 8, extent=1.0)
    w = g.quadrature_weights()
    assert np.allclose(w, (1.0 / 8) ** 2)
    assert np.isclose(np.sum(w), 1.0)


def test_gradient_exact_on_linear_fields():
    g = box_grid(3, 7)
    pts = g.coordinates()
    vals = 2.0 * pts[..., 0] - 3.0 * pts[..., 1] + 0.5 * pts[..., 2]
    grad = gradient_values(vals, g)
    assert np.allclose(grad[..., 0], 2.0, atol=1e-12)
    assert np.allclose(grad[..., 1], -3.0, atol=1e-12)
    assert np.allclose(grad[..., 2], 0.5, atol=1e-12)


def test_gradient_second_order_convergence():
    errs = []
    for size in (17, 33):
        g = box_grid(2, size)
        pts = g.coordinates()
        vals = np.sin(np.pi * pts[..., 0]) * np.cos(np.pi * pts[..., 1])
        grad = gradient_values(vals, g)
        exact = np.pi * np.cos(np.pi * pts[..., 0]) * np.cos(np.pi * pts[..., 1])
        errs.append(np.max(np.abs(grad[..., 0] - exact)))
    assert errs[0] / errs[1] > 3.0


def test_torus_integration_of_trig_is_exact():
    g = torus_grid(2, 16)
    pts = g.coordinates()
    vals = 1.0 + np.cos(2 * np.pi * pts[..., 0]) * np.sin(2 * np.pi * pts[..., 1])
    # trapezoid quadrature on periodic grids is spectrally exact for low modes
    assert np.isclose(integrate_values(vals, g), 1.0, atol=1e-13)


def test_interpolator_reproduces_linear_functions():
    g = box_grid(2, 9)
    pts = g.coordinates()
    field = scalar_field(g, 1.0 + pts[..., 0] - 2.0 * pts[..., 1])
    interp = FieldInterpolator(field)
    q = np.array([[0.33, 0.71], [0.05, 0.99]])
    assert np.allclose(interp(q), 1.0 + q[:, 0] - 2.0 * q[:, 1], atol=1e-12)


def test_interpolator_rejects_points_outside_hull():
    g = box_grid(2, 5)
    interp = FieldInterpolator(scalar_field(g, np.zeros(g.shape)))
    with pytest.raises(OutOfDomainError):
        interp(np.array([1.5, 0.5]))


def test_refined_preserves_hull():
    g = box_grid(3, 9, extent=2.0, origin=-1.0)
    r = refined(g)
    assert r.shape == (17, 17, 17)
    assert r.hull() == g.hull()


def test_boundary_mask_counts_faces():
    g = box_grid(2, 6)
    mask = g.boundary_mask()
    assert int(np.sum(mask)) == 6 * 6 - 4 * 4
    assert not torus_grid(2, 6).boundary_mask().any()


def test_outward_normals_unit_length():
    g = box_grid(3, 5)
    normals = g.outward_normals()
    lengths = np.linalg.norm(normals, axis=-1)
    mask = g.boundary_mask()
    assert np.allclose(lengths[mask], 1.0)
    assert np.allclose(lengths[~mask], 0.0)


def test_sample_function_matches_coordinates():
    g = box_grid(2, 7)
    vals = sample_function(g, lambda p: p[..., 0] ** 2 + p[..., 1])
    pts = g.coordinates()
    assert np.allclose(vals, pts[..., 0] ** 2 + pts[..., 1])


def test_tensor_field_rank_bookkeeping():
    g = box_grid(2, 5)
    values = np.zeros(g.shape + (2, 2))
    f = TensorField(g, (2, 0), values)
    assert f.total_rank == 2
    assert f.copy().values is not f.values


def test_gridspec_rejects_mismatched_shape():
    with pytest.raises(Exception):
        GridSpec(2, (5,), (0.1, 0.1), "box", origin=(0.0, 0.0))
