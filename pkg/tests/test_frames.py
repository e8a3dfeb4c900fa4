"""Orthonormal coframes, connection forms, and Coulomb gauge relaxation."""

import numpy as np
import pytest

from conftest import box_grid
from harmo.frames import (
    CoframeField,
    connection_forms,
    coulomb_relax,
    coulomb_residual,
    curvature_two_forms,
    dstar_coframe_identity,
    gram_schmidt_coframe,
    riemann_from_frame,
    rotation_exp,
)
from harmo.generators import conformal, random_perturbation
from harmo.metric import flat_metric, riemann_from_christoffel


def test_gram_schmidt_is_orthonormal(rng):
    g, _ = random_perturbation(box_grid(3, 9), 0.1, seed=7)
    W = gram_schmidt_coframe(g)
    assert W.orthonormality_residual(g) < 1e-12


def test_flat_coframe_has_no_connection():
    g = flat_metric(box_grid(3, 9))
    W = gram_schmidt_coframe(g)
    conn = connection_forms(g, W)
    assert np.max(np.abs(conn.values)) < 1e-13
    assert np.max(np.abs(curvature_two_forms(conn))) < 1e-12


def test_connection_forms_are_antisymmetric():
    g, _ = conformal(box_grid(3, 11), 0.05)
    conn = connection_forms(g, gram_schmidt_coframe(g))
    swapped = np.swapaxes(conn.values, -3, -2)
    scale = max(np.max(np.abs(conn.values)), 1e-30)
    assert np.max(np.abs(conn.values + swapped)) / scale < 1e-10


def test_frame_curvature_matches_coordinate_riemann():
    errs = []
    for size in (17, 33):
        g, _ = conformal(box_grid(3, size), 0.05)
        W = gram_schmidt_coframe(g)
        F = curvature_two_forms(connection_forms(g, W))
        riem_frame = riemann_from_frame(W, F, g)
        riem = riemann_from_christoffel(g)
        sl = (slice(2, -2),) * 3
        errs.append(np.max(np.abs(riem_frame.values[sl] - riem.values[sl])))
    assert errs[0] / errs[1] > 3.0


def test_rotation_exp_lands_in_special_orthogonal(rng):
    xi = rng.normal(size=(4, 3, 3))
    xi = xi - np.swapaxes(xi, -1, -2)
    R = rotation_exp(xi)
    eye = np.broadcast_to(np.eye(3), R.shape)
    assert np.allclose(np.swapaxes(R, -1, -2) @ R, eye, atol=1e-12)
    assert np.allclose(np.linalg.det(R), 1.0, atol=1e-12)


def test_coulomb_relax_reduces_objective_and_keeps_orthonormality():
    grid = box_grid(3, 9)
    g = flat_metric(grid)
    pts = grid.coordinates()
    theta = 0.4 * np.sin(2 * np.pi * pts[..., 0]) * np.sin(2 * np.pi * pts[..., 1])
    vals = np.broadcast_to(np.eye(3), grid.shape + (3, 3)).copy()
    c, s = np.cos(theta), np.sin(theta)
    vals[..., 0, 0] = c
    vals[..., 0, 1] = -s
    vals[..., 1, 0] = s
    vals[..., 1, 1] = c
    W0 = CoframeField(grid, vals)
    W, report = coulomb_relax(g, W0, steps=60)
    assert report.final_objective < 0.1 * report.initial_objective
    assert report.accepted_steps > 0
    assert W.orthonormality_residual(g) < 1e-10
    # the objective curve is monotone by construction (accepted steps only)
    curve = np.asarray(report.objective_curve)
    assert np.all(np.diff(curve) <= 0)


def test_coulomb_residual_returns_interior_and_boundary_parts():
    g, _ = conformal(box_grid(3, 9), 0.05)
    interior, boundary = coulomb_residual(connection_forms(g, gram_schmidt_coframe(g)))
    assert interior >= 0.0
    assert boundary >= 0.0


def test_codifferential_identity_for_coframes():
    """d* of each coframe leg equals the connection-form trace on the dual frame."""
    errs = []
    for size in (17, 33):
        g, _ = conformal(box_grid(3, size), 0.05)
        W = gram_schmidt_coframe(g)
        lhs, rhs = dstar_coframe_identity(g, W, connection_forms(g, W))
        sl = (slice(2, -2),) * 3
        errs.append(np.max(np.abs(lhs[sl] - rhs[sl])))
    assert errs[0] / errs[1] > 3.0
