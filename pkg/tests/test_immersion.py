"""Immersed-submanifold geometry: fundamental forms, curvature identities, energies."""

import numpy as np
import pytest

from conftest import box_grid
from harmo.errors import (
    DegenerateImmersionError,
    InvalidSampleError,
    UnsupportedDimensionError,
)
from harmo.generators import bump, graph_immersion, sphere_chart_immersion
from harmo.grid import GridSpec
from harmo.immersion import (
    ImmersionField,
    ball_volume,
    brendle_sobolev_check,
    energy_En,
    gauss_codazzi_residual,
    riemann_lorentz_from_II,
    sobolev_constant,
)


def _sphere_chart(n, size, radius=2.0, d=None, half_width=0.5):
    h = 2 * half_width / (size - 1)
    grid = GridSpec(n, (size,) * n, (h,) * n, "box", origin=(-half_width,) * n)
    values, _ = sphere_chart_immersion(grid, radius, d=d)
    return ImmersionField(grid, values)


def test_sphere_chart_mean_curvature_is_inverse_radius():
    imm = _sphere_chart(2, 33, radius=2.0)
    H = np.linalg.norm(imm.mean_curvature(), axis=-1)
    sl = (slice(3, -3),) * 2
    assert np.allclose(H[sl], 0.5, atol=2e-3)


def test_sphere_chart_second_fundamental_form_magnitude():
    """|II| = sqrt(n)/R for a round sphere."""
    imm = _sphere_chart(3, 25, radius=2.0)
    ii = imm.second_fundamental_form()
    ginv = imm.metric.inverse()
    mag2 = np.einsum(
        "...iam,...ij,...ab,...jbm->...", ii, ginv, ginv, ii, optimize=True
    )
    sl = (slice(3, -3),) * 3
    assert np.allclose(np.sqrt(mag2[sl]), np.sqrt(3) / 2.0, atol=5e-3)


def test_plane_immersion_is_totally_geodesic():
    grid = box_grid(2, 17)
    values, _ = graph_immersion(grid, 0.0, d=3)
    imm = ImmersionField(grid, values)
    assert np.max(np.abs(imm.second_fundamental_form())) < 1e-11
    assert imm.metric.deviation_from_flat() < 1e-12
    total, terms = energy_En(imm)
    assert total < 1e-20
    assert imm.tangency_defect() < 1e-10


def test_gauss_codazzi_residual_shrinks_under_refinement():
    errs = []
    for size in (17, 33):
        grid = box_grid(2, size)
        values, _ = graph_immersion(grid, 0.05, d=3, seed=1)
        res = gauss_codazzi_residual(ImmersionField(grid, values))
        k = int(np.ceil(0.15 * (size - 1)))
        errs.append(np.max(res[k:-k, k:-k]))
    assert errs[0] / errs[1] > 3.0


def test_curvature_bounded_by_second_fundamental_form():
    """||Riem||_(n/2,1) <= 2 ||II||^2_(n,2) on every sampled immersion."""
    for n, d, seed in [(2, 3, 0), (2, 4, 1), (3, 4, 2), (3, 5, 3)]:
        grid = box_grid(n, 17)
        values, _ = graph_immersion(grid, 0.05, d=d, seed=seed)
        lhs, rhs = riemann_lorentz_from_II(ImmersionField(grid, values))
        assert lhs <= rhs * (1.0 + 1e-9)


def test_energy_is_scale_invariant():
    """E_n is invariant under Phi -> lambda Phi on the dilated parameter grid."""
    grid = box_grid(2, 21)
    values, _ = graph_immersion(grid, 0.08, d=3, seed=5)
    e1, _ = energy_En(ImmersionField(grid, values))
    lam = 2.7
    scaled_grid = GridSpec(
        2, grid.shape, tuple(lam * h for h in grid.spacing), "box",
        origin=tuple(lam * o for o in grid.origin),
    )
    e2, _ = energy_En(ImmersionField(scaled_grid, lam * values))
    assert e2 == pytest.approx(e1, rel=1e-12)


def test_energy_requires_even_dimension():
    grid = box_grid(3, 9)
    values, _ = graph_immersion(grid, 0.05, d=4)
    with pytest.raises(UnsupportedDimensionError):
        energy_En(ImmersionField(grid, values))


def test_degenerate_immersion_is_rejected():
    grid = box_grid(2, 9)
    values = np.zeros(grid.shape + (3,))  # constant map, rank zero
    with pytest.raises(DegenerateImmersionError):
        ImmersionField(grid, values)
    with pytest.raises(UnsupportedDimensionError):
        ImmersionField(grid, np.zeros(grid.shape + (2,)))


def test_ball_volume_closed_forms():
    assert ball_volume(1) == pytest.approx(2.0, rel=1e-15)
    assert ball_volume(2) == pytest.approx(np.pi, rel=1e-15)
    assert ball_volume(3) == pytest.approx(4 * np.pi / 3, rel=1e-15)
    assert ball_volume(4) == pytest.approx(np.pi**2 / 2, rel=1e-15)
    assert ball_volume(5) == pytest.approx(8 * np.pi**2 / 15, rel=1e-15)


def test_sobolev_constant_closed_forms():
    # L = n * (d/(d-n) * vol(B^d) / vol(B^{d-n}))^{1/n}
    assert sobolev_constant(3, 4) == pytest.approx(3.0 * np.pi ** (2.0 / 3.0), rel=1e-15)
    assert sobolev_constant(3, 5) == pytest.approx(3.0 * (4 * np.pi / 3) ** (1.0 / 3.0), rel=1e-15)


def test_sharp_sobolev_margin_nonnegative_in_codimension_two():
    imm = _sphere_chart(3, 17, radius=3.0, d=5, half_width=0.45)
    pts = imm.grid.coordinates()
    phi = bump(pts, imm.grid.center(), 0.4)
    out = brendle_sobolev_check(imm, phi)
    assert {"lhs", "rhs", "margin"} <= set(out)
    assert out["margin"] >= 0.0


def test_sobolev_check_rejects_signed_test_functions():
    imm = _sphere_chart(2, 9)
    with pytest.raises(InvalidSampleError):
        brendle_sobolev_check(imm, -np.ones(imm.grid.shape))
