"""Test-case generator families: shapes, symmetry, flat collars, ground truths."""

import numpy as np
import pytest

from conftest import box_grid
from harmo.errors import GenerationError
from harmo.generators import (
    METRIC_GENERATORS,
    bump,
    conformal,
    diffeo_pullback,
    diffeo_pullback_eval,
    flat,
    graph_immersion,
    random_perturbation,
    sphere_chart_immersion,
    stereographic,
)
from harmo.metric import riemann_from_christoffel


def test_registry_covers_the_five_families():
    assert set(METRIC_GENERATORS) == {
        "flat",
        "conformal",
        "diffeo-pullback",
        "stereographic",
        "random",
    }


def test_bump_is_compactly_supported():
    grid = box_grid(3, 17)
    pts = grid.coordinates()
    b = bump(pts, grid.center(), 0.3)
    r = np.linalg.norm(pts - grid.center(), axis=-1)
    assert np.all(b[r >= 0.3] == 0.0)
    assert np.all(b >= 0.0)
    assert b.max() > 0.0


@pytest.mark.parametrize("name", sorted(METRIC_GENERATORS))
def test_generators_produce_valid_metrics(name):
    grid = box_grid(3, 11)
    maker = METRIC_GENERATORS[name]
    if name in ("flat", "stereographic"):
        g, info = maker(grid)
    else:
        g, info = maker(grid, 0.05)
    assert g.values.shape == grid.shape + (3, 3)
    assert info["kind"]
    # construction already validates symmetry and positivity; spot-check scale
    assert g.ellipticity < 10.0


@pytest.mark.parametrize("name", ["conformal", "diffeo-pullback", "random"])
def test_compact_support_generators_have_flat_collars(name):
    grid = box_grid(3, 13)
    g, _ = METRIC_GENERATORS[name](grid, 0.05)
    eye = np.eye(3)
    for sl in [(0,), (-1,), (slice(None), 0), (slice(None), -1)]:
        assert np.allclose(g.values[sl], eye, atol=1e-14)


def test_diffeo_pullback_is_discretely_flat():
    sups = []
    for size in (17, 33):
        g, _ = diffeo_pullback(box_grid(3, size), 0.05)
        sups.append(riemann_from_christoffel(g).sup_norm())
    assert sups[0] / sups[1] > 3.0  # exact curvature is zero; truncation only


def test_diffeo_eval_matches_grid_samples():
    grid = box_grid(3, 11)
    g, info = diffeo_pullback(grid, 0.04)
    f, Df = diffeo_pullback_eval(
        grid.coordinates(), np.asarray(info["center"]), info["radius"], info["amplitude"]
    )
    assert np.array_equal(f, info["map_values"])
    assert np.array_equal(Df, info["map_jacobian"])


def test_stereographic_ground_truth_tag():
    g, info = stereographic(box_grid(3, 9, extent=0.4, origin=-0.2))
    assert info["curvature"] == 1.0
    center_value = g.values[4, 4, 4]
    # conformal factor 4/(1+|x|^2)^2 = 4 at the origin
    assert np.allclose(center_value, 4.0 * np.eye(3), atol=1e-12)


def test_random_perturbation_is_seed_deterministic():
    grid = box_grid(3, 9)
    a, _ = random_perturbation(grid, 0.05, seed=3)
    b, _ = random_perturbation(grid, 0.05, seed=3)
    c, _ = random_perturbation(grid, 0.05, seed=4)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_graph_immersion_shapes_and_validation():
    grid = box_grid(2, 9)
    values, info = graph_immersion(grid, 0.05, d=4, seed=1)
    assert values.shape == grid.shape + (4,)
    assert np.array_equal(values[..., :2], grid.coordinates())
    assert info["d"] == 4
    with pytest.raises(GenerationError):
        graph_immersion(grid, 0.05, d=2)


def test_sphere_chart_requires_radius_larger_than_hull():
    grid = box_grid(2, 9, extent=1.0, origin=-0.5)
    values, _ = sphere_chart_immersion(grid, 2.0)
    r2 = np.sum(values**2, axis=-1)
    assert np.allclose(r2, 4.0, atol=1e-12)  # points lie exactly on the sphere
    with pytest.raises(GenerationError):
        sphere_chart_immersion(grid, 0.5)


def test_flat_generator_is_exact():
    g, info = flat(box_grid(3, 9))
    assert np.allclose(g.values, np.eye(3))
    assert info == {"kind": "flat"}


def test_conformal_rejects_nonfinite_amplitude():
    with pytest.raises(GenerationError):
        conformal(box_grid(3, 9), np.inf)
