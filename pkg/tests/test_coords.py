"""Coordinate maps, the correction pipeline, and its failure modes."""

import numpy as np
import pytest

from conftest import box_grid
from harmo.coords import (
    bilipschitz_constants,
    build_y,
    identity_map,
    invert_map,
    pullback_metric,
    run_pipeline,
)
from harmo.errors import AdmissionError, CertificationError, InversionError
from harmo.frames import gram_schmidt_coframe
from harmo.generators import conformal, diffeo_pullback, stereographic
from harmo.grid import GridSpec
from harmo.metric import flat_metric


def test_flat_pipeline_returns_identity_coordinates():
    g = flat_metric(box_grid(3, 9))
    report = run_pipeline(g)
    assert report.deviation_barw <= 1e-10
    assert report.harmonic_defect_sup <= 1e-10
    assert report.curvature_norm == 0.0
    lo, hi = report.bilipschitz
    assert lo == pytest.approx(1.0, abs=1e-8)
    assert hi == pytest.approx(1.0, abs=1e-8)


def test_build_y_on_flat_metric_is_the_identity():
    grid = box_grid(3, 9)
    g = flat_metric(grid)
    ymap = build_y(g, gram_schmidt_coframe(g))
    pts = grid.coordinates().reshape(-1, 3)[::17]
    assert np.allclose(ymap(pts), pts, atol=1e-10)


def test_pullback_along_identity_preserves_metric():
    grid = box_grid(3, 9)
    g, _ = conformal(grid, 0.02)
    h, info = pullback_metric(g, identity_map(grid))
    sl = (slice(1, -1),) * 3
    assert np.allclose(h.values[sl], g.values[sl], atol=1e-8)
    assert info["fallback_nodes"] >= 0


def test_pipeline_roundtrip_through_certified_coordinates():
    grid = box_grid(3, 11)
    g, _ = conformal(grid, 0.02)
    report, (ymap, zmap) = run_pipeline(g, admission_threshold=1.0, return_map=True)
    pts = grid.coordinates()[3:-3:2, 3:-3:2, 3:-3:2].reshape(-1, 3)
    out = zmap(ymap(pts))
    back = invert_map(ymap, invert_map(zmap, out))
    assert np.max(np.abs(back - pts)) < 1e-8
    assert report.c_emp >= 0.0


def test_invert_map_preserves_batch_shape():
    grid = box_grid(3, 9)
    ymap = identity_map(grid)
    targets = grid.coordinates()[2:5, 2:5, 2:5]
    assert invert_map(ymap, targets).shape == targets.shape
    single = np.array([0.4, 0.5, 0.6])
    assert np.allclose(invert_map(ymap, single), single, atol=1e-12)


def test_invert_map_rejects_unreachable_targets():
    ymap = identity_map(box_grid(3, 9))
    with pytest.raises(InversionError) as exc:
        invert_map(ymap, np.array([5.0, 5.0, 5.0]))
    assert exc.value.residual > 0


def test_admission_gate_rejects_large_curvature():
    grid = GridSpec(3, (11,) * 3, (0.04,) * 3, "box", origin=(-0.2,) * 3)
    g, _ = stereographic(grid)
    with pytest.raises(AdmissionError) as exc:
        run_pipeline(g)
    assert exc.value.value > exc.value.threshold


def test_unreachable_certificate_tolerance_aborts():
    g, _ = conformal(box_grid(3, 11), 0.05)
    with pytest.raises(CertificationError) as exc:
        run_pipeline(g, admission_threshold=1.0, certificate_tol=1e-30)
    assert exc.value.defect > exc.value.tolerance


def test_bilipschitz_constants_bound_identity():
    lo, hi = bilipschitz_constants(identity_map(box_grid(3, 9)))
    assert lo <= 1.0 + 1e-10
    assert hi >= 1.0 - 1e-10


def test_report_serialization_roundtrip():
    report = run_pipeline(flat_metric(box_grid(3, 9)))
    d = report.to_dict()
    assert {"curvature_norm", "deviation_barw", "c_emp", "bilipschitz"} <= set(d)
    assert isinstance(report.to_json(), str)


def test_diffeo_pullback_pipeline_straightens_the_metric():
    """g = f*delta is flat, so corrected coordinates must come out nearly flat."""
    grid = box_grid(3, 17)
    g, _ = diffeo_pullback(grid, 0.03)
    report = run_pipeline(g, admission_threshold=1.0)
    assert report.deviation_barw < 10.0 * (1e-12 + report.curvature_norm)
