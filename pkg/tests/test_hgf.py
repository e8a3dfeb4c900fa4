"""Field-file round trips and header validation."""

import numpy as np
import pytest

from conftest import box_grid, torus_grid
from harmo import hgf
from harmo.errors import ConfigurationError
from harmo.grid import TensorField
from harmo.metric import flat_metric


def test_metric_roundtrip(tmp_path):
    g = box_grid(3, 5, extent=2.0, origin=-1.0)
    m = flat_metric(g)
    path = tmp_path / "flat.hgf"
    hgf.write_field(path, m.as_tensor())
    back = hgf.read_field(path)
    assert back.rank == (2, 0)
    assert back.grid.shape == g.shape
    assert back.grid.origin == g.origin
    assert np.array_equal(back.values, m.values)


def test_scalar_roundtrip_on_torus(tmp_path, rng):
    g = torus_grid(2, 6)
    vals = rng.normal(size=g.shape)
    path = tmp_path / "s.hgf"
    hgf.write_field(path, TensorField(g, (0, 0), vals))
    back = hgf.read_field(path)
    assert back.grid.topology == "torus"
    assert np.array_equal(back.values, vals)


def test_immersion_roundtrip(tmp_path, rng):
    g = box_grid(2, 7)
    vals = rng.normal(size=g.shape + (4,))
    path = tmp_path / "imm.hgf"
    hgf.write_immersion(path, g, vals)
    grid, back = hgf.read_immersion(path)
    assert grid.shape == g.shape
    assert np.array_equal(back, vals)


def test_bad_magic_is_rejected(tmp_path):
    path = tmp_path / "bad.hgf"
    path.write_bytes(b"NOPE dim=2\n" + b"\x00" * 16)
    with pytest.raises(ConfigurationError):
        hgf.read_field(path)


def test_truncated_payload_is_rejected(tmp_path):
    g = box_grid(2, 5)
    path = tmp_path / "t.hgf"
    hgf.write_field(path, TensorField(g, (0, 0), np.ones(g.shape)))
    raw = path.read_bytes()
    path.write_bytes(raw[:-16])
    with pytest.raises(ConfigurationError):
        hgf.read_field(path)


def test_malformed_header_token(tmp_path):
    path = tmp_path / "m.hgf"
    path.write_bytes(b"HGF1 dim=2 shape=5,5 spacing=0.25,oops topology=box rank=0,0 origin=0,0\n")
    with pytest.raises(ConfigurationError):
        hgf.read_field(path)


def test_read_immersion_rejects_tensor_rank(tmp_path):
    g = box_grid(2, 5)
    path = tmp_path / "metric.hgf"
    hgf.write_field(path, flat_metric(g).as_tensor())
    with pytest.raises(ConfigurationError):
        hgf.read_immersion(path)


def test_write_immersion_validates_shape(tmp_path):
    g = box_grid(2, 5)
    with pytest.raises(ConfigurationError):
        hgf.write_immersion(tmp_path / "x.hgf", g, np.zeros((3, 3, 4)))
