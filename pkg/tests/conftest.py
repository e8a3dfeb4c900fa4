"""Shared grid builders for the test suite."""

import numpy as np
import pytest

from harmo.grid import GridSpec


def box_grid(n, size, extent=1.0, origin=0.0):
    """Unit-ish box grid with `size` nodes per axis."""
    h = extent / (size - 1)
    return GridSpec(n, (size,) * n, (h,) * n, "box", origin=(origin,) * n)


def torus_grid(n, size, extent=1.0):
    h = extent / size
    return GridSpec(n, (size,) * n, (h,) * n, "torus", origin=(0.0,) * n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
