"""Deterministic test-case generators with closed-form ground truth.

All smooth localized profiles use the polynomial bump (1 - s^2)^6 -- C^5
across the support edge and *exactly* zero outside, which keeps a flat collar
near box boundaries (coordinate constructions and pullback fallbacks rely on
that collar) and keeps finite-difference convergence clean, unlike
exp(-1/(1-s^2)) whose high derivatives blow up at the edge.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from .errors import GenerationError
from .grid import GridSpec
from .metric import MetricField, flat_metric

__all__ = [
    "bump",
    "bump_gradient",
    "flat",
    "conformal",
    "diffeo_pullback",
    "stereographic",
    "random_perturbation",
    "graph_immersion",
    "sphere_chart_immersion",
    "METRIC_GENERATORS",
]


def bump(points: NDArray, center: NDArray, radius: float) -> NDArray:
    """(1 - |x-c|^2/r^2)^6 inside the ball, exactly 0 outside."""
    s2 = np.sum((points - center) ** 2, axis=-1) / radius**2
    return np.where(s2 < 1.0, (1.0 - np.minimum(s2, 1.0)) ** 6, 0.0)


def bump_gradient(points: NDArray, center: NDArray, radius: float) -> NDArray:
    s2 = np.sum((points - center) ** 2, axis=-1) / radius**2
    base = np.where(s2 < 1.0, (1.0 - np.minimum(s2, 1.0)) ** 5, 0.0)
    return (-12.0 / radius**2) * base[..., None] * (points - center)


def _default_radius(grid: GridSpec) -> float:
    return 0.4 * min(grid.extent(a) for a in range(grid.dim))


def flat(grid: GridSpec) -> tuple[MetricField, dict]:
    return flat_metric(grid), {"kind": "flat"}


def conformal(
    grid: GridSpec, amplitude: float, radius: float | None = None
) -> tuple[MetricField, dict]:
    """g = exp(2 phi) delta with phi = amplitude * bump; flat outside the bump."""
    if not np.isfinite(amplitude):
        raise GenerationError("conformal amplitude must be finite")
    radius = radius or _default_radius(grid)
    pts = grid.coordinates()
    center = grid.center()
    phi = amplitude * bump(pts, center, radius)
    g = np.exp(2.0 * phi)[..., None, None] * np.eye(grid.dim)
    info = {
        "kind": "conformal",
        "amplitude": amplitude,
        "radius": radius,
        "center": [float(c) for c in center],
        "phi": phi,
        "dphi": amplitude * bump_gradient(pts, center, radius),
    }
    return MetricField(grid, g), info


def _diffeo(points: NDArray, center: NDArray, radius: float, amplitude: float):
    """f = id + amplitude * bump * v with analytic Jacobian; v is a fixed
    unit-scale sine displacement so the perturbation has all cross terms."""
    n = points.shape[-1]
    b = bump(points, center, radius)
    db = bump_gradient(points, center, radius)
    freq = 0.5 * np.pi / radius  # single gentle arch across the support
    arg = freq * (points - center)  # (*S, n)
    # v^k = sin(arg^{k+1 mod n}) couples the components
    rolled = np.roll(arg, -1, axis=-1)
    v = np.sin(rolled)
    dv = np.zeros(points.shape + (n,))  # (*S, k, a) = d_a v^k
    cos = np.cos(rolled) * freq
    for k in range(n):
        dv[..., k, (k + 1) % n] = cos[..., k]
    f = points + amplitude * b[..., None] * v
    Df = (
        np.broadcast_to(np.eye(n), points.shape + (n,)).copy()
        + amplitude * np.einsum("...k,...a->...ka", v, db)
        + amplitude * b[..., None, None] * dv
    )
    return f, Df


def diffeo_pullback(
    grid: GridSpec, amplitude: float, radius: float | None = None
) -> tuple[MetricField, dict]:
    """g = f* delta = Df^T Df for an explicit diffeomorphism f (Riem = 0).

    The displacement is compactly supported, so f is the identity in a collar
    near the boundary and g has an exactly flat collar.
    """
    radius = radius or _default_radius(grid)
    pts = grid.coordinates()
    center = grid.center()
    f, Df = _diffeo(pts, center, radius, amplitude)
    g = np.einsum("...ka,...kb->...ab", Df, Df, optimize=True)
    info = {
        "kind": "diffeo_pullback",
        "amplitude": amplitude,
        "radius": radius,
        "center": [float(c) for c in center],
        "map_values": f,
        "map_jacobian": Df,
    }
    return MetricField(grid, g), info


def diffeo_pullback_eval(points: NDArray, center: NDArray, radius: float, amplitude: float):
    """The generator's diffeomorphism evaluated at arbitrary points."""
    return _diffeo(points, center, radius, amplitude)


def stereographic(grid: GridSpec) -> tuple[MetricField, dict]:
    """Round-sphere chart metric 4 / (1 + |x|^2)^2 * delta (sectional curvature 1)."""
    pts = grid.coordinates()
    conf = 4.0 / (1.0 + np.sum(pts**2, axis=-1)) ** 2
    g = conf[..., None, None] * np.eye(grid.dim)
    return MetricField(grid, g), {"kind": "stereographic", "curvature": 1.0}


def random_perturbation(
    grid: GridSpec, amplitude: float, seed: int = 0, radius: float | None = None
) -> tuple[MetricField, dict]:
    """delta + amplitude * bump * (random smooth symmetric field), flat collar."""
    radius = radius or _default_radius(grid)
    rng = np.random.default_rng(seed)
    n = grid.dim
    pts = grid.coordinates()
    center = grid.center()
    b = bump(pts, center, radius)
    pert = np.zeros(grid.shape + (n, n))
    for i in range(n):
        for j in range(i, n):
            k = rng.integers(1, 3, size=n)
            phase = rng.uniform(0, 2 * np.pi)
            wave = np.cos(np.sum(np.pi * k * (pts - center) / radius, axis=-1) + phase)
            pert[..., i, j] = pert[..., j, i] = wave
    g = np.eye(n) + amplitude * b[..., None, None] * pert
    return MetricField(grid, g), {
        "kind": "random_perturbation",
        "amplitude": amplitude,
        "seed": seed,
        "radius": radius,
    }


# -- immersions ---------------------------------------------------------------


def graph_immersion(
    grid: GridSpec, amplitude: float, d: int | None = None, seed: int = 0,
) -> tuple[NDArray, dict]:
    """Phi = (x, u(x)) in R^d with smooth analytic wave heights u.

    Heights are global cosine waves (no cutoff): immersions are not fed into
    the collar-dependent coordinate pipeline, and analytic data keeps the
    finite-difference truncation constants small for convergence studies.
    """
    n = grid.dim
    d = d or n + 1
    if d <= n:
        raise GenerationError(f"graph immersion needs d > n, got d={d}, n={n}")
    rng = np.random.default_rng(seed)
    pts = grid.coordinates()
    center = grid.center()
    phi = np.zeros(grid.shape + (d,))
    phi[..., :n] = pts
    scale = min(grid.extent(a) for a in range(n))
    for m in range(n, d):
        # two waves with independent directions: a single plane wave would be
        # a ruled graph whose discrete curvature identities hold identically
        height = np.zeros(grid.shape)
        for _ in range(2):
            direction = rng.normal(size=n)
            direction *= np.pi / (scale * np.linalg.norm(direction))
            phase = rng.uniform(0, 2 * np.pi)
            height += 0.5 * np.cos(np.sum(direction * (pts - center), axis=-1) + phase)
        phi[..., m] = amplitude * height
    return phi, {
        "kind": "graph_immersion",
        "amplitude": amplitude,
        "d": d,
        "seed": seed,
    }


def sphere_chart_immersion(
    grid: GridSpec, sphere_radius: float, d: int | None = None
) -> tuple[NDArray, dict]:
    """Chart of the round sphere: Phi = (x, sqrt(R^2 - |x|^2)), zero-padded to d."""
    n = grid.dim
    d = d or n + 1
    if d <= n:
        raise GenerationError(f"sphere chart needs d > n, got d={d}, n={n}")
    pts = grid.coordinates()
    r2 = np.sum(pts**2, axis=-1)
    if np.any(r2 >= sphere_radius**2):
        raise GenerationError("grid hull exceeds the sphere radius")
    phi = np.zeros(grid.shape + (d,))
    phi[..., :n] = pts
    phi[..., n] = np.sqrt(sphere_radius**2 - r2)
    return phi, {"kind": "sphere_chart", "radius": sphere_radius, "d": d}


METRIC_GENERATORS = {
    "flat": flat,
    "conformal": conformal,
    "diffeo-pullback": diffeo_pullback,
    "stereographic": stereographic,
    "random": random_perturbation,
}
