"""Uniform Cartesian grids and finite-difference tensor calculus.

Everything downstream (curvature, frames, solvers, immersions) is built on
the two types defined here: :class:`GridSpec` describes a uniform box or
periodic torus, :class:`TensorField` stores per-node tensor components.

Stencils are second order everywhere: central differences in the interior,
one-sided three-point stencils on box boundaries, wrap-around on periodic
axes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import NDArray
from scipy.interpolate import RegularGridInterpolator

from .errors import (
    InvalidVolumeElementError,
    OutOfDomainError,
    StencilWidthError,
    SymmetryError,
)

_MIN_NODES = 5


@dataclass(frozen=True)
class GridSpec:
    """A uniform Cartesian grid on a box or a flat torus.

    Parameters
    ----------
    dim : number of axes n >= 2.
    shape : node count per axis (each >= 5).
    spacing : grid step per axis (> 0).
    topology : ``"box"`` (with boundary), ``"torus"`` (all axes periodic) or
        ``"mixed"`` with an explicit per-axis ``periodic`` tuple.  The mixed
        form is internal plumbing for annulus-type product grids; file
        persistence only covers box and torus.
    origin : coordinate of the first node.
    """

    dim: int
    shape: tuple[int, ...]
    spacing: tuple[float, ...]
    topology: str = "box"
    origin: tuple[float, ...] = None
    periodic: tuple[bool, ...] = None

    def __post_init__(self):
        if self.dim < 1:
            raise StencilWidthError(f"grid dimension must be >= 1, got {self.dim}")
        shape = tuple(int(s) for s in self.shape)
        spacing = tuple(float(h) for h in self.spacing)
        if len(shape) != self.dim or len(spacing) != self.dim:
            raise StencilWidthError("shape/spacing length must equal dim")
        if any(s < _MIN_NODES for s in shape):
            raise StencilWidthError(f"every axis needs >= {_MIN_NODES} nodes, got {shape}")
        if any(h <= 0 for h in spacing):
            raise StencilWidthError(f"spacing must be positive, got {spacing}")
        origin = self.origin
        if origin is None:
            origin = (0.0,) * self.dim
        origin = tuple(float(x) for x in origin)
        if self.topology == "torus":
            periodic = (True,) * self.dim
        elif self.topology == "box":
            periodic = (False,) * self.dim
        elif self.topology == "mixed":
            if self.periodic is None or len(self.periodic) != self.dim:
                raise StencilWidthError("mixed topology requires a per-axis periodic tuple")
            periodic = tuple(bool(b) for b in self.periodic)
        else:
            raise StencilWidthError(f"unknown topology {self.topology!r}")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "periodic", periodic)

    # -- geometry ---------------------------------------------------------

    def axis_coordinates(self, axis: int) -> NDArray:
        """1-d node coordinates along one axis."""
        return self.origin[axis] + self.spacing[axis] * np.arange(self.shape[axis])

    def axes(self) -> list[NDArray]:
        return [self.axis_coordinates(a) for a in range(self.dim)]

    def coordinates(self) -> NDArray:
        """Node coordinates, shape ``(*shape, dim)``."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(mesh, axis=-1)

    def extent(self, axis: int) -> float:
        """Length of the axis: period for periodic axes, hull width for box axes."""
        n, h = self.shape[axis], self.spacing[axis]
        return n * h if self.periodic[axis] else (n - 1) * h

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.shape))

    def hull(self) -> list[tuple[float, float]]:
        return [
            (self.origin[a], self.origin[a] + (self.shape[a] - 1) * self.spacing[a])
            for a in range(self.dim)
        ]

    def center(self) -> NDArray:
        return np.array([0.5 * (lo + hi) for lo, hi in self.hull()])

    # -- quadrature -------------------------------------------------------

    def quadrature_weights(self) -> NDArray:
        """Per-node volume weights: trapezoid on box axes, rectangle on periodic ones."""
        w = np.ones(self.shape)
        for a in range(self.dim):
            wa = np.ones(self.shape[a])
            if not self.periodic[a]:
                wa[0] = wa[-1] = 0.5
            sl = [None] * self.dim
            sl[a] = slice(None)
            w = w * (wa[tuple(sl)] * self.spacing[a])
        return w

    # -- boundary ---------------------------------------------------------

    def boundary_mask(self) -> NDArray:
        mask = np.zeros(self.shape, dtype=bool)
        for a in range(self.dim):
            if self.periodic[a]:
                continue
            sl = [slice(None)] * self.dim
            sl[a] = 0
            mask[tuple(sl)] = True
            sl[a] = -1
            mask[tuple(sl)] = True
        return mask

    def boundary_faces(self):
        """Yield ``(axis, side, slicer, normal)`` for each non-periodic face.

        ``side`` is -1 for the low face and +1 for the high face; ``slicer``
        indexes the face nodes in the full array; ``normal`` is the outward
        unit face normal in R^n.
        """
        for a in range(self.dim):
            if self.periodic[a]:
                continue
            for side, idx in ((-1, 0), (1, self.shape[a] - 1)):
                sl = [slice(None)] * self.dim
                sl[a] = idx
                normal = np.zeros(self.dim)
                normal[a] = side
                yield a, side, tuple(sl), normal

    def outward_normals(self) -> NDArray:
        """Outward unit normal per boundary node (zeros in the interior).

        Edges and corners get the normalized sum of the adjacent face
        normals.
        """
        nu = np.zeros(self.shape + (self.dim,))
        for a, side, sl, normal in self.boundary_faces():
            nu[sl] += normal
        norms = np.linalg.norm(nu, axis=-1)
        pos = norms > 0
        nu[pos] /= norms[pos][..., None]
        return nu

    def face_quadrature_weights(self, axis: int, side: int) -> NDArray:
        """Surface quadrature weights on one boundary face (trapezoid over the face axes)."""
        other = [a for a in range(self.dim) if a != axis]
        w = np.ones(tuple(self.shape[a] for a in other))
        for pos, a in enumerate(other):
            wa = np.ones(self.shape[a])
            if not self.periodic[a]:
                wa[0] = wa[-1] = 0.5
            sl = [None] * len(other)
            sl[pos] = slice(None)
            w = w * (wa[tuple(sl)] * self.spacing[a])
        return w


_SYMMETRY_TAGS = ("symmetric", "antisymmetric")


@dataclass
class TensorField:
    """Tensor components per grid node.

    ``values`` has shape ``(*grid.shape, *(n,)*total_rank)`` with covariant
    indices first.  ``symmetry`` optionally declares index-pair symmetries as
    ``(kind, i, j)`` tuples with component-index positions ``i < j``; declared
    symmetries are validated on construction.
    """

    grid: GridSpec
    rank: tuple[int, int]
    values: NDArray
    symmetry: tuple = ()

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        total = self.rank[0] + self.rank[1]
        expected = self.grid.shape + (self.grid.dim,) * total
        if self.values.shape != expected:
            raise SymmetryError(
                f"values shape {self.values.shape} does not match grid+rank shape {expected}"
            )
        for kind, i, j in self.symmetry:
            if kind not in _SYMMETRY_TAGS:
                raise SymmetryError(f"unknown symmetry tag {kind!r}")
            ndim_grid = self.grid.dim
            ax_i, ax_j = ndim_grid + i, ndim_grid + j
            swapped = np.swapaxes(self.values, ax_i, ax_j)
            target = swapped if kind == "symmetric" else -swapped
            scale = np.max(np.abs(self.values)) or 1.0
            if not np.allclose(self.values, target, rtol=0.0, atol=64 * np.finfo(float).eps * scale):
                raise SymmetryError(f"declared {kind} symmetry in slots ({i},{j}) violated")

    @property
    def total_rank(self) -> int:
        return self.rank[0] + self.rank[1]

    def copy(self) -> "TensorField":
        return TensorField(self.grid, self.rank, self.values.copy(), self.symmetry)


def scalar_field(grid: GridSpec, values: NDArray) -> TensorField:
    return TensorField(grid, (0, 0), values)


# -- finite differences ----------------------------------------------------


def _axis_derivative(values: NDArray, grid: GridSpec, axis: int) -> NDArray:
    """Second-order derivative of raw node values along one grid axis."""
    h = grid.spacing[axis]
    if grid.periodic[axis]:
        return (np.roll(values, -1, axis=axis) - np.roll(values, 1, axis=axis)) / (2.0 * h)
    return np.gradient(values, h, axis=axis, edge_order=2)


def partial_derivative(field: TensorField, axis: int | None = None) -> TensorField:
    """Finite-difference derivative of a tensor field.

    With an ``axis`` the result keeps the component layout of the input (the
    single slot of the gradient along that axis).  With ``axis=None`` the
    full gradient is returned, with the new covariant index inserted as the
    first component index.
    """
    if axis is None:
        return gradient(field)
    if not 0 <= axis < field.grid.dim:
        raise StencilWidthError(f"axis {axis} out of range for dim {field.grid.dim}")
    vals = _axis_derivative(field.values, field.grid, axis)
    return TensorField(field.grid, field.rank, vals, field.symmetry)


def gradient(field: TensorField) -> TensorField:
    """Full coordinate gradient; output rank gains one covariant index (first slot)."""
    g = field.grid
    stacked = np.stack(
        [_axis_derivative(field.values, g, a) for a in range(g.dim)], axis=g.dim
    )
    return TensorField(g, (field.rank[0] + 1, field.rank[1]), stacked)


def gradient_values(values: NDArray, grid: GridSpec) -> NDArray:
    """Gradient of raw node values; new axis inserted after the grid axes."""
    return np.stack([_axis_derivative(values, grid, a) for a in range(grid.dim)], axis=grid.dim)


# -- quadrature ------------------------------------------------------------


def integrate(field: TensorField, weight: TensorField | None = None) -> float:
    """Quadrature of a scalar field (optionally against a positive weight).

    Trapezoidal rule on box axes, rectangle rule on periodic axes.
    """
    if field.total_rank != 0:
        raise SymmetryError("integrate expects a scalar field")
    vals = field.values
    if weight is not None:
        wv = weight.values
        if np.any(wv <= 0):
            raise InvalidVolumeElementError("integration weight must be strictly positive")
        vals = vals * wv
    return float(np.sum(vals * field.grid.quadrature_weights()))


def integrate_values(values: NDArray, grid: GridSpec, weight: NDArray | None = None) -> float:
    if weight is not None:
        if np.any(weight <= 0):
            raise InvalidVolumeElementError("integration weight must be strictly positive")
        values = values * weight
    return float(np.sum(values * grid.quadrature_weights()))


# -- interpolation ---------------------------------------------------------


class FieldInterpolator:
    """Multilinear interpolation of tensor components, periodic-axis aware."""

    def __init__(self, field: TensorField):
        grid = field.grid
        vals = field.values
        axes = grid.axes()
        pts = []
        for a in range(grid.dim):
            xa = axes[a]
            if grid.periodic[a]:
                # Duplicate the first node at the far end of the period so
                # queries in the last cell wrap correctly.
                xa = np.append(xa, grid.origin[a] + grid.extent(a))
                first = np.take(vals, [0], axis=a)
                vals = np.concatenate([vals, first], axis=a)
            pts.append(xa)
        self.grid = grid
        self._comp_shape = vals.shape[grid.dim:]
        self._rgi = RegularGridInterpolator(
            pts, vals.reshape(vals.shape[: grid.dim] + (-1,)), method="linear",
            bounds_error=False, fill_value=np.nan,
        )

    def _wrap(self, points: NDArray) -> NDArray:
        g = self.grid
        pts = np.array(points, dtype=float, copy=True)
        for a in range(g.dim):
            if g.periodic[a]:
                period = g.extent(a)
                pts[..., a] = g.origin[a] + np.mod(pts[..., a] - g.origin[a], period)
        return pts

    def __call__(self, points: NDArray) -> NDArray:
        points = np.asarray(points, dtype=float)
        single = points.ndim == 1
        pts = self._wrap(np.atleast_2d(points))
        out = self._rgi(pts)
        if np.any(~np.isfinite(out)):
            bad = np.where(~np.isfinite(out).reshape(out.shape[0], -1).all(axis=1))[0][0]
            raise OutOfDomainError(pts[bad])
        out = out.reshape(pts.shape[:-1] + self._comp_shape)
        return out[0] if single else out


def interpolate(field: TensorField, point: NDArray) -> NDArray:
    """Multilinear interpolation of the field at a point (or array of points)."""
    return FieldInterpolator(field)(point)


# -- misc helpers ----------------------------------------------------------


def refined(grid: GridSpec, factor: int = 2) -> GridSpec:
    """Grid with the same hull and spacing divided by ``factor``."""
    if grid.topology == "torus" or all(grid.periodic):
        shape = tuple(s * factor for s in grid.shape)
    else:
        shape = tuple(
            (s - 1) * factor + 1 if not grid.periodic[a] else s * factor
            for a, s in enumerate(grid.shape)
        )
    spacing = tuple(h / factor for h in grid.spacing)
    return replace(grid, shape=shape, spacing=spacing)


def sample_function(grid: GridSpec, fn) -> NDArray:
    """Evaluate ``fn(points)`` on all nodes; ``points`` has shape (N, dim)."""
    pts = grid.coordinates().reshape(-1, grid.dim)
    vals = np.asarray(fn(pts))
    return vals.reshape(grid.shape + vals.shape[1:])
