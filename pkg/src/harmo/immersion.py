"""Immersions into R^d: induced geometry, curvature energies, and inequalities.

The Gauss map is the normalized wedge of the partials (Plucker coordinates,
one component per n-subset of the d ambient axes); the second fundamental
form is the normal projection of the coordinate Hessian of the immersion, and
its covariant derivatives carry the normal-bundle connection (projection of
the plain derivative back onto the normal space), so a round sphere has
parallel second fundamental form.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np
from numpy.typing import NDArray

from .errors import (
    DegenerateImmersionError,
    InvalidSampleError,
    UnsupportedDimensionError,
)
from .grid import GridSpec, gradient_values, integrate_values
from .lorentz import LorentzExponent, field_sample, lorentz_norm
from .metric import MetricField, christoffel, curvature_lorentz_norm, riemann_from_christoffel

__all__ = [
    "ImmersionField",
    "ball_volume",
    "sobolev_constant",
    "gauss_codazzi_residual",
    "energy_En",
    "riemann_lorentz_from_II",
    "brendle_sobolev_check",
]


def ball_volume(m: int) -> float:
    """Lebesgue volume of the unit ball in R^m (1.0 for m = 0)."""
    return math.pi ** (m / 2.0) / math.gamma(m / 2.0 + 1.0)


def sobolev_constant(n: int, d: int) -> float:
    """The sharp submanifold-Sobolev constant n (d/(d-n) * |B^d|/|B^{d-n}|)^{1/n}."""
    if d <= n:
        raise UnsupportedDimensionError(f"need codimension >= 1, got n={n}, d={d}")
    return n * (d / (d - n) * ball_volume(d) / ball_volume(d - n)) ** (1.0 / n)


class ImmersionField:
    """Map Phi: grid -> R^d with cached first/second derivatives and geometry."""

    def __init__(self, grid: GridSpec, values: NDArray):
        values = np.asarray(values, dtype=float)
        n = grid.dim
        if values.ndim != n + 1 or values.shape[:n] != grid.shape:
            raise InvalidSampleError("immersion values must have shape (*grid.shape, d)")
        d = values.shape[-1]
        if d <= n:
            raise UnsupportedDimensionError(f"immersion needs d > n, got d={d}, n={n}")
        self.grid = grid
        self.values = values
        self.d = d
        self.dphi = gradient_values(values, grid)  # (*S, a, m)
        gv = np.einsum("...am,...bm->...ab", self.dphi, self.dphi, optimize=True)
        eigs = np.linalg.eigvalsh(gv)
        if np.any(eigs[..., 0] <= 0):
            node = np.unravel_index(int(np.argmin(eigs[..., 0])), grid.shape)
            raise DegenerateImmersionError(node)
        self.metric = MetricField(grid, gv)
        self.ellipticity = float(
            max(np.max(eigs[..., -1]), np.max(1.0 / eigs[..., 0]))
        )
        self._cache = {}

    # -- first-order geometry --------------------------------------------------

    def tangent_projector(self) -> NDArray:
        """P_T[..., m, p]: orthogonal projection of R^d onto the tangent space."""
        if "pt" not in self._cache:
            ginv = self.metric.inverse()
            self._cache["pt"] = np.einsum(
                "...am,...ab,...bp->...mp", self.dphi, ginv, self.dphi, optimize=True
            )
        return self._cache["pt"]

    def normal_projector(self) -> NDArray:
        return np.eye(self.d) - self.tangent_projector()

    def gauss_map(self) -> NDArray:
        """Unit n-vector of the tangent plane: minors of dPhi over n-subsets
        of ambient axes, normalized by sqrt(det g)."""
        if "gauss" not in self._cache:
            combos = list(combinations(range(self.d), self.grid.dim))
            minors = np.stack(
                [np.linalg.det(self.dphi[..., :, list(c)]) for c in combos], axis=-1
            )
            self._cache["gauss"] = minors / np.sqrt(self.metric.det())[..., None]
        return self._cache["gauss"]

    # -- second-order geometry -------------------------------------------------

    def hessian(self) -> NDArray:
        """ddPhi[..., a, b, m] = d_a d_b Phi^m, symmetrized in (a, b)."""
        if "hess" not in self._cache:
            dd = gradient_values(self.dphi, self.grid)  # (*S, b, a, m)
            dd = np.einsum("...bam->...abm", dd)
            self._cache["hess"] = 0.5 * (dd + np.swapaxes(dd, -3, -2))
        return self._cache["hess"]

    def second_fundamental_form(self) -> NDArray:
        """II[..., a, b, m]: normal projection of the coordinate Hessian."""
        if "ii" not in self._cache:
            pn = self.normal_projector()
            self._cache["ii"] = np.einsum(
                "...mp,...abp->...abm", pn, self.hessian(), optimize=True
            )
        return self._cache["ii"]

    def mean_curvature(self) -> NDArray:
        """H = (1/n) g^{ab} II_ab, an R^d-valued normal field."""
        ginv = self.metric.inverse()
        ii = self.second_fundamental_form()
        return np.einsum("...ab,...abm->...m", ginv, ii, optimize=True) / self.grid.dim

    def tangency_defect(self) -> float:
        """max |II . dPhi| / max |II| -- II must be normal-valued."""
        ii = self.second_fundamental_form()
        dots = np.einsum("...abm,...cm->...abc", ii, self.dphi, optimize=True)
        scale = float(np.max(np.abs(ii)))
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(dots))) / scale


def _covariant_step(
    tensor: NDArray, imm: ImmersionField, gamma: NDArray, pn: NDArray, order: int
) -> NDArray:
    """One covariant derivative of a normal-valued covariant tensor.

    ``tensor[..., i1..i_order, m]``; the new derivative index is prepended.
    The ambient slot is kept normal by projecting the plain derivative."""
    grid = imm.grid
    d1 = gradient_values(tensor, grid)  # (*S, c, i1..i_order, m)
    # project the ambient slot back onto the normal bundle
    lead = d1.shape[: grid.dim]
    mid = d1.shape[grid.dim:-1]
    flat = d1.reshape(lead + (int(np.prod(mid)), imm.d))
    proj = np.einsum("...mp,...kp->...km", pn, flat, optimize=True)
    out = proj.reshape(d1.shape)
    # Christoffel corrections: -Gamma^e_{c i_s} T[..., i1..e..i_order, m] per slot
    letters = "ijklqr"[:order]
    for slot in range(order):
        src = list(letters)
        src[slot] = "e"
        spec = f"...ec{letters[slot]},...{''.join(src)}m->...c{letters}m"
        out = out - np.einsum(spec, gamma, tensor, optimize=True)
    return out


def covariant_derivatives_II(imm: ImmersionField, max_order: int) -> list[NDArray]:
    """[II, nabla II, ..., nabla^max_order II] with the normal connection."""
    gamma = christoffel(imm.metric).values  # (*S, e, c, s)
    pn = imm.normal_projector()
    out = [imm.second_fundamental_form()]
    for k in range(max_order):
        out.append(_covariant_step(out[-1], imm, gamma, pn, order=k + 2))
    return out


def _tensor_norm_normal_valued(values: NDArray, ginv: NDArray, order: int) -> NDArray:
    """|T|_g for T[..., i1..i_order, m]: g^{-1} on covariant slots, dot on m."""
    letters = "abcdef"[:order]
    dual = "uvwxyz"[:order]
    spec = (
        "..." + letters + "m,"
        + ",".join("..." + letters[i] + dual[i] for i in range(order))
        + ",..." + dual + "m->..."
    )
    args = [values] + [ginv] * order + [values]
    out = np.einsum(spec, *args, optimize=True)
    return np.sqrt(np.maximum(out, 0.0))


def gauss_codazzi_residual(imm: ImmersionField) -> NDArray:
    """Pointwise max |Riem_{ijkl} - (II_ik . II_jl - II_il . II_jk)|."""
    riem = riemann_from_christoffel(imm.metric).values
    ii = imm.second_fundamental_form()
    bilinear = np.einsum("...ikm,...jlm->...ijkl", ii, ii, optimize=True) - np.einsum(
        "...ilm,...jkm->...ijkl", ii, ii, optimize=True
    )
    return np.max(np.abs(riem - bilinear), axis=(-4, -3, -2, -1))


def energy_En(imm: ImmersionField) -> tuple[float, list[float]]:
    """E_n = sum_{i<n/2} integral |nabla^i II|_g^{n/(i+1)} dvol_g, with breakdown."""
    n = imm.grid.dim
    if n % 2 != 0:
        raise UnsupportedDimensionError(f"the energy family needs even n, got {n}")
    derivs = covariant_derivatives_II(imm, n // 2 - 1)
    ginv = imm.metric.inverse()
    dens = imm.metric.volume_density()
    terms = []
    for i, tensor in enumerate(derivs):
        mag = _tensor_norm_normal_valued(tensor, ginv, order=i + 2)
        power = n / (i + 1.0)
        terms.append(integrate_values(mag**power * dens, imm.grid))
    return float(sum(terms)), [float(t) for t in terms]


def riemann_lorentz_from_II(imm: ImmersionField) -> tuple[float, float]:
    """(||Riem||_{L^(n/2,1)}, 2 ||II||^2_{L^(n,2)}) of the induced geometry."""
    n = imm.grid.dim
    lhs = curvature_lorentz_norm(imm.metric)
    ginv = imm.metric.inverse()
    mag = _tensor_norm_normal_valued(imm.second_fundamental_form(), ginv, 2)
    ii_norm = lorentz_norm(
        field_sample(mag, imm.grid, imm.metric.volume_density()), LorentzExponent(n, 2)
    )
    return lhs, 2.0 * ii_norm**2


def _boundary_area_integral(imm: ImmersionField, phi: NDArray) -> float:
    """Integral of phi over the box boundary with the induced face metric."""
    grid = imm.grid
    if all(grid.periodic):
        return 0.0
    g = imm.metric.values
    total = 0.0
    for axis, side, sl, _ in grid.boundary_faces():
        tang = [a for a in range(grid.dim) if a != axis]
        face_g = g[sl][..., tang, :][..., :, tang]
        dens = np.sqrt(np.linalg.det(face_g))
        w = np.ones(dens.shape)
        for k, a in enumerate(tang):
            wa = np.ones(grid.shape[a])
            if not grid.periodic[a]:
                wa[0] = wa[-1] = 0.5
            shape = [1] * len(tang)
            shape[k] = -1
            w = w * (wa * grid.spacing[a]).reshape(shape)
        total += float(np.sum(w * dens * phi[sl]))
    return total


def brendle_sobolev_check(imm: ImmersionField, phi: NDArray) -> dict:
    """Sharp-constant Sobolev inequality for immersed domains.

    lhs = L (int phi^{n/(n-1)} dvol)^{(n-1)/n};
    rhs = boundary integral of phi + int sqrt(|d phi|_g^2 + n^2 phi^2 |H|^2).
    Returns both sides and the margin rhs - lhs.
    """
    phi = np.asarray(phi, dtype=float)
    if np.any(phi < 0):
        raise InvalidSampleError("test function must be nonnegative")
    grid = imm.grid
    n = grid.dim
    L = sobolev_constant(n, imm.d)
    dens = imm.metric.volume_density()
    lhs = L * integrate_values(phi ** (n / (n - 1.0)) * dens, grid) ** ((n - 1.0) / n)
    dphi = gradient_values(phi, grid)
    ginv = imm.metric.inverse()
    grad2 = np.einsum("...a,...ab,...b->...", dphi, ginv, dphi, optimize=True)
    H = imm.mean_curvature()
    h2 = np.sum(H**2, axis=-1)
    bulk = integrate_values(np.sqrt(np.maximum(grad2 + n**2 * phi**2 * h2, 0.0)) * dens, grid)
    boundary = _boundary_area_integral(imm, phi)
    rhs = boundary + bulk
    return {
        "constant": L,
        "lhs": float(lhs),
        "rhs": float(rhs),
        "boundary_term": float(boundary),
        "bulk_term": float(bulk),
        "margin": float(rhs - lhs),
    }
