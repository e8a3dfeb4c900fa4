"""Coordinate curvature calculus on discretized Riemannian metrics.

Two independent Riemann evaluations are provided on purpose: one through
Christoffel symbols, one directly from first/second derivatives of g split
into a linear part A and a quadratic part B.  They serve as each other's
oracle in the test suite.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage

from .errors import EllipticityError, OutOfDomainError, SymmetryError
from .grid import GridSpec, TensorField, gradient_values
from .lorentz import LorentzExponent, field_sample, lorentz_norm

__all__ = [
    "MetricField",
    "RiemannField",
    "flat_metric",
    "christoffel",
    "riemann_from_christoffel",
    "riemann_direct",
    "ricci",
    "harmonic_defect",
    "laplace_beltrami_apply",
    "covariant_derivative_oneform",
    "codifferential_oneform",
    "mollify_metric",
    "scale_metric",
    "curvature_lorentz_norm",
    "pointwise_tensor_norm",
]

_SYM_TOL = 1e-10


class MetricField:
    """Symmetric positive-definite matrix field with a recorded ellipticity bound.

    The bound ``lam`` satisfies lam^{-1} delta <= g <= lam delta pointwise
    (in the eigenvalue sense) and is computed on construction.
    """

    def __init__(self, grid: GridSpec, values: NDArray):
        values = np.asarray(values, dtype=float)
        n = grid.dim
        if values.shape != grid.shape + (n, n):
            raise SymmetryError(
                f"metric values shape {values.shape}, expected {grid.shape + (n, n)}"
            )
        skew = np.max(np.abs(values - np.swapaxes(values, -1, -2)))
        scale = max(float(np.max(np.abs(values))), 1.0)
        if skew > _SYM_TOL * scale:
            raise SymmetryError(f"metric not symmetric: max asymmetry {skew:.3e}")
        eig = np.linalg.eigvalsh(values)
        lo, hi = float(np.min(eig)), float(np.max(eig))
        if lo <= 0:
            raise EllipticityError(f"metric not positive definite (min eigenvalue {lo:.3e})")
        self.grid = grid
        self.values = values
        self.ellipticity = max(hi, 1.0 / lo)
        self._inv = None
        self._det = None

    def inverse(self) -> NDArray:
        if self._inv is None:
            self._inv = np.linalg.inv(self.values)
        return self._inv

    def det(self) -> NDArray:
        if self._det is None:
            self._det = np.linalg.det(self.values)
        return self._det

    def volume_density(self) -> NDArray:
        return np.sqrt(self.det())

    def as_tensor(self) -> TensorField:
        return TensorField(self.grid, (2, 0), self.values, (("symmetric", 0, 1),))

    def deviation_from_flat(self) -> float:
        eye = np.eye(self.grid.dim)
        return float(np.max(np.abs(self.values - eye)))


def flat_metric(grid: GridSpec) -> MetricField:
    vals = np.broadcast_to(np.eye(grid.dim), grid.shape + (grid.dim, grid.dim)).copy()
    return MetricField(grid, vals)


@dataclass
class RiemannField:
    """Lowered Riemann components R_{ijkl} with optional A+B decomposition."""

    grid: GridSpec
    values: NDArray  # (*shape, n, n, n, n)
    part_a: NDArray | None = None
    part_b: NDArray | None = None

    def symmetry_residuals(self) -> dict:
        R = self.values
        out = {
            "antisym_ij": float(np.max(np.abs(R + np.swapaxes(R, -4, -3)))),
            "antisym_kl": float(np.max(np.abs(R + np.swapaxes(R, -2, -1)))),
            "pair": float(np.max(np.abs(R - np.transpose(R, axes=(
                *range(R.ndim - 4), R.ndim - 2, R.ndim - 1, R.ndim - 4, R.ndim - 3))))),
            "bianchi": float(np.max(np.abs(
                R
                + np.transpose(R, axes=(*range(R.ndim - 4),
                                        R.ndim - 3, R.ndim - 2, R.ndim - 4, R.ndim - 1))
                + np.transpose(R, axes=(*range(R.ndim - 4),
                                        R.ndim - 2, R.ndim - 4, R.ndim - 3, R.ndim - 1))
            ))),
        }
        return out

    def pointwise_norm(self, g: MetricField) -> NDArray:
        return pointwise_tensor_norm(self.values, g.inverse(), 4)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


def pointwise_tensor_norm(values: NDArray, ginv: NDArray, order: int) -> NDArray:
    """|T|_g for a fully covariant tensor with ``order`` trailing index slots."""
    letters = "abcdef"[:order]
    dual = "uvwxyz"[:order]
    spec = (
        "..." + letters + ","
        + ",".join("..." + letters[i] + dual[i] for i in range(order))
        + ",..." + dual + "->..."
    )
    out = np.einsum(spec, values, *([ginv] * order), values, optimize=True)
    return np.sqrt(np.maximum(out, 0.0))


# -- Christoffel route -------------------------------------------------------


def christoffel(g: MetricField) -> TensorField:
    """Gamma^k_{ij} = 1/2 g^{kl} (d_i g_{jl} + d_j g_{il} - d_l g_{ij})."""
    dg = gradient_values(g.values, g.grid)  # (*S, a, i, j) = d_a g_ij
    ginv = g.inverse()
    # S_{ij,l} = d_i g_jl + d_j g_il - d_l g_ij, axes (..., i, j, l)
    S = dg + np.swapaxes(dg, -3, -2) - np.moveaxis(dg, -3, -1)
    gamma = 0.5 * np.einsum("...kl,...ijl->...kij", ginv, S, optimize=True)
    return TensorField(g.grid, (2, 1), gamma)


def riemann_from_christoffel(g: MetricField) -> RiemannField:
    """R_{ijk}{}^l = d_i Gamma^l_{jk} - d_j Gamma^l_{ik} + Gamma Gamma terms, lowered."""
    gamma = christoffel(g).values  # (*S, k, i, j) = Gamma^k_{ij}
    dgamma = gradient_values(gamma, g.grid)  # (*S, a, l, i, j) = d_a Gamma^l_{ij}
    # mixed Riemann R_{ijk}^l
    term1 = np.einsum("...iljk->...ijkl", dgamma)
    term2 = np.einsum("...jlik->...ijkl", dgamma)
    term3 = np.einsum("...mjk,...lim->...ijkl", gamma, gamma, optimize=True)
    term4 = np.einsum("...mik,...ljm->...ijkl", gamma, gamma, optimize=True)
    mixed = term1 - term2 + term3 - term4
    # Lower the last index and reorder signs so that the output follows the
    # convention in which the round metric gives R_{ijkl} = g_ik g_jl - g_il g_jk.
    lowered = -np.einsum("...ijkl,...lp->...ijkp", mixed, g.values, optimize=True)
    return RiemannField(g.grid, lowered)


# -- direct route ------------------------------------------------------------


def riemann_direct(g: MetricField) -> RiemannField:
    """Riemann tensor directly from derivatives of g, split as A + B.

    A is the part linear in second derivatives, B the part quadratic in
    first derivatives.
    """
    grid = g.grid
    dg = gradient_values(g.values, grid)  # (*S, a, i, j)
    ddg = gradient_values(dg, grid)  # (*S, a, b, i, j) = d_a d_b g_ij
    ginv = g.inverse()

    # A_{ijkp} = 1/2 (d2_{ip} g_jk + d2_{jk} g_ip - d2_{ik} g_jp - d2_{jp} g_ik)
    A = 0.5 * (
        np.einsum("...ipjk->...ijkp", ddg)
        + np.einsum("...jkip->...ijkp", ddg)
        - np.einsum("...ikjp->...ijkp", ddg)
        - np.einsum("...jpik->...ijkp", ddg)
    )

    # S_{jk,q} = d_j g_kq + d_k g_jq - d_q g_jk, axes (..., j, k, q)
    S = dg + np.swapaxes(dg, -3, -2) - np.moveaxis(dg, -3, -1)

    B = -(
        0.5 * (
            -np.einsum("...qa,...iap,...jkq->...ijkp", ginv, dg, S, optimize=True)
            + np.einsum("...qa,...jap,...ikq->...ijkp", ginv, dg, S, optimize=True)
        )
        + 0.25 * np.einsum("...imp,...mq,...jkq->...ijkp", S, ginv, S, optimize=True)
        - 0.25 * np.einsum("...jmp,...mq,...ikq->...ijkp", S, ginv, S, optimize=True)
    )
    return RiemannField(grid, A + B, part_a=A, part_b=B)


# -- contractions ------------------------------------------------------------


def ricci(g: MetricField) -> TensorField:
    """Ricci tensor by metric trace of the lowered Riemann tensor."""
    R = riemann_from_christoffel(g).values
    ric = np.einsum("...ik,...ijkl->...jl", g.inverse(), R, optimize=True)
    return TensorField(g.grid, (2, 0), ric)


def harmonic_defect(g: MetricField) -> TensorField:
    """Gamma^r = g^{ij} Gamma^r_{ij}: the harmonic-coordinate certificate field."""
    gamma = christoffel(g).values
    vec = np.einsum("...ij,...rij->...r", g.inverse(), gamma, optimize=True)
    return TensorField(g.grid, (0, 1), vec)


def laplace_beltrami_apply(g: MetricField, u: NDArray) -> NDArray:
    """(det g)^{-1/2} d_a (sqrt(det g) g^{ab} d_b u) by the shared flux stencil."""
    from .elliptic import apply_flux_divergence

    dens = g.volume_density()
    coeff = dens[..., None, None] * g.inverse()
    return apply_flux_divergence(coeff, np.asarray(u, dtype=float), g.grid) / dens


def covariant_derivative_oneform(g: MetricField, alpha: NDArray) -> NDArray:
    """(nabla alpha)_{ji} = d_j alpha_i - Gamma^m_{ji} alpha_m."""
    alpha = np.asarray(alpha, dtype=float)
    gamma = christoffel(g).values
    dalpha = gradient_values(alpha, g.grid)  # (*S, j, i)
    return dalpha - np.einsum("...mji,...m->...ji", gamma, alpha, optimize=True)


def codifferential_oneform(g: MetricField, alpha: NDArray, split: bool = False):
    """d^{*g} alpha = -g^{ml} (nabla alpha)_{lm}.

    With ``split=True`` returns ``(total, euclidean, correction)`` where the
    Euclidean addend is -sum_m d_m alpha_m and the correction carries the
    metric dependence.
    """
    nab = covariant_derivative_oneform(g, alpha)
    total = -np.einsum("...ml,...lm->...", g.inverse(), nab, optimize=True)
    if not split:
        return total
    dalpha = gradient_values(np.asarray(alpha, dtype=float), g.grid)
    eucl = -np.einsum("...mm->...", dalpha)
    return total, eucl, total - eucl


# -- smoothing / rescaling ---------------------------------------------------


def _bump_kernel(grid: GridSpec, delta: float) -> NDArray:
    radii = [int(np.floor(delta / h)) for h in grid.spacing]
    axes = [np.arange(-r, r + 1) * h for r, h in zip(radii, grid.spacing)]
    mesh = np.meshgrid(*axes, indexing="ij")
    s2 = sum((m / delta) ** 2 for m in mesh)
    ker = np.where(s2 < 1.0, (1.0 - np.minimum(s2, 1.0)) ** 3, 0.0)
    total = ker.sum()
    if total <= 0:
        return None
    return ker / total


def mollify_metric(g: MetricField, delta: float) -> MetricField:
    """Componentwise convolution with a normalized (1-|x/delta|^2)^3 bump.

    The kernel is a discrete convex combination, so the ellipticity bound of
    the input is preserved exactly.  ``delta`` below one grid cell is a no-op
    (with a warning).
    """
    if delta < min(g.grid.spacing):
        warnings.warn("mollification radius below one cell: returning metric unchanged")
        return MetricField(g.grid, g.values.copy())
    ker = _bump_kernel(g.grid, delta)
    if ker is None:
        warnings.warn("degenerate mollification kernel: returning metric unchanged")
        return MetricField(g.grid, g.values.copy())
    n = g.grid.dim
    mode = "wrap" if all(g.grid.periodic) else "nearest"
    out = np.empty_like(g.values)
    for i in range(n):
        for j in range(i, n):
            out[..., i, j] = ndimage.convolve(g.values[..., i, j], ker, mode=mode)
            out[..., j, i] = out[..., i, j]
    return MetricField(g.grid, out)


def scale_metric(g: MetricField, t: float) -> MetricField:
    """g_t(x) = g(c + t (x - c)) resampled about the grid center.

    Cubic-spline resampling is used (rather than multilinear) so that finite
    differences of the rescaled field keep second-order accuracy.
    """
    if not 0 < t <= 1:
        raise OutOfDomainError(t, f"scale factor must be in (0,1], got {t}")
    if t == 1.0:
        return MetricField(g.grid, g.values.copy())
    grid = g.grid
    center = grid.center()
    pts = grid.coordinates()
    sample = center + t * (pts - center)
    # convert to fractional index coordinates
    idx = np.stack(
        [(sample[..., a] - grid.origin[a]) / grid.spacing[a] for a in range(grid.dim)]
    )
    n = grid.dim
    out = np.empty_like(g.values)
    mode = "grid-wrap" if all(grid.periodic) else "nearest"
    for i in range(n):
        for j in range(i, n):
            out[..., i, j] = ndimage.map_coordinates(
                g.values[..., i, j], idx, order=3, mode=mode
            )
            out[..., j, i] = out[..., i, j]
    return MetricField(grid, out)


def curvature_lorentz_norm(g: MetricField, riemann: RiemannField | None = None) -> float:
    """||  |Riem|_g  ||_{L^{(n/2,1)}(dvol_g)} -- the admission quantity."""
    n = g.grid.dim
    R = riemann if riemann is not None else riemann_from_christoffel(g)
    mag = R.pointwise_norm(g)
    sample = field_sample(mag, g.grid, g.volume_density())
    return lorentz_norm(sample, LorentzExponent(n / 2.0, 1.0))
