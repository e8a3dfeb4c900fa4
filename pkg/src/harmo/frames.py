"""Orthonormal coframes, connection/curvature forms, and Coulomb gauge relaxation.

The gauge relaxation replaces the continuity-method existence argument for
Coulomb frames: it performs projected gradient descent over pointwise
rotations W -> exp(xi) W, descending the Dirichlet energy of the connection
forms plus a boundary penalty, with a step-halving line search and an
optional spectral (inverse-Laplacian) preconditioner.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy import fft as sfft
from scipy.linalg import expm

from .errors import EllipticityError, UnsupportedDimensionError
from .grid import GridSpec, gradient_values
from .lorentz import LorentzExponent, field_sample, lorentz_norm
from .metric import MetricField, christoffel

__all__ = [
    "CoframeField",
    "ConnectionForms",
    "gram_schmidt_coframe",
    "connection_forms",
    "curvature_two_forms",
    "riemann_from_frame",
    "coulomb_residual",
    "coulomb_relax",
    "RelaxReport",
    "rotation_exp",
]

_ORTHO_TOL = 1e-10


@dataclass
class CoframeField:
    """Rows of ``values[..., i, :]`` are the coframe 1-forms omega^i."""

    grid: GridSpec
    values: NDArray  # (*shape, n, n)

    def orthonormality_residual(self, g: MetricField) -> float:
        W = self.values
        gram = np.einsum("...ia,...ab,...jb->...ij", W, g.inverse(), W, optimize=True)
        return float(np.max(np.abs(gram - np.eye(self.grid.dim))))

    def frame_vectors(self) -> NDArray:
        """Dual frame: ``e[..., j, :]`` are the vectors e_j with omega^i(e_j) = delta."""
        return np.swapaxes(np.linalg.inv(self.values), -1, -2)


@dataclass
class ConnectionForms:
    """values[..., i, j, a] = omega^i_j(d/dx^a); antisymmetric in (i, j)."""

    grid: GridSpec
    values: NDArray
    skew_defect: float = 0.0

    def matrices(self) -> NDArray:
        """Per-direction matrices M[..., a, i, j] = omega^i_j(d/dx^a)."""
        return np.moveaxis(self.values, -1, -3)


def gram_schmidt_coframe(g: MetricField) -> CoframeField:
    """Gram-Schmidt of (dx^1, ..., dx^n) in the g^{-1} inner product.

    Deterministic given the fixed coordinate ordering; rows have positive
    leading coefficient, so det W > 0.
    """
    n = g.grid.dim
    M = g.inverse()  # inner product on covectors
    W = np.zeros(g.grid.shape + (n, n))
    for i in range(n):
        v = np.zeros(g.grid.shape + (n,))
        v[..., i] = 1.0
        for j in range(i):
            wj = W[..., j, :]
            proj = np.einsum("...a,...ab,...b->...", v, M, wj, optimize=True)
            v = v - proj[..., None] * wj
        norm2 = np.einsum("...a,...ab,...b->...", v, M, v, optimize=True)
        if np.any(norm2 <= 0):
            raise EllipticityError("Gram-Schmidt broke down: metric not positive definite")
        W[..., i, :] = v / np.sqrt(norm2)[..., None]
    return CoframeField(g.grid, W)


def connection_forms(g: MetricField, W: CoframeField) -> ConnectionForms:
    """omega^i_j(d_a) = < nabla_{d_a} e_j , e_i >_g, antisymmetrized in (i, j)."""
    grid = g.grid
    gamma = christoffel(g).values  # (*S, b, a, c) = Gamma^b_{ac}
    E = W.frame_vectors()  # (*S, j, b): e_j = E_j^b d_b
    dE = gradient_values(E, grid)  # (*S, a, j, b) = d_a E_j^b
    # (nabla_{d_a} e_j)^b = d_a E_j^b + Gamma^b_{ac} E_j^c
    nab = np.einsum("...ajb->...jab", dE) + np.einsum(
        "...bac,...jc->...jab", gamma, E, optimize=True
    )
    raw = np.einsum("...jab,...bc,...ic->...ija", nab, g.values, E, optimize=True)
    skew = 0.5 * (raw - np.swapaxes(raw, -3, -2))
    defect = float(np.max(np.abs(raw + np.swapaxes(raw, -3, -2))))
    return ConnectionForms(grid, skew, skew_defect=defect)


def curvature_two_forms(conn: ConnectionForms) -> NDArray:
    """F^i_j = d omega^i_j + sum_k omega^i_k wedge omega^k_j.

    Returned as ``F[..., i, j, a, b]``, antisymmetric in the coordinate slots.
    """
    A = conn.values  # (*S, i, j, a)
    dA = gradient_values(A, conn.grid)  # (*S, a, i, j, b) = d_a omega^i_j(d_b)
    ext = np.einsum("...aijb->...ijab", dA) - np.einsum("...bija->...ijab", dA)
    wedge = np.einsum("...ika,...kjb->...ijab", A, A, optimize=True) - np.einsum(
        "...ikb,...kja->...ijab", A, A, optimize=True
    )
    return ext + wedge


def riemann_from_frame(W: CoframeField, F: NDArray, g: MetricField):
    """Coordinate Riemann components assembled from the curvature 2-forms.

    Frame components Riem(e_i, e_j, e_k, e_l) = F^l_k(e_i, e_j) are converted
    back to coordinates with the coframe matrix.
    """
    from .metric import RiemannField

    E = W.frame_vectors()
    frame_R = np.einsum("...lkab,...ia,...jb->...ijkl", F, E, E, optimize=True)
    Wv = W.values
    coords = np.einsum(
        "...ijkl,...ia,...jb,...kc,...ld->...abcd", frame_R, Wv, Wv, Wv, Wv, optimize=True
    )
    # same orientation flip as in the coordinate formulas: report components in
    # the convention where the round metric gives g_ik g_jl - g_il g_jk
    return RiemannField(W.grid, -coords)


# -- Coulomb residuals -------------------------------------------------------


def coulomb_residual(conn: ConnectionForms, grid: GridSpec | None = None):
    """(interior, boundary) Coulomb-gauge residuals of a connection.

    interior: max over (i, j) of || d^{* eucl} omega^i_j ||_{L^(n/2,1)} with
    Euclidean weights; boundary: max |omega^i_j(nu)| over boundary nodes
    (0 with a flag on fully periodic grids).
    """
    grid = grid or conn.grid
    n = grid.dim
    A = conn.values
    dA = gradient_values(A, grid)  # (*S, a, i, j, b)
    div = np.einsum("...aija->...ij", dA)
    e = LorentzExponent(n / 2.0, 1.0)
    interior = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            interior = max(interior, lorentz_norm(field_sample(np.abs(div[..., i, j]), grid), e))
    boundary = 0.0
    has_boundary = not all(grid.periodic)
    if has_boundary:
        nu = grid.outward_normals()
        trace = np.einsum("...ija,...a->...ij", A, nu, optimize=True)
        mask = grid.boundary_mask()
        boundary = float(np.max(np.abs(trace[mask]))) if np.any(mask) else 0.0
    return interior, boundary


# -- rotations ---------------------------------------------------------------


def rotation_exp(xi: NDArray) -> NDArray:
    """exp of a field of antisymmetric matrices (closed forms for n <= 3)."""
    n = xi.shape[-1]
    if n == 2:
        th = xi[..., 1, 0]
        c, s = np.cos(th), np.sin(th)
        out = np.empty_like(xi)
        out[..., 0, 0] = c
        out[..., 0, 1] = -s
        out[..., 1, 0] = s
        out[..., 1, 1] = c
        return out
    if n == 3:
        # Rodrigues formula from the axis vector
        w = np.stack([xi[..., 2, 1], xi[..., 0, 2], xi[..., 1, 0]], axis=-1)
        theta = np.linalg.norm(w, axis=-1)
        small = theta < 1e-12
        th = np.where(small, 1.0, theta)
        a = np.where(small, 1.0 - theta**2 / 6.0, np.sin(th) / th)
        b = np.where(small, 0.5 - theta**2 / 24.0, (1.0 - np.cos(th)) / th**2)
        eye = np.broadcast_to(np.eye(3), xi.shape)
        return eye + a[..., None, None] * xi + b[..., None, None] * (xi @ xi)
    if n == 4:
        flat = xi.reshape(-1, 4, 4)
        out = np.stack([expm(m) for m in flat])
        return out.reshape(xi.shape)
    raise UnsupportedDimensionError(f"rotation_exp supports n <= 4, got {n}")


# -- gauge relaxation ---------------------------------------------------------


def _transformed_connection(M0: NDArray, R: NDArray, grid: GridSpec) -> NDArray:
    """Connection matrices of the rotated coframe W' = R W:  R M_a R^T - (d_a R) R^T.

    The dual frame rotates alongside the coframe, e'_j = R_jk e_k, so the
    inhomogeneous term enters transposed; since (d_a R) R^T is antisymmetric
    that is the same as a sign flip.
    """
    rot = np.einsum("...ik,...akl,...jl->...aij", R, M0, R, optimize=True)
    dR = gradient_values(R, grid)  # (*S, a, i, k) = d_a R_ik
    inhom = np.einsum("...aik,...jk->...aij", dR, R, optimize=True)
    return rot - inhom


def _objective_and_gradient(M0: NDArray, R: NDArray, grid: GridSpec, boundary_weight: float):
    """Objective sum_a int |A'_a|^2 + w * boundary |A'(nu)|^2 with its exact
    discrete gradient with respect to xi in R -> exp(xi) R.

    The gradient keeps the discrete product-rule terms (D_a(xi R) does not
    split exactly), so it matches finite differences of the objective to
    roundoff.  Returns (A', objective, gradient).
    """
    from .elliptic import _nodal_derivative, _nodal_derivative_adjoint

    n = grid.dim
    q = grid.quadrature_weights()
    Rt = np.swapaxes(R, -1, -2)
    rot = np.einsum("...ik,...akl,...jl->...aij", R, M0, R, optimize=True)
    dR = [
        _nodal_derivative(R, grid, a) for a in range(n)
    ]  # entrywise derivative of R per direction
    A = rot - np.stack([dRa @ Rt for dRa in dR], axis=-3)

    obj = float(np.sum(q * np.einsum("...aij,...aij->...", A, A)))

    # per-direction dual fields B_a: 2q A'_a plus boundary-penalty share
    B = 2.0 * q[..., None, None, None] * A
    if boundary_weight > 0 and not all(grid.periodic):
        nu = grid.outward_normals()
        T = np.einsum("...aij,...a->...ij", A, nu, optimize=True)
        wq = np.zeros(grid.shape)
        for ax, side, sl, _ in grid.boundary_faces():
            wq[sl] += grid.face_quadrature_weights(ax, side)
        wq *= boundary_weight
        obj += float(np.sum(wq * np.einsum("...ij,...ij->...", T, T)))
        B = B + 2.0 * nu[..., :, None, None] * (wq[..., None, None] * T)[..., None, :, :]

    grad = np.zeros(grid.shape + (n, n))
    for a in range(n):
        Ba = B[..., a, :, :]
        Bat = np.swapaxes(Ba, -1, -2)
        rott = np.swapaxes(rot[..., a, :, :], -1, -2)
        grad -= _nodal_derivative_adjoint(Ba @ R, grid, a) @ Rt
        grad -= Bat @ (dR[a] @ Rt)
        grad += Ba @ rott - rott @ Ba
    grad = 0.5 * (grad - np.swapaxes(grad, -1, -2))
    return A, obj, grad


def _spectral_smooth(field: NDArray, grid: GridSpec, shift: float) -> NDArray:
    """(shift - Delta)^{-1} applied per component via DCT (box) / FFT (torus).

    Used only as a descent preconditioner, so reflecting-boundary spectra are
    an acceptable stand-in for the true Neumann operator.
    """
    n = grid.dim
    shape = grid.shape
    lam = np.zeros(shape)
    for a in range(n):
        N, h = shape[a], grid.spacing[a]
        if grid.periodic[a]:
            k = np.arange(N)
            mu = (2.0 - 2.0 * np.cos(2.0 * np.pi * k / N)) / h**2
        else:
            k = np.arange(N)
            mu = (2.0 - 2.0 * np.cos(np.pi * k / max(N - 1, 1))) / h**2
        sl = [None] * n
        sl[a] = slice(None)
        lam = lam + mu[tuple(sl)]
    denom = shift + lam
    out = np.empty_like(field)
    comp_shape = field.shape[n:]
    for idx in np.ndindex(*comp_shape):
        comp = field[(Ellipsis,) + idx]
        work = comp
        axes_box = [a for a in range(n) if not grid.periodic[a]]
        axes_tor = [a for a in range(n) if grid.periodic[a]]
        if axes_box:
            work = sfft.dctn(work, axes=axes_box, type=1, norm="ortho")
        if axes_tor:
            work = sfft.fftn(work, axes=axes_tor)
        work = work / denom
        if axes_tor:
            work = np.real(sfft.ifftn(work, axes=axes_tor))
        if axes_box:
            work = sfft.idctn(work, axes=axes_box, type=1, norm="ortho")
        out[(Ellipsis,) + idx] = work
    return out


@dataclass
class RelaxReport:
    objective_curve: list = field(default_factory=list)
    accepted_steps: int = 0
    status: str = "ok"  # "ok" or "stagnated"
    initial_objective: float = 0.0
    final_objective: float = 0.0


def coulomb_relax(
    g: MetricField,
    W0: CoframeField,
    steps: int = 200,
    rate: float = 1.0,
    tol: float = 0.0,
    boundary_weight: float = 1.0,
    precondition: bool = True,
):
    """Gauge descent toward a Coulomb coframe; returns (CoframeField, RelaxReport).

    Iterates W <- exp(xi) W with xi antisymmetric, accepting only steps that
    decrease the objective (step-halving line search).  Orthonormality is
    preserved exactly because updates are pointwise rotations.
    """
    grid = g.grid
    conn0 = connection_forms(g, W0)
    M0 = conn0.matrices()
    R = np.broadcast_to(np.eye(grid.dim), grid.shape + (grid.dim, grid.dim)).copy()

    A, obj, grad = _objective_and_gradient(M0, R, grid, boundary_weight)
    report = RelaxReport(initial_objective=obj, objective_curve=[obj])
    stagnant = 0
    diam2 = sum((grid.extent(a)) ** 2 for a in range(grid.dim))
    shift = 1.0 / max(diam2, 1e-30)
    step = rate
    prev_grad = None
    prev_pg = None
    prev_dir = None

    for _ in range(steps):
        if obj <= tol:
            break
        pg = grad
        if precondition:
            pg = _spectral_smooth(grad, grid, shift)
            pg = 0.5 * (pg - np.swapaxes(pg, -1, -2))
        direction = -pg
        if prev_dir is not None:
            # Polak-Ribiere momentum with automatic restart
            denom = float(np.sum(prev_pg * prev_grad))
            beta = float(np.sum(pg * (grad - prev_grad))) / denom if denom > 0 else 0.0
            if beta > 0:
                direction = -pg + beta * prev_dir
        gd = float(np.sum(grad * direction))
        if gd >= 0:  # momentum/preconditioner produced a non-descent direction
            direction = -pg
            gd = float(np.sum(grad * direction))
        if gd >= 0:
            direction = -grad
            gd = float(np.sum(grad * direction))
            if gd >= 0:  # gradient is numerically zero
                break
        step = 2.0 * step  # warm-start from the last accepted step
        accepted = False
        for _halve in range(40):
            R_try = rotation_exp(step * direction) @ R
            A_try, obj_try, grad_try = _objective_and_gradient(M0, R_try, grid, boundary_weight)
            if obj_try < obj:
                prev_grad, prev_pg, prev_dir = grad, pg, step * direction
                R, A, obj, grad = R_try, A_try, obj_try, grad_try
                report.objective_curve.append(obj)
                report.accepted_steps += 1
                accepted = True
                break
            step *= 0.5
        if not accepted:
            prev_grad = prev_pg = prev_dir = None  # restart momentum
            stagnant += 1
            if stagnant >= 10:
                report.status = "stagnated"
                break
        else:
            stagnant = 0

    report.final_objective = obj
    W = CoframeField(grid, np.einsum("...ij,...ja->...ia", R, W0.values, optimize=True))
    return W, report


def dstar_coframe_identity(g: MetricField, W: CoframeField, conn: ConnectionForms):
    """Both sides of d^{*g} omega^i = sum_j omega^i_j(e_j), for tests."""
    from .metric import codifferential_oneform

    E = W.frame_vectors()
    lhs = np.stack(
        [codifferential_oneform(g, W.values[..., i, :]) for i in range(g.grid.dim)],
        axis=-1,
    )
    rhs = np.einsum("...ija,...ja->...i", conn.values, E, optimize=True)
    return lhs, rhs
