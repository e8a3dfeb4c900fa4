"""Symmetric assembly and CG solution of divergence-form elliptic systems.

The operator is assembled in energy form

    <A u, v> = sum_{a,b} integral  C^{ab} (D_b u)(D_a v),   C = sqrt(det g) g^{-1},

with face-difference stencils and harmonic-mean face coefficients for the
diagonal terms (recovering the standard (2n+1)-point stencil for g = delta)
and nodal central/one-sided derivatives for the cross terms.  Assembling
right-hand sides through the *same* half-operator makes the pure-Neumann
compatibility identity hold to machine precision, and makes the flat case
exactly solvable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import CompatibilityError, ConfigurationError, NonConvergenceError
from .grid import GridSpec

__all__ = [
    "LinearSystem",
    "SolveReport",
    "WeakLaplacian",
    "assemble_weak_laplacian",
    "apply_flux_divergence",
    "solve",
]

COMPATIBILITY_RTOL = 1e-8


# -- elementary difference operators and their exact adjoints ----------------


def _nodal_derivative(u: NDArray, grid: GridSpec, axis: int) -> NDArray:
    h = grid.spacing[axis]
    if grid.periodic[axis]:
        return (np.roll(u, -1, axis=axis) - np.roll(u, 1, axis=axis)) / (2.0 * h)
    return np.gradient(u, h, axis=axis, edge_order=2)


def _nodal_derivative_adjoint(w: NDArray, grid: GridSpec, axis: int) -> NDArray:
    """Exact transpose of :func:`_nodal_derivative` (verified by unit test)."""
    h = grid.spacing[axis]
    if grid.periodic[axis]:
        return (np.roll(w, 1, axis=axis) - np.roll(w, -1, axis=axis)) / (2.0 * h)
    out = np.zeros_like(w)
    sl = lambda s: tuple(s if a == axis else slice(None) for a in range(grid.dim))
    # interior central rows: d_i = (u_{i+1} - u_{i-1}) / 2h for 1 <= i <= N-2
    out[sl(slice(2, None))] += w[sl(slice(1, -1))] / (2 * h)
    out[sl(slice(None, -2))] -= w[sl(slice(1, -1))] / (2 * h)
    # one-sided row 0: (-3 u_0 + 4 u_1 - u_2) / 2h
    out[sl(slice(0, 1))] += -3.0 * w[sl(slice(0, 1))] / (2 * h)
    out[sl(slice(1, 2))] += 4.0 * w[sl(slice(0, 1))] / (2 * h)
    out[sl(slice(2, 3))] += -1.0 * w[sl(slice(0, 1))] / (2 * h)
    # one-sided row N-1: (3 u_{N-1} - 4 u_{N-2} + u_{N-3}) / 2h
    out[sl(slice(-1, None))] += 3.0 * w[sl(slice(-1, None))] / (2 * h)
    out[sl(slice(-2, -1))] += -4.0 * w[sl(slice(-1, None))] / (2 * h)
    out[sl(slice(-3, -2))] += 1.0 * w[sl(slice(-1, None))] / (2 * h)
    return out


def _face_difference(u: NDArray, grid: GridSpec, axis: int) -> NDArray:
    """(u_{i+1} - u_i)/h on faces; periodic axes keep full length by wrap."""
    h = grid.spacing[axis]
    if grid.periodic[axis]:
        return (np.roll(u, -1, axis=axis) - u) / h
    lo = tuple(slice(None, -1) if a == axis else slice(None) for a in range(grid.dim))
    hi = tuple(slice(1, None) if a == axis else slice(None) for a in range(grid.dim))
    return (u[hi] - u[lo]) / h


def _face_difference_adjoint(w: NDArray, grid: GridSpec, axis: int) -> NDArray:
    h = grid.spacing[axis]
    if grid.periodic[axis]:
        return (np.roll(w, 1, axis=axis) - w) / h
    shape = list(w.shape)
    shape[axis] += 1
    out = np.zeros(shape)
    lo = tuple(slice(None, -1) if a == axis else slice(None) for a in range(len(shape)))
    hi = tuple(slice(1, None) if a == axis else slice(None) for a in range(len(shape)))
    out[hi] += w / h
    out[lo] -= w / h
    return out


def _face_mean(u: NDArray, grid: GridSpec, axis: int, harmonic: bool = False) -> NDArray:
    if grid.periodic[axis]:
        a, b = u, np.roll(u, -1, axis=axis)
    else:
        lo = tuple(slice(None, -1) if ax == axis else slice(None) for ax in range(grid.dim))
        hi = tuple(slice(1, None) if ax == axis else slice(None) for ax in range(grid.dim))
        a, b = u[lo], u[hi]
    if harmonic:
        return 2.0 * a * b / (a + b)
    return 0.5 * (a + b)


def _face_weights(grid: GridSpec, axis: int) -> NDArray:
    """Quadrature weight per face of the given axis (dual-cell volume)."""
    w = np.ones(tuple(
        (grid.shape[a] if grid.periodic[a] else grid.shape[a] - 1) if a == axis
        else grid.shape[a]
        for a in range(grid.dim)
    ))
    for a in range(grid.dim):
        if a == axis:
            wa = np.ones(w.shape[a])
        else:
            wa = np.ones(grid.shape[a])
            if not grid.periodic[a]:
                wa[0] = wa[-1] = 0.5
        sl = [None] * grid.dim
        sl[a] = slice(None)
        w = w * (wa[tuple(sl)] * grid.spacing[a])
    return w


# -- operator ---------------------------------------------------------------


class WeakLaplacian:
    """Energy-form discretization of u -> -div(C grad u), C = sqrt(det g) g^{-1}."""

    def __init__(self, grid: GridSpec, coeff: NDArray):
        n = grid.dim
        if coeff.shape != grid.shape + (n, n):
            raise ConfigurationError("coefficient field shape mismatch")
        self.grid = grid
        self.coeff = coeff
        self.q = grid.quadrature_weights()
        self._face_c = [
            _face_mean(coeff[..., a, a], grid, a, harmonic=True) for a in range(n)
        ]
        self._face_q = [_face_weights(grid, a) for a in range(n)]
        self._has_cross = any(
            np.any(coeff[..., a, b] != 0.0)
            for a in range(n)
            for b in range(n)
            if a != b
        )

    def apply(self, u: NDArray) -> NDArray:
        grid, n = self.grid, self.grid.dim
        out = np.zeros_like(u)
        for a in range(n):
            flux = self._face_q[a] * self._face_c[a] * _face_difference(u, grid, a)
            out += _face_difference_adjoint(flux, grid, a)
        if self._has_cross:
            du = [_nodal_derivative(u, grid, b) for b in range(n)]
            for a in range(n):
                for b in range(n):
                    if a == b:
                        continue
                    out += _nodal_derivative_adjoint(
                        self.q * self.coeff[..., a, b] * du[b], grid, a
                    )
        return out

    def half_apply(self, omega: NDArray) -> NDArray:
        """rhs assembly  v -> integral C^{ab} omega_b (D_a v)  for a 1-form omega.

        Built from the same stencils as :meth:`apply`, so <half_apply(w), 1> = 0
        to machine precision and half_apply(grad u) = apply(u) holds exactly in
        the flat constant-coefficient case.
        """
        grid, n = self.grid, self.grid.dim
        out = np.zeros(grid.shape)
        for a in range(n):
            face_val = _face_mean(self.coeff[..., a, a] * omega[..., a], grid, a)
            out += _face_difference_adjoint(self._face_q[a] * face_val, grid, a)
        if self._has_cross:
            for a in range(n):
                for b in range(n):
                    if a == b:
                        continue
                    out += _nodal_derivative_adjoint(
                        self.q * self.coeff[..., a, b] * omega[..., b], grid, a
                    )
        return out

    def diagonal(self) -> NDArray:
        """Diagonal of the assembled operator (for Jacobi scaling).

        Only the dominant face-difference part is accumulated; cross-term
        diagonal contributions are zero in the interior.
        """
        grid, n = self.grid, self.grid.dim
        diag = np.zeros(grid.shape)
        for a in range(n):
            w = self._face_q[a] * self._face_c[a] / grid.spacing[a] ** 2
            if grid.periodic[a]:
                diag += w + np.roll(w, 1, axis=a)
            else:
                pad_lo = tuple(slice(None, -1) if ax == a else slice(None) for ax in range(n))
                pad_hi = tuple(slice(1, None) if ax == a else slice(None) for ax in range(n))
                diag[pad_lo] += w
                diag[pad_hi] += w
        return diag


def apply_flux_divergence(coeff: NDArray, u: NDArray, grid: GridSpec) -> NDArray:
    """Pointwise  d_a (C^{ab} d_b u)  by the shared flux stencil.

    Interior rows are second-order consistent; rows within one node of a box
    boundary carry the natural-boundary-condition bias of the energy form and
    should not be read as pointwise values of the operator.
    """
    op = WeakLaplacian(grid, np.asarray(coeff, dtype=float))
    return -op.apply(np.asarray(u, dtype=float)) / grid.quadrature_weights()


# -- systems ------------------------------------------------------------------


@dataclass
class SolveReport:
    bc: str
    n_unknowns: int
    iterations: int
    tol: float
    relative_residual: float
    compatibility_defect: float
    converged: bool
    residual_curve: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["residual_curve"] = [float(x) for x in self.residual_curve]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass
class LinearSystem:
    """One assembled elliptic problem, ready for :func:`solve`."""

    operator: WeakLaplacian
    rhs: NDArray
    constraint: str  # "none" or "mean-zero"
    bc: str  # "neumann" or "dirichlet"
    interior: NDArray | None = None  # bool mask for Dirichlet unknowns
    lift: NDArray | None = None  # Dirichlet boundary values (full array)
    compatibility_defect: float = 0.0


def assemble_weak_laplacian(g, bc: str) -> "LaplacianBuilder":
    """Builder for Neumann / Dirichlet systems of -Delta_g (weak, symmetric)."""
    if bc not in ("neumann", "dirichlet"):
        raise ConfigurationError(f"bc must be neumann or dirichlet, got {bc!r}")
    grid = g.grid
    if bc == "dirichlet" and all(grid.periodic):
        raise ConfigurationError("Dirichlet problem needs a boundary (box topology)")
    coeff = g.volume_density()[..., None, None] * g.inverse()
    return LaplacianBuilder(WeakLaplacian(grid, coeff), bc, g)


class LaplacianBuilder:
    def __init__(self, op: WeakLaplacian, bc: str, g):
        self.op = op
        self.bc = bc
        self.metric = g

    def neumann_system(
        self,
        oneform: NDArray | None = None,
        source: NDArray | None = None,
        boundary_flux: NDArray | None = None,
    ) -> LinearSystem:
        """Pure-Neumann, mean-zero system.

        ``oneform`` omega assembles the right-hand side of
        -Delta_g y = d*_g omega with conormal data from omega itself through
        the half-operator (exactly compatible).  ``source`` adds a nodal
        volume source (tested against sqrt(det g) and quadrature weights);
        ``boundary_flux`` adds explicit conormal data per boundary node.
        """
        if self.bc != "neumann":
            raise ConfigurationError("builder was assembled for Dirichlet bc")
        grid = self.op.grid
        rhs = np.zeros(grid.shape)
        if oneform is not None:
            rhs += self.op.half_apply(np.asarray(oneform, dtype=float))
        if source is not None:
            rhs += self.op.q * self.metric.volume_density() * np.asarray(source, dtype=float)
        if boundary_flux is not None:
            bf = np.asarray(boundary_flux, dtype=float)
            for a, side, sl, _ in grid.boundary_faces():
                wface = grid.face_quadrature_weights(a, side)
                rhs[sl] += wface * bf[sl]
        defect = float(np.sum(rhs))
        norm = float(np.linalg.norm(rhs.ravel()))
        rel = abs(defect) / norm if norm > 0 else 0.0
        if rel > COMPATIBILITY_RTOL:
            raise CompatibilityError(rel)
        if norm > 0:
            rhs = rhs - defect / rhs.size
        return LinearSystem(self.op, rhs, "mean-zero", "neumann",
                            compatibility_defect=rel)

    def dirichlet_system(
        self, boundary_values: NDArray, source: NDArray | None = None
    ) -> LinearSystem:
        grid = self.op.grid
        mask = grid.boundary_mask()
        lift = np.zeros(grid.shape)
        bv = np.asarray(boundary_values, dtype=float)
        lift[mask] = bv[mask] if bv.shape == grid.shape else bv
        rhs = np.zeros(grid.shape)
        if source is not None:
            rhs += self.op.q * self.metric.volume_density() * np.asarray(source, dtype=float)
        rhs = rhs - self.op.apply(lift)
        return LinearSystem(self.op, rhs, "none", "dirichlet",
                            interior=~mask, lift=lift)


# -- CG solver ----------------------------------------------------------------


def solve(system: LinearSystem, tol: float = 1e-12, maxiter: int | None = None):
    """Preconditioned conjugate gradients; returns ``(solution, SolveReport)``.

    Mean-zero systems are projected onto the zero-mean subspace each
    iteration; the returned field has volume-weighted zero mean.
    """
    op = system.operator
    grid = op.grid
    if maxiter is None:
        maxiter = 40 * int(sum(grid.shape))
    diag = op.diagonal()
    diag = np.where(diag > 0, diag, 1.0)

    if system.bc == "dirichlet":
        interior = system.interior

        def project(v):
            out = np.where(interior, v, 0.0)
            return out
    else:
        def project(v):
            return v - np.mean(v)

    def A(v):
        return project(op.apply(v))

    b = project(system.rhs)
    x = np.zeros(grid.shape)
    r = b.copy()
    bnorm = float(np.linalg.norm(b.ravel()))
    curve = []
    it = 0
    if bnorm == 0.0:
        rel = 0.0
    else:
        z = project(r / diag)
        p = z.copy()
        rz = float(np.sum(r * z))
        rel = 1.0
        for it in range(1, maxiter + 1):
            Ap = A(p)
            pAp = float(np.sum(p * Ap))
            if pAp <= 0:
                break
            alpha = rz / pAp
            x += alpha * p
            r -= alpha * Ap
            rel = float(np.linalg.norm(r.ravel())) / bnorm
            curve.append(rel)
            if rel <= tol:
                break
            z = project(r / diag)
            rz_new = float(np.sum(r * z))
            p = z + (rz_new / rz) * p
            rz = rz_new
        if rel > tol:
            raise NonConvergenceError(curve)

    if system.bc == "dirichlet":
        u = x + system.lift
    else:
        # volume-weighted zero mean
        u = x - np.sum(op.q * x) / np.sum(op.q)

    report = SolveReport(
        bc=system.bc,
        n_unknowns=int(np.sum(system.interior)) if system.interior is not None else grid.n_nodes,
        iterations=it,
        tol=tol,
        relative_residual=rel,
        compatibility_defect=system.compatibility_defect,
        converged=rel <= tol,
        residual_curve=curve[-20:],
    )
    return u, report
