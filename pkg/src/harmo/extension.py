"""Extending immersions and metrics past a sphere boundary by radial blending.

The blending region is the annulus ``1 <= r <= 2`` discretized in polar
product coordinates (radius times an angular grid for the unit sphere; the
angular grid offsets its latitude nodes by half a spacing so the coordinate
poles never coincide with a node).  Boundary data -- a value and a radial
derivative on the unit sphere -- is pushed into the annulus by a cubic
Hermite profile in the radius, then faded into an exact flat plane by a
quintic smoothstep cutoff.  Everything here is linear, explicit, and
satisfies the four trace conditions analytically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .coords import _spline_eval
from .errors import (
    ExtensionDegeneracyError,
    HypothesisError,
    InvalidSampleError,
    UnsupportedDimensionError,
)
from .grid import GridSpec, gradient_values, integrate_values
from .lorentz import LorentzExponent, WeightedSample, field_sample, lorentz_norm
from .metric import MetricField, christoffel, riemann_from_christoffel
from .immersion import ImmersionField

__all__ = [
    "sphere_grid",
    "sphere_embedding",
    "sphere_metric",
    "annulus_grid",
    "polar_embedding",
    "hermite_h0",
    "hermite_h1",
    "smoothstep_cutoff",
    "BoundaryGraphData",
    "hypothesis_ledger",
    "spherical_cap_data",
    "hermite_trace_extension",
    "trace_extension_norms",
    "glue_extension",
    "junction_report",
    "metric_extension_glue",
]


# -- polar/spherical product grids ----------------------------------------------


def sphere_grid(n: int, resolution: int = 32) -> GridSpec:
    """Angular grid for the unit sphere in R^n (so the grid has n-1 axes).

    Latitude-like angles in (0, pi) are box axes whose first node sits half a
    spacing away from the pole; the final azimuth in [0, 2 pi) is periodic.
    """
    if n < 2:
        raise UnsupportedDimensionError(f"sphere grid needs n >= 2, got n={n}")
    if n == 2:
        m = 2 * resolution
        return GridSpec(1, (m,), (2.0 * np.pi / m,), "torus")
    m_lat = resolution
    h_lat = np.pi / m_lat
    m_lon = 2 * resolution
    shape = (m_lat,) * (n - 2) + (m_lon,)
    spacing = (h_lat,) * (n - 2) + (2.0 * np.pi / m_lon,)
    origin = (0.5 * h_lat,) * (n - 2) + (0.0,)
    periodic = (False,) * (n - 2) + (True,)
    return GridSpec(n - 1, shape, spacing, "mixed", origin=origin, periodic=periodic)


def sphere_embedding(grid: GridSpec) -> NDArray:
    """Unit vectors E(angles) in R^n for a :func:`sphere_grid`.

    E_i = cos(a_i) * prod_{j<i} sin(a_j) for i < n, E_n = prod of all sines.
    """
    angles = grid.coordinates()
    k = grid.dim  # number of angles, sphere lives in R^{k+1}
    out = np.empty(grid.shape + (k + 1,))
    running = np.ones(grid.shape)
    for i in range(k):
        out[..., i] = running * np.cos(angles[..., i])
        running = running * np.sin(angles[..., i])
    out[..., k] = running
    return out


def sphere_metric(grid: GridSpec) -> MetricField:
    """Round metric on the angular grid, induced from the unit embedding."""
    de = gradient_values(sphere_embedding(grid), grid)  # (*S, a, m)
    return MetricField(grid, np.einsum("...am,...bm->...ab", de, de, optimize=True))


def annulus_grid(sphere: GridSpec, nodes_per_unit: int = 16,
                 r_min: float = 1.0, r_max: float = 2.0) -> GridSpec:
    """Product grid radius x sphere; the radial nodes hit integers exactly."""
    dr = 1.0 / nodes_per_unit
    j0 = round(r_min / dr)
    j1 = round(r_max / dr)
    if not (np.isclose(j0 * dr, r_min) and np.isclose(j1 * dr, r_max)):
        raise InvalidSampleError("radial bounds must be multiples of 1/nodes_per_unit")
    return GridSpec(
        sphere.dim + 1,
        (j1 - j0 + 1,) + sphere.shape,
        (dr,) + sphere.spacing,
        "mixed",
        origin=(j0 * dr,) + tuple(sphere.origin),
        periodic=(False,) + tuple(sphere.periodic),
    )


def polar_embedding(grid: GridSpec) -> NDArray:
    """x = r E(angles) in R^n for an :func:`annulus_grid` (radius is axis 0)."""
    angular = GridSpec(
        grid.dim - 1, grid.shape[1:], grid.spacing[1:], "mixed",
        origin=grid.origin[1:], periodic=grid.periodic[1:],
    )
    e = sphere_embedding(angular)
    r = grid.axis_coordinates(0).reshape((-1,) + (1,) * grid.dim)
    return r * e[None, ...]


# -- radial profiles --------------------------------------------------------------


def hermite_h0(r: NDArray) -> NDArray:
    """Cubic with value 1 / slope 0 at r=1 and value 0 / slope 0 at r=2."""
    r = np.asarray(r, dtype=float)
    return (r - 2.0) ** 2 * (2.0 * r - 1.0)


def hermite_h1(r: NDArray) -> NDArray:
    """Cubic with value 0 / slope 1 at r=1 and value 0 / slope 0 at r=2."""
    r = np.asarray(r, dtype=float)
    return (r - 1.0) * (r - 2.0) ** 2


def smoothstep_cutoff(r: NDArray, inner: float = 1.25, outer: float = 2.0) -> NDArray:
    """C^2 quintic fade: 1 for r <= inner, 0 for r >= outer."""
    s = np.clip((np.asarray(r, dtype=float) - inner) / (outer - inner), 0.0, 1.0)
    return 1.0 - s**3 * (10.0 - 15.0 * s + 6.0 * s**2)


# -- boundary data ----------------------------------------------------------------


def _covariant_hessian(values: NDArray, g: MetricField, gamma: NDArray) -> NDArray:
    """Hess[..., a, b, m] of a vector-valued field on (grid, g)."""
    d1 = gradient_values(values, g.grid)  # (*S, a, m)
    d2 = gradient_values(d1, g.grid)  # (*S, b, a, m)
    d2 = np.einsum("...bam->...abm", d2)
    d2 = 0.5 * (d2 + np.swapaxes(d2, -3, -2))
    return d2 - np.einsum("...cab,...cm->...abm", gamma, d1, optimize=True)


def _ln_norm(mag: NDArray, grid: GridSpec, dens: NDArray, n: int) -> float:
    return float(integrate_values(mag**n * dens, grid) ** (1.0 / n))


@dataclass
class BoundaryGraphData:
    """Boundary trace of an immersion over the unit sphere.

    ``phi`` is the deviation of the boundary curve from the reference sphere
    slice of the target plane; ``tau_minus_theta`` is the deviation of the
    outward tangential field from the radial direction; ``q`` offsets the
    target plane in the normal coordinates.
    """

    sphere: GridSpec
    phi: NDArray
    tau_minus_theta: NDArray
    q: NDArray
    epsilon: float
    ledger: dict = field(default=None, repr=False)

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=float)
        self.tau_minus_theta = np.asarray(self.tau_minus_theta, dtype=float)
        self.q = np.asarray(self.q, dtype=float)
        n = self.sphere.dim + 1
        if self.phi.shape != self.sphere.shape + (self.phi.shape[-1],):
            raise InvalidSampleError("phi must be a d-vector field on the sphere grid")
        d = self.phi.shape[-1]
        if d <= n:
            raise UnsupportedDimensionError(f"boundary data needs d > n, got d={d}")
        if self.tau_minus_theta.shape != self.phi.shape:
            raise InvalidSampleError("tau_minus_theta must match phi's shape")
        if self.q.shape != (d - n,):
            raise InvalidSampleError(f"plane offset must have {d - n} components")
        if np.linalg.norm(self.q) >= 1.0:
            raise InvalidSampleError("plane offset must have norm < 1")
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise InvalidSampleError("epsilon must be positive")
        if self.ledger is None:
            self.ledger = hypothesis_ledger(self)

    @property
    def n(self) -> int:
        return self.sphere.dim + 1

    @property
    def d(self) -> int:
        return self.phi.shape[-1]

    def plane_offset(self) -> NDArray:
        """The offset q padded to a full ambient vector (0, ..., 0, q)."""
        out = np.zeros(self.d)
        out[self.n:] = self.q
        return out


def hypothesis_ledger(data: BoundaryGraphData) -> dict:
    """Smallness constants of the boundary data, relative to epsilon.

    ``graph``: eps^{-1} (|phi|_inf + |grad phi|_inf) + |hess phi|_{L^n};
    ``tangent_gradient_form``: eps^{-1} (|t|_inf + |grad t|_{L^n}) and
    ``tangent_sobolev_form``: eps^{-1} (|t|_inf + |t|_{W^{1,n}}) for
    t = tau - theta.  Both tangent variants are recorded; callers pick one.
    """
    n = data.n
    g = sphere_metric(data.sphere)
    gamma = christoffel(g).values
    ginv = g.inverse()
    dens = g.volume_density()

    dphi = gradient_values(data.phi, data.sphere)
    grad_mag = np.sqrt(
        np.maximum(np.einsum("...am,...ab,...bm->...", dphi, ginv, dphi, optimize=True), 0.0)
    )
    hess = _covariant_hessian(data.phi, g, gamma)
    hess_mag = np.sqrt(np.maximum(np.einsum(
        "...abm,...au,...bv,...uvm->...", hess, ginv, ginv, hess, optimize=True), 0.0))
    eps = data.epsilon
    graph = (
        float(np.max(np.linalg.norm(data.phi, axis=-1)) + np.max(grad_mag)) / eps
        + _ln_norm(hess_mag, data.sphere, dens, n)
    )

    t = data.tau_minus_theta
    dt = gradient_values(t, data.sphere)
    dt_mag = np.sqrt(
        np.maximum(np.einsum("...am,...ab,...bm->...", dt, ginv, dt, optimize=True), 0.0)
    )
    t_sup = float(np.max(np.linalg.norm(t, axis=-1)))
    t_ln = _ln_norm(np.linalg.norm(t, axis=-1), data.sphere, dens, n)
    dt_ln = _ln_norm(dt_mag, data.sphere, dens, n)
    return {
        "epsilon": eps,
        "graph": graph,
        "tangent_gradient_form": (t_sup + dt_ln) / eps,
        "tangent_sobolev_form": (t_sup + t_ln + dt_ln) / eps,
    }


def spherical_cap_data(
    sphere: GridSpec,
    epsilon: float,
    d: int | None = None,
    q: NDArray | None = None,
    ridge_width: float | None = None,
    seed: int = 0,
) -> BoundaryGraphData:
    """Boundary data of a creased spherical cap of amplitude epsilon.

    The cap heights are a smoothed ridge eps * (sqrt(s^2 + rho^2) - rho) of
    the signed distance s to a great sphere, with smoothing width rho =
    epsilon by default: the second derivative then concentrates at height
    1/rho on a band of measure rho, which is exactly the profile whose
    blended extension saturates the eps^{1/n} curvature scaling.  The
    tangential field tau is the honest tangential projection of the boundary
    curve along the cone over it, so a cone interior glues C^1-exactly when
    the plane offset vanishes.
    """
    n = sphere.dim + 1
    d = d or n + 1
    rho = epsilon if ridge_width is None else ridge_width
    rng = np.random.default_rng(seed)
    e = sphere_embedding(sphere)  # (*S, n)
    u = np.zeros(sphere.shape + (d - n,))
    for m in range(d - n):
        axis = rng.normal(size=n)
        axis /= np.linalg.norm(axis)
        s = np.einsum("...i,i->...", e, axis)
        u[..., m] = epsilon * (np.sqrt(s**2 + rho**2) - rho)
    u2 = np.sum(u**2, axis=-1)
    if np.any(u2 >= 1.0):
        raise InvalidSampleError("cap heights exceed the unit sphere")
    boundary = np.zeros(sphere.shape + (d,))
    boundary[..., :n] = np.sqrt(1.0 - u2)[..., None] * e
    boundary[..., n:] = u
    theta = np.zeros(sphere.shape + (d,))
    theta[..., :n] = e
    phi = boundary - theta

    # tangent frame of the cone r -> r (boundary - q~) at r = 1
    qpad = np.zeros(d)
    qpad[n:] = 0.0 if q is None else np.asarray(q, dtype=float)
    radial = boundary - qpad
    dtheta = gradient_values(boundary, sphere)  # (*S, a, m)
    frame = np.concatenate([radial[..., None, :], dtheta], axis=-2)  # (*S, n, m)
    gram = np.einsum("...am,...bm->...ab", frame, frame, optimize=True)
    rhs = np.einsum("...am,...m->...a", frame, boundary)
    coeff = np.linalg.solve(gram, rhs[..., None])[..., 0]
    tau = np.einsum("...a,...am->...m", coeff, frame)
    data = BoundaryGraphData(
        sphere=sphere,
        phi=phi,
        tau_minus_theta=tau - theta,
        q=qpad[n:],
        epsilon=epsilon,
    )
    return data


# -- trace extension and gluing ----------------------------------------------------


def hermite_trace_extension(
    data: BoundaryGraphData, nodes_per_unit: int = 16
) -> tuple[GridSpec, NDArray]:
    """psi'(r, theta) = H0(r) phi(theta) + H1(r) (tau - theta) on [1, 2] x sphere.

    The four trace conditions (value phi and radial slope tau - theta at r=1,
    value and slope zero at r=2) hold exactly by the Hermite profiles.
    """
    grid = annulus_grid(data.sphere, nodes_per_unit, 1.0, 2.0)
    r = grid.axis_coordinates(0).reshape((-1,) + (1,) * data.sphere.dim + (1,))
    psip = hermite_h0(r) * data.phi[None] + hermite_h1(r) * data.tau_minus_theta[None]
    return grid, psip


def trace_extension_norms(
    data: BoundaryGraphData, nodes_per_unit: int = 16
) -> dict:
    """Three-layer bookkeeping |psi'|_inf + |grad psi'|_{L^n} + |hess psi'|_{L^n}.

    Gradients and Hessians are Euclidean, computed covariantly through the
    flat metric expressed in the polar product coordinates of the annulus.
    """
    grid, psip = hermite_trace_extension(data, nodes_per_unit)
    n = data.n
    x = polar_embedding(grid)
    dx = gradient_values(x, grid)
    g = MetricField(grid, np.einsum("...am,...bm->...ab", dx, dx, optimize=True))
    ginv = g.inverse()
    dens = g.volume_density()
    gamma = christoffel(g).values
    dpsi = gradient_values(psip, grid)
    grad_mag = np.sqrt(
        np.maximum(np.einsum("...am,...ab,...bm->...", dpsi, ginv, dpsi, optimize=True), 0.0)
    )
    hess = _covariant_hessian(psip, g, gamma)
    hess_mag = np.sqrt(np.maximum(np.einsum(
        "...abm,...au,...bv,...uvm->...", hess, ginv, ginv, hess, optimize=True), 0.0))
    sup = float(np.max(np.linalg.norm(psip, axis=-1)))
    gn = _ln_norm(grad_mag, grid, dens, n)
    hn = _ln_norm(hess_mag, grid, dens, n)
    return {"sup": sup, "grad_ln": gn, "hess_ln": hn, "total": sup + gn + hn}


def glue_extension(
    data: BoundaryGraphData,
    inner=None,
    nodes_per_unit: int = 16,
    r_min: float = 0.25,
    r_max: float = 2.5,
    cutoff_inner: float = 1.25,
    hypothesis_bound: float | None = None,
) -> tuple[ImmersionField, dict]:
    """Glue an interior immersion to an exact flat plane across [1, 2].

    The result on the polar grid is the interior for r <= 1, the blended
    graph plane + cutoff * psi' on the annulus, and bit-exactly the plane
    q + (x, 0) for r >= 2.  ``inner`` maps (r_values, sphere_unit_vectors)
    to ambient points for r <= 1; by default it is the cone over the
    boundary curve with apex at the plane offset, which matches the boundary
    data to machine precision when the offset is zero.
    """
    if hypothesis_bound is not None:
        failed = [
            key
            for key in ("graph", "tangent_gradient_form", "tangent_sobolev_form")
            if data.ledger[key] > hypothesis_bound
        ]
        if failed:
            raise HypothesisError(failed, data.ledger)

    n, d = data.n, data.d
    grid = annulus_grid(data.sphere, nodes_per_unit, r_min, r_max)
    r = grid.axis_coordinates(0)
    e = sphere_embedding(data.sphere)
    qpad = data.plane_offset()

    rcol = r.reshape((-1,) + (1,) * data.sphere.dim + (1,))
    plane = np.zeros(grid.shape + (d,))
    plane[..., :n] = rcol * e[None]
    plane += qpad

    rb = np.clip(rcol, 1.0, 2.0)
    psip = hermite_h0(rb) * data.phi[None] + hermite_h1(rb) * data.tau_minus_theta[None]
    chi = smoothstep_cutoff(rcol, cutoff_inner, 2.0)
    outside = plane + np.where(rcol < 2.0, chi * psip, 0.0)

    if inner is None:
        theta = np.zeros(data.sphere.shape + (d,))
        theta[..., :n] = e
        ray = theta + data.phi - qpad
        inside = qpad + rcol * ray[None]
    else:
        inside = inner(r, e)
        if inside.shape != grid.shape + (d,):
            raise InvalidSampleError("inner map must return values on the polar grid")

    values = np.where(rcol <= 1.0, inside, outside)
    imm = ImmersionField(grid, values)

    j1 = int(np.argmin(np.abs(r - 1.0)))
    report = junction_report(imm, j1)
    report["data_value_jump"] = float(np.max(np.abs(inside[j1] - outside[j1])))
    out_zone = r >= 2.0
    report["flat_outside_max"] = float(
        np.max(np.abs(values[out_zone] - plane[out_zone]))
    )
    ginv = imm.metric.inverse()
    from .immersion import _tensor_norm_normal_valued

    mag = _tensor_norm_normal_valued(imm.second_fundamental_form(), ginv, 2)
    report["ii_lorentz_norm"] = lorentz_norm(
        field_sample(mag, grid, imm.metric.volume_density()), LorentzExponent(n, 2)
    )
    report["ledger"] = dict(data.ledger)
    return imm, report


def _radial_subfield(imm: ImmersionField, lo: int, hi: int) -> ImmersionField:
    grid = imm.grid
    sub = GridSpec(
        grid.dim,
        (hi - lo,) + grid.shape[1:],
        grid.spacing,
        "mixed",
        origin=(grid.origin[0] + lo * grid.spacing[0],) + tuple(grid.origin[1:]),
        periodic=grid.periodic,
    )
    return ImmersionField(sub, imm.values[lo:hi])


def junction_report(imm: ImmersionField, index: int) -> dict:
    """One-sided traces of the map, its differential, and the Gauss map.

    Splits the radial axis at ``index`` and rebuilds each side with its own
    one-sided stencils at the junction; the reported numbers are the sup
    differences of the shared traces.
    """
    if not 2 <= index <= imm.grid.shape[0] - 3:
        raise InvalidSampleError("junction needs >= 3 radial nodes on each side")
    left = _radial_subfield(imm, 0, index + 1)
    right = _radial_subfield(imm, index, imm.grid.shape[0])
    return {
        "value_jump": float(np.max(np.abs(left.values[-1] - right.values[0]))),
        "derivative_jump": float(np.max(np.abs(left.dphi[-1] - right.dphi[0]))),
        "gauss_map_jump": float(
            np.max(np.abs(left.gauss_map()[-1] - right.gauss_map()[0]))
        ),
    }


# -- metric gluing ------------------------------------------------------------------


def metric_extension_glue(
    g: MetricField, cutoff_inner: float = 1.25
) -> tuple[MetricField, dict]:
    """Blend a metric on the unit ball into the flat metric outside radius 2.

    ``g`` must live on a box grid whose hull contains the ball of radius 2.
    Its value and radial derivative traces on the unit sphere, evaluated by
    spline interpolation, feed the same Hermite-in-radius extension used for
    immersions, applied componentwise to g - delta; the blended metric is g
    inside the ball, delta + cutoff * gamma on the annulus, and exactly delta
    outside radius 2.  Reports the curvature Lorentz norm split by region.
    """
    grid = g.grid
    if any(grid.periodic):
        raise InvalidSampleError("metric gluing needs a box grid")
    n = grid.dim
    for lo, hi in grid.hull():
        if lo > -2.0 or hi < 2.0:
            raise InvalidSampleError("grid hull must contain the ball of radius 2")
    pts = grid.coordinates()
    r = np.linalg.norm(pts, axis=-1)
    eye = np.eye(n)

    annulus = (r > 1.0) & (r < 2.0)
    values = np.where((r <= 1.0)[..., None, None], g.values, eye)
    if np.any(annulus):
        directions = pts[annulus] / r[annulus][..., None]
        kappa = _spline_eval(g.values, grid, directions) - eye
        dg = gradient_values(g.values, grid)  # (*S, a, i, j)
        dg_dir = _spline_eval(dg, grid, directions)
        tau = np.einsum("...a,...aij->...ij", directions, dg_dir, optimize=True)
        ra = r[annulus][..., None, None]
        gamma = hermite_h0(ra) * kappa + hermite_h1(ra) * tau
        blended = eye + smoothstep_cutoff(ra, cutoff_inner, 2.0) * gamma
        blended = 0.5 * (blended + np.swapaxes(blended, -2, -1))
        eigs = np.linalg.eigvalsh(blended)
        if np.any(eigs[..., 0] <= 0.0):
            raise ExtensionDegeneracyError(
                "blended metric lost positivity on the annulus"
            )
        values[annulus] = blended
        boundary_sup = float(np.max(np.abs(kappa)))
    else:
        boundary_sup = 0.0

    glued = MetricField(grid, values)
    riem = riemann_from_christoffel(glued)
    mag = riem.pointwise_norm(glued)
    dens = glued.volume_density()
    exponent = LorentzExponent(max(n / 2.0, 1.0), 1)
    report = {"boundary_trace_sup": boundary_sup}
    regions = {
        "interior": r <= 1.0,
        "annulus": annulus,
        "exterior": r >= 2.0,
    }
    weights = grid.quadrature_weights() * dens
    for name, mask in regions.items():
        if np.any(mask):
            sample = WeightedSample(mag[mask], weights[mask])
            report[f"{name}_curvature_norm"] = lorentz_norm(sample, exponent)
        else:
            report[f"{name}_curvature_norm"] = 0.0
    report["total_curvature_norm"] = lorentz_norm(
        field_sample(mag, grid, dens), exponent
    )
    return glued, report
