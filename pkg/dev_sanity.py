"""Throwaway development sanity checks (not part of the shipped suite)."""
import numpy as np
from harmo.grid import GridSpec, TensorField, gradient_values, integrate, scalar_field, sample_function
from harmo.lorentz import LorentzExponent, WeightedSample, lorentz_norm
from harmo.metric import (MetricField, flat_metric, christoffel, riemann_from_christoffel,
                          riemann_direct, ricci, harmonic_defect, laplace_beltrami_apply)
from harmo import elliptic

rng = np.random.default_rng(0)

# grid derivative order
g1 = GridSpec(1, (64,), (2*np.pi/64,), "torus")
f = np.sin(g1.axis_coordinates(0))
df = gradient_values(f, g1)[..., 0]
print("deriv err torus:", np.max(np.abs(df - np.cos(g1.axis_coordinates(0)))))

# lorentz closed form
s = WeightedSample([3.0]*4, [1.0]*4)
print("lorentz (2,1) expect 12:", lorentz_norm(s, LorentzExponent(2,1)))
vals = rng.uniform(0,5,50); w = rng.uniform(.1,2,50)
samp = WeightedSample(vals, w)
lp = lorentz_norm(samp, LorentzExponent(3,3))
print("L^(3,3) vs L^3:", lp, (np.sum(w*vals**3))**(1/3))

# conformal metric christoffel oracle, n=3
n = 3
grid = GridSpec(n, (25,)*n, (2.0/24,)*n, "box", origin=(-1.0,)*n)
pts = grid.coordinates()
r2 = np.sum(pts**2, axis=-1)
s2 = r2 / 0.64
phi = np.where(s2 < 1, 0.3*np.exp(1.0 - 1.0/np.maximum(1e-300, 1.0 - np.minimum(s2, 1-1e-15))), 0.0)
gvals = np.exp(2*phi)[..., None, None]*np.eye(n)
mf = MetricField(grid, gvals)
gam = christoffel(mf).values
dphi = gradient_values(phi, grid)
oracle = (np.einsum('ik,...j->...kij', np.eye(n), dphi) + np.einsum('jk,...i->...kij', np.eye(n), dphi)
          - np.einsum('ij,...k->...kij', np.eye(n), dphi))
print("christoffel conformal err:", np.max(np.abs(gam - oracle)))

# cross-formula Riemann
R1 = riemann_from_christoffel(mf)
R2 = riemann_direct(mf)
print("cross-formula max diff:", np.max(np.abs(R1.values - R2.values)))
print("sym residuals (christoffel route):", R1.symmetry_residuals())

# stereographic: round sphere curvature
grid2 = GridSpec(3, (21,)*3, (0.4/20,)*3, "box", origin=(-0.2,)*3)
pts2 = grid2.coordinates()
conf = 4.0/(1.0+np.sum(pts2**2,axis=-1))**2
gv2 = conf[...,None,None]*np.eye(3)
m2 = MetricField(grid2, gv2)
Rst = riemann_from_christoffel(m2).values
expect = np.einsum('...ik,...jl->...ijkl', gv2, gv2) - np.einsum('...il,...jk->...ijkl', gv2, gv2)
interior = (slice(2,-2),)*3
print("stereo Riemann err:", np.max(np.abs(Rst[interior]-expect[interior])), "scale", np.max(np.abs(expect)))
ric = ricci(m2).values
print("stereo Ricci vs 2g err:", np.max(np.abs(ric[interior]-2*gv2[interior])))

# laplace flat
u = pts2[...,0]**2
lap = laplace_beltrami_apply(flat_metric(grid2), u)
print("flat laplace x1^2 -> 2, interior err:", np.max(np.abs(lap[interior]-2)))

# elliptic adjoint check
grid3 = GridSpec(2, (9, 8), (0.3, 0.25), "mixed", periodic=(False, True))
a_ = rng.normal(size=grid3.shape); b_ = rng.normal(size=grid3.shape)
for ax in range(2):
    lhs = np.sum(elliptic._nodal_derivative(a_, grid3, ax)*b_)
    rhs = np.sum(a_*elliptic._nodal_derivative_adjoint(b_, grid3, ax))
    print("nodal adjoint ax", ax, lhs-rhs)
    fd = elliptic._face_difference(a_, grid3, ax)
    c_ = rng.normal(size=fd.shape)
    lhs = np.sum(fd*c_)
    rhs = np.sum(a_*elliptic._face_difference_adjoint(c_, grid3, ax))
    print("face adjoint ax", ax, lhs-rhs)

# operator symmetry + flat Neumann exactness
mf3 = flat_metric(grid)
builder = elliptic.assemble_weak_laplacian(mf3, "neumann")
u1 = rng.normal(size=grid.shape); v1 = rng.normal(size=grid.shape)
print("operator symmetry:", np.sum(builder.op.apply(u1)*v1) - np.sum(u1*builder.op.apply(v1)))
omega = np.zeros(grid.shape+(3,)); omega[...,0] = 1.0
sys_ = builder.neumann_system(oneform=omega)
sol, rep = elliptic.solve(sys_, tol=1e-13)
x1 = grid.coordinates()[...,0]
x1c = x1 - np.sum(builder.op.q*x1)/np.sum(builder.op.q)
print("flat Neumann exactness:", np.max(np.abs(sol-x1c)), "iters", rep.iterations)
