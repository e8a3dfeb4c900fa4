import numpy as np
from harmo.grid import GridSpec
from harmo import immersion as imm, generators
from harmo.metric import christoffel

# flat plane
grid = GridSpec(2, (17,17), (0.1,0.1), "box")
phi = np.zeros(grid.shape+(3,)); phi[...,:2] = grid.coordinates()
F = imm.ImmersionField(grid, phi)
print("flat: |II|", np.max(np.abs(F.second_fundamental_form())),
      "|H|", np.max(np.abs(F.mean_curvature())))

# sphere oracle
R = 2.0
grid2 = GridSpec(2, (33,33), (1.0/32,)*2, "box", origin=(-0.5,-0.5))
phi2, _ = generators.sphere_chart_immersion(grid2, R)
S = imm.ImmersionField(grid2, phi2)
gin = S.metric.inverse()
mag2 = imm._tensor_norm_normal_valued(S.second_fundamental_form(), gin, 2)**2
interior = (slice(3,-3),)*2
print("sphere |II|^2 vs n/R^2:", np.max(np.abs(mag2[interior]-2/R**2)))
H = S.mean_curvature()
print("sphere |H| vs 1/R:", np.max(np.abs(np.linalg.norm(H,axis=-1)[interior]-1/R)))
print("tangency defect:", S.tangency_defect())
gam = christoffel(S.metric).values
lap = np.einsum('...ab,...abm->...m', gin, S.hessian()) - np.einsum(
    '...ab,...eab,...em->...m', gin, gam, S.dphi, optimize=True)
print("nH vs Delta_g Phi:", np.max(np.abs((2*H-lap)[interior])))
print("gauss unit:", np.max(np.abs(np.sum(S.gauss_map()**2,axis=-1)-1)))
d1 = imm.covariant_derivatives_II(S, 1)[1]
print("sphere nabla II sup:", np.max(np.abs(d1[interior])))

# E4 on S^4(R): |II|^4 = 16/R^4, nabla II = 0
grid4 = GridSpec(4, (13,)*4, (0.5/12,)*4, "box", origin=(-0.25,)*4)
phi4, _ = generators.sphere_chart_immersion(grid4, R)
S4 = imm.ImmersionField(grid4, phi4)
E4, terms = imm.energy_En(S4)
gin4 = S4.metric.inverse()
m4 = imm._tensor_norm_normal_valued(S4.second_fundamental_form(), gin4, 2)
inner4 = (slice(3,-3),)*4
print("S4 |II|^4 vs 16/R^4:", np.max(np.abs(m4[inner4]**4 - 16/R**4)))
print("E4 terms (grad term should be small):", terms)

# scale invariance E2
gr = GridSpec(2, (33,33), (1.0/32,)*2, "box")
p,_ = generators.graph_immersion(gr, 0.1, seed=1)
E1, _ = imm.energy_En(imm.ImmersionField(gr, p))
for lam in [0.5, 2.0]:
    gr2 = GridSpec(2, (33,33), (lam/32,)*2, "box")
    E2, _ = imm.energy_En(imm.ImmersionField(gr2, lam*p))
    print(f"E2 scale {lam}: rel diff {abs(E1-E2)/E1:.3g}")

# riemann lorentz bound on families
lhs, rhs = imm.riemann_lorentz_from_II(S)
print("sphere riem vs 2 II^2:", lhs, rhs, lhs <= rhs)
for seed in range(5):
    p,_ = generators.graph_immersion(gr, 0.1, seed=seed)
    lhs, rhs = imm.riemann_lorentz_from_II(imm.ImmersionField(gr, p))
    print(f"graph seed {seed}: lhs {lhs:.4g} rhs {rhs:.4g} ok {lhs <= rhs}")

# brendle codim 2: n=2 d=4 and n=3 d=5; compare constants
print("L(2,4) vs 2 sqrt(pi):", imm.sobolev_constant(2,4), 2*np.sqrt(np.pi))
print("L(3,5) vs 3 (4pi/3)^(1/3):", imm.sobolev_constant(3,5), 3*(4*np.pi/3)**(1/3))
# flat codim-2 with bump
phi_f = np.zeros(grid.shape+(4,)); phi_f[...,:2] = grid.coordinates()
Ff = imm.ImmersionField(grid, phi_f)
tf = generators.bump(grid.coordinates(), grid.center(), 0.5)
print("brendle flat codim2:", imm.brendle_sobolev_check(Ff, tf)["margin"])
# sphere caps sweep n=3 d=5
for i, Rcap in enumerate(np.linspace(2.0, 8.0, 10)):
    g3 = GridSpec(3, (17,)*3, (1.0/16,)*3, "box", origin=(-0.5,)*3)
    p3, _ = generators.sphere_chart_immersion(g3, Rcap, d=5)
    S3 = imm.ImmersionField(g3, p3)
    t3 = generators.bump(g3.coordinates(), g3.center(), 0.45)
    rep = imm.brendle_sobolev_check(S3, t3)
    print(f"cap R={Rcap:.2g}: margin {rep['margin']:.4g}")
