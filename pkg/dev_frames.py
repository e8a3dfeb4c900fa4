import numpy as np
from harmo.grid import GridSpec, gradient_values
from harmo.metric import MetricField, riemann_from_christoffel
from harmo import frames

rng = np.random.default_rng(1)

# stereographic metric
grid = GridSpec(3, (21,)*3, (0.4/20,)*3, "box", origin=(-0.2,)*3)
pts = grid.coordinates()
conf = 4.0/(1.0+np.sum(pts**2,axis=-1))**2
g = MetricField(grid, conf[...,None,None]*np.eye(3))

W = frames.gram_schmidt_coframe(g)
print("orthonormality:", W.orthonormality_residual(g))
conn = frames.connection_forms(g, W)
print("skew defect:", conn.skew_defect)

# structure equation residual: d omega^i = sum_j omega^j wedge omega^i_j
dW = gradient_values(W.values, grid)  # (*S, a, i, b) = d_a W^i_b
dom = np.einsum('...aib->...iab', dW) - np.einsum('...bia->...iab', dW)
rhs = np.einsum('...ja,...ijb->...iab', W.values, conn.values, optimize=True) - \
      np.einsum('...jb,...ija->...iab', W.values, conn.values, optimize=True)
interior = (slice(2,-2),)*3
print("structure eq residual:", np.max(np.abs(dom[interior]-rhs[interior])), "scale", np.max(np.abs(dom)))

F = frames.curvature_two_forms(conn)
Rf = frames.riemann_from_frame(W, F, g)
Rc = riemann_from_christoffel(g)
print("frame vs christoffel Riemann:", np.max(np.abs(Rf.values[interior]-Rc.values[interior])), "scale", np.max(np.abs(Rc.values)))
print("frame vs minus christoffel:", np.max(np.abs(Rf.values[interior]+Rc.values[interior])))

# dstar identity
lhs, rhs2 = frames.dstar_coframe_identity(g, W, conn)
print("dstar identity:", np.max(np.abs(lhs[interior]-rhs2[interior])), "scale", np.max(np.abs(lhs)))

# gradient FD check on small flat grid with random rotation start
grid2 = GridSpec(2, (7,6), (0.15,0.2), "box")
g2 = MetricField(grid2, np.broadcast_to(np.eye(2), grid2.shape+(2,2)).copy())
W0 = frames.gram_schmidt_coframe(g2)
theta = 0.3*np.sin(grid2.coordinates()[...,0]*3)*np.cos(grid2.coordinates()[...,1]*2)
xi0 = np.zeros(grid2.shape+(2,2)); xi0[...,0,1] = -theta; xi0[...,1,0] = theta
R0 = frames.rotation_exp(xi0)
M0 = frames.connection_forms(g2, W0).matrices()
_, obj, grad = frames._objective_and_gradient(M0, R0, grid2, 1.0)
# FD check
eps = 1e-6
err = 0.0
for _ in range(5):
    xi = np.zeros(grid2.shape+(2,2))
    pert = rng.normal(size=grid2.shape)
    xi[...,0,1] = -pert; xi[...,1,0] = pert
    Rp = frames.rotation_exp(eps*xi) @ R0
    Rm = frames.rotation_exp(-eps*xi) @ R0
    _, op, _ = frames._objective_and_gradient(M0, Rp, grid2, 1.0)
    _, om, _ = frames._objective_and_gradient(M0, Rm, grid2, 1.0)
    fd = (op-om)/(2*eps)
    an = np.sum(grad*xi)
    err = max(err, abs(fd-an)/max(abs(fd),1e-12))
print("gradient FD rel err:", err)

# relaxation test: flat metric, wiggly rotation start
W0w = frames.CoframeField(grid2, np.einsum('...ij,...ja->...ia', R0, W0.values))
Wr, rep = frames.coulomb_relax(g2, W0w, steps=300, rate=1.0)
print("relax flat:", rep.initial_objective, "->", rep.final_objective,
      "ratio", rep.final_objective/max(rep.initial_objective,1e-300),
      "steps", rep.accepted_steps, rep.status)
print("ortho preserved:", Wr.orthonormality_residual(g2))

# perturbed-metric relaxation: interior residual should drop >= 10x
grid3 = GridSpec(3, (13,)*3, (0.1,)*3, "box")
pts3 = grid3.coordinates()
eps_g = 0.05
pert_g = np.zeros(grid3.shape+(3,3))
pert_g[...,0,1] = pert_g[...,1,0] = eps_g*np.sin(3*pts3[...,0])*np.cos(2*pts3[...,1])
pert_g[...,0,0] = eps_g*np.cos(2*pts3[...,2])
g3 = MetricField(grid3, np.eye(3) + pert_g)
W3 = frames.gram_schmidt_coframe(g3)
c3 = frames.connection_forms(g3, W3)
ri0, rb0 = frames.coulomb_residual(c3)
W3r, rep3 = frames.coulomb_relax(g3, W3, steps=250, rate=1.0)
c3r = frames.connection_forms(g3, W3r)
ri1, rb1 = frames.coulomb_residual(c3r)
print("perturbed relax:", rep3.initial_objective, "->", rep3.final_objective, rep3.status)
print("interior residual:", ri0, "->", ri1, "factor", ri0/max(ri1,1e-300))
print("boundary residual:", rb0, "->", rb1)
