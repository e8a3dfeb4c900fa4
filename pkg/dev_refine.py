import numpy as np
from harmo.grid import GridSpec, gradient_values
from harmo.metric import MetricField, riemann_from_christoffel, riemann_direct, ricci, christoffel

def conformal(nnodes, amp=0.1):
    n = 3
    grid = GridSpec(n, (nnodes,)*n, (2.0/(nnodes-1),)*n, "box", origin=(-1.0,)*n)
    pts = grid.coordinates()
    s2 = np.sum(pts**2, axis=-1)/0.64
    phi = np.where(s2 < 1, amp*np.exp(1.0 - 1.0/np.maximum(1e-300, 1.0-np.minimum(s2,1-1e-15))), 0.0)
    return MetricField(grid, np.exp(2*phi)[...,None,None]*np.eye(n)), phi, grid

for nn in (17, 33, 65):
    mf, phi, grid = conformal(nn)
    R1 = riemann_from_christoffel(mf); R2 = riemann_direct(mf)
    res = R1.symmetry_residuals()
    print(nn, "scale", f"{R1.sup_norm():.4f}",
          "cross", f"{np.max(np.abs(R1.values-R2.values)):.2e}",
          "antikl", f"{res['antisym_kl']:.2e}", "pair", f"{res['pair']:.2e}",
          "bianchi", f"{res['bianchi']:.2e}")

# stereographic check again
grid2 = GridSpec(3, (21,)*3, (0.4/20,)*3, "box", origin=(-0.2,)*3)
pts2 = grid2.coordinates()
conf = 4.0/(1.0+np.sum(pts2**2,axis=-1))**2
gv2 = conf[...,None,None]*np.eye(3)
m2 = MetricField(grid2, gv2)
Rst = riemann_from_christoffel(m2).values
expect = np.einsum('...ik,...jl->...ijkl', gv2, gv2) - np.einsum('...il,...jk->...ijkl', gv2, gv2)
interior = (slice(2,-2),)*3
print("stereo Riemann err:", np.max(np.abs(Rst[interior]-expect[interior])))
Rd = riemann_direct(m2).values
print("stereo direct err:", np.max(np.abs(Rd[interior]-expect[interior])))
ric = ricci(m2).values
print("stereo Ricci vs 2g err:", np.max(np.abs(ric[interior]-2*gv2[interior])))
