import numpy as np
from harmo.grid import GridSpec
from harmo.metric import MetricField, riemann_from_christoffel, riemann_direct

def bump(s2):
    return np.where(s2 < 1, (1.0-np.minimum(s2,1.0))**6, 0.0)

def conformal(nnodes, amp=0.1):
    n = 3
    grid = GridSpec(n, (nnodes,)*n, (2.0/(nnodes-1),)*n, "box", origin=(-1.0,)*n)
    pts = grid.coordinates()
    phi = amp*bump(np.sum(pts**2, axis=-1)/0.64)
    return MetricField(grid, np.exp(2*phi)[...,None,None]*np.eye(n))

prev=None
for nn in (17, 33, 65):
    mf = conformal(nn)
    R1 = riemann_from_christoffel(mf); R2 = riemann_direct(mf)
    res = R1.symmetry_residuals()
    row = (np.max(np.abs(R1.values-R2.values)), res['antisym_kl'], res['pair'])
    print(nn, "scale", f"{R1.sup_norm():.4f}", "cross %.2e antikl %.2e pair %.2e" % row,
          "" if prev is None else "ratios " + " ".join(f"{p/c:.2f}" for p,c in zip(prev,row)))
    prev=row
