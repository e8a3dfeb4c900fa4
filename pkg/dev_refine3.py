import numpy as np
from harmo.grid import GridSpec
from harmo.metric import MetricField, riemann_from_christoffel, riemann_direct

def run(power, sizes, amp=0.1):
    prev=None
    for nn in sizes:
        n = 3
        grid = GridSpec(n, (nn,)*n, (2.0/(nn-1),)*n, "box", origin=(-1.0,)*n)
        pts = grid.coordinates()
        s2 = np.sum(pts**2, axis=-1)/0.64
        phi = amp*np.where(s2 < 1, (1.0-np.minimum(s2,1.0))**power, 0.0)
        mf = MetricField(grid, np.exp(2*phi)[...,None,None]*np.eye(n))
        R1 = riemann_from_christoffel(mf); R2 = riemann_direct(mf)
        res = R1.symmetry_residuals()
        row = (np.max(np.abs(R1.values-R2.values)), res['antisym_kl'], res['pair'])
        print(" p=%d n=%2d scale %.4f cross %.2e antikl %.2e pair %.2e" % (power, nn, R1.sup_norm(), *row),
              "" if prev is None else "ratios " + " ".join(f"{p/c:.2f}" for p,c in zip(prev,row)))
        prev=row

run(8, (17,33,65))
run(6, (21,41,81))
