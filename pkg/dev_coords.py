import time
import numpy as np
from harmo.grid import GridSpec
from harmo.metric import flat_metric, harmonic_defect
from harmo.frames import gram_schmidt_coframe
from harmo import coords, generators

# 1. flat pipeline, 17^3, acceptance: dev <= 1e-8, defect <= 1e-8, <= 10 s
t0 = time.time()
grid = GridSpec(3, (17,)*3, (1.0/16,)*3, "box")
g = flat_metric(grid)
rep = coords.run_pipeline(g)
print("flat: dev", rep.deviation_barw, "defect", rep.harmonic_defect_sup,
      "bilip", rep.bilipschitz, "time", time.time()-t0)

# 2. flat-pullback recovery, 33^3, amplitude 0.05
t0 = time.time()
grid2 = GridSpec(3, (33,)*3, (1.0/32,)*3, "box")
g2, info2 = generators.diffeo_pullback(grid2, 0.05)
from harmo.metric import riemann_from_christoffel
R = riemann_from_christoffel(g2)
print("pullback Riem sup (should be O(h^2)):", R.sup_norm())
rep2 = coords.run_pipeline(g2, tol=1e-11, admission_threshold=1.0)
print("pullback: dev", rep2.deviation_barw, "defect", rep2.harmonic_defect_sup,
      "curv", rep2.curvature_norm, "bilip", rep2.bilipschitz,
      "fallback", rep2.fallback_nodes, "time", time.time()-t0)
print("layers:", rep2.residual_layers)

# 3. conformal eps sweep C_emp
for eps in [1e-3, 5e-3, 1e-2, 5e-2]:
    g3, _ = generators.conformal(grid, eps)
    rep3 = coords.run_pipeline(g3, tol=1e-11, admission_threshold=10.0)
    print(f"eps {eps}: curv {rep3.curvature_norm:.4g} dev {rep3.deviation_barw:.4g} "
          f"C_emp {rep3.c_emp:.4g} defect {rep3.harmonic_defect_sup:.3g} tol {rep3.certificate_tol:.3g}")
