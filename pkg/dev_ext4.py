import numpy as np
from harmo import extension as ext

sg = ext.sphere_grid(3, 48)
data = ext.spherical_cap_data(sg, 0.2, d=4, seed=3)
prev = None
for npu in [8, 16, 32]:
    imm, rep = ext.glue_extension(data, nodes_per_unit=npu)
    print(f"npu={npu}: dv {rep['derivative_jump']:.3e} gauss {rep['gauss_map_jump']:.3e} value {rep['value_jump']:.1e}")
    if prev:
        print("   ratios:", prev[0]/rep['derivative_jump'], prev[1]/rep['gauss_map_jump'])
    prev = (rep['derivative_jump'], rep['gauss_map_jump'])

# metric gluing checks
from harmo.grid import GridSpec
from harmo.metric import MetricField, flat_metric
from harmo import generators

grid = GridSpec(3, (41,)*3, (5.0/40,)*3, "box", origin=(-2.5,)*3)
gf = flat_metric(grid)
gt, rep = ext.metric_extension_glue(gf)
print("flat metric glue: identical delta:", np.max(np.abs(gt.values - np.eye(3))), {k: round(v,6) for k,v in rep.items()})

# conformal bump supported in B_{1/2}
gc, info = generators.conformal(grid, 0.05, radius=0.5)
gt2, rep2 = ext.metric_extension_glue(gc)
print("conformal-in-half-ball glue:", {k: round(v,6) for k,v in rep2.items()})
print("  inside matches:", np.max(np.abs(gt2.values - gc.values) * ((np.linalg.norm(grid.coordinates(),axis=-1)<=1.0)[...,None,None])))

# boundary-nontrivial family
for eps in [0.01, 0.02, 0.04]:
    gc3, _ = generators.conformal(grid, eps, radius=2.2)
    gt3, rep3 = ext.metric_extension_glue(gc3)
    print(f"eps={eps}: interior {rep3['interior_curvature_norm']:.4g} annulus {rep3['annulus_curvature_norm']:.4g} exterior {rep3['exterior_curvature_norm']:.3g} total {rep3['total_curvature_norm']:.4g} bdry {rep3['boundary_trace_sup']:.3g}")
