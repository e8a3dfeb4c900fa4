import numpy as np, time
from harmo import extension as ext

for res, npu in [(96, 12)]:
    vals = []
    eps_list = [0.4, 0.2, 0.1, 0.05]
    for eps in eps_list:
        t0 = time.time()
        sgf = ext.sphere_grid(3, res)
        data = ext.spherical_cap_data(sgf, eps, d=4, seed=3)
        imm, rep = ext.glue_extension(data, nodes_per_unit=npu)
        vals.append(rep["ii_lorentz_norm"])
        print(f"res={res} eps={eps}: II {rep['ii_lorentz_norm']:.5g} dv {rep['derivative_jump']:.2e} ({time.time()-t0:.1f}s)")
    x = np.log(eps_list); y = np.log(vals)
    slope = np.polyfit(x, y, 1)[0]
    print("fit slope:", slope)
