import numpy as np, time
from harmo import extension as ext

eps_list = [0.8, 0.4, 0.2, 0.1]
vals, hess = [], []
for eps in eps_list:
    t0 = time.time()
    sgf = ext.sphere_grid(3, 96)
    data = ext.spherical_cap_data(sgf, eps, d=4, seed=3)
    imm, rep = ext.glue_extension(data, nodes_per_unit=12)
    tn = ext.trace_extension_norms(data, 8)
    vals.append(rep["ii_lorentz_norm"]); hess.append(tn["hess_ln"])
    print(f"eps={eps}: II {rep['ii_lorentz_norm']:.5g} hessLn {tn['hess_ln']:.4g} sup {tn['sup']:.4g} grad {tn['grad_ln']:.4g} ({time.time()-t0:.0f}s)")
x = np.log(eps_list)
print("II slope:", np.polyfit(x, np.log(vals), 1)[0])
print("hess slope:", np.polyfit(x, np.log(hess), 1)[0])
