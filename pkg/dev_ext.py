import numpy as np, time
from harmo.grid import GridSpec
from harmo import extension as ext, generators
from harmo.metric import MetricField

# hermite profiles exactness
for f, vals in [(ext.hermite_h0, (1.0, 0.0)), (ext.hermite_h1, (0.0, 0.0))]:
    print(f.__name__, f(np.array([1.0,2.0])), "expected", vals)
h = 1e-6
print("h0'(1),h0'(2):", (ext.hermite_h0(1+h)-ext.hermite_h0(1-h))/(2*h), (ext.hermite_h0(2+h)-ext.hermite_h0(2-h))/(2*h))
print("h1'(1),h1'(2):", (ext.hermite_h1(1+h)-ext.hermite_h1(1-h))/(2*h), (ext.hermite_h1(2+h)-ext.hermite_h1(2-h))/(2*h))

# sphere metric sanity: S^2 round metric diag(1, sin^2 lat)
sg = ext.sphere_grid(3, 24)
gm = ext.sphere_metric(sg)
lat = sg.coordinates()[...,0]
err = np.max(np.abs(gm.values[...,0,0]-1)) , np.max(np.abs(gm.values[...,1,1]-np.sin(lat)**2)), np.max(np.abs(gm.values[...,0,1]))
print("round metric errors:", err)
area = float(np.sum(gm.volume_density()*sg.quadrature_weights()))
print("sphere area vs 4pi:", area, 4*np.pi)

# flat data -> exact plane
flat_data = ext.BoundaryGraphData(sg, np.zeros(sg.shape+(4,)), np.zeros(sg.shape+(4,)), np.zeros(1), 1e-3)
imm, rep = ext.glue_extension(flat_data, nodes_per_unit=8)
print("flat glue:", {k: v for k, v in rep.items() if k != "ledger"})

# trivial trace extension: phi = c const, tau=theta
c = np.zeros(sg.shape+(4,)); c[...,3] = 0.7
agrid, psip = ext.hermite_trace_extension(ext.BoundaryGraphData(sg, c, np.zeros_like(c), np.zeros(1), 1.0), 8)
rr = agrid.axis_coordinates(0).reshape(-1,1,1)
print("psi' = c H0 exact:", np.max(np.abs(psip[...,3]-0.7*ext.hermite_h0(rr))))

# cap data ledger + glue
t0=time.time()
for eps in [0.4, 0.2, 0.1, 0.05]:
    sgf = ext.sphere_grid(3, 48)
    data = ext.spherical_cap_data(sgf, eps, d=4, seed=3)
    imm, rep = ext.glue_extension(data, nodes_per_unit=24)
    print(f"eps={eps}: II norm {rep['ii_lorentz_norm']:.5g} jumps v {rep['value_jump']:.2e} dv {rep['derivative_jump']:.2e} n {rep['gauss_map_jump']:.2e} data {rep['data_value_jump']:.2e} flat_out {rep['flat_outside_max']:.2e}")
    print("   ledger:", {k: round(v,4) for k,v in rep['ledger'].items()})
    tn = ext.trace_extension_norms(data, 16)
    print("   est_w total / eps^{1/3}:", tn["total"]/eps**(1/3))
print("sweep time", time.time()-t0)
