"""Command-line entry point: generators, studies, and verification suites.

All verbs are batch-oriented: they read/write HGF-1 field files, emit
deterministic JSON (sorted keys) or CSV, and communicate through a stable
exit-status contract -- 0 pass, 1 assertion failure, 2 configuration error,
3 numerical abort.  Sweep instances can run concurrently; set HARMO_WORKERS.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import coords, extension, frames, generators, hgf, immersion, lorentz, metric
from .errors import (
    AdmissionError,
    CertificationError,
    CompatibilityError,
    ConfigurationError,
    DegenerateImmersionError,
    EllipticityError,
    ExtensionDegeneracyError,
    GenerationError,
    HarmoError,
    HypothesisError,
    ImmersionFailureError,
    InvalidSampleError,
    InversionError,
    NonConvergenceError,
    PipelineStageError,
    PullbackDegeneracyError,
    SymmetryError,
    UnsupportedDimensionError,
)
from .grid import GridSpec, TensorField
from .metric import MetricField

_CONFIG_ERRORS = (
    ConfigurationError,
    GenerationError,
    InvalidSampleError,
    SymmetryError,
    UnsupportedDimensionError,
    EllipticityError,
)
_NUMERICAL_ERRORS = (
    AdmissionError,
    CertificationError,
    CompatibilityError,
    DegenerateImmersionError,
    ExtensionDegeneracyError,
    HypothesisError,
    ImmersionFailureError,
    InversionError,
    NonConvergenceError,
    PipelineStageError,
    PullbackDegeneracyError,
)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("HARMO_WORKERS", "1")))
    except ValueError:
        return 1


def _emit_json(payload: dict, path: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2, default=float)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)


def _csv_ints(text: str) -> tuple[int, ...]:
    return tuple(int(s) for s in text.split(","))


def _csv_floats(text: str) -> tuple[float, ...]:
    return tuple(float(s) for s in text.split(","))


def _grid_from_args(args) -> GridSpec:
    dim = args.dim
    shape = _csv_ints(args.shape) if args.shape else (17,) * dim
    if len(shape) == 1:
        shape = shape * dim
    if args.spacing:
        spacing = _csv_floats(args.spacing)
        if len(spacing) == 1:
            spacing = spacing * dim
    else:
        spacing = tuple(1.0 / (s - 1) for s in shape)
    origin = _csv_floats(args.origin) if args.origin else (0.0,) * dim
    return GridSpec(dim, shape, spacing, args.topology, origin=origin)


def _read_metric(path: str) -> MetricField:
    field = hgf.read_field(path)
    if field.rank != (2, 0):
        raise ConfigurationError(f"metric files need rank (2,0), got {field.rank}")
    return MetricField(field.grid, field.values)


# -- generate -------------------------------------------------------------------


def cmd_generate(args) -> int:
    grid = _grid_from_args(args)
    kind = args.kind
    sidecar = {"kind": kind, "seed": args.seed}
    if kind in generators.METRIC_GENERATORS:
        maker = generators.METRIC_GENERATORS[kind]
        if kind == "flat":
            g, info = maker(grid)
            sidecar["riemann_sup_exact"] = 0.0
        elif kind == "conformal":
            g, info = maker(grid, args.amplitude, args.radius)
            sidecar["conformal_factor"] = "exp(2 * amplitude * bump(|x-c|/radius))"
        elif kind == "diffeo-pullback":
            g, info = maker(grid, args.amplitude, args.radius)
            sidecar["riemann_sup_exact"] = 0.0
        elif kind == "stereographic":
            g, info = maker(grid)
            sidecar["sectional_curvature_exact"] = 1.0
        else:  # random
            g, info = maker(grid, args.amplitude, seed=args.seed, radius=args.radius)
        for key in ("amplitude", "radius", "center"):
            if key in info:
                sidecar[key] = info[key]
        hgf.write_field(args.out, g.as_tensor())
    elif kind == "graph-immersion":
        values, info = generators.graph_immersion(grid, args.amplitude, args.d, args.seed)
        sidecar.update({"amplitude": args.amplitude, "d": info["d"]})
        hgf.write_immersion(args.out, grid, values)
    elif kind == "sphere-chart":
        values, info = generators.sphere_chart_immersion(grid, args.sphere_radius, args.d)
        sidecar.update({
            "sphere_radius": args.sphere_radius,
            "d": info["d"],
            "second_fundamental_magnitude_exact": np.sqrt(grid.dim) / args.sphere_radius,
            "mean_curvature_exact": 1.0 / args.sphere_radius,
        })
        hgf.write_immersion(args.out, grid, values)
    else:
        raise ConfigurationError(f"unknown generator kind {kind!r}")
    with open(args.out + ".json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, sort_keys=True, indent=2, default=float)
        fh.write("\n")
    print(f"wrote {args.out} (+ sidecar)")
    return 0


# -- field verbs ------------------------------------------------------------------


def cmd_curvature(args) -> int:
    g = _read_metric(args.input)
    riem = metric.riemann_from_christoffel(g)
    direct = metric.riemann_direct(g)
    report = {
        "riemann_sup": riem.sup_norm(),
        "cross_formula_sup_diff": float(np.max(np.abs(riem.values - direct.values))),
        "curvature_lorentz_norm": metric.curvature_lorentz_norm(g, riem),
        "symmetry_residuals": riem.symmetry_residuals(),
        "deviation_from_flat": g.deviation_from_flat(),
    }
    _emit_json(report, args.report)
    return 0


def cmd_norm(args) -> int:
    field = hgf.read_field(args.input)
    p_str, q_str = args.exponent.split(",")
    exponent = lorentz.LorentzExponent(
        float("inf") if p_str in ("inf", "infty") else float(p_str),
        float("inf") if q_str in ("inf", "infty") else float(q_str),
    )
    if args.metric:
        g = _read_metric(args.metric)
        mag = metric.pointwise_tensor_norm(field.values, g.inverse(), field.total_rank)
        dens = g.volume_density()
    else:
        axes = tuple(range(field.grid.dim, field.values.ndim))
        mag = np.sqrt(np.sum(field.values**2, axis=axes)) if axes else np.abs(field.values)
        dens = np.ones(field.grid.shape)
    value = lorentz.lorentz_norm(lorentz.field_sample(mag, field.grid, dens), exponent)
    _emit_json({"exponent": [exponent.p, exponent.q], "norm": value}, args.report)
    return 0


def cmd_mollify(args) -> int:
    g = _read_metric(args.input)
    hgf.write_field(args.out, metric.mollify_metric(g, args.delta).as_tensor())
    print(f"wrote {args.out}")
    return 0


def cmd_scale(args) -> int:
    g = _read_metric(args.input)
    hgf.write_field(args.out, metric.scale_metric(g, args.t).as_tensor())
    print(f"wrote {args.out}")
    return 0


def cmd_gauge(args) -> int:
    g = _read_metric(args.input)
    w0 = frames.gram_schmidt_coframe(g)
    before_i, before_b = frames.coulomb_residual(frames.connection_forms(g, w0))
    w, rep = frames.coulomb_relax(g, w0, steps=args.steps, rate=args.rate, tol=args.tol)
    after_i, after_b = frames.coulomb_residual(frames.connection_forms(g, w))
    _emit_json(
        {
            "initial_objective": rep.initial_objective,
            "final_objective": rep.final_objective,
            "accepted_steps": rep.accepted_steps,
            "status": rep.status,
            "interior_residual_before": before_i,
            "interior_residual_after": after_i,
            "boundary_residual_before": before_b,
            "boundary_residual_after": after_b,
        },
        args.report,
    )
    return 0


def cmd_coords(args) -> int:
    g = _read_metric(args.input)
    report = coords.run_pipeline(
        g,
        coulomb=args.coulomb == "on",
        admission_threshold=args.admission_threshold,
        tol=args.tol,
        certificate_tol=args.certificate_tol,
    )
    _emit_json(report.to_dict(), args.report)
    return 0


# -- immersion verbs ---------------------------------------------------------------


def cmd_immersion(args) -> int:
    if args.action == "analyze":
        grid, values = hgf.read_immersion(args.input)
        imm = immersion.ImmersionField(grid, values)
        ginv = imm.metric.inverse()
        ii_mag = immersion._tensor_norm_normal_valued(
            imm.second_fundamental_form(), ginv, 2
        )
        report = {
            "d": imm.d,
            "ellipticity": imm.ellipticity,
            "tangency_defect": imm.tangency_defect(),
            "second_fundamental_sup": float(np.max(ii_mag)),
            "mean_curvature_sup": float(np.max(np.linalg.norm(imm.mean_curvature(), axis=-1))),
            "gauss_codazzi_residual_sup": float(np.max(immersion.gauss_codazzi_residual(imm))),
        }
        if grid.dim % 2 == 0:
            total, terms = immersion.energy_En(imm)
            report["energy"] = total
            report["energy_terms"] = terms
        lhs, rhs = immersion.riemann_lorentz_from_II(imm)
        report["curvature_lorentz_norm"] = lhs
        report["curvature_lorentz_bound"] = rhs
    elif args.action == "extend":
        sphere = extension.sphere_grid(args.dim, args.resolution)
        data = extension.spherical_cap_data(sphere, args.epsilon, d=args.d, seed=args.seed)
        _, report = extension.glue_extension(data, nodes_per_unit=args.nodes_per_unit)
    elif args.action == "check-sobolev":
        grid, values = hgf.read_immersion(args.input)
        imm = immersion.ImmersionField(grid, values)
        pts = grid.coordinates()
        phi = generators.bump(pts, grid.center(), 0.45 * min(grid.extent(a) for a in range(grid.dim)))
        report = immersion.brendle_sobolev_check(imm, phi)
        if report["margin"] < 0:
            _emit_json(report, args.report)
            print("FAIL: sharp Sobolev margin is negative", file=sys.stderr)
            return 1
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigurationError(f"unknown immersion action {args.action!r}")
    _emit_json(report, args.report)
    return 0


# -- verify suites -----------------------------------------------------------------


def _check(name: str, value: float, bound: float) -> dict:
    return {"name": name, "value": float(value), "bound": float(bound),
            "passed": bool(value <= bound)}


def _suite_curvature_symmetries() -> list:
    grid = GridSpec(3, (15,) * 3, (0.4 / 14,) * 3, "box", origin=(-0.2,) * 3)
    g, _ = generators.stereographic(grid)
    res = metric.riemann_from_christoffel(g).symmetry_residuals()
    scale = metric.riemann_from_christoffel(g).sup_norm()
    return [_check(f"stereographic {k}", v, 1e-3 * max(scale, 1.0))
            for k, v in res.items()]


def _suite_cross_formula() -> list:
    checks = []
    for nn in (13, 25):
        grid = GridSpec(3, (nn,) * 3, (1.0 / (nn - 1),) * 3, "box")
        g, _ = generators.conformal(grid, 0.02)
        diff = float(np.max(np.abs(
            metric.riemann_from_christoffel(g).values - metric.riemann_direct(g).values
        )))
        checks.append(_check(f"conformal cross-formula N={nn}", diff, 0.05))
    return checks


def _suite_lorentz() -> list:
    rng = np.random.default_rng(0)
    checks = []
    grid = GridSpec(2, (21, 21), (0.05, 0.05), "box")
    ind = np.zeros(grid.shape)
    ind[4:12, 3:15] = 1.0
    area = 8 * 12 * 0.05 * 0.05
    e = lorentz.LorentzExponent(2.0, 2.0)
    got = lorentz.lorentz_norm(lorentz.field_sample(ind, grid), e)
    checks.append(_check("indicator closed form", abs(got - np.sqrt(area)), 1e-12))
    for _ in range(3):
        vals = rng.exponential(size=200)
        w = rng.uniform(0.5, 1.5, size=200)
        sample = lorentz.WeightedSample(vals, w)
        p = rng.uniform(1.2, 4.0)
        lp = float(np.sum(w * vals**p) ** (1.0 / p))
        lpp = lorentz.lorentz_norm(sample, lorentz.LorentzExponent(p, p))
        checks.append(_check(f"L^(p,p)=L^p p={p:.2f}", abs(lpp - lp) / lp, 1e-10))
    return checks


def _suite_pipeline() -> list:
    grid = GridSpec(3, (11,) * 3, (0.1,) * 3, "box")
    g, _ = generators.flat(grid)
    rep = coords.run_pipeline(g)
    return [
        _check("flat pipeline deviation", rep.deviation_barw, 1e-8),
        _check("flat pipeline defect", rep.harmonic_defect_sup, 1e-8),
    ]


def _suite_immersion() -> list:
    grid = GridSpec(2, (25, 25), (1.0 / 24,) * 2, "box", origin=(-0.5, -0.5))
    values, _ = generators.sphere_chart_immersion(grid, 2.0)
    imm = immersion.ImmersionField(grid, values)
    interior = (slice(3, -3),) * 2
    h = np.linalg.norm(imm.mean_curvature(), axis=-1)
    gc = immersion.gauss_codazzi_residual(imm)
    return [
        _check("sphere mean curvature", float(np.max(np.abs(h[interior] - 0.5))), 1e-2),
        _check("sphere tangency", imm.tangency_defect(), 1e-10),
        _check("sphere gauss-codazzi", float(np.max(gc[interior])), 1e-2),
    ]


def _suite_extension() -> list:
    sphere = extension.sphere_grid(3, 16)
    d = 4
    zero = np.zeros(sphere.shape + (d,))
    data = extension.BoundaryGraphData(sphere, zero, zero.copy(), np.zeros(d - 3), 1e-3)
    _, rep = extension.glue_extension(data, nodes_per_unit=8)
    r = np.array([1.0, 2.0])
    return [
        _check("hermite h0 traces", float(np.max(np.abs(
            extension.hermite_h0(r) - [1.0, 0.0]))), 1e-14),
        _check("hermite h1 traces", float(np.max(np.abs(
            extension.hermite_h1(r)))), 1e-14),
        _check("flat glue junction", rep["derivative_jump"], 1e-12),
        _check("flat glue outside", rep["flat_outside_max"], 0.0),
    ]


def _suite_convergence(levels: int = 3) -> list:
    errs = []
    sizes = [25, 49, 97][:levels]
    for nn in sizes:
        grid = GridSpec(3, (nn,) * 3, (1.0 / (nn - 1),) * 3, "box")
        g, _ = generators.diffeo_pullback(grid, 0.02)
        errs.append(metric.riemann_from_christoffel(g).sup_norm())
    checks = []
    for a, b in zip(errs, errs[1:]):
        order = np.log2(a / b)
        checks.append({"name": f"flat-pullback order {a:.2e}->{b:.2e}",
                       "value": float(order), "bound": 1.8,
                       "passed": bool(order >= 1.8)})
    return checks


_SUITES = {
    "curvature-symmetries": _suite_curvature_symmetries,
    "cross-formula": _suite_cross_formula,
    "lorentz": _suite_lorentz,
    "pipeline": _suite_pipeline,
    "immersion": _suite_immersion,
    "extension": _suite_extension,
    "convergence": _suite_convergence,
}


def cmd_verify(args) -> int:
    checks = _SUITES[args.suite]()
    width = max(len(c["name"]) for c in checks)
    for c in checks:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"{c['name']:<{width}}  {c['value']:12.4e}  bound {c['bound']:10.3e}  {status}")
    payload = {"suite": args.suite, "checks": checks,
               "passed": all(c["passed"] for c in checks)}
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=2, default=float)
            fh.write("\n")
    return 0 if payload["passed"] else 1


# -- sweeps ------------------------------------------------------------------------


def _conformal_instance(eps: float, shape: int) -> dict:
    grid = GridSpec(3, (shape,) * 3, (1.0 / (shape - 1),) * 3, "box")
    g, _ = generators.conformal(grid, eps)
    try:
        rep = coords.run_pipeline(g, admission_threshold=10.0)
        return {
            "epsilon": eps,
            "curvature_norm": rep.curvature_norm,
            "deviation": rep.deviation_barw,
            "c_emp": rep.c_emp,
            "defect": rep.harmonic_defect_sup,
            "error": "",
        }
    except HarmoError as exc:
        return {"epsilon": eps, "curvature_norm": "", "deviation": "",
                "c_emp": "", "defect": "", "error": type(exc).__name__}


def _extension_instance(eps: float, resolution: int) -> dict:
    sphere = extension.sphere_grid(3, resolution)
    data = extension.spherical_cap_data(sphere, eps, d=4, seed=3)
    try:
        _, rep = extension.glue_extension(data, nodes_per_unit=12)
        return {"epsilon": eps, "ii_lorentz_norm": rep["ii_lorentz_norm"],
                "derivative_jump": rep["derivative_jump"], "error": ""}
    except HarmoError as exc:
        return {"epsilon": eps, "ii_lorentz_norm": "", "derivative_jump": "",
                "error": type(exc).__name__}


def _flat_instance(eps: float, shape: int) -> dict:
    grid = GridSpec(3, (shape,) * 3, (1.0 / (shape - 1),) * 3, "box")
    g, _ = generators.flat(grid)
    rep = coords.run_pipeline(g)
    return {"epsilon": eps, "curvature_norm": rep.curvature_norm,
            "deviation": rep.deviation_barw, "c_emp": "",
            "defect": rep.harmonic_defect_sup, "error": ""}


def cmd_sweep(args) -> int:
    eps_list = list(_csv_floats(args.epsilons))
    if not eps_list:
        raise ConfigurationError("sweep needs a nonempty epsilon list")
    if args.study == "conformal":
        run = lambda e: _conformal_instance(e, args.shape_n)
        fields = ["epsilon", "curvature_norm", "deviation", "c_emp", "defect", "error"]
    elif args.study == "extension":
        run = lambda e: _extension_instance(e, args.resolution)
        fields = ["epsilon", "ii_lorentz_norm", "derivative_jump", "error"]
    elif args.study == "flat":
        run = lambda e: _flat_instance(e, args.shape_n)
        fields = ["epsilon", "curvature_norm", "deviation", "c_emp", "defect", "error"]
    else:
        raise ConfigurationError(f"unknown study {args.study!r}")
    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        rows = list(pool.map(run, eps_list))
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# schema=harmo-sweep-1 study={args.study}\n")
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    if args.study == "extension":
        good = [(r["epsilon"], r["ii_lorentz_norm"]) for r in rows if r["error"] == ""]
        if len(good) >= 2:
            x = np.log([g[0] for g in good])
            y = np.log([g[1] for g in good])
            slope = float(np.polyfit(x, y, 1)[0])
            print(f"log-log slope: {slope:.4f}")
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


# -- argument parsing ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="harmo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a test-case field file with ground-truth sidecar")
    p.add_argument("kind", choices=sorted(generators.METRIC_GENERATORS)
                   + ["graph-immersion", "sphere-chart"])
    p.add_argument("--out", required=True)
    p.add_argument("--dim", type=int, default=3, choices=(2, 3, 4))
    p.add_argument("--shape", default="")
    p.add_argument("--spacing", default="")
    p.add_argument("--origin", default="")
    p.add_argument("--topology", default="box", choices=("box", "torus"))
    p.add_argument("--amplitude", type=float, default=0.05)
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--sphere-radius", type=float, default=2.0)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("curvature", help="curvature norms and symmetry residuals of a metric")
    p.add_argument("--input", required=True)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("norm", help="Lorentz norm of a field file")
    p.add_argument("--input", required=True)
    p.add_argument("--exponent", required=True, help="p,q")
    p.add_argument("--metric", default=None)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("mollify", help="smooth a metric at scale delta")
    p.add_argument("--input", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mollify)

    p = sub.add_parser("scale", help="pull a metric back along x -> t x")
    p.add_argument("--input", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scale)

    p = sub.add_parser("gauge", help="relax a coframe toward the Coulomb gauge")
    p.add_argument("--input", required=True)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--rate", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=0.0)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_gauge)

    p = sub.add_parser("coords", help="build and certify almost-harmonic coordinates")
    p.add_argument("action", choices=("run",))
    p.add_argument("--input", required=True)
    p.add_argument("--coulomb", default="off", choices=("on", "off"))
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--admission-threshold", type=float, default=0.1)
    p.add_argument("--certificate-tol", type=float, default=None)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_coords)

    p = sub.add_parser("immersion", help="analyze, extend, or test an immersion")
    p.add_argument("action", choices=("analyze", "extend", "check-sobolev"))
    p.add_argument("--input", default=None)
    p.add_argument("--epsilon", type=float, default=0.2)
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--resolution", type=int, default=32)
    p.add_argument("--nodes-per-unit", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_immersion)

    p = sub.add_parser("verify", help="run a named invariant suite")
    p.add_argument("suite", choices=sorted(_SUITES))
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="emit an empirical-constant study as CSV")
    p.add_argument("study", choices=("conformal", "extension", "flat"))
    p.add_argument("--out", required=True)
    p.add_argument("--epsilons", default="0.001,0.005,0.01,0.05")
    p.add_argument("--shape-n", type=int, default=13)
    p.add_argument("--resolution", type=int, default=32)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical abort: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
