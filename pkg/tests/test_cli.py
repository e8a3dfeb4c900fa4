"""Command-line interface: verbs, reports, exit-status contract."""

import csv
import json

import numpy as np
import pytest

from harmo import hgf
from harmo.cli import main
from harmo.grid import TensorField
from conftest import box_grid


def _gen(tmp_path, kind, *extra):
    out = str(tmp_path / f"{kind}.hgf")
    assert main(["generate", kind, "--out", out, "--shape", "9,9,9", *extra]) == 0
    return out


def test_generate_writes_field_and_sidecar(tmp_path):
    out = _gen(tmp_path, "flat")
    field = hgf.read_field(out)
    assert field.rank == (2, 0)
    sidecar = json.loads((tmp_path / "flat.hgf.json").read_text())
    assert sidecar["kind"] == "flat"
    assert sidecar["riemann_sup_exact"] == 0.0


def test_curvature_report_on_flat_metric(tmp_path):
    out = _gen(tmp_path, "flat")
    report = str(tmp_path / "r.json")
    assert main(["curvature", "--input", out, "--report", report]) == 0
    data = json.loads(open(report).read())
    assert data["riemann_sup"] == 0.0
    assert data["deviation_from_flat"] == 0.0


def test_norm_verb_matches_indicator_closed_form(tmp_path):
    grid = box_grid(3, 9)
    path = str(tmp_path / "ind.hgf")
    hgf.write_field(path, TensorField(grid, (0, 0), np.ones(grid.shape)))
    report = str(tmp_path / "n.json")
    assert main(["norm", "--input", path, "--exponent", "3,1", "--report", report]) == 0
    data = json.loads(open(report).read())
    assert data["norm"] == pytest.approx(3.0 * 1.0, rel=1e-12)  # (p/q)^(1/q) vol^(1/p)


def test_mollify_and_scale_write_readable_metrics(tmp_path):
    src = _gen(tmp_path, "conformal", "--amplitude", "0.05")
    out1 = str(tmp_path / "m.hgf")
    out2 = str(tmp_path / "s.hgf")
    assert main(["mollify", "--input", src, "--delta", "0.1", "--out", out1]) == 0
    assert main(["scale", "--input", src, "--t", "0.8", "--out", out2]) == 0
    assert hgf.read_field(out1).rank == (2, 0)
    assert hgf.read_field(out2).rank == (2, 0)


def test_coords_run_on_flat_metric(tmp_path):
    src = _gen(tmp_path, "flat")
    report = str(tmp_path / "c.json")
    assert main(["coords", "run", "--input", src, "--report", report]) == 0
    data = json.loads(open(report).read())
    assert data["deviation_barw"] <= 1e-8
    assert data["harmonic_defect_sup"] <= 1e-8


def test_coords_rejects_inadmissible_curvature(tmp_path):
    out = str(tmp_path / "st.hgf")
    assert main([
        "generate", "stereographic", "--out", out,
        "--shape", "11,11,11", "--spacing", "0.04,0.04,0.04",
        "--origin", "-0.2,-0.2,-0.2",
    ]) == 0
    assert main(["coords", "run", "--input", out]) == 3


def test_asymmetric_metric_file_is_rejected(tmp_path):
    grid = box_grid(3, 9)
    vals = np.broadcast_to(np.eye(3), grid.shape + (3, 3)).copy()
    vals[..., 0, 1] = 0.2  # deliberately not symmetric
    path = str(tmp_path / "asym.hgf")
    hgf.write_field(path, TensorField(grid, (2, 0), vals))
    assert main(["curvature", "--input", path]) == 2


def test_missing_input_file_is_a_configuration_error(tmp_path):
    assert main(["curvature", "--input", str(tmp_path / "nope.hgf")]) == 2


def test_wrong_rank_file_is_a_configuration_error(tmp_path):
    grid = box_grid(3, 9)
    path = str(tmp_path / "scalar.hgf")
    hgf.write_field(path, TensorField(grid, (0, 0), np.ones(grid.shape)))
    assert main(["curvature", "--input", path]) == 2


def test_immersion_analyze_reports_sphere_truths(tmp_path):
    out = str(tmp_path / "chart.hgf")
    assert main([
        "generate", "sphere-chart", "--out", out, "--dim", "2",
        "--shape", "17,17", "--spacing", "0.0625,0.0625",
        "--origin", "-0.5,-0.5", "--sphere-radius", "2.0",
    ]) == 0
    report = str(tmp_path / "imm.json")
    assert main(["immersion", "analyze", "--input", out, "--report", report]) == 0
    data = json.loads(open(report).read())
    assert data["mean_curvature_sup"] == pytest.approx(0.5, rel=0.05)
    assert data["curvature_lorentz_norm"] <= data["curvature_lorentz_bound"]


def test_check_sobolev_passes_in_codimension_two(tmp_path):
    out = str(tmp_path / "chart5.hgf")
    assert main([
        "generate", "sphere-chart", "--out", out, "--dim", "3", "--d", "5",
        "--shape", "13,13,13", "--spacing", "0.075,0.075,0.075",
        "--origin", "-0.45,-0.45,-0.45", "--sphere-radius", "3.0",
    ]) == 0
    assert main(["immersion", "check-sobolev", "--input", out]) == 0


def test_verify_suites_pass(tmp_path):
    report = str(tmp_path / "v.json")
    assert main(["verify", "lorentz", "--report", report]) == 0
    data = json.loads(open(report).read())
    assert all(row["passed"] for row in data["checks"])
    assert main(["verify", "pipeline"]) == 0


def test_sweep_writes_schema_tagged_csv(tmp_path):
    out = str(tmp_path / "sweep.csv")
    assert main(["sweep", "flat", "--out", out, "--epsilons", "0.001,0.01", "--shape-n", "9"]) == 0
    lines = open(out).read().splitlines()
    assert lines[0].startswith("# schema=harmo-sweep-1 study=flat")
    rows = list(csv.DictReader(lines[1:]))
    assert len(rows) == 2
    assert all(r["error"] == "" for r in rows)
