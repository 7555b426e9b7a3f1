import json

from rossler_knots.cli import main
from rossler_knots.knots import PolygonalKnot
from rossler_knots.reports import Report, csv_lines, emit_svg

CHAOTIC = ["--a", "0.2", "--b", "0.03513102417050051", "--c", "5.6929737951659"]


def run(args):
    return main([str(a) for a in args])


def test_report_json_roundtrip():
    rep = Report("analyze", {"a": 0.2}, {"x": [1.0, 2.5e-17], "nested": {"b": True}}, seed=3)
    s = rep.to_json()
    assert Report.roundtrip_equal(s)
    parsed = json.loads(s)
    assert parsed["schema_version"] == 1
    assert parsed["seed"] == 3


def test_csv_17_digits():
    s = csv_lines(["x"], [[1.0 / 3.0]])
    assert s.splitlines()[0] == "x"
    assert s.splitlines()[1] == "0.33333333333333331"


def test_svg_deterministic_and_gap_counts():
    circle = PolygonalKnot.circle(48)
    s1 = emit_svg(circle)
    s2 = emit_svg(circle)
    assert s1 == s2
    assert 'data-crossings="0"' in s1

    tref = PolygonalKnot.parametric_trefoil(150)
    s3 = emit_svg(tref)
    assert 'data-crossings="3"' in s3
    # each under-passage splits one segment into two pieces
    assert s3.count("<path") == tref.n + 3


def test_analyze_report_only_for_invalid_params(tmp_path):
    code = run(["analyze", "--a", "2.0", "--b", "0.5", "--c", "2.0", "--out", tmp_path])
    assert code == 0
    rep = json.loads((tmp_path / "analyze.json").read_text())
    assert rep["results"]["assumptions"]["ranges_ok"] is False


def test_analyze_outer_point_value(tmp_path):
    assert run(["analyze", "--a", "0.5", "--b", "0.5", "--c", "2.0", "--out", tmp_path]) == 0
    rep = json.loads((tmp_path / "analyze.json").read_text())
    assert rep["results"]["fixed_points"]["outer"] == [1.75, -3.5, 3.5]


def test_analyze_classical_conversion_recorded(tmp_path):
    assert run(["analyze", "--A", "0.2", "--B", "0.2", "--C", "5.7", "--out", tmp_path]) == 0
    rep = json.loads((tmp_path / "analyze.json").read_text())
    assert abs(rep["inputs"]["converted"]["b"] - 0.03513102417050051) < 1e-12


def test_missing_params_is_config_error(tmp_path):
    assert run(["analyze", "--out", tmp_path]) == 2


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("a = 0.5\nb = 0.5\nc = 9.0  # overridden below\nseed = 7\n")
    out = tmp_path / "out"
    assert run(["analyze", "--config", cfg, "--c", "2.0", "--out", out]) == 0
    rep = json.loads((out / "analyze.json").read_text())
    assert rep["inputs"]["c"] == 2.0
    assert rep["seed"] == 7


def test_config_unknown_key_rejected(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("alpha = 1.0\n")
    assert run(["analyze", "--config", cfg]) == 2


def test_config_bad_tol_rejected(tmp_path):
    assert run(["analyze", "--a", "0.5", "--b", "0.5", "--c", "2.0",
                "--tol", "0.5", "--out", tmp_path]) == 2


def test_scan_empty_grid_writes_header_only(tmp_path):
    code = run(["scan", *CHAOTIC, "--x-range", "0.2:0.3", "--y-range", "2:3",
                "--nx", "0", "--ny", "0", "--out", tmp_path])
    assert code == 0
    lines = (tmp_path / "scan.csv").read_text().splitlines()
    assert lines == ["i,j,a,c,mismatch,failure"]


def test_scan_rerun_identical_bytes(tmp_path):
    a1, a2 = tmp_path / "r1", tmp_path / "r2"
    args = ["scan", "--a", "0.3", "--b", "0.2", "--c", "2.0",
            "--x-range", "0.25:0.4", "--y-range", "1.8:2.1",
            "--nx", "4", "--ny", "4", "--t-max", "100"]
    assert run(args + ["--out", a1]) == 0
    assert run(args + ["--out", a2]) == 0
    assert (a1 / "scan.csv").read_bytes() == (a2 / "scan.csv").read_bytes()
    assert (a1 / "scan.json").read_bytes() == (a2 / "scan.json").read_bytes()


def test_verify_horseshoe_synthetic(tmp_path):
    assert run(["verify-horseshoe", "--synthetic", "--max-len", "4", "--out", tmp_path]) == 0
    rep = json.loads((tmp_path / "verify-horseshoe.json").read_text())
    assert rep["results"]["verification"]["passed"] is True
    assert rep["results"]["counts_match"] is True
    assert rep["results"]["all_indices_minus_one"] is True


def test_orbits_and_knot_pipeline(tmp_path):
    assert run(["orbits", *CHAOTIC, "--words", "1,1212", "--out", tmp_path]) == 0
    rep = json.loads((tmp_path / "orbits.json").read_text())
    assert rep["results"]["orbits"]["1"]["status"] == "ok"
    assert rep["results"]["orbits"]["1212"]["status"] == "failed"  # not primitive
    assert "curve" in rep["results"]["orbits"]["1"]

    assert run(["knot", "--source", "orbit", "--from", tmp_path / "orbits.json",
                "--word", "1", "--out", tmp_path]) == 0
    krep = json.loads((tmp_path / "knot.json").read_text())
    assert krep["results"]["knot_class"] == "unknot-compatible"
    assert (tmp_path / "knot.svg").exists()


def test_knot_missing_input(tmp_path):
    assert run(["knot", "--source", "orbit", "--from", tmp_path / "nope.json",
                "--word", "1", "--out", tmp_path]) == 2
    assert run(["knot", "--source", "orbit", "--out", tmp_path]) == 2


def test_json_reports_roundtrip_from_disk(tmp_path):
    assert run(["analyze", "--a", "0.5", "--b", "0.5", "--c", "2.0", "--out", tmp_path]) == 0
    assert Report.roundtrip_equal((tmp_path / "analyze.json").read_text())
