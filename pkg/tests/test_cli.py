import csv
import io
import json

import pytest

from pmch2r.cli import EXIT_INCONCLUSIVE, EXIT_INVARIANT, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def csv_rows(text):
    return list(csv.reader(io.StringIO(text)))


# ---------------------------------------------------------------- phase

def test_phase_single_arc(capsys):
    code, out, _ = run(capsys, "phase", "--lambda", "2", "--format", "json")
    d = json.loads(out)
    assert code == EXIT_OK and d["components"] == 1
    arc = d["gamma"][0]
    ends = sorted([arc[0], arc[-1]], key=lambda p: p[1])
    assert ends[0][1] == pytest.approx(-1.0, abs=1e-2) and ends[1][1] == pytest.approx(1.0, abs=1e-2)
    assert max(ends[0][0], ends[1][0]) < 0.05


def test_phase_two_components(capsys):
    code, out, _ = run(capsys, "phase", "--lambda", "1.05", "--format", "json")
    d = json.loads(out)
    assert d["components"] == 2 and len(d["asymptotes"]) == 2


def test_phase_without_curve(capsys, tmp_path):
    code, out, _ = run(capsys, "phase", "--lambda", "2", "--eps", "-1", "--out", str(tmp_path), "--seeds", "2")
    assert code == EXIT_OK and csv_rows(out) == [["component", "x", "y"]]
    assert (tmp_path / "phase.svg").read_text().lstrip().startswith("<?xml")


# ---------------------------------------------------------------- orbit

def test_orbit_spiral(capsys, tmp_path):
    code, out, _ = run(capsys, "orbit", "--lambda", "0.9", "--axis", "+1", "--out", str(tmp_path))
    assert code == EXIT_OK
    rows = csv_rows(out)
    assert rows[0] == ["s", "x", "y", "z", "epsilon", "event"]
    assert any(r[-1] == "EquilibriumConvergence" for r in rows[1:])
    events = json.loads((tmp_path / "events.json").read_text())
    assert events[-1]["kind"] == "EquilibriumConvergence"
    assert (tmp_path / "orbit.csv").read_text() == out


def test_orbit_negative_polynomial_coefficients(capsys):
    code, out, _ = run(capsys, "orbit", "--poly", "-1,0,1", "--point", "0.5,0,+1", "--format", "json")
    d = json.loads(out)
    assert code == EXIT_OK and d["events"][-1]["kind"] == "LineConvergence"
    assert d["fate"]["fate"] == "ToLine"


def test_orbit_plane(capsys):
    code, out, _ = run(capsys, "orbit", "--lambda", "1", "--axis", "-1")
    d = json.loads(out)
    assert code == EXIT_OK and d["degenerate"] == "HorizontalPlane"
    assert d["curvatures"] == {"kappa1": 0.0, "kappa2": 0.0}


def test_orbit_truncated_exit_code(capsys):
    code, _, _ = run(capsys, "orbit", "--lambda", "1.3", "--axis", "-1")
    assert code == EXIT_INCONCLUSIVE


def test_orbit_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"function": {"kind": "linear", "a": 1, "lambda": 0.9},
                               "integrator": {"s_max": 3.0}, "start": {"axis": 1}}))
    code, out, _ = run(capsys, "orbit", "--config", str(cfg), "--format", "json")
    assert code == EXIT_INCONCLUSIVE and json.loads(out)["events"][-1]["kind"] == "Truncated"
    code, out, _ = run(capsys, "orbit", "--config", str(cfg), "--smax", "500", "--format", "json")
    assert code == EXIT_OK and json.loads(out)["config"]["integrator"]["s_max"] == 500.0


# ---------------------------------------------------------------- classify

def test_classify_sweep_keeps_input_order(capsys):
    code, out, _ = run(capsys, "classify", "--lambda", "0.4,0.6,0.8,1.2", "--axis", "+1")
    recs = json.loads(out)
    assert code == EXIT_OK
    assert [r["class"] for r in recs] == ["BowlEntireGraph", "ConvexGraphInCylinder",
                                          "EmbeddedCylinderConverging(infinite)",
                                          "EmbeddedCylinderConverging(infinite)"]
    assert [r["lambda"] for r in recs] == [0.4, 0.6, 0.8, 1.2]
    assert all(r["theoremItem"] for r in recs)


def test_classify_off_axis(capsys):
    code, out, _ = run(capsys, "classify", "--lambda", "1", "--point", "eq")
    assert code == EXIT_OK and json.loads(out)[0]["class"] == "CmcCylinder"
    code, out, _ = run(capsys, "classify", "--lambda", "0.3333333333333333", "--point", "1,0,+1")
    assert code == EXIT_OK and json.loads(out)[0]["class"] == "AnnulusBothEndsGraphs"


def test_classify_inconclusive(capsys):
    code, out, _ = run(capsys, "classify", "--lambda", "0.9", "--axis", "+1", "--smax", "2")
    assert code in (EXIT_INCONCLUSIVE, EXIT_INVARIANT) and json.loads(out)[0]["class"] is None


# ---------------------------------------------------------------- surface

def test_surface_obj_and_residual(capsys, tmp_path):
    code, out, _ = run(capsys, "surface", "--lambda", "0.4", "--axis", "+1", "--ntheta", "12", "--xcap", "3",
                       "--out", str(tmp_path))
    assert code == EXIT_OK
    kv = dict(csv_rows(out)[1:])
    assert float(kv["mean_curvature_residual"]) < 1e-6 and float(kv["hyperboloid_defect"]) <= 1e-9
    text = (tmp_path / "surface.obj").read_text()
    assert text.count("\nf ") + text.startswith("f ") > 0


def test_surface_catenoid_csv(capsys, tmp_path):
    code, out, _ = run(capsys, "surface", "--poly", "-1,0,1", "--point", "0.5,0,+1", "--xcap", "3",
                       "--format", "csv", "--out", str(tmp_path), "--ntheta", "6")
    assert code == EXIT_OK
    ns = int(dict(csv_rows(out)[1:])["samples"])
    assert len((tmp_path / "surface.csv").read_text().splitlines()) == 1 + 6 * ns


def test_surface_plane_is_a_usage_error(capsys):
    code, _, err = run(capsys, "surface", "--lambda", "1", "--axis", "-1")
    assert code == EXIT_USAGE and "plane" in err.lower()


# ---------------------------------------------------------------- verify and reproduce

def test_verify_quick(capsys):
    code, out, _ = run(capsys, "verify", "--quick")
    rows = csv_rows(out)
    assert code == EXIT_OK and rows[0][:2] == ["check", "status"]
    assert all(r[1] == "pass" for r in rows[1:])


def test_verify_exit_code_follows_checks(capsys, monkeypatch):
    from pmch2r import verify
    monkeypatch.setattr(verify, "run_suite", lambda level, cfg: [verify.CheckResult("x", False, "forced", 0.0)])
    code, _, _ = run(capsys, "verify", "--quick")
    assert code == EXIT_INVARIANT


def test_reproduce_unknown_figure(capsys, tmp_path):
    assert run(capsys, "reproduce", "12", "--out", str(tmp_path))[0] == EXIT_USAGE
    assert run(capsys, "reproduce", "fig", "--out", str(tmp_path))[0] == EXIT_USAGE


def test_reproduce_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(capsys, "reproduce", "1", "3", "--out", str(a))[0] == EXIT_OK
    assert run(capsys, "reproduce", "1", "3", "--out", str(b))[0] == EXIT_OK
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir()) and "fig1_bowl.obj" in names
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()
    assert "1.3" in json.dumps(json.loads((a / "fig3.json").read_text())["parameters"])


# ---------------------------------------------------------------- errors and logging

@pytest.mark.parametrize("argv", [["orbit", "--lambda", "0.9"], ["orbit", "--point", "1,2"],
                                  ["orbit", "--lambda", "0.9", "--axis", "2"], ["nonsense"],
                                  ["surface", "--lambda", "0.9", "--axis", "1", "--ntheta", "2"]])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE


def test_bad_config_files(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "orbit", "--config", str(bad), "--axis", "1")[0] == EXIT_USAGE
    assert run(capsys, "orbit", "--config", str(tmp_path / "none.json"), "--axis", "1")[0] == EXIT_USAGE


def test_log_level(capsys, monkeypatch, tmp_path):
    monkeypatch.setenv("PMC_LOG", "loud")
    assert run(capsys, "verify", "--quick")[0] == EXIT_USAGE
    monkeypatch.setenv("PMC_LOG", "info")
    code, _, _ = run(capsys, "phase", "--lambda", "2", "--format", "svg", "--out", str(tmp_path))
    assert code == EXIT_OK
