import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from casimir_pfa.cli import run

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
PN = 1e-12


def write_json(path, data):
    path.write_text(json.dumps(data))
    return path


def experiment_config(**overrides):
    cfg = json.loads((CONFIGS / "experiment.json").read_text())
    cfg.update(overrides)
    return cfg


def invoke(capsys, *argv):
    code = run([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def invoke_json(capsys, *argv):
    code, out, err = invoke(capsys, *argv, "--format", "json", "--no-timestamp")
    assert code == 0, err
    return json.loads(out)


# -- pressure -----------------------------------------------------------------------


def test_pressure_ideal_row(tmp_path, capsys):
    cfg = write_json(tmp_path / "c.json", {"material": {"kind": "ideal"}, "geometry": {"L_m": 221e-9}})
    rep = invoke_json(capsys, "pressure", "--config", cfg)
    row = rep["results"]["rows"][0]
    assert row["pressure_Pa"]["value"] == pytest.approx(0.5448, rel=1e-3)
    assert row["d2E_dL2_Pa_per_m"]["value"] < 0


def test_pressure_sweep_scaling(capsys):
    rep = invoke_json(capsys, "pressure", "--config", CONFIGS / "ideal_pressure.json")
    p = [r["pressure_Pa"]["value"] for r in rep["results"]["rows"]]
    assert p[0] / p[1] == pytest.approx(16, rel=1e-8)
    assert p[1] / p[2] == pytest.approx(16, rel=1e-8)


def test_pressure_plasma_below_ideal(tmp_path, capsys):
    cfg = write_json(tmp_path / "c.json", {"material": {"kind": "plasma", "lambda_p_m": 136e-9},
                                           "geometry": {"L_m": 221e-9}})
    row = invoke_json(capsys, "pressure", "--config", cfg)["results"]["rows"][0]
    assert 0 < row["pressure_Pa"]["value"] < 0.5448
    assert 0.5 < row["reduction_factor"]["value"] < 0.8


def test_pressure_csv_is_gnuplot_friendly(capsys):
    code, out, _ = invoke(capsys, "pressure", "--config", CONFIGS / "ideal_pressure.json", "--format", "csv",
                          "--units", "human", "--sweep", "1e-7,2e-7")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("#") and lines[1].startswith("# L_nm")
    assert len(lines) == 4
    assert float(lines[2].split(",")[0]) == pytest.approx(100.0)


# -- lateral --------------------------------------------------------------------------


@pytest.fixture(scope="module")
def lateral_report():
    return json.loads(_run_lateral())


def _run_lateral():
    proc = subprocess.run([sys.executable, "-m", "casimir_pfa", "lateral", "--config", str(CONFIGS / "experiment.json"),
                           "--format", "json", "--no-timestamp"], capture_output=True, text=True, check=True)
    return proc.stdout


def test_lateral_experiment_config(lateral_report):
    r = lateral_report["results"]
    assert r["radius_m"]["source"] == "calibrated"
    assert 10e-6 < r["radius_m"]["value"] < 1e-3
    assert r["linear_amplitude_N"]["value"] == pytest.approx(0.28 * PN, rel=1e-12)
    assert 0.32 * PN <= r["complete_amplitude_N"]["value"] <= 0.34 * PN
    assert 1.15 <= r["higher_order_ratio"]["value"] <= 1.25
    for key in ("linear_amplitude_N", "complete_amplitude_N", "higher_order_ratio", "b_max_m"):
        assert 0 <= r[key]["est_error"] < 1e-5 * abs(r[key]["value"])


def test_lateral_statistics(lateral_report):
    stats = lateral_report["results"]["statistics"]
    by_label = {t["label"]: t for t in stats["theories"]}
    assert by_label["beyond_pfa"]["p_two_sided"]["value"] == pytest.approx(0.0023, abs=1e-4)
    assert by_label["complete_pfa"]["p_two_sided"]["value"] > 0.5
    assert by_label["beyond_pfa"]["p_one_sided"]["value"] == pytest.approx(0.5 * by_label["beyond_pfa"]["p_two_sided"]["value"])
    quoted = stats["quoted"][0]
    assert quoted["quoted_p"] == 0.0006
    assert quoted["status"] == "discrepancy"


def test_lateral_validity_block(lateral_report):
    v = lateral_report["results"]["validity"]
    assert round(v["ratios"]["a1/L"], 2) == 0.27
    assert round(v["ratios"]["a1/lambda_P"], 2) == 0.43
    assert v["flags"]["a1/L"] == "warn" and v["flags"]["a2/L"] == "pass"


def test_lateral_exact_value_probability(tmp_path, capsys):
    cfg = write_json(tmp_path / "c.json", experiment_config(external={"amplitude_N": 0.33e-12, "label": "x"}))
    stats = invoke_json(capsys, "lateral", "--config", cfg)["results"]["statistics"]
    x = [t for t in stats["theories"] if t["label"] == "x"][0]
    assert x["p_two_sided"]["value"] == pytest.approx(0.80, abs=0.005)


def test_lateral_flat_plate_ratio_undefined(tmp_path, capsys):
    cfg = experiment_config()
    cfg["geometry"] = dict(cfg["geometry"], a2_m=0.0, R_m=1e-4)
    del cfg["calibration"]
    rep = invoke_json(capsys, "lateral", "--config", write_json(tmp_path / "c.json", cfg))
    r = rep["results"]
    assert r["linear_amplitude_N"]["value"] == 0.0
    assert r["complete_amplitude_N"]["value"] == 0.0
    assert r["higher_order_ratio"]["status"] == "undefined"
    assert r["higher_order_ratio"]["value"] is None


def test_lateral_with_deviation_csv(tmp_path, capsys):
    k = 2 * math.pi / 1.2e-6
    (tmp_path / "rho.csv").write_text(
        "k_rad_per_m,L_m,rho\n" + "\n".join(f"{k * f!r},2.21e-07,0.7142857142857143" for f in (0.5, 1.0, 2.0)) + "\n")
    cfg = experiment_config(deviation_csv="rho.csv")
    del cfg["external"]
    rep = invoke_json(capsys, "lateral", "--config", write_json(tmp_path / "c.json", cfg))
    ext = rep["results"]["external"]
    assert ext["source"] == "deviation_csv"
    assert ext["amplitude_N"]["value"] == pytest.approx(0.20 * PN, rel=1e-12)


def test_lateral_calibrate_flag(tmp_path, capsys):
    cfg = experiment_config()
    del cfg["calibration"]
    path = write_json(tmp_path / "c.json", cfg)
    code, _, err = invoke(capsys, "lateral", "--config", path)
    assert code == 2 and "R_m" in err
    rep = invoke_json(capsys, "lateral", "--config", path, "--calibrate-target", "2.8e-13")
    assert rep["results"]["linear_amplitude_N"]["value"] == pytest.approx(0.28 * PN, rel=1e-12)


def test_lateral_text_human_units(capsys):
    code, out, _ = invoke(capsys, "lateral", "--config", CONFIGS / "experiment.json", "--units", "human")
    assert code == 0
    assert "linear_amplitude_N: 0.28 +/-" in out and "pN" in out


# -- calibrate-radius ---------------------------------------------------------------------


def test_calibrate_radius_command(capsys):
    rep = invoke_json(capsys, "calibrate-radius", "--config", CONFIGS / "experiment.json")
    R = rep["results"]["radius_m"]["value"]
    rep2 = invoke_json(capsys, "calibrate-radius", "--config", CONFIGS / "experiment.json", "--target", "5.6e-13")
    assert rep2["results"]["radius_m"]["value"] == pytest.approx(2 * R, rel=1e-14)


# -- collapse -------------------------------------------------------------------------------


def _curve(path, L, us):
    rows = "\n".join(f"{u / L!r},{L!r},{1 - 0.3 * (1 - math.exp(-u))!r}" for u in us)
    path.write_text("# synthetic\nk_rad_per_m,L_m,rho\n" + rows + "\n")
    return path


def test_collapse_synthetic(tmp_path, capsys):
    us = [0.1 * 1.3**i for i in range(20)]
    a = _curve(tmp_path / "a.csv", 200e-9, us)
    b = _curve(tmp_path / "b.csv", 2e-6, us)
    rep = invoke_json(capsys, "collapse", a, b)
    assert rep["results"]["spread"] <= 1e-10


def test_collapse_rescale(capsys):
    rep = invoke_json(capsys, "collapse", CONFIGS / "rho_200nm.csv", "--rescale", "10")
    p = rep["results"]["rescaled_points"][0]
    assert p["L_m"] == 2e-6 and p["rho"] == 0.84
    assert p["k_rad_per_m"] == pytest.approx(2 * math.pi / 12e-6, rel=1e-15)
    assert rep["results"]["spread"] is None
    assert rep["results"]["spread_with_rescaled"] == 0.0


def test_collapse_missing_header(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2,3\n")
    code, _, err = invoke(capsys, "collapse", bad)
    assert code == 2
    assert "bad.csv:1:" in err


# -- error handling ---------------------------------------------------------------------------


def test_config_syntax_error_has_line(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text('{\n  "material": {"kind": "ideal"},\n  "geometry": {"L_m": }\n}\n')
    code, _, err = invoke(capsys, "pressure", "--config", p)
    assert code == 2
    assert "c.json:3:" in err


@pytest.mark.parametrize("mutate,field", [
    (lambda c: c["geometry"].update(a1_m=-1.0), "geometry.a1_m"),
    (lambda c: c["material"].update(kind="drude"), "material.kind"),
    (lambda c: c["geometry"].update(L_m=5e-8), "geometry.L_m"),
    (lambda c: c.update(colour="red"), "colour"),
    (lambda c: c["measurement"].update(confidence=1.5), "measurement"),
    (lambda c: c["quadrature"].update(rel_tolerance=0.1), "quadrature"),
])
def test_config_field_errors(tmp_path, capsys, mutate, field):
    cfg = experiment_config()
    mutate(cfg)
    code, _, err = invoke(capsys, "lateral", "--config", write_json(tmp_path / "c.json", cfg))
    assert code == 2
    assert field in err


def test_convergence_failure_exit_code(tmp_path, capsys):
    cfg = {"material": {"kind": "plasma", "lambda_p_m": 136e-9}, "geometry": {"L_m": 221e-9},
           "quadrature": {"rel_tolerance": 1e-15, "max_subdivisions": 50}}
    code, _, err = invoke(capsys, "pressure", "--config", write_json(tmp_path / "c.json", cfg))
    assert code == 3
    assert "did not converge" in err


# -- determinism and verify -----------------------------------------------------------------


def test_reports_are_byte_identical(lateral_report):
    assert _run_lateral() == json.dumps(lateral_report, indent=2, sort_keys=True) + "\n"


def test_timestamp_present_by_default(capsys):
    code, out, _ = invoke(capsys, "pressure", "--config", CONFIGS / "ideal_pressure.json", "--format", "json")
    assert "generated_at" in json.loads(out)["provenance"]


def test_verify_round_trip(tmp_path, capsys, lateral_report):
    path = write_json(tmp_path / "r.json", lateral_report)
    code, out, _ = invoke(capsys, "verify", path)
    assert code == 0 and "verified" in out


@pytest.mark.parametrize("argv", [
    ["pressure", "--config", CONFIGS / "ideal_pressure.json"],
    ["collapse", CONFIGS / "rho_200nm.csv", CONFIGS / "rho_2um.csv", "--rescale", "10"],
])
def test_verify_other_commands(tmp_path, capsys, argv):
    out = tmp_path / "r.json"
    code, _, _ = invoke(capsys, *argv, "--format", "json", "-o", out)
    assert code == 0
    assert invoke(capsys, "verify", out)[0] == 0


def test_verify_detects_tampering(tmp_path, capsys, lateral_report):
    rep = json.loads(json.dumps(lateral_report))
    rep["results"]["complete_amplitude_N"]["value"] *= 1.01
    code, _, err = invoke(capsys, "verify", write_json(tmp_path / "r.json", rep))
    assert code == 4
    assert "complete_amplitude_N" in err


def test_config_hash_tracks_content(capsys, tmp_path):
    a = invoke_json(capsys, "pressure", "--config", CONFIGS / "ideal_pressure.json")
    cfg = json.loads((CONFIGS / "ideal_pressure.json").read_text())
    cfg["sweep_L_m"] = [1e-7]
    b = invoke_json(capsys, "pressure", "--config", write_json(tmp_path / "c.json", cfg))
    assert a["provenance"]["config_sha256"] != b["provenance"]["config_sha256"]
