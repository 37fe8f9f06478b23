import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from lambda_entangle.cli import main


def run(tmp_path, *args, name="out.csv"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def read_csv(path):
    rows = list(csv.reader(io.StringIO(path.read_text())))
    header, body = rows[0], np.array(rows[1:], dtype=float)
    return {h: body[:, i] for i, h in enumerate(header)}


def test_entropy_curve_properties(tmp_path):
    code, out = run(tmp_path, "entropy", "--t-end-ns", "360", "--t-step-ns", "0.12")
    assert code == 0
    cols = read_csv(out)
    assert list(cols) == ["t_ns", "S_fo_nats", "S_fp_nats", "gap_nats"]
    assert np.all(cols["S_fp_nats"] - cols["S_fo_nats"] >= -1e-12)
    assert np.all(cols["gap_nats"] >= -1e-12)
    assert cols["S_fp_nats"][-1] == pytest.approx(math.log(2), abs=1e-9)


def test_entropy_degenerate(tmp_path):
    code, out = run(tmp_path, "entropy", "--delta-omega-mhz", "0", "--t-end-ns", "600", "--t-step-ns", "6")
    assert code == 0
    assert read_csv(out)["S_fo_nats"][-1] == pytest.approx(0.0, abs=1e-9)


def test_entropy_bits(tmp_path):
    _, nats = run(tmp_path, "entropy", name="a.csv")
    _, bits = run(tmp_path, "entropy", "--bits", name="b.csv")
    a, b = read_csv(nats), read_csv(bits)
    assert np.allclose(b["S_fp_bits"], a["S_fp_nats"] / math.log(2), rtol=1e-8)


def test_output_is_byte_deterministic(tmp_path):
    for fmt in ("csv", "json"):
        _, a = run(tmp_path, "detect", "--format", fmt, name=f"a.{fmt}")
        _, b = run(tmp_path, "detect", "--format", fmt, name=f"b.{fmt}")
        assert a.read_bytes() == b.read_bytes()
        assert b"\r\n" not in a.read_bytes()


def test_csv_precision(tmp_path):
    _, out = run(tmp_path, "entropy", "--precision", "6", "--t-step-ns", "6")
    line = out.read_text().splitlines()[3]
    assert all(len(x.replace(".", "").replace("-", "").lstrip("0").split("e")[0]) <= 6 for x in line.split(","))


def test_json_layout(tmp_path):
    _, out = run(tmp_path, "sweep", "--format", "json", "--ratio-count", "5", name="s.json")
    doc = json.loads(out.read_text())
    assert set(doc) == {"meta", "columns"}
    assert doc["meta"]["command"] == "sweep"
    assert doc["meta"]["version"]
    assert doc["meta"]["config"]["ratio_count"] == 5
    assert doc["columns"]["eta_inf"][0] == 1.0


def test_detect_figure_data(tmp_path):
    code, out = run(tmp_path, "detect", "--t-start-ns", "-5", "--t-end-ns", "200", "--t-step-ns", "0.05")
    assert code == 0
    c = read_csv(out)
    tau = c["tau_ns"]
    dark = tau <= 0
    assert np.all(c["P_H_per_eff"][dark] == 0) and np.all(c["P_V_per_eff"][dark] == 0)
    live = ~dark
    total = 1 - np.exp(-tau[live] / 12)
    assert np.max(np.abs(c["P_H_per_eff"][live] + c["P_V_per_eff"][live] - total)) < 1e-8
    late = tau > 150
    h = c["P_H_per_eff"][late]
    assert abs(0.5 * (h.max() - h.min()) - 0.0543) < 0.002
    assert abs(0.5 * (h.max() + h.min()) - 0.5) < 0.002


def test_detect_omit_dark(tmp_path):
    _, out = run(tmp_path, "detect", "--t-start-ns", "-5", "--t-step-ns", "1", "--omit-dark")
    assert read_csv(out)["tau_ns"].min() > 0


def test_detect_degenerate(tmp_path):
    _, out = run(tmp_path, "detect", "--delta-omega-mhz", "0", "--t-end-ns", "300", "--t-step-ns", "1")
    c = read_csv(out)
    assert c["P_H_per_eff"][-1] == pytest.approx(1.0, abs=1e-9)
    assert np.all(np.diff(c["P_H_per_eff"]) >= -1e-12)


def test_erase_full_visibility(tmp_path):
    code, out = run(tmp_path, "erase", "--t-step-ns", "0.01", "--t-end-ns", "30")
    assert code == 0
    c = read_csv(out)
    assert np.allclose(c["purity"], 1.0, atol=1e-9)
    frac = c["P_joint_H"] / c["weight"]
    assert frac.max() == pytest.approx(1.0, abs=1e-6) and frac.min() == pytest.approx(0.0, abs=1e-6)
    assert np.allclose(c["P_joint_H"] + c["P_joint_V"], c["weight"], rtol=1e-8)
    peaks = c["tau_ns"][1:-1][(frac[1:-1] > frac[:-2]) & (frac[1:-1] >= frac[2:])]
    assert np.diff(peaks) == pytest.approx(2 * math.pi / (2 * math.pi * 0.122), abs=0.02)


def test_erase_wide_shutter_exits_1(tmp_path, capsys):
    code, out = run(tmp_path, "erase", "--delta-t-ns", "0.3")
    assert code == 1
    assert "blur" in capsys.readouterr().err
    assert not out.exists()


def test_blur_sweep_output(tmp_path, monkeypatch):
    monkeypatch.setenv("LAMBDA_ENTANGLE_THREADS", "2")
    code, out = run(tmp_path, "blur", "--dt-count", "25")
    assert code == 0
    c = read_csv(out)
    floor = c["which_path_floor"][0]
    assert c["coherence"][0] > 0.999
    assert np.all(c["coherence"] >= floor * 0.99)
    assert c["coherence"][-1] < 0.5 * c["coherence"][0]


def test_sweep_columns(tmp_path):
    _, out = run(tmp_path, "sweep", "--ratio-count", "21")
    c = read_csv(out)
    assert np.all(np.diff(c["S_fo_inf_nats"]) >= 0)
    assert np.allclose(c["S_fp_inf_nats"], math.log(2))


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# lab setup\ngamma_inv_ns = 6\nt-step-ns = 3\nformat = json\n")
    _, out = run(tmp_path, "entropy", "--config", str(cfg), "--t-step-ns", "6", name="o.json")
    meta = json.loads(out.read_text())["meta"]["config"]
    assert meta["gamma_inv_ns"] == 6.0 and meta["t_step_ns"] == 6.0 and meta["format"] == "json"


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("unknown_key = 1\n")
    assert main(["entropy", "--config", str(bad)]) == 1
    assert main(["entropy", "--config", str(tmp_path / "missing.cfg")]) == 2


@pytest.mark.parametrize("args", [
    ["entropy", "--gamma-inv-ns", "-1"],
    ["entropy", "--precision", "20"],
    ["entropy", "--t-step-ns", "0"],
    ["detect", "--efficiency", "2"],
    ["detect", "--branching-plus", "0.3"],
])
def test_parameter_errors_exit_1(tmp_path, args):
    assert run(tmp_path, *args)[0] == 1


def test_unwritable_output_exits_2(tmp_path):
    assert main(["entropy", "--out", str(tmp_path / "no" / "such" / "dir.csv")]) == 2


def test_oracle_default_passes(tmp_path):
    code, out = run(tmp_path, "oracle", name="r.json")
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["passed"] and all("max_deviation" in c for c in rep["checks"])


def test_oracle_coarse_grid_exits_3(tmp_path):
    code, out = run(tmp_path, "oracle", "--half-width-gammas", "40", "--modes-per-gamma", "10",
                    "--horizon-ns", "400", name="r.json")
    assert code == 3
    assert json.loads(out.read_text())["passed"] is False


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "lambda_entangle", "sweep", "--ratio-count", "2"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == "ratio,eta_inf,S_fo_inf_nats,S_fp_inf_nats"
