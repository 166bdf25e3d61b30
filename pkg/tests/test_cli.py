from __future__ import annotations

import json
import math
import subprocess
import sys

import pytest

from geplab import cli, dataio


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def summary(out: str) -> dict:
    return dict(line.split("=", 1) for line in out.strip().splitlines())


# ------------------------------------------------------------ parsers

@pytest.mark.parametrize("text,value", [
    ("1", 1), ("-2.5", -2.5), ("1i", 1j), ("-0.001i", -0.001j), ("1+2i", 1 + 2j), ("0.5-1e-3i", 0.5 - 0.001j),
    (".5", 0.5),
])
def test_parse_complex(text, value):
    assert cli.parse_complex(text) == value


@pytest.mark.parametrize("text", ["", "1 + 2i", "abc", "1+2j", "nan", "inf", "i"])
def test_parse_complex_rejects(text):
    with pytest.raises(Exception):
        cli.parse_complex(text)


def test_parse_axis():
    assert cli.parse_axis("z") == (0.0, 0.0, 1.0)
    assert cli.parse_axis("-x") == (-1.0, 0.0, 0.0)
    assert cli.parse_axis("1,1,0") == (1.0, 1.0, 0.0)  # BasisSpec normalises
    with pytest.raises(Exception):
        cli.parse_axis("0,0,0")


def test_parse_extended():
    assert cli.parse_extended("inf") == math.inf
    assert cli.parse_extended("2.5") == 2.5


# ------------------------------------------------------------ classify

def test_classify_m(capsys):
    code, out, _ = run(capsys, "classify", "--hx", "1", "--hz", "1i")
    assert code == 0
    assert json.loads(out)["category"] == "M"


def test_classify_hermitian(capsys):
    code, out, _ = run(capsys, "classify", "--hz", "1")
    data = json.loads(out)
    assert code == 0 and data["category"] == "NoGEP"
    assert {"category", "beta_m", "beta_b", "lambda", "defectiveness"} <= set(data)


def test_classify_iib(capsys):
    code, out, _ = run(capsys, "classify", "--hx", "0.1", "--hz", "0.001i", "--basis-axis", "z",
                       "--beta-b-divergent")
    data = json.loads(out)
    assert data["category"] == "IIB" and data["lambda"] == 1.0


def test_classify_complex_energies_as_objects(capsys):
    _, out, _ = run(capsys, "classify", "--hx", "0.5", "--hz", "1i")
    e = json.loads(out)["E_plus"]
    assert set(e) == {"re", "im"} and abs(e["im"]) == pytest.approx(math.sqrt(0.75))


def test_classify_negative_literal_with_equals(capsys):
    code, out, _ = run(capsys, "classify", "--hx=1", "--hz=-1i")
    assert code == 0 and json.loads(out)["category"] == "M"


def test_classify_parse_error(capsys):
    code, _, err = run(capsys, "classify", "--hx", "one")
    assert code == cli.EXIT_USAGE and "error" in err


def test_classify_scalar(capsys):
    code, _, err = run(capsys, "classify", "--h0", "1")
    assert code == cli.EXIT_SCALAR and "scalar" in err


# ------------------------------------------------------------ ssh

def test_m_locus(capsys):
    code, out, _ = run(capsys, "ssh", "m-locus", "--n", "50", "--eps", "0.001")
    assert code == 0
    assert float(summary(out)["gamma_star"]) == pytest.approx(0.861, abs=0.001)


def test_h_locus(capsys):
    code, out, _ = run(capsys, "ssh", "h-locus", "--gamma", "0.5", "--n", "50", "--eps", "0.001")
    assert code == 0
    assert float(summary(out)["t1_star"]) == pytest.approx(1.03, abs=0.01)


def test_h_locus_needs_gamma(capsys):
    code, _, _ = run(capsys, "ssh", "h-locus", "--n", "50", "--eps", "0.001")
    assert code == cli.EXIT_USAGE


def test_winding(capsys):
    assert run(capsys, "ssh", "winding", "--t1", "2", "--gamma", "0.5")[1].strip() == "0"
    assert run(capsys, "ssh", "winding", "--t1", "0.5", "--gamma", "0.5")[1].strip() == "1"


def test_gapless_exit(capsys):
    code, _, err = run(capsys, "ssh", "winding", "--t1", "1")
    assert code == cli.EXIT_GAPLESS and "gapless" in err


def test_no_edge_exit(capsys):
    code, _, _ = run(capsys, "ssh", "lambda", "--t1", "2", "--gamma", "0.5")
    assert code == cli.EXIT_NO_EDGE


def test_model_error_exit(capsys):
    code, _, _ = run(capsys, "ssh", "lambda", "--t1", "0.3", "--gamma", "0.3", "--eps", "0.001")
    assert code == cli.EXIT_MODEL


def test_lambda_summary(capsys):
    code, out, _ = run(capsys, "ssh", "lambda", "--t1", "0.5", "--n", "10")
    s = summary(out)
    assert code == 0 and float(s["lambda"]) == pytest.approx(0.0, abs=1e-12)
    assert set(s) == {"lambda", "E_plus", "E_minus"}


def test_spectrum_file(tmp_path, capsys):
    path = tmp_path / "spec.csv"
    code, out, _ = run(capsys, "ssh", "spectrum", "--t1", "0.5", "--gamma", "0.2", "--n", "6", "--out", str(path))
    assert code == 0
    rows = dataio.read_rows(str(path))
    assert len(rows) == 12 and set(rows[0]) == {"index", "E_re", "E_im"}
    assert "E_plus" in summary(out)


def test_lambda_grid_records_errors(tmp_path, capsys):
    path = tmp_path / "lam.json"
    code, _, err = run(capsys, "ssh", "lambda", "--grid", "t1:0.3:2.0:3", "--gamma", "0.3", "--n", "10",
                       "--eps", "0.001", "--format", "json", "--out", str(path))
    assert code == 0
    rows = dataio.read_rows(str(path))
    assert [r["error"] for r in rows] == ["exceptional-line", "no-edge-pair", "no-edge-pair"]
    assert "errors=3" in err


def test_phase_diagram(tmp_path, capsys):
    data, bounds = tmp_path / "pd.csv", tmp_path / "b.csv"
    code, _, err = run(capsys, "ssh", "phase-diagram", "--grid", "gamma:0.5:0.5:1", "--grid", "t1:0.1:1.2:12",
                       "--n", "50", "--eps", "0.001", "--out", str(data), "--boundaries-out", str(bounds))
    assert code == 0
    rows = dataio.read_rows(str(data))
    assert len(rows) == 12 and "category" in rows[0]
    (b,) = dataio.read_rows(str(bounds))
    assert b["h_gep_t1"] == pytest.approx(1.03, abs=0.01)
    assert "IB=" in err


def test_phase_diagram_rejects_other_axes(capsys):
    code, _, _ = run(capsys, "ssh", "phase-diagram", "--grid", "eps:0:1:3")
    assert code == cli.EXIT_USAGE


# ------------------------------------------------------------ peach / sweep

def test_peach_unit_sphere(capsys):
    code, out, _ = run(capsys, "peach", "--beta-m", "0", "--beta-b", "0", "--n-theta", "8", "--n-phi", "8")
    rows = dataio.loads_csv(out)
    assert code == 0 and len(rows) == 64
    assert list(rows[0]) == ["theta", "phi", "radius"]
    assert all(r["radius"] == pytest.approx(1.0) for r in rows)


def test_peach_m_pole(capsys):
    _, out, _ = run(capsys, "peach", "--beta-m", "3", "--n-theta", "9", "--n-phi", "8")
    south = [r["radius"] for r in dataio.loads_csv(out) if r["theta"] == pytest.approx(math.pi)]
    assert south and all(r == pytest.approx(math.exp(-6), rel=1e-11) for r in south)


def test_peach_hybrid_pole(capsys):
    _, out, _ = run(capsys, "peach", "--beta-m", "1", "--beta-b", "2", "--n-theta", "9", "--n-phi", "8")
    north = dataio.loads_csv(out)[0]
    assert north["radius"] == pytest.approx(math.sqrt(1 + math.exp(-2)) / math.sqrt(2), rel=1e-11)


def test_peach_bad_counts(capsys):
    assert run(capsys, "peach", "--n-theta", "4")[0] == cli.EXIT_USAGE


def test_sweep_requires_grid(capsys):
    assert run(capsys, "sweep")[0] == cli.EXIT_USAGE


def test_sweep_byte_identical_across_workers(tmp_path, capsys):
    outputs = []
    for w in ("1", "3"):
        path = tmp_path / f"s{w}.csv"
        run(capsys, "sweep", "--evaluator", "edge-lambda", "--grid", "gamma:-0.4:0.4:3", "--grid", "t1:-0.6:0.6:4",
            "--n", "10", "--eps", "0.001", "--workers", w, "--out", str(path))
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]


def test_workers_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("GEPLAB_WORKERS", "x")
    assert run(capsys, "sweep", "--grid", "t1:0:1:2")[0] == cli.EXIT_USAGE


# ------------------------------------------------------------ config

def test_config_values_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nn = 50\neps = 0.001\ngamma = 0.2\n")
    _, out, _ = run(capsys, "ssh", "h-locus", "--config", str(cfg), "--gamma", "0.5")
    assert float(summary(out)["t1_star"]) == pytest.approx(1.03, abs=0.01)


def test_config_grid_and_switch(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("grid = gamma:0.5:0.5:1;t1:0.2:0.4:2\nn = 20\neps = 0.001\nhidden-numeric = false\n")
    out = tmp_path / "pd.csv"
    assert run(capsys, "ssh", "phase-diagram", "--config", str(cfg), "--out", str(out))[0] == 0
    assert len(dataio.read_rows(str(out))) == 2


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = red\n")
    code, _, err = run(capsys, "ssh", "m-locus", "--config", str(cfg))
    assert code == cli.EXIT_USAGE and "colour" in err


def test_config_bad_value(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("eps = lots\n")
    assert run(capsys, "ssh", "m-locus", "--config", str(cfg))[0] == cli.EXIT_USAGE


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "geplab", "ssh", "winding", "--t1", "2", "--gamma", "0.5"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.strip() == "0"
