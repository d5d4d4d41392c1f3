import csv
import io
import json
import math
import subprocess
import sys

import pytest

from qps.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_RUNTIME, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_le_single_point(capsys):
    code, out, _ = run(capsys, "le", "--model", "amo", "--lambda", "2", "--phases", "4", "--steps", "20000")
    assert code == EXIT_OK
    row = next(csv.DictReader(io.StringIO(out)))
    assert float(row["le_formula"]) == pytest.approx(math.log(2))
    assert float(row["le_numeric"]) == pytest.approx(math.log(2), abs=0.01)
    assert row["regime"] == "PositiveLE"


def test_le_json(capsys):
    code, out, _ = run(capsys, "le", "--alpha", "0.5", "--lambda", "1.3", "--E", "-2", "--steps", "0",
                       "--format", "json")
    cell = json.loads(out)["cells"][0]
    assert code == EXIT_OK and cell["regime"] == "ZeroLE" and cell["le_numeric"] is None


def test_spectrum_and_localization(capsys):
    code, out, _ = run(capsys, "spectrum", "--lambda", "0", "--N", "5")
    vals = [float(r["E"]) for r in csv.DictReader(io.StringIO(out))]
    assert code == EXIT_OK and vals == pytest.approx(sorted(2 * math.cos(k * math.pi / 6) for k in range(1, 6)))
    code, out, _ = run(capsys, "spectrum", "--model", "amo", "--lambda", "3", "--N", "60", "--vectors")
    assert code == EXIT_OK and "ipr" in out.splitlines()[0]
    code, out, _ = run(capsys, "localization", "--model", "amo", "--lambda", "3", "--N", "200")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and len(rows) == 200
    assert sum(r["state"] == "Localized" for r in rows) > 150


def test_phase_diagram_files(tmp_path, capsys):
    out = tmp_path / "pd.csv"
    code, _, err = run(capsys, "phase-diagram", "--lambda", "-0.9", "--grid", "alpha:-0.6:0.6:3",
                       "--grid", "E:-2:2:3", "--N", "80", "--threads", "2", "--out", str(out))
    assert code == EXIT_OK
    assert out.read_text().splitlines()[0] == "alpha,lambda,E,le_formula,le_numeric,regime,ipr,edge_distance,status"
    assert len(out.read_text().splitlines()) == 10
    assert (tmp_path / "pd_plot.py").exists() and (tmp_path / "pd_edge.csv").exists()


def test_thread_env_fallback(tmp_path, capsys, monkeypatch):
    args = ["phase-diagram", "--lambda", "-1.1", "--grid", "alpha:-0.6:0.6:3", "--grid", "E:-2:2:3", "--N", "60"]
    monkeypatch.setenv("QPS_THREADS", "1")
    assert run(capsys, *args, "--out", str(tmp_path / "a.csv"))[0] == EXIT_OK
    monkeypatch.setenv("QPS_THREADS", "4")
    assert run(capsys, *args, "--out", str(tmp_path / "b.csv"))[0] == EXIT_OK
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_le_scan_and_acceleration(capsys):
    code, out, _ = run(capsys, "le-scan", "--model", "amo", "--lambda", "2", "--grid", "E:-1:1:3",
                       "--N", "100", "--steps", "5000")
    assert code == EXIT_OK and len(out.splitlines()) == 4
    code, out, _ = run(capsys, "acceleration", "--alpha", "0.9", "--eps", "0,0.3", "--steps", "2000")
    statuses = [r["status"] for r in csv.DictReader(io.StringIO(out))]
    assert code == EXIT_OK and statuses == ["ok", "error:StripViolation"]


@pytest.mark.parametrize("argv", [
    ["le", "--alpha", "1.5"],
    ["phase-diagram", "--grid", "alpha:0:1"],
    ["phase-diagram", "--grid", "alpha:0:1:3", "--grid", "E:0:1:3", "--grid", "theta:0:1:3"],
    ["le", "--steps", "10"],
    ["le-scan", "--grid", "alpha:0:0.5:3"],
    ["spectrum", "--N", "1"],
])
def test_config_errors_exit_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_CONFIG and "configuration error" in err


def test_argparse_errors_use_config_exit_code():
    for argv in (["frobnicate"], ["le", "--model", "nope"], ["acceleration", "--eps", "a,b"]):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == EXIT_CONFIG


def test_runtime_error_exit_2(capsys):
    # the orbit starts on the tan^2 pole
    code, _, err = run(capsys, "le", "--model", "tan2", "--lambda", "0.5", "--theta", "0.5", "--steps", "1000")
    assert code == EXIT_RUNTIME and "SingularPhase" in err


def test_io_error_exit_3(tmp_path, capsys):
    code, _, err = run(capsys, "le", "--steps", "0", "--out", str(tmp_path / "missing" / "x.csv"))
    assert code == EXIT_IO
    code, _, _ = run(capsys, "phase-diagram", "--grid", "alpha:0.1:0.2:2", "--grid", "E:0:1:2", "--N", "0",
                     "--out", str(tmp_path / "missing" / "x.csv"))
    assert code == EXIT_IO


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "qps", "le", "--steps", "0"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("E,le_formula")
