import csv
import json
import math
import subprocess
import sys

import pytest

from singdet.cli import fmt, run
from singdet.specfun import bessel_j_zero


def out_of(capsys, argv):
    code = run(argv)
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_det_example(capsys):
    code, out, _ = out_of(capsys, ["det", "--nu", "0.5", "--potential", "0", "--theta0", "0",
                                   "--theta1", "0"])
    assert code == 0
    assert "det = 2.000000000" in out


def test_eig_example(capsys):
    code, out, _ = out_of(capsys, ["eig", "--nu", "0.3", "--potential", "0", "--theta0", "0",
                                   "--theta1", "0", "--count", "3"])
    assert code == 0
    vals = [float(line.split("=")[1].split()[0]) for line in out.splitlines()
            if line.startswith("lambda_")]
    assert len(vals) == 3
    for k, v in enumerate(vals, 1):
        assert abs(v - bessel_j_zero(0.3, k) ** 2) < 1e-8 * v


def test_check_from_file(capsys, tmp_path):
    f = tmp_path / "prob.json"
    f.write_text(json.dumps({"nu": 0.3, "potential": "sin(x)", "theta0": 0.5, "theta1": 0.0}))
    code, out, _ = out_of(capsys, ["check", "--file", str(f)])
    assert code == 0
    assert "class check: PASS" in out
    assert "admissible" in out


def test_inline_flags_override_file(capsys, tmp_path):
    f = tmp_path / "prob.json"
    f.write_text(json.dumps({"nu": 0.3, "potential": "0", "theta0": 0.0, "theta1": 0.0}))
    code, out, _ = out_of(capsys, ["det", "--file", str(f), "--nu", "0.5"])
    assert code == 0 and "det = 2.000000000" in out


def test_trace_and_contour(capsys):
    code, out, _ = out_of(capsys, ["trace", "--nu", "0.5", "--z", "1"])
    assert code == 0 and "0.1565176427" in out
    code, out, _ = out_of(capsys, ["contour", "--nu", "0.5"])
    assert code == 0
    assert "2.00" in out


def test_theta1_scan(capsys, tmp_path):
    path = tmp_path / "scan.csv"
    thetas = [0.4, 1.0, math.pi / 2, 2.0, 3 * math.pi / 4]
    code, _, _ = out_of(capsys, ["scan", "--nu", "0.5", "--param", "theta1", "--values",
                                 ",".join(repr(t) for t in thetas), "--out", str(path)])
    assert code == 0
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == len(thetas)
    for t, row in zip(thetas, rows):
        assert float(row["theta1"]) == t
        assert abs(float(row["det"]) - 2 * (1 + 1 / math.tan(t))) < 1e-9
        assert row["status"] == "ok"
    assert abs(float(rows[2]["det"]) - 2.0) < 1e-12
    assert abs(float(rows[4]["det"])) < 1e-12


def test_scan_marks_failed_rows(capsys, tmp_path):
    path = tmp_path / "scan.csv"
    code, _, _ = out_of(capsys, ["scan", "--nu", "0.3", "--param", "z", "--values",
                                 "1,1e14,4", "--out", str(path)])
    assert code == 0
    rows = list(csv.DictReader(path.open()))
    assert [r["status"] == "ok" for r in rows] == [True, False, True]
    assert rows[1]["status"].startswith("error")


def test_scan_range_syntax(capsys, tmp_path):
    path = tmp_path / "scan.csv"
    assert out_of(capsys, ["scan", "--nu", "0.5", "--param", "z", "--values", "1:4:4",
                           "--out", str(path)])[0] == 0
    rows = list(csv.DictReader(path.open()))
    assert [float(r["z"]) for r in rows] == [1.0, 2.0, 3.0, 4.0]


def test_csv_round_trip_is_bit_exact(capsys, tmp_path):
    path = tmp_path / "det.csv"
    assert out_of(capsys, ["det", "--nu", "0.3", "--potential", "x", "--theta1", "1.0",
                           "--out", str(path)])[0] == 0
    from singdet import BoundaryPair, SingularProblem, zeta_det
    ref = zeta_det(SingularProblem(0.3, "x"), BoundaryPair(0.0, 1.0))
    row = next(csv.DictReader(path.open()))
    assert float(row["det"]) == ref.value
    assert float(row["log_abs_det"]) == ref.log_value
    raw = path.read_text()
    assert ";" not in raw and raw.splitlines()[0].count(",") >= 2


def test_show_config(capsys):
    code, out, _ = out_of(capsys, ["det", "--nu", "0.5", "--show-config", "--tol", "1e-11"])
    assert code == 0
    cfg = json.loads(out[:out.index("}") + 1])
    assert cfg["x_match"] == 0.1 and cfg["Z"] == 1e4 and cfg["eps"] == 1e-4
    assert cfg["n"] == 4000 and cfg["rtol"] == 1e-11


def test_constant_expressions_for_angles(capsys):
    code, out, _ = out_of(capsys, ["det", "--nu", "0.5", "--theta1", "pi/2"])
    assert code == 0 and "det = 2.000000000" in out


@pytest.mark.parametrize("argv,code", [
    (["det", "--nu", "0.5"], 0),
    (["det", "--nu", "0.5", "--bogus"], 1),
    (["frobnicate", "--nu", "0.5"], 1),
    (["det"], 1),
    (["det", "--nu", "0.3", "--potential", "x+"], 1),
    (["det", "--nu", "1.5", "--theta0", "0.5"], 1),
    (["det", "--nu", "0.5", "--theta1", "pi"], 1),
    (["det", "--nu", "abc"], 1),
    (["det", "--file", "/nonexistent/prob.json"], 1),
    (["eig", "--nu", "0.5", "--count", "0"], 1),
    (["contour", "--nu", "0.5", "--potential=-20*x"], 2),
    (["trace", "--nu", "0.5", "--z=-pi^2"], 2),
    (["det", "--nu", "0.3", "--z", "1e14"], 2),
])
def test_exit_codes(capsys, argv, code):
    got, _, err = out_of(capsys, argv)
    assert got == code
    if code:
        assert err.startswith("singdet:")


def test_numerical_error_names_module(capsys):
    _, _, err = out_of(capsys, ["trace", "--nu", "0.5", "--z=-pi^2"])
    assert "PoleError" in err or "pole" in err.lower()


def test_fmt():
    assert fmt(2.0) == "2.000000000"
    assert fmt(1e-5) == "1.000000000e-05"
    assert fmt(3e7) == "3.000000000e+07"


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "singdet.cli", "det", "--nu", "0.5"],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert "det = 2.000000000" in res.stdout
