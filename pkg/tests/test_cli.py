import csv
import json
import subprocess
import sys

import pytest

from birthchain.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_dist_exact_json(capsys):
    code, out, _ = run(capsys, "dist", "--n", "3", "--format", "json", "--mode", "exact")
    rec = json.loads(out)
    assert code == 0
    assert rec["schema_version"] == "1"
    assert {r["k"]: r["p"] for r in rec["results"]}[2] == "7/12"
    assert all(r["method"] == "recurrence" for r in rec["results"])


@pytest.mark.parametrize("n, row", [("0", "0,1"), ("1", "1,1")])
def test_dist_csv_trivial(capsys, n, row):
    code, out, _ = run(capsys, "dist", "--n", n, "--format", "csv")
    assert code == 0
    assert out.splitlines() == ["k,p", row]


def test_dist_float_digits(capsys):
    _, out, _ = run(capsys, "dist", "--n", "3", "--format", "csv", "--mode", "float")
    assert out.splitlines()[2] == "2,0.58333333333333337"


def test_dist_negative_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["dist", "--n", "-1"])
    assert info.value.code == 2


def test_dist_resource_error(capsys, exact_limit):
    exact_limit(10)
    code, _, err = run(capsys, "dist", "--n", "11")
    assert code == 3
    assert "--mode float" in err
    code, out, _ = run(capsys, "dist", "--n", "11", "--mode", "float", "--format", "csv")
    assert code == 0 and len(out.splitlines()) == 12


def test_ctime_closed_state_zero(capsys):
    _, out, _ = run(capsys, "ctime", "--t", "1", "--kmax", "0", "--method", "closed")
    rec = json.loads(out)
    assert rec["results"] == [{"k": 0, "p": 0.36787944117144233, "method": "closed_form"}]


def test_ctime_at_origin(capsys):
    _, out, _ = run(capsys, "ctime", "--t", "0", "--kmax", "5")
    assert [r["p"] for r in json.loads(out)["results"]] == [1, 0, 0, 0, 0, 0]


def test_ctime_uniformization_matches_closed(capsys):
    _, out, _ = run(capsys, "ctime", "--t", "1", "--kmax", "1", "--method", "uniformization", "--tol", "1e-10")
    uni = json.loads(out)["results"][1]
    _, out, _ = run(capsys, "ctime", "--t", "1", "--kmax", "1")
    closed = json.loads(out)["results"][1]
    assert uni["method"] == "uniformization"
    assert abs(uni["p"] - closed["p"]) < 1e-10


def test_ctime_ode(capsys):
    code, out, _ = run(capsys, "ctime", "--t", "2", "--kmax", "3", "--method", "ode", "--format", "csv")
    rows = list(csv.reader(out.splitlines()))
    assert code == 0 and rows[0] == ["k", "p", "method"] and rows[1][2] == "ode"


def test_simulate_trivial(capsys):
    _, out, _ = run(capsys, "simulate", "--n", "1", "--reps", "1000", "--seed", "7")
    rec = json.loads(out)
    assert rec["results"]["empirical"] == [{"k": 1, "count": 1000, "frequency": 1.0}]
    assert rec["provenance"] == {"*": "simulation"}


def test_simulate_histogram(capsys, tmp_path):
    path = tmp_path / "hist.csv"
    code, _, _ = run(capsys, "simulate", "--n", "3", "--reps", "5000", "--seed", "1", "--histogram", str(path))
    assert code == 0
    assert path.read_text().splitlines()[0] == "k,frequency,exact"


def test_simulate_io_error(capsys, tmp_path):
    code, _, err = run(capsys, "simulate", "--n", "3", "--reps", "10", "--histogram", str(tmp_path / "no" / "h.csv"))
    assert code != 0 and "h.csv" in err


@pytest.mark.slow
def test_simulate_geometric_million(capsys):
    _, out, _ = run(capsys, "simulate", "--n", "3", "--reps", "1000000", "--seed", "42", "--method", "geometric")
    freq = {r["k"]: r["frequency"] for r in json.loads(out)["results"]["empirical"]}
    assert abs(freq[2] - 7 / 12) < 3 * (7 / 12 * 5 / 12 / 1e6) ** 0.5


def test_bounds_output(capsys):
    code, out, _ = run(capsys, "bounds", "--n", "3")
    rec = json.loads(out)
    assert code == 0
    assert rec["results"]["moments"]["mean_exact"] == "23/12"
    assert all(r["holds"] for r in rec["results"]["reports"])
    kinds = {r["kind"] for r in rec["results"]["reports"]}
    assert kinds == {"chebyshev", "tail_upper", "tail_lower", "mgf"}


def test_bounds_plot_data(capsys):
    _, out, _ = run(capsys, "bounds", "--n", "4", "--plot-data", "--format", "csv")
    lines = out.splitlines()
    assert lines[0] == "n,exact_mean,approx_mean,variance,variance_bound"
    assert lines[3].startswith("3,1.9166666666666667,2.0,0.4097222222222222,4.5")


@pytest.mark.parametrize("suite, max_n", [("closedform", "30"), ("bounds", "200"), ("genfunc", "15")])
def test_verify_suites(capsys, suite, max_n):
    code, out, _ = run(capsys, "verify", "--suite", suite, "--max-n", max_n)
    rec = json.loads(out)
    assert code == 0 and rec["results"]["passed"]


def test_verify_failure_exit_code(capsys):
    # a relative tolerance of 1e-30 cannot be met by the float recurrence
    code, _, err = run(capsys, "verify", "--suite", "closedform", "--max-n", "20", "--tol", "1e-30")
    assert code == 1
    assert err.startswith("FAIL closedform")


def test_coeffs(capsys):
    _, out, _ = run(capsys, "coeffs", "--k", "2")
    res = json.loads(out)["results"]
    assert [a["value"] for a in res["A_ik"]] == ["-3", "4"]
    assert [c["Q_j"] for c in res["laplace"]] == ["3", "3", "1"]
    _, out, _ = run(capsys, "coeffs", "--k", "1")
    res = json.loads(out)["results"]
    assert res["A_ik"][0]["value"] == "1"
    assert [c["A_j"] for c in res["laplace"]] == ["-2", "2"]


def test_coeffs_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["coeffs", "--k", "0"])
    assert info.value.code == 2


@pytest.mark.parametrize(
    "argv",
    [["dist", "--n", "5"], ["ctime", "--t", "1.5"], ["bounds", "--n", "20"], ["coeffs", "--k", "4"], ["simulate", "--n", "8", "--reps", "300"]],
)
def test_json_round_trip(capsys, argv):
    _, out, _ = run(capsys, *argv)
    parsed = json.loads(out)
    assert json.loads(json.dumps(parsed)) == parsed


def test_out_file(capsys, tmp_path):
    target = tmp_path / "row.json"
    run(capsys, "dist", "--n", "4", "--out", str(target))
    assert json.loads(target.read_text())["command"] == "dist"


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "birthchain", "dist", "--n", "2", "--format", "csv"],
        capture_output=True,
        text=True,
        check=True,
    )
    assert proc.stdout.splitlines() == ["k,p", "1,1/2", "2,1/2"]


def test_ctime_auto_switches_when_ill_conditioned(capsys):
    _, out, _ = run(capsys, "ctime", "--t", "1.5", "--kmax", "12")
    rows = json.loads(out)["results"]
    assert rows[0]["method"] == "closed_form"
    assert rows[-1]["method"] == "uniformization"
    _, out, _ = run(capsys, "ctime", "--t", "1.5", "--kmax", "12", "--method", "uniformization")
    ref = json.loads(out)["results"]
    assert all(abs(a["p"] - b["p"]) < 1e-9 for a, b in zip(rows, ref))
