import json
import math
import subprocess
import sys

import numpy as np
import pytest

from ckmeans.cli import EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_OK, main, parse_sweep
from ckmeans.errors import DimensionError, IngestionError, ValidationError
from ckmeans.io import (gen_blobs, parse_constraints, parse_points, parse_report,
                        serialize_report)
from ckmeans.kmeans import lloyd
from ckmeans.metrics import metric_accuracy, metric_nmi


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return _write


# -- ingestion ---------------------------------------------------------------------

def test_parse_points(write):
    S = parse_points(write("a.csv", "0\n0.1\n10\n10.1"))
    assert S.shape == (1, 4) and S[0, 3] == 10.1
    assert parse_points(write("b.csv", "1,2\n3,4\n")).shape == (2, 2)
    with pytest.raises(IngestionError, match="line 2") as exc:
        parse_points(write("c.csv", "1,2\n3\n"))
    assert exc.value.line == 2
    with pytest.raises(IngestionError, match="line 3"):
        parse_points(write("d.csv", "1\n2\nabc\n"))
    with pytest.raises(IngestionError, match="no data"):
        parse_points(write("e.csv", "\n\n"))
    with pytest.raises(IngestionError, match="line 1"):
        parse_points(write("f.csv", "nan,1\n"))


def test_parse_constraints(write):
    cs = parse_constraints(write("c.txt", "ML 0 1\nCL 0 2\nCARD 0 2\nCARD 1 2"), 4, 2)
    assert (cs.v, cs.e, cs.cardinalities) == (1, 1, (2, 2))
    assert parse_constraints(write("e.txt", ""), 4, 2).is_empty()
    with pytest.raises(IngestionError, match="line 1.*cover"):
        parse_constraints(write("p.txt", "CARD 0 2"), 4, 2)


def test_parse_constraints_errors(write):
    cases = {
        "XX 0 1": "line 1.*unknown",
        "ML 0 9": "line 1.*out of range",
        "# comment\nCL 0 0": "line 2.*itself",
        "ML 0": "line 1.*two integers",
        "CARD 5 1": "line 1.*cluster index",
        "CARD 0 2\nCARD 0 2": "line 2.*twice",
    }
    for text, pattern in cases.items():
        with pytest.raises(IngestionError, match=pattern):
            parse_constraints(write("x.txt", text), 4, 2)
    with pytest.raises(ValidationError, match="sum"):
        parse_constraints(write("y.txt", "CARD 0 3\nCARD 1 2"), 4, 2)


# -- synthetic data and metrics ------------------------------------------------------

def test_gen_blobs():
    S, labels = gen_blobs(3, 4, 2, 0.0, 5.0, seed=1)
    assert S.shape == (2, 12) and np.array_equal(np.bincount(labels), [4, 4, 4])
    for j in range(3):
        block = S[:, labels == j]
        assert np.all(block == block[:, :1])
    centers = np.array([S[:, labels == j][:, 0] for j in range(3)])
    dists = [np.linalg.norm(a - b) for i, a in enumerate(centers) for b in centers[i + 1:]]
    assert min(dists) >= 5.0
    a, b = gen_blobs(2, 3, 2, 0.5, 3.0, seed=7), gen_blobs(2, 3, 2, 0.5, 3.0, seed=7)
    assert np.array_equal(a[0], b[0])


def test_gen_blobs_recoverable():
    S, labels = gen_blobs(3, 3, 2, 0.05, 20.0, seed=3)
    assert metric_nmi(lloyd(S, 3, seed=0).labels, labels) == pytest.approx(1.0)


def test_nmi():
    a = np.array([0, 0, 1, 1, 2, 2])
    assert metric_nmi(a, a) == pytest.approx(1.0)
    assert metric_nmi(a, (a + 1) % 3) == pytest.approx(1.0)
    # independent partitions: mutual information is exactly zero
    assert metric_nmi([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(0.0, abs=1e-15)
    # hand value: H(a) = ln 2, H(b) = ln 4 - 3/4 ln 3, I = H(b) - 1/2 ln 2
    x, y = [0, 0, 1, 1], [0, 0, 0, 1]
    ha, hb = math.log(2), math.log(4) - 0.75 * math.log(3)
    mi = hb - 0.5 * math.log(2)
    assert metric_nmi(x, y) == pytest.approx(mi / ((ha + hb) / 2))
    assert metric_nmi(x, y) == pytest.approx(metric_nmi(y, x))
    with pytest.raises(DimensionError):
        metric_nmi([0, 1], [0, 1, 1])


def test_accuracy():
    assert metric_accuracy([0, 1, 2], [0, 1, 2], 3) == 1.0
    assert metric_accuracy([1, 1, 0, 0], [0, 0, 1, 1], 2) == 1.0
    assert metric_accuracy([0, 0, 0, 1], [0, 0, 1, 1], 2) == 0.75
    with pytest.raises(DimensionError):
        metric_accuracy([0], [0, 1], 2)


# -- report serialisation --------------------------------------------------------------

def test_report_round_trip():
    report = {"b": 1.0 / 3.0, "a": [np.float64(2.5), 3], "c": {"z": True, "y": None}}
    text = serialize_report(report)
    assert text.index('"a"') < text.index('"b"')
    parsed = parse_report(text)
    assert parsed["b"] == 0.333333333333
    assert serialize_report(parsed) == text
    assert parse_report(serialize_report(parsed)) == parsed


def test_parse_sweep():
    assert parse_sweep("seeds=0,1,2;rhos=0.01,1") == ([0, 1, 2], [0.01, 1.0])
    assert parse_sweep("rhos=0.5") == ([0], [0.5])
    with pytest.raises(ValidationError):
        parse_sweep("seed=1")


# -- end to end ----------------------------------------------------------------------

def run_cli(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_with_oracle(write, capsys):
    pts = write("p.csv", "0\n0.1\n10\n10.1\n")
    cons = write("c.txt", "CARD 0 2\nCARD 1 2\n")
    code, out, _ = run_cli(capsys, ["--points", pts, "--k", "2", "--constraints", cons,
                                    "--oracle"])
    report = json.loads(out)
    assert code == EXIT_OK
    assert report["solve"]["objective"] == pytest.approx(0.01)
    assert report["oracle"]["gap"] == pytest.approx(0.0, abs=1e-9)
    assert report["solve"]["converged"] is True
    assert report["instance"]["cardinalities"] == [2, 2]


def test_infeasible_constraints_exit_2(write, capsys):
    pts = write("p.csv", "0\n0.1\n10\n10.1\n")
    cons = write("c.txt", "ML 0 1\nCL 1 0\n")
    code, out, err = run_cli(capsys, ["--points", pts, "--k", "2", "--constraints", cons])
    assert code == EXIT_INVALID and out == ""
    assert "both must-link and cannot-link" in err


def test_ingestion_error_exit_2(write, capsys):
    pts = write("p.csv", "1,2\n3\n")
    code, _, err = run_cli(capsys, ["--points", pts, "--k", "1"])
    assert code == EXIT_INVALID and "line 2" in err
    code, _, err = run_cli(capsys, ["--points", write("q.csv", "1\n2\n"), "--k", "3"])
    assert code == EXIT_INVALID


def test_non_convergence_exit_3(capsys):
    code, out, _ = run_cli(capsys, ["--gen-blobs", "3,4,2,1.0,3", "--max-iters", "1"])
    assert code == EXIT_NOT_CONVERGED
    assert json.loads(out)["solve"]["converged"] is False


def test_report_deterministic(tmp_path, capsys):
    reports = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        main(["--gen-blobs", "2,4,2,0.3,4", "--seed", "3", "--sweep",
              "seeds=0,1;rhos=0.1,1", "--workers", "2", "--oracle", "--out", str(out)])
        report = json.loads(out.read_text())
        assert report.pop("wall_time") >= 0
        reports.append(report)
    assert reports[0] == reports[1]
    assert [(r["seed"], r["rho"]) for r in reports[0]["sweep"]] == [
        (0, 0.1), (0, 1.0), (1, 0.1), (1, 1.0)]
    assert reports[0]["metrics"]["nmi"] == pytest.approx(1.0)
    capsys.readouterr()


def test_truth_metrics(write, capsys):
    pts = write("p.csv", "0\n0.1\n10\n10.1\n")
    truth = write("t.txt", "1\n1\n0\n0\n")
    code, out, _ = run_cli(capsys, ["--points", pts, "--k", "2", "--truth", truth])
    report = json.loads(out)
    assert report["metrics"] == {"accuracy": 1.0, "nmi": 1.0}


def test_oracle_skipped_when_too_large(capsys):
    code, out, _ = run_cli(capsys, ["--gen-blobs", "3,8,1,0.1,5", "--oracle",
                                    "--oracle-limit", "100"])
    assert "skipped" in json.loads(out)["oracle"]


def test_module_entry_point(write):
    pts = write("p.csv", "0\n0.1\n10\n10.1\n")
    proc = subprocess.run([sys.executable, "-m", "ckmeans", "--points", pts, "--k", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["solve"]["objective"] == pytest.approx(0.01)
