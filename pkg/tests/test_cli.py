import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from buildinglab import harmonic, samples
from buildinglab.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_geometry_then_spectrum(tmp_path, capsys):
    graph = tmp_path / "pg2.json"
    code, out, _ = run(capsys, "geometry", "--kind", "pg", "--q", 2, "--out", graph)
    assert code == 0 and json.loads(out)["validation"]["passed"]
    code, out, _ = run(capsys, "spectrum", "--graph", graph)
    rep = json.loads(out)
    assert code == 0
    assert abs(rep["lambda1"] - (3 - math.sqrt(2))) < 1e-9
    assert len(rep["distinct_eigenvalues"]) == 4


def test_geometry_to_stdout(capsys):
    code, out, _ = run(capsys, "geometry", "--kind", "bipartite", "--q", 2)
    assert code == 0 and len(json.loads(out)["edges"]) == 9


def test_gap_threshold_warning(capsys):
    code, out, _ = run(capsys, "gap", "--kind", "sp4-special", "--q", 2)
    rep = json.loads(out)
    assert code == 0 and rep["margin_sign"] == 0 and "threshold" in rep["warning"]
    code, out, _ = run(capsys, "gap", "--kind", "sl3", "--q", 3, "--backend", "python")
    rep = json.loads(out)
    assert code == 0 and rep["margin_sign"] == 1 and rep["warning"] is None


def test_csv_format(capsys):
    code, out, _ = run(capsys, "gap", "--kind", "sp4-nonspecial", "--q", 3, "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "key,value"
    rows = dict(l.split(",", 1) for l in lines[1:])
    assert abs(float(rows["lambda1"]) - 4.0) < 1e-9 and rows["passed"] == "True"


def test_harmonic_runs(tmp_path, capsys):
    report = tmp_path / "r.json"
    code, out, _ = run(capsys, "harmonic", "--complex", CONFIGS / "tetrahedron.json", "--seed", 4, "--report", report)
    rep = json.loads(out)
    assert code == 0 and rep["status"] == "Converged"
    assert report.read_text() == out
    code, out, _ = run(capsys, "harmonic", "--complex", CONFIGS / "torus.json", "--init", CONFIGS / "torus_map.json")
    assert code == 0


def test_harmonic_diverging_exit_code(tmp_path, capsys):
    path = tmp_path / "drift.json"
    path.write_text(json.dumps(harmonic.complex_to_json_obj(samples.translation_with_parabolic())))
    code, out, _ = run(capsys, "harmonic", "--complex", path, "--seed", 0, "--radius", 1.5, "--max-iter", 100000)
    assert code == 1 and json.loads(out)["status"] == "Diverging"


def test_chain(capsys):
    args = ["chain", "--complex", CONFIGS / "torus.json", "--map", CONFIGS / "torus_map.json"]
    code, out, _ = run(capsys, *args, "--lambda-table", CONFIGS / "lambda_torus.json")
    assert code == 0 and json.loads(out)["passed"]


def test_chain_failure(tmp_path, capsys):
    table = tmp_path / "lam.json"
    table.write_text('{"generic": 3.0}')
    code, out, _ = run(
        capsys, "chain", "--complex", CONFIGS / "torus.json", "--map", CONFIGS / "torus_map.json", "--lambda-table", table
    )
    assert code == 1 and json.loads(out)["poincare_holds"] is False


def test_parabolic_and_apartment(capsys):
    code, out, _ = run(capsys, "parabolic", "--field", "h", "--q", 1, "--p", 2, "--n3", 4, "--trials", 3, "--seed", 1)
    rep = json.loads(out)
    assert code == 0 and rep["field"] == "H" and rep["failed"] == []
    code, out, _ = run(capsys, "apartment", "--p", 3, "--samples", 100)
    rep = json.loads(out)
    assert code == 0 and rep["n_simplices"] == 48 and rep["cover"]["covered"] == 100


@pytest.mark.parametrize(
    "argv",
    [
        ["harmonic", "--complex", str(CONFIGS / "tetrahedron.json")],  # no seed, no init
        ["parabolic", "--field", "r", "--q", "1", "--p", "1"],  # seed required
        ["apartment", "--p", "8"],
        ["gap", "--kind", "sl3", "--q", "6"],
        ["spectrum", "--graph", "/nonexistent/graph.json"],
        ["harmonic", "--complex", str(CONFIGS / "tetrahedron.json"), "--seed", "1", "--tol", "-1"],
        ["bogus"],
    ],
)
def test_usage_errors(argv, capsys):
    code = main(argv)
    assert code == 2
    assert capsys.readouterr().err


def test_bad_json_and_same_paths(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    code, _, err = run(capsys, "spectrum", "--graph", bad)
    assert code == 2 and "JSON" in err
    code, _, err = run(capsys, "spectrum", "--graph", CONFIGS / "torus.json", "--report", CONFIGS / "torus.json")
    assert code == 2 and "distinct" in err


def test_byte_identical_reruns(tmp_path):
    outs = []
    for i in range(2):
        report = tmp_path / f"run{i}.json"
        subprocess.run(
            [sys.executable, "-m", "buildinglab", "harmonic", "--complex", str(CONFIGS / "octahedron_hyperbolic.json"),
             "--seed", "11", "--report", str(report)],
            check=True,
            capture_output=True,
        )
        outs.append(report.read_bytes())
    assert outs[0] == outs[1]
