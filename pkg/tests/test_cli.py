import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from qroe import cli

MANIFESTS = Path(__file__).resolve().parent.parent / "manifests"


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr().out
    return code, json.loads(out)


def write(tmp_path, obj, name="m.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(p)


def test_algebra_blocks(capsys):
    code, rep = run(["algebra", "--in", str(MANIFESTS / "algebra_blocks.json")], capsys)
    assert code == 0 and rep["version"] == "1" and rep["exit_code"] == 0
    assert "wall_time" not in rep


def test_structure_query(capsys):
    code, rep = run(["structure", "--in", str(MANIFESTS / "structure_path4_query.json")], capsys)
    assert code == 0 and rep["result"]["membership"] == "Yes(2)"


def test_qura_path(capsys):
    code, rep = run(["qura", "--in", str(MANIFESTS / "qura_path4.json")], capsys)
    assert code == 0 and rep["result"]["roe_dim"] == 16 and rep["result"]["connected"]


def test_suppexp_transpose_refuted(capsys):
    code, rep = run(["suppexp", "--in", str(MANIFESTS / "suppexp_transpose.json")], capsys)
    assert code == 1
    wit = rep["result"]["witness"]
    assert abs(wit["ratio"] - 2) < 1e-9


def test_suppexp_inconclusive_exit_code(tmp_path, capsys):
    man = {"version": "1", "algebra": {"standard_form": 2}, "operator": "transpose", "lambda": 2}
    code, rep = run(["suppexp", "--in", write(tmp_path, man), "--samples", "50"], capsys)
    assert code == 2 and rep["result"]["status"] == "inconclusive"


def test_morph_and_asydim_manifests(capsys):
    code, rep = run(["morph", "--in", str(MANIFESTS / "morph_collapse.json")], capsys)
    assert code == 0
    code, rep = run(["asydim", "--in", str(MANIFESTS / "asydim_interval.json")], capsys)
    assert code == 0 and rep["result"]["accepted"]
    code, rep = run(["asydim", "--in", str(MANIFESTS / "asydim_search.json")], capsys)
    assert code == 0 and rep["result"]["found"]


def test_output_is_deterministic(capsys):
    args = ["suppexp", "--in", str(MANIFESTS / "suppexp_transpose.json"), "--seed", "5"]
    cli.main(args)
    a = capsys.readouterr().out
    cli.main(args)
    b = capsys.readouterr().out
    assert a == b


def test_timing_flag_adds_wall_time(capsys):
    code, rep = run(["algebra", "--in", str(MANIFESTS / "algebra_blocks.json"), "--timing"], capsys)
    assert rep["wall_time"] >= 0


def test_env_tolerance_and_flag_precedence(capsys, monkeypatch):
    monkeypatch.setenv("QROE_DEFAULT_TOL", "1e-7")
    _, rep = run(["algebra", "--in", str(MANIFESTS / "algebra_blocks.json")], capsys)
    assert rep["tol"] == 1e-7
    _, rep = run(["algebra", "--in", str(MANIFESTS / "algebra_blocks.json"), "--tol", "1e-8"], capsys)
    assert rep["tol"] == 1e-8
    monkeypatch.setenv("QROE_DEFAULT_TOL", "nope")
    code, rep = run(["algebra", "--in", str(MANIFESTS / "algebra_blocks.json")], capsys)
    assert code == 3 and rep["error"]["path"] == "$env.QROE_DEFAULT_TOL"


@pytest.mark.parametrize("text,path", [
    ("{not json", "$ (line 1"),
    ('{"algebra": {"diagonal": 2}}', "$.version"),
    ("[1, 2]", "$"),
])
def test_malformed_manifests(tmp_path, capsys, text, path):
    code, rep = run(["algebra", "--in", write(tmp_path, text)], capsys)
    assert code == 3 and rep["error"]["path"].startswith(path)


def test_bad_field_reports_path(tmp_path, capsys):
    code, rep = run(["algebra", "--in", write(tmp_path, {"version": "1", "algebra": {"diagonal": "x"}})], capsys)
    assert code == 3 and rep["error"]["path"].startswith("$.algebra")


def test_qura_refusal(tmp_path, capsys):
    man = {"version": "1", "algebra": {"diagonal": 2}, "subalgebra": {"generators": [[[1, 1], [1, 1]]], "dim": 2}}
    code, rep = run(["qura", "--in", write(tmp_path, man)], capsys)
    assert code == 1 and "certificate" in rep["result"]


def test_out_file(tmp_path):
    out = tmp_path / "r.json"
    code = cli.main(["algebra", "--in", str(MANIFESTS / "algebra_blocks.json"), "--out", str(out)])
    assert code == 0 and json.loads(out.read_text())["exit_code"] == 0


def test_suite_passes_and_fails_with_loose_tol(capsys):
    code, rep = run(["suite"], capsys)
    assert code == 0 and rep["result"]["all_pass"]
    code, rep = run(["suite", "--tol", "0.1"], capsys)
    assert code == 1 and not rep["result"]["fixtures"]["orthonormal_basis_sensitivity"]["pass"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qroe.cli", "algebra", "--in", str(MANIFESTS / "algebra_blocks.json")],
                          capture_output=True, text=True, env=dict(os.environ))
    assert proc.returncode == 0 and json.loads(proc.stdout)["command"] == "algebra"


@pytest.mark.parametrize("algebra,key,value", [
    ({"blocks": [[1, 1], [1, 1], [1, 1]]}, "commutant_dim", 3),
    ({"blocks": [[2, 2]]}, "commutant_dim", 4),
    ({"generators": [[[0, 1], [0, 0]]]}, "dim", 4),
])
def test_algebra_dimensions(tmp_path, capsys, algebra, key, value):
    code, rep = run(["algebra", "--in", write(tmp_path, {"version": "1", "algebra": algebra})], capsys)
    assert code == 0 and rep["result"][key] == value


def test_structure_manifest_aliases(tmp_path, capsys):
    man = {"version": "1", "algebra": {"diagonal": 3}, "max_depth": 8,
           "generators": [{"classical": {"n": 3, "pairs": [[0, 1]]}}, {"seed_matrices": [[[0, 0, 0], [0, 0, 1], [0, 0, 0]]]}]}
    code, rep = run(["structure", "--in", write(tmp_path, man)], capsys)
    assert code == 0 and rep["result"]["max_depth"] == 8 and rep["result"]["ladder_dims"][-1] == 9
    man["generators"][0]["classical"]["n"] = 4
    code, rep = run(["structure", "--in", write(tmp_path, man)], capsys)
    assert code == 3 and rep["error"]["path"] == "$.generators[0].classical.n"


def test_exact_results_do_not_depend_on_seed(capsys):
    args = ["qura", "--in", str(MANIFESTS / "qura_path4.json")]
    _, a = run(args + ["--seed", "0"], capsys)
    _, b = run(args + ["--seed", "7"], capsys)
    assert a["result"] == b["result"]


def test_asydim_explicit_bound(tmp_path, capsys):
    man = json.loads((MANIFESTS / "asydim_interval.json").read_text())
    man["bound"] = {"band": 1}
    code, rep = run(["asydim", "--in", write(tmp_path, man)], capsys)
    assert code == 1 and not rep["result"]["accepted"]
    man["bound"] = {"band": 4}
    code, rep = run(["asydim", "--in", write(tmp_path, man)], capsys)
    assert code == 0 and rep["result"]["accepted"]
