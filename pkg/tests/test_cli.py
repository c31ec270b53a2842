import csv
import json

import numpy as np
import pytest

from cliffspec import spectrum as sp
from cliffspec.cli import main


def run(*args):
    return main([str(a) for a in args])


def load(path):
    return json.loads(path.read_text())


def test_spectrum_pauli(tmp_path):
    out = tmp_path / "spec.json"
    assert run("spectrum", "--example", "pauli", "--out", out) == 0
    doc = load(out)
    assert sorted(p["k"] for p in doc["points"]) == [0, 1]
    assert all(abs(complex(*p["u"])) < 1e-10 for p in doc["points"])
    assert doc["meta"]["version"] and doc["meta"]["seed"] == 0
    assert "rank_tol" in doc["meta"]["tolerances"]


def test_spectrum_figure_and_svg(tmp_path):
    out, svg = tmp_path / "spec.json", tmp_path / "spec.svg"
    assert run("spectrum", "--example", "fig1", "--out", out, "--svg", svg) == 0
    S = sp.JointSpectrum.from_json(load(out))
    assert len(S) == 10 and sorted(S.heights().values()) == [1, 2, 3, 4]
    assert svg.read_text().lstrip().startswith("<?xml")


def test_outputs_are_deterministic(tmp_path):
    files = []
    for tag in "ab":
        out, svg = tmp_path / f"{tag}.json", tmp_path / f"{tag}.svg"
        run("spectrum", "--example", "fig1", "--out", out, "--svg", svg)
        files.append((out.read_bytes(), svg.read_bytes()))
    assert files[0] == files[1]


def test_matrix_file_round_trip(tmp_path):
    P = sp.pauli_pair()
    mats = tmp_path / "a.json"
    mats.write_text(json.dumps({"n": 2, "d": 2, "A": [m.tolist() for m in P.mats]}))
    out = tmp_path / "spec.json"
    assert run("spectrum", "--matrices", mats, "--out", out) == 0
    assert len(load(out)["points"]) == 2


def test_malformed_input(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("spectrum", "--matrices", bad) == 1
    bad.write_text(json.dumps({"n": 2, "d": 3, "A": [[[1.0]], [[0.0]]]}))
    assert run("spectrum", "--matrices", bad) == 1
    assert run("spectrum") == 1


def test_ambiguity_exit_code(tmp_path):
    mats = tmp_path / "a.json"
    mats.write_text(json.dumps({"n": 2, "d": 2, "A": [[[0.0, 1.0], [0.0, 1e-5]], [[0.0, 0.0], [0.0, 0.0]]]}))
    out = tmp_path / "spec.json"
    code = run("spectrum", "--matrices", mats, "--out", out, "--cluster-tol", 1e-4, "--rank-tol", 1e-12)
    assert code == 2
    assert load(out)["error"] == "ambiguity"


def test_specmap_identity_verify(tmp_path):
    spec, out = tmp_path / "spec.json", tmp_path / "mapped.json"
    run("spectrum", "--example", "fig1", "--out", spec)
    assert run("specmap", "--spectrum", spec, "--phi", "identity", "--verify", "fig1", "--out", out) == 0
    v = load(out)["verify"]
    assert v["passed"] and v["max_distance"] < 1e-12


def test_specmap_figure_map(tmp_path):
    spec, out, svg = tmp_path / "spec.json", tmp_path / "mapped.json", tmp_path / "pair.svg"
    run("spectrum", "--example", "fig1", "--out", spec)
    assert run("specmap", "--spectrum", spec, "--phi", "fig1", "--verify", "fig1", "--out", out, "--svg", svg) == 0
    doc = load(out)
    assert doc["verify"]["passed"]
    assert sorted(tuple(b["sizes"]) for b in doc["blocks"]) == [(1,), (1, 1), (2, 1, 1), (3,)]
    assert doc["warnings"]


def test_specmap_verify_with_matrix_file(tmp_path):
    M = sp.fig1_matrix()
    mats = tmp_path / "a.json"
    mats.write_text(json.dumps({"n": 2, "d": 10, "A": [M.real.tolist(), M.imag.tolist()]}))
    spec, out = tmp_path / "spec.json", tmp_path / "mapped.json"
    run("spectrum", "--matrices", mats, "--out", spec)
    assert run("specmap", "--spectrum", spec, "--phi", "disk:0.2,-0.1,0.5", "--verify", mats, "--out", out) == 0


def test_specmap_constant_map(tmp_path):
    spec = tmp_path / "spec.json"
    run("spectrum", "--example", "pauli", "--out", spec)
    assert run("specmap", "--spectrum", spec, "--phi", "poly:0.5", "--out", tmp_path / "m.json") == 3


def test_resolvent_grid(tmp_path):
    out = tmp_path / "grid.csv"
    assert run("resolvent", "--example", "pauli", "--grid", 101, "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# cliffspec") and "seed=0" in lines[0]
    rows = list(csv.DictReader(lines[1:]))
    holes = [(float(r["u1"]), float(r["u2"])) for r in rows if r["member"] == "0"]
    assert holes == [(0.0, 0.0)]


def test_resolvent_rejects_nonsymmetric(tmp_path):
    mats = tmp_path / "a.json"
    mats.write_text(json.dumps({"n": 2, "d": 2, "A": [[[0.0, 1.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]}))
    assert run("resolvent", "--matrices", mats) == 1


def test_cauchy_power(tmp_path):
    out = tmp_path / "c.json"
    assert run("cauchy", "--dim", 2, "--fn", "z^3", "--point", "0.3,0.4", "--out", out) == 0
    z = complex(*load(out)["complex"])
    assert abs(z - (0.3 + 0.4j) ** 3) < 1e-8


def test_cauchy_n3_basis(tmp_path):
    out = tmp_path / "c.json"
    assert run("cauchy", "--dim", 3, "--fn", "V:0,1,0", "--point", "0.1,0.2,-0.1", "--out", out) == 0
    doc = load(out)
    for k, v in doc["exact"].items():
        assert doc["value"].get(k, 0.0) == pytest.approx(v, abs=1e-4)


def test_cauchy_bad_point():
    assert run("cauchy", "--dim", 2, "--fn", "z^2", "--point", "0.1") == 1
    assert run("cauchy", "--dim", 2, "--fn", "z^2", "--point", "0.999,0") == 1


def test_moeb_commands(tmp_path):
    g = '{"u": [0.3, 0.1], "w": {"1": 1.0}}'
    out = tmp_path / "o.json"
    assert run("moeb", "inv", "--g", g, "--out", out) == 0
    assert np.allclose(load(out)["u"], [-0.3, -0.1])
    assert run("moeb", "apply", "--g", g, "--x", "0.3,0.1", "--out", out) == 0
    assert np.allclose(load(out)["y"], 0.0)
    assert run("moeb", "compose", "--g", g, "--h", '{"u": [-0.3, -0.1]}', "--out", out) == 0
    assert np.allclose(load(out)["u"], 0.0)
    assert run("moeb", "apply", "--g", '{"u": [1.2, 0.0]}', "--x", "0,0") == 1


def test_check_suite(tmp_path, capsys):
    out = tmp_path / "check.json"
    assert run("check", "--suite", "clifford", "--seed", 7, "--out", out) == 0
    assert "PASS" in capsys.readouterr().out
    first = out.read_bytes()
    run("check", "--suite", "clifford", "--seed", 7, "--out", out)
    assert out.read_bytes() == first
    assert load(out)["meta"]["seed"] == 7


def test_check_all():
    assert run("check", "--suite", "all", "--seed", 7) == 0
