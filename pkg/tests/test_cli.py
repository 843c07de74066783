import json
from pathlib import Path

import numpy as np
import pytest

from cyclotoda.cli import main
from cyclotoda.io import dumps, read_grid_csv, sha256_file


def put(path: Path, obj) -> str:
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def files(tmp_path):
    return {
        "qpole": put(tmp_path / "qpole.json", {"rank": 2, "puncture": "zero", "frame": "dz_over_z",
                                               "terms": [{"poly": [[1, 1, 1.0, 0.0]], "exp_arg": []}]}),
        "qexp": put(tmp_path / "qexp.json", {"rank": 2, "puncture": "infinity", "frame": "dz",
                                             "terms": [{"poly": [[0, 1, 1.0, 0.0]],
                                                        "exp_arg": [[1, 1, 0.0, 1.0]]}]}),
        "qcos": put(tmp_path / "qcos.json", {"rank": 3, "puncture": "infinity", "frame": "dz",
                                             "terms": [{"poly": [[0, 1, 0.5, 0.0]],
                                                        "exp_arg": [[1, 1, 0.0, 1.0]]},
                                                       {"poly": [[0, 1, 0.5, 0.0]],
                                                        "exp_arg": [[1, 1, 0.0, -1.0]]}]}),
        "airy": put(tmp_path / "airy.json", {"preset": "airy"}),
        "grid": put(tmp_path / "grid.json", {"chart": "log_polar",
                                             "ranges": [0.001, 0.1, 0, 6.283185307179586],
                                             "nodes": [48, 16], "radii": True}),
        "flat": put(tmp_path / "flat.json", {"kind": "flat"}),
        "wb": put(tmp_path / "wb.json", {"kind": "b", "values": ["-1", "-2"]}),
        "f": put(tmp_path / "f.json", {"c": [0, 1], "a": [[1, 0], [1, 0]],
                                       "window": [0, 31.41592653589793]}),
    }


def run(*args) -> int:
    return main([str(a) for a in args] + ["--quiet"])


def load(path) -> dict:
    return json.loads(Path(path).read_text())


def test_classify(files, tmp_path):
    for key, kinds in (("qexp", ["P"]), ("qcos", ["unique"]), ("airy", ["P"]), ("qpole", ["P_QP"])):
        out = tmp_path / key
        assert run("classify", files[key], "--out", out) == 0
        d = load(out / "classify.json")
        assert [f["kind"] for f in d["moduli"]["factors"]] == kinds
        assert (out / "manifest.json").exists()


def test_solve_flat_and_extract(files, tmp_path):
    out = tmp_path / "s"
    assert run("solve", files["qpole"], files["grid"], "--weights", files["flat"], "--out", out) == 0
    rep = load(out / "report.json")
    assert rep["max_residual"] <= 1e-10
    state = read_grid_csv(out / "solution.csv")
    assert state.w.shape == (2, 48, 16)
    ex = tmp_path / "e"
    assert run("extract", out / "solution.csv", files["qpole"], "--out", ex) == 0
    fit = load(ex / "weights.json")
    assert np.allclose(fit["values"], [-1.25, -1.75], atol=1e-6) and fit["k"] == [0, 0]


def test_solve_is_deterministic(files, tmp_path):
    hashes = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert run("solve", files["qpole"], files["grid"], "--weights", files["wb"],
                   "--out", out, "--seed", 5) == 0
        hashes.append((sha256_file(out / "solution.csv"), sha256_file(out / "report.json"),
                       load(out / "manifest.json")["run_id"]))
    assert hashes[0] == hashes[1]


def test_grid_override(files, tmp_path):
    out = tmp_path / "g"
    assert run("solve", files["qpole"], files["grid"], "--weights", files["flat"], "--grid", "24x8",
               "--out", out) == 0
    assert read_grid_csv(out / "solution.csv").w.shape == (2, 24, 8)


def test_zeros(files, tmp_path):
    assert run("zeros", files["f"], "--out", tmp_path) == 0
    d = load(tmp_path / "zeros.json")
    assert d["count"] == 5 and d["pass"] is True


def test_malformed_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"rank": 2,\n "puncture": }')
    assert run("classify", bad, "--out", tmp_path) == 2


def test_bad_grid_flag(files, tmp_path):
    assert run("solve", files["qpole"], files["grid"], "--weights", files["flat"], "--grid", "nope",
               "--out", tmp_path) == 2


def test_verify_zeros_suite(tmp_path):
    assert run("verify", "zeros", "--out", tmp_path, "--seed", 1) == 0
    d = load(tmp_path / "verify_zeros.json")
    assert d["pass"] is True and [c["number"] for c in d["criteria"]] == [9]


def test_canonical_json():
    from fractions import Fraction
    text = dumps({"b": Fraction(-3, 2), "a": float("inf"), "c": np.float64(1.5)})
    assert text == dumps({"c": 1.5, "a": float("inf"), "b": Fraction(-3, 2)})
    assert json.loads(text) == {"a": "inf", "b": "-3/2", "c": 1.5}
