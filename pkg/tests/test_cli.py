import csv
import io
import json

import numpy as np
import pytest

from qbell import belldiag, circulant, cli, documents, families, matcore, witness
from qbell.belldiag import BellProbabilities
from qbell.errors import ConvergenceError


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def gen(tmp_path, capsys, name, *argv):
    path = tmp_path / name
    code, _, err = run(capsys, "gen", *argv, "--out", str(path))
    assert code == 0, err
    return path


def test_gen_bell_round_trip(tmp_path, capsys):
    path = gen(tmp_path, capsys, "b.json", "bell", "--d", "2", "--p", "0.6,0.2,0.1,0.1")
    doc = documents.read_document(str(path))
    assert doc.kind == "bell" and doc.d == 2
    loaded = documents.resolve(doc)
    np.testing.assert_array_equal(loaded.bell.p, [[0.6, 0.2], [0.1, 0.1]])


def test_gen_random_circulant_is_deterministic(tmp_path, capsys):
    _, a, _ = run(capsys, "gen", "random-circulant", "--d", "4", "--seed", "7")
    _, b, _ = run(capsys, "gen", "random-circulant", "--d", "4", "--seed", "7")
    _, c, _ = run(capsys, "gen", "random-circulant", "--d", "4", "--seed", "8")
    assert a == b and a != c
    cs = documents.resolve(documents.loads(a)).circulant
    ref = circulant.random_circulant(4, np.random.default_rng(7))
    np.testing.assert_array_equal(cs.blocks, ref.blocks)


def test_classify_rho_epsilon(tmp_path, capsys):
    path = gen(tmp_path, capsys, "e.json", "family", "epsilon", "--eps", "2")
    code, out, _ = run(capsys, "classify", str(path))
    assert code == 0
    rep = json.loads(out)
    assert rep["ppt_closed_form"] and rep["ppt_oracle"] and rep["psd"]
    assert rep["ccnr_value"] > 1
    values = {r["witness_id"]: r for r in rep["witness_results"]}
    assert values["reduction"]["value"] >= 0
    assert values["choi[1,0,1]"]["detected"]
    assert any("bound entangled" in n for n in rep["notes"])


def test_classify_pure_and_mixed(tmp_path, capsys):
    pure = gen(tmp_path, capsys, "p.json", "bell", "--d", "3", "--p", "1,0,0,0,0,0,0,0,0")
    rep = json.loads(run(capsys, "classify", str(pure))[1])
    assert not rep["ppt_oracle"]
    mixed = gen(tmp_path, capsys, "m.json", "bell", "--d", "3", "--p", ",".join(["0.1111111111111111"] * 8 + ["0.1111111111111112"]))
    rep = json.loads(run(capsys, "classify", str(mixed))[1])
    assert rep["ppt_oracle"] and rep["ccnr_value"] <= 1
    assert not any(r["detected"] for r in rep["witness_results"])


def test_classify_family_notes(tmp_path, capsys):
    path = gen(tmp_path, capsys, "q.json", "family", "product", "--q", "0.5,0.5", "--p", "0.8,0.2")
    rep = json.loads(run(capsys, "classify", str(path))[1])
    assert any("PPT in d=2" in n for n in rep["notes"])


def test_classify_csv_is_deterministic(tmp_path, capsys):
    path = gen(tmp_path, capsys, "r.json", "random-bell", "--d", "3", "--seed", "5")
    _, a, _ = run(capsys, "classify", str(path), "--format", "csv")
    _, b, _ = run(capsys, "classify", str(path), "--format", "csv")
    assert a == b
    rows = list(csv.DictReader(io.StringIO(a)))
    assert len(rows) == 1 and rows[0]["ppt_oracle"] in ("true", "false")
    assert "e" in rows[0]["ccnr_value"]


def test_classify_with_witness_file(tmp_path, capsys):
    w = gen(tmp_path, capsys, "w.json", "witness", "lambda-mu", "--lam", "0.1", "--mu", "0.05")
    state = tmp_path / "g.json"
    state.write_text(documents.bell_document(families.rho_gamma(3, 0.5), {"family": "gamma"}).dumps())
    code, out, _ = run(capsys, "classify", str(state), "--witness", f"file:{w}")
    assert code == 0
    (result,) = json.loads(out)["witness_results"]
    assert result["detected"] and result["value"] == pytest.approx(-1 / 300)


def test_exit_code_on_ppt_mismatch(tmp_path, capsys, monkeypatch):
    path = gen(tmp_path, capsys, "e.json", "family", "epsilon", "--eps", "2")
    monkeypatch.setattr(belldiag, "is_ppt_bell", lambda bp, tol=0: False)
    code, out, err = run(capsys, "classify", str(path))
    assert code == 2 and out == "" and "disagrees" in err


def test_exit_code_on_convergence_failure(tmp_path, capsys, monkeypatch):
    path = gen(tmp_path, capsys, "e.json", "family", "epsilon", "--eps", "2")

    def boom(*args, **kwargs):
        raise ConvergenceError("forced")

    monkeypatch.setattr(matcore, "_jacobi", boom)
    assert run(capsys, "classify", str(path))[0] == 2


def test_usage_errors(tmp_path, capsys, monkeypatch):
    assert run(capsys, "bogus")[0] == 1
    assert run(capsys, "gen", "bell", "--d", "2", "--p", "0.6,0.6,0,0")[0] == 1
    assert run(capsys, "classify", str(tmp_path / "missing.json"))[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "classify", str(bad))[0] == 1
    assert run(capsys, "sweep", "epsilon", "--start", "0", "--stop", "1")[0] == 1
    assert run(capsys, "gen", "bell", "--d", "2", "--p", "1,0,0,0", "--seed", "-1")[0] == 1

    path = gen(tmp_path, capsys, "r.json", "random-bell", "--d", "3")
    monkeypatch.setenv("QBELL_MAX_DIM", "4")
    code, _, err = run(capsys, "classify", str(path))
    assert code == 1 and "QBELL_MAX_DIM" in err


def test_dense_non_circulant_rejected(tmp_path, capsys):
    M = np.eye(4) / 4
    M[0, 1] = M[1, 0] = 0.1
    path = tmp_path / "d.json"
    path.write_text(documents.dense_document(M, 2).dumps())
    code, _, err = run(capsys, "classify", str(path))
    assert code == 1 and "support" in err


def test_dense_circulant_accepted(tmp_path, capsys):
    rho = belldiag.to_dense(BellProbabilities.uniform(2))
    path = tmp_path / "d.json"
    path.write_text(documents.dense_document(rho, 2).dumps())
    code, out, _ = run(capsys, "classify", str(path))
    assert code == 0 and json.loads(out)["ppt_oracle"]


def csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_sweep_epsilon(capsys):
    code, out, _ = run(capsys, "sweep", "epsilon", "--start", "0.1", "--stop", "10", "--num", "50")
    assert code == 0
    rows = csv_rows(out)
    assert len(rows) == 50
    for r in rows:
        eps, ccnr = float(r["eps"]), float(r["ccnr"])
        assert r["ppt"] == "true"
        if abs(np.log(eps)) > 0.1:
            assert ccnr > 1 + 1e-6
        assert ccnr >= 1 - 1e-12


def test_sweep_gamma_sign_change(capsys):
    code, out, _ = run(capsys, "sweep", "gamma", "--start", "0.3", "--stop", "1.0", "--num", "29")
    assert code == 0
    rows = csv_rows(out)
    for r in rows:
        assert (float(r["w_lambda_mu"]) < 0) == (r["in_region"] == "true")
    signs = {float(r["w_lambda_mu"]) < 0 for r in rows}
    assert signs == {True, False}


def test_sweep_choi_grid(capsys):
    code, out, _ = run(capsys, "sweep", "choi", "--start", "0", "--stop", "2", "--num", "5", "--trials", "300", "--format", "json")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert len(rows) == 125
    for r in rows:
        assert r["valid"] == witness.is_choi_ew(r["a"], r["b"], r["c"])
        assert r["min_eigenvalue"] == pytest.approx(min(r["a"] - 2, r["b"], r["c"], r["a"] + 1))
        if r["sampled_block_min"] < -1e-10:
            assert not r["valid"]


def test_sweep_is_byte_identical(capsys):
    args = ("sweep", "choi", "--start", "0", "--stop", "1", "--num", "2", "--trials", "50", "--seed", "3")
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_default_battery():
    assert cli.default_battery(2) == ["reduction", "flip"]
    assert cli.default_battery(3) == ["reduction", "choi:1,1,0", "choi:1,0,1"]
    assert cli.default_battery(5) == ["reduction", "wdk:1", "wdk:2", "wdk:3"]


def test_fmt():
    assert cli.fmt(True) == "true"
    assert cli.fmt(3) == "3"
    assert cli.fmt(0.1) == "1.00000000000000e-01"
