import json

import numpy as np
import pytest
from click.testing import CliRunner

from lassopath.cli import cli, main
from lassopath.serialize import problem_to_dict

from conftest import gaussian_problem


def run(args):
    """Invoke through ``main`` so the exit-code mapping is exercised."""
    import contextlib
    import io
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(args)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def identity_csv(tmp_path):
    f = tmp_path / "id.csv"
    f.write_text("x1,x2,y\n1,0,3\n0,1,1\n")
    return f


@pytest.fixture
def gaussian_json(tmp_path):
    f = tmp_path / "g.json"
    f.write_text(json.dumps(problem_to_dict(gaussian_problem(5, 20, 60))))
    return f


def test_solve_path_identity(identity_csv, tmp_path):
    out = tmp_path / "p.json"
    code, _, _ = run(["solve-path", str(identity_csv), "--out", str(out), "--no-meta"])
    assert code == 0
    doc = json.loads(out.read_text())
    joins = [k for k in doc["kinks"] if k["event"].startswith("Join")]
    assert len(joins) == 2
    assert [k["lambda"] for k in doc["kinks"]] == [3.0, 1.0, 0.0]
    ledger = json.loads((tmp_path / "p.ledger.json").read_text())
    assert ledger["entry_reads"] > 0


def test_solve_path_to_stdout(identity_csv):
    code, out, _ = run(["solve-path", str(identity_csv), "--no-meta"])
    assert code == 0 and json.loads(out)["mode"] == "exact"


def test_malformed_csv_names_row(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("1,2,3\n4,5,6\n7,oops,9\n")
    code, _, err = run(["solve-path", str(f)])
    assert code == 1 and "row 3" in err
    f.write_text("1,2,3\n4,5\n")
    code, _, err = run(["solve-path", str(f)])
    assert code == 1 and "row 2" in err


def test_approx_quantum_pipeline_verifies(gaussian_json, tmp_path):
    out = tmp_path / "q.json"
    code, _, _ = run(["solve-path", str(gaussian_json), "--algo", "approx-quantum", "--epsilon", "0.05",
                      "--seed", "3", "--out", str(out)])
    assert code == 0
    code, stdout, _ = run(["verify", str(out), str(gaussian_json)])
    assert code == 0 and json.loads(stdout)["pass"] is True


def test_verify_exact_and_mutated(gaussian_json, tmp_path):
    out = tmp_path / "e.json"
    assert run(["solve-path", str(gaussian_json), "--out", str(out)])[0] == 0
    code, stdout, _ = run(["verify", str(out), str(gaussian_json), "--epsilon", "0"])
    assert code == 0
    doc = json.loads(out.read_text())
    mid = doc["kinks"][len(doc["kinks"]) // 2]
    mid["beta"] = {k: 0.0 for k in mid["beta"]}
    out.write_text(json.dumps(doc))
    code, stdout, err = run(["verify", str(out), str(gaussian_json), "--epsilon", "0"])
    assert code == 4 and json.loads(stdout)["pass"] is False and "worst lambda" in err


def test_verify_empty_path(gaussian_json, tmp_path):
    f = tmp_path / "empty.json"
    f.write_text(json.dumps({"mode": "exact", "kinks": []}))
    assert run(["verify", str(f), str(gaussian_json)])[0] == 1
    f.write_text("")
    assert run(["verify", str(f), str(gaussian_json)])[0] == 1


def test_degeneracy_exit_code(tmp_path):
    f = tmp_path / "dup.json"
    X = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]])
    f.write_text(json.dumps({"X": X.tolist(), "y": [1.0, 0.5, 2.0]}))
    code, _, err = run(["solve-path", str(f)])
    assert code == 2 and "error" in err


def test_estimate_command(gaussian_json):
    code, out, _ = run(["estimate", str(gaussian_json), "--column", "2", "--kind", "classical",
                        "--epsilon", "0.05", "--no-meta"])
    doc = json.loads(out)
    assert code == 0 and doc["error"] <= doc["bound"] and doc["ledger"]["sample_draws"] > 0
    assert run(["estimate", str(gaussian_json), "--column", "99"])[0] == 1


def test_ensemble_command(tmp_path):
    csv = tmp_path / "t.csv"
    code, out, _ = run(["ensemble", "--experiment", "incoherence", "--n", "1000", "--d", "100",
                        "--trials", "20", "--no-meta", "--csv", str(csv)])
    doc = json.loads(out)
    assert code == 0 and doc["frequency"] >= 0.92 and doc["params"]["A_size"] == 1
    assert len(csv.read_text().splitlines()) == 21
    assert run(["ensemble", "--experiment", "conditioning", "--trials", "0"])[0] == 1


def test_ensemble_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 100, "d": 300, "a-size": 10, "trials": 6, "seed": 4}))
    a = run(["ensemble", "--experiment", "conditioning", "--config", str(cfg), "--no-meta"])
    b = run(["ensemble", "--experiment", "conditioning", "--config", str(cfg), "--no-meta"])
    assert a[0] == 0 and a[1] == b[1]
    doc = json.loads(a[1])
    assert doc["trials"] == 6 and doc["params"]["A_size"] == 10


def test_rates_command():
    code, out, _ = run(["rates", "--kind", "fast", "--trials", "3", "--no-meta"])
    assert code == 0 and json.loads(out)["successes"] == 3
    assert run(["rates", "--kind", "fast", "--epsilon", "0.3", "--trials", "2"])[0] == 1


def test_no_meta_outputs_are_byte_identical(gaussian_json, tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        assert run(["solve-path", str(gaussian_json), "--algo", "approx-classical", "--seed", "1",
                    "--no-meta", "--out", str(out)])[0] == 0
        outs.append((out.read_bytes(), (tmp_path / f"r{k}.ledger.json").read_bytes()))
    assert outs[0] == outs[1]


def test_meta_block_present(identity_csv):
    _, out, _ = run(["solve-path", str(identity_csv)])
    assert "created" in json.loads(out)["meta"]


def test_usage_errors_exit_one(identity_csv):
    assert run(["solve-path", str(identity_csv), "--algo", "nope"])[0] == 1
    assert run(["no-such-command"])[0] == 1
    assert run(["--help"])[0] == 0


def test_log_level_env(identity_csv, monkeypatch):
    monkeypatch.setenv("LARS_PATH_LOG", "DEBUG")
    result = CliRunner().invoke(cli, ["solve-path", str(identity_csv), "--no-meta"])
    assert result.exit_code == 0
