import json
import subprocess
import sys

import pytest

from difmod.cli import SCHEMA, OutputDocument, main, render, run
from difmod.dsl import parse


def cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


EX37 = "system ex37 vars x1 x2 unknowns u v eq d[2,2](u) - d[2,2](v) = 0 eq d[1,2](u) - u = 0\n"


def test_cc_builtin(capsys):
    code, out, _ = cli(capsys, "cc", "--builtin", "ex37")
    assert code == 0
    assert "d[1,2](u) - d[2,2](v) - u = 0" in out


def test_cc_from_file_and_stdin(tmp_path, capsys, monkeypatch):
    src = "system g vars x1 x2 unknowns f eq d[1](f) = 0 eq d[2](f) = 0\n"
    f = tmp_path / "g.sys"
    f.write_text(src)
    code, out_file, _ = cli(capsys, "cc", str(f))
    assert code == 0 and "d[2](v1) - d[1](v2) = 0" in out_file
    import io

    monkeypatch.setattr(sys, "stdin", io.StringIO(src))
    code, out_stdin, _ = cli(capsys, "cc", "-")
    assert code == 0 and out_stdin == out_file


def test_paramtest_texts(capsys):
    code, out, _ = cli(capsys, "paramtest", "--builtin", "cauchy2")
    assert code == 0
    assert "TORSION-FREE; parametrization: 3 equations in 1 potential" in out
    assert "s11 = d[2,2](phi1)" in out and "s12 = -d[1,2](phi1)" in out and "s22 = d[1,1](phi1)" in out
    code, out, _ = cli(capsys, "paramtest", "--builtin", "ex310")
    assert code == 0 and "TORSION; 1 torsion generator\n" in out
    assert "d[1](z)" in out and "d[2](z)" in out


def test_dims_text(capsys):
    code, out, _ = cli(capsys, "dims", "--builtin", "killing2")
    assert code == 0
    for triple in ("(3, 6, 3)", "(12, 16, 6)", "(9, 10, 3)"):
        assert triple in out


def test_json_round_trip(capsys):
    code, out, _ = cli(capsys, "paramtest", "--builtin", "ex310", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["schema"] == SCHEMA and data["verdict"] == "has_torsion"
    doc = OutputDocument.from_dict(data)
    assert json.loads(render(doc, "json")) == data
    assert doc.to_dict() == data


def test_json_schema_mismatch():
    with pytest.raises(ValueError):
        OutputDocument.from_dict({"schema": "0", "command": "cc"})


def test_deterministic_output(capsys):
    outs = {cli(capsys, "dims", "--builtin", "killing2", "--seed", "7", "--json")[1] for _ in range(2)}
    assert len(outs) == 1
    outs = {cli(capsys, "torsion", "--builtin", "ex310")[1] for _ in range(2)}
    assert len(outs) == 1


def test_exit_codes(capsys, tmp_path):
    assert cli(capsys, "cc", "--builtin", "nope")[0] == 2
    bad = tmp_path / "bad.sys"
    bad.write_text("system a vars x1 unknowns y eq d[2](y) = 0\n")
    code, _, err = cli(capsys, "cc", str(bad))
    assert code == 2 and "line 1" in err
    assert cli(capsys, "cc", str(tmp_path / "missing.sys"))[0] == 2
    # completion cap exceeded is a computation failure
    assert cli(capsys, "involutive", "--builtin", "killing2", "--cap", "0")[0] == 1


def test_kalman_commands(capsys):
    code, out, _ = cli(capsys, "kalman", "--builtin", "kalman-demo", "--json")
    assert code == 0 and json.loads(out)["verdict"] == "controllable"
    code, out, _ = cli(capsys, "kalman", "--builtin", "kalman-equal", "--json")
    assert json.loads(out)["verdict"] == "not_controllable"
    code, out, _ = cli(capsys, "kalman", "--A", "[[0,1],[0,0]]", "--B", "[[0],[1]]", "--json")
    assert json.loads(out)["verdict"] == "controllable"
    code, out, _ = cli(capsys, "kalman", "--builtin", "pendulum")
    assert code == 0 and "generically" in out


def test_geometry_and_vessiot(capsys):
    code, out, _ = cli(capsys, "vessiot", "contact", "--json")
    assert code == 0
    consts = [s["constants"]["c"] for s in json.loads(out)["values"]["structures"]]
    assert consts == ["1", "0"]
    code, out, _ = cli(capsys, "geometry", "contact", "--json")
    data = json.loads(out)
    assert code == 0 and data["values"]["symbol classes"] == {"class 3": 2, "class 2": 1}
    assert data["values"]["compatibility conditions"] == 1
    code, out, _ = cli(capsys, "geometry", "einstein", "--json")
    assert code == 0 and all(json.loads(out)["certificates"].values())
    assert cli(capsys, "geometry", "killing")[0] == 2


def test_verify_param_with_candidate_file(tmp_path, capsys):
    cand = tmp_path / "airy.sys"
    cand.write_text("system airy vars x1 x2 unknowns phi eq d[2,2](phi) = 0 eq -d[1,2](phi) = 0 eq d[1,1](phi) = 0\n")
    code, out, _ = cli(capsys, "verify-param", "--builtin", "cauchy2", "--candidate", str(cand), "--json")
    assert code == 0
    data = json.loads(out)
    assert data["certificates"] and all(data["certificates"].values())


def test_run_api_document():
    doc = run("cc", parse(EX37))
    assert doc.command == "cc" and doc.system == "ex37"
    assert any("d[1,2](u)" in e for m in doc.matrices.values() for e in m)


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "difmod", "adjoint", "--builtin", "ex310"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout
