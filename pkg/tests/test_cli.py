import json
import os
import subprocess
import sys

import jsonschema
import pytest

from linhyp.cli import main
from linhyp.core import build, dumps_lh

from conftest import SCHEMA_PATH

with open(SCHEMA_PATH) as fh:
    SCHEMA = json.load(fh)


def _validator(name):
    return jsonschema.Draft202012Validator({**SCHEMA, "$ref": f"#/$defs/{name}"})


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, command, *argv):
    code, out, err = run(capsys, command, *argv, "--output", "json", "--threads", "1")
    assert code == 0, err
    obj = json.loads(out)
    _validator(command).validate(obj)
    jsonschema.validate(obj, SCHEMA)
    return obj


def test_count_both(capsys):
    obj = run_json(capsys, "count", "--n", "5", "--r", "3", "--m", "2", "--method", "both")
    assert obj["exact"] == "15"
    assert isinstance(obj["asym_ln"], float) and obj["error_scale"] > 0


def test_count_exit_codes(capsys):
    code, out, err = run(capsys, "count", "--n", "5", "--r", "3", "--m", "99")
    assert code == 2 and out == "" and "error" in err
    code, _, err = run(capsys, "count", "--n", "5")
    assert code == 2 and "required" in err
    code, _, _ = run(capsys, "frobnicate")
    assert code == 2


def test_prob_linear(capsys):
    obj = run_json(capsys, "prob-linear", "--n", "6", "--r", "3", "--m", "2", "--method", "both")
    assert obj["exact"] == "10/19"
    obj = run_json(capsys, "prob-linear", "--n", "5", "--r", "3", "--p", "1/10", "--method", "both")
    assert obj["truncated"] is False and 0 < obj["exact_float"] < 1
    assert obj["case"] in ("small_m0", "large_m0")
    code, _, _ = run(capsys, "prob-linear", "--n", "5", "--r", "3")
    assert code == 2


def test_contain(capsys):
    obj = run_json(capsys, "contain", "--n", "5", "--r", "3", "--m", "2", "--K", "1,2,3")
    assert obj["exact"] == "1/5" and obj["exact_containing"] == "3"
    code, _, _ = run(capsys, "contain", "--n", "5", "--r", "3", "--m", "2", "--K", "1,2,3;1,2,4")
    assert code == 2


def test_clusters_type2(tmp_path, capsys):
    f = tmp_path / "t2.lh"
    f.write_text(dumps_lh(build(10, 4, [(1, 2, 3, 4), (1, 2, 5, 6), (2, 3, 7, 8)])))
    obj = run_json(capsys, "clusters", "--in", str(f))
    assert obj["profile"]["h2"] == 1
    assert obj["clusters"][0]["kind"] == "Type2"
    g = tmp_path / "bad.lh"
    g.write_text("10 4 1\n1 2 3\n")
    code, _, err = run(capsys, "clusters", "--in", str(g))
    assert code == 2 and "line 2" in err
    code, _, _ = run(capsys, "clusters", "--in", str(tmp_path / "missing.lh"))
    assert code == 2


def test_sample_and_reload(tmp_path, capsys):
    out = tmp_path / "s"
    obj = run_json(capsys, "sample", "--n", "9", "--r", "3", "--m", "3", "--count", "3",
                   "--linear-only", "--out", str(out), "--seed", "4")
    assert len(obj["samples"]) == 3
    for s in obj["samples"]:
        assert s["linear"]
        assert (out / s["file"]).exists()
    again = run_json(capsys, "sample", "--n", "9", "--r", "3", "--m", "3", "--count", "3",
                     "--linear-only", "--out", str(tmp_path / "t"), "--seed", "4")
    assert again == obj
    for s in obj["samples"]:
        assert (out / s["file"]).read_text() == (tmp_path / "t" / s["file"]).read_text()


@pytest.mark.parametrize("extra", [
    ["--what", "linearity", "--m", "4"],
    ["--what", "linearity", "--p", "0.01"],
    ["--what", "profile", "--m", "4"],
    ["--what", "moments", "--p", "0.005"],
    ["--what", "containment", "--m", "4", "--K", "1,2,3"],
])
def test_estimate(capsys, extra):
    obj = run_json(capsys, "estimate", "--n", "20", "--r", "3", "--trials", "3000", *extra)
    assert obj


def test_estimate_figure(tmp_path, capsys):
    png = tmp_path / "e.png"
    run_json(capsys, "estimate", "--n", "20", "--r", "3", "--m", "4", "--trials", "500", "--figure", str(png))
    assert png.stat().st_size > 1000


def test_audit(tmp_path, capsys):
    rep = tmp_path / "a.json"
    obj = run_json(capsys, "audit", "--n", "8", "--r", "3", "--m", "3", "--kind", "4",
                   "--profile", "0,0,0,1", "--report", str(rep))
    assert obj["equal"] and obj["forward_total"] == obj["reverse_total"]
    assert json.loads(rep.read_text()) == obj


def test_golden_matches_committed(tmp_path, capsys):
    from conftest import ROOT

    obj = run_json(capsys, "golden", "--out", str(tmp_path))
    for f in obj["files"]:
        committed = os.path.join(ROOT, "golden", f["file"])
        assert (tmp_path / f["file"]).read_text() == open(committed).read()


def test_verify_quick_writes_report_csv_and_figures(tmp_path, capsys):
    rep = tmp_path / "out" / "report.json"
    rep.parent.mkdir()
    code, out, err = run(capsys, "verify", "--suite", "quick", "--report", str(rep), "--figures", "--threads", "1")
    obj = json.loads(rep.read_text())
    _validator("verify").validate(obj)
    assert code == (0 if obj["passed"] else 1)
    assert "PASS criterion 1" in err
    assert (rep.parent / "report.csv").exists()
    assert (rep.parent / "monotonicity.png").exists() and (rep.parent / "linearity.png").exists()


def test_text_and_csv_outputs(capsys):
    code, out, _ = run(capsys, "count", "--n", "5", "--r", "3", "--m", "2", "--output", "text")
    assert code == 0 and "exact: 15" in out
    code, out, _ = run(capsys, "count", "--n", "5", "--r", "3", "--m", "2", "--output", "csv")
    assert code == 0 and out.startswith("key,value\n") and "exact,15" in out


def test_identical_argv_identical_bytes():
    argv = [sys.executable, "-m", "linhyp.cli", "estimate", "--n", "30", "--r", "3", "--m", "5", "--trials", "2000"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b


def test_console_script_entry_point():
    res = subprocess.run(["linhyp", "count", "--n", "5", "--r", "3", "--m", "2", "--method", "exact"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["exact"] == "15"
