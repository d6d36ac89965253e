import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from pslab.cli import dispatch
from pslab.schemas import SCHEMAS

DATA = Path(__file__).parent / "data"
EXAMPLE = str(DATA / "example1.json")
CYCLE = str(DATA / "cycle.json")


def run_json(capsys, schema, *argv):
    code = dispatch([*argv, "--output", "json"])
    doc = json.loads(capsys.readouterr().out)
    jsonschema.validate(doc, SCHEMAS[schema])
    return code, doc


def test_ps_json(capsys):
    code, doc = run_json(capsys, "ps", "ps", "--instance", EXAMPLE, "--trace")
    assert code == 0
    assert doc["assignment"] == [["3/4", "0", "1/4"], ["1/4", "1/2", "1/4"], ["0", "1/2", "1/2"]]
    assert [e["t"] for e in doc["trace"]] == ["1/2", "3/4", "1"]


def test_ps_human_with_approx(capsys):
    assert dispatch(["ps", "--instance", EXAMPLE, "--approx"]) == 0
    out = capsys.readouterr().out
    assert "3/4" in out and "0.7500" in out


def test_best_response(capsys):
    code, doc = run_json(capsys, "best-response", "best-response", "--instance", EXAMPLE, "--agent", "1")
    assert code == 0 and doc["improves"] and doc["order"] == [1, 0, 2] and doc["value"] == "11/2"


def test_verify(capsys):
    code, doc = run_json(capsys, "verify", "verify", "--instance", EXAMPLE, "--relation", "dl")
    assert doc["is_pne"] and doc["witness"] is None
    code, doc = run_json(capsys, "verify", "verify", "--instance", EXAMPLE)
    assert not doc["is_pne"] and doc["witness"]["agent"] == 1


def test_dynamics(capsys):
    code, doc = run_json(capsys, "dynamics", "dynamics", "--instance", CYCLE)
    assert code == 0 and doc["terminal"] == "cycle" and doc["period"] == 4


def test_enumerate(capsys):
    code, doc = run_json(capsys, "enumerate", "enumerate", "--instance", EXAMPLE)
    assert code == 0 and doc["profiles"] == 216 and doc["equilibria"]


def test_enumerate_csv(capsys):
    assert dispatch(["enumerate", "--instance", EXAMPLE, "--output", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "profile_id,is_pne,sw,class" and len(lines) == 217


def test_spne(capsys):
    code, doc = run_json(capsys, "spne", "spne", "--instance", str(DATA / "threat.json"))
    assert code == 0 and doc["quantum"] == "1/4"


def test_threat(capsys):
    code, doc = run_json(capsys, "threat", "threat", "--instance", str(DATA / "threat.json"), "--check", "--seed", "5")
    assert code == 0 and doc["check"]["falsified"] == []


def test_selfcheck(capsys):
    code, doc = run_json(capsys, "selfcheck", "selfcheck")
    assert code == 0 and doc["ok"] and len(doc["checks"]) == 6


def test_gen_and_import(tmp_path, capsys):
    assert dispatch(["gen", "--model", "Mallows", "--n", "3", "--m", "4", "--seed", "1", "--count", "2",
                     "--utilities", "--out", str(tmp_path / "gen")]) == 0
    files = sorted((tmp_path / "gen").iterdir())
    assert len(files) == 2 and "utilities" in json.loads(files[0].read_text())
    assert dispatch(["import", str(DATA / "legacy_ed09.soc"), "--legacy"]) == 0
    assert "7 alternatives, 10 voters" in capsys.readouterr().out
    assert dispatch(["import", str(DATA / "fixture.soc"), "--n", "3", "--m", "2", "--seed", "7",
                     "--out", str(tmp_path / "imp")]) == 0
    [f] = (tmp_path / "imp").iterdir()
    assert json.loads(f.read_text())["preferences"] == [[1, 0], [1, 0], [1, 0]]


def test_experiment(tmp_path, capsys):
    cfg = tmp_path / "grid.txt"
    cfg.write_text("IC,2,3,10\nSP-IC,2,3,5\n")
    assert dispatch(["experiment", "--config", str(cfg), "--out", str(tmp_path), "--seed", "42", "--jobs", "1"]) == 0
    for name in ("classification.csv", "extremes.csv"):
        assert (tmp_path / name).read_bytes() == (DATA / "golden_ic_2_3" / name).read_bytes()


def test_seed_is_reported_when_omitted(capsys):
    assert dispatch(["gen", "--model", "IC", "--n", "2", "--m", "2"]) == 0
    assert "seed" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["ps", "--instance", "/nonexistent.json"],
    ["import", str(DATA / "bad_duplicate.soc")],
    ["best-response", "--instance", EXAMPLE, "--agent", "9"],
])
def test_errors_exit_1(argv, capsys):
    assert dispatch(argv) == 1
    assert capsys.readouterr().err


def test_usage_errors_exit_2():
    assert subprocess.run([sys.executable, "-m", "pslab"], capture_output=True).returncode == 2
    assert subprocess.run([sys.executable, "-m", "pslab", "ps"], capture_output=True).returncode == 2
