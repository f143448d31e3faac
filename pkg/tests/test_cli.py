import json
import subprocess
import sys

import pytest

from pacsol.cli import example_names, load_example, run


def write(tmp_path, doc, name="run.json"):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc, indent=2))
    return str(path)


def test_examples_are_bundled():
    assert {"dimension", "tucore", "hedonic", "condorcet", "market", "uc",
            "validate_tucore"} <= set(example_names())


def test_dimension_example_prints_one(capsys):
    assert run(["--example", "dimension"]) == 0
    out, err = capsys.readouterr()
    assert json.loads(out)["solution_dimension"] == 1
    assert "d = 1" in err


def test_tucore_example(tmp_path):
    assert run(["--example", "tucore", "--out", str(tmp_path), "--quiet"]) == 0
    doc = json.loads((tmp_path / "tucore.json").read_text())
    assert doc["total"] == "1"
    assert doc["config"]["domain"] == "tucore"


def test_cycle_example_exits_one(capsys):
    assert run(["--example", "condorcet"]) == 1
    doc = json.loads(capsys.readouterr().out)
    assert doc["winner"] is None and doc["three_cycle_core_size"] == 3


@pytest.mark.parametrize("name", ["hedonic", "market"])
def test_other_examples_succeed(name, capsys):
    assert run(["--example", name, "--quiet"]) == 0
    assert json.loads(capsys.readouterr().out)["domain"] == name


def test_bad_rational_is_schema_error(tmp_path, capsys):
    path = write(tmp_path, '{\n  "domain": "market",\n  "goods": 1,\n  "zeta": "1/0",\n'
                           '  "budgets": ["1"],\n  "samples": []\n}\n')
    assert run(["--config", path]) == 2
    err = capsys.readouterr().err
    assert f"{path}:4:" in err


def test_invalid_json_and_unknown_domain(tmp_path):
    assert run(["--config", write(tmp_path, "{ nope")]) == 2
    assert run(["--config", write(tmp_path, {"domain": "astrology"})]) == 2
    assert run(["--config", str(tmp_path / "missing.json")]) == 2
    assert run([]) == 2


def test_seed_override_is_recorded(tmp_path):
    doc = {"domain": "uc", "instance": "thresholds", "epsilon": "1/4", "delta": "1/10",
           "trials": 5, "seed": 1}
    path = write(tmp_path, doc)
    assert run(["--config", path, "--seed", "9", "--out", str(tmp_path), "--quiet"]) == 0
    report = json.loads((tmp_path / "uc.json").read_text())
    assert report["config"]["seed"] == 9
    assert report["provenance"]["config"]["seed"] == 9


def test_stochastic_run_needs_seed(tmp_path):
    doc = {"domain": "uc", "instance": "argmax", "epsilon": "1/4", "delta": "1/10", "trials": 3}
    assert run(["--config", write(tmp_path, doc)]) == 2


def test_csv_output(tmp_path):
    doc = {"domain": "uc", "instance": "thresholds", "epsilon": "1/4", "delta": "1/10",
           "trials": 4, "seed": 2}
    assert run(["--config", write(tmp_path, doc), "--format", "csv", "--out", str(tmp_path),
                "--quiet"]) == 0
    lines = (tmp_path / "uc.csv").read_text().splitlines()
    assert lines[0] == "trial,loss,exceeded,error" and len(lines) == 5


def test_byte_identical_reruns(tmp_path):
    doc = {"domain": "validate", "pipeline": "condorcet", "params": {"candidates": 6, "voters": 5},
           "epsilon": "1/10", "delta": "1/10", "m": 8, "trials": 20, "seed": 3}
    path = write(tmp_path, doc)
    outs = []
    for i, workers in enumerate((1, 1, 3)):
        doc["workers"] = workers
        write(tmp_path, doc)
        target = tmp_path / f"o{i}"
        assert run(["--config", path, "--out", str(target), "--quiet"]) == 0
        outs.append(json.loads((target / "validate.json").read_text()))
    for o in outs:
        o["config"].pop("workers")
    assert outs[0] == outs[1] == outs[2]


def test_bound_flag_controls_exit(tmp_path):
    base = {"domain": "dimension", "instance": "argmax"}
    assert run(["--config", write(tmp_path, {**base, "bound": "1"}), "--quiet"]) == 0
    assert run(["--config", write(tmp_path, {**base, "bound": "0"}), "--quiet"]) == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pacsol", "--example", "dimension", "--quiet"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["solution_dimension"] == 1


def test_load_example_unknown():
    with pytest.raises(FileNotFoundError):
        load_example("nope")
