"""Command-line surface: exit codes, determinism, file formats."""

import json
import subprocess
import sys

import pytest

from filippov.cli import main, run
from filippov.scenario import load_scenario, scenario_from_dict, scenario_to_dict
from filippov.errors import InputError


def family_doc(name, k, c, unfold=None, window=None, outputs="out"):
    return {
        "name": name,
        "field": {
            "upper": {"X": [[0, 0, 1.0]],
                      "Y": [[2 * k - 1, 0, -1.0]]
                      + ([[2 * k, 0, float(c)]] if c else [])},
            "lower": {"X": [[0, 0, -1.0]], "Y": [[2 * k - 1, 0, -1.0]]},
        },
        "unfold": unfold,
        "window": window or {"center": 0.0, "radius": 0.3},
        "outputs": outputs,
    }


@pytest.fixture()
def scenario_path(tmp_path):
    def write(doc):
        path = tmp_path / f"{doc['name']}.json"
        doc = dict(doc)
        doc["outputs"] = str(tmp_path / "out")
        path.write_text(json.dumps(doc, indent=2))
        return str(path)
    return write


def test_classify_ok(scenario_path, tmp_path):
    path = scenario_path(family_doc("quad", 2, 1.0))
    code, report = run(path, "classify")
    assert code == 0
    assert report["status"] == "ok"
    assert report["payload"]["V2"] == pytest.approx(0.4, abs=1e-10)
    assert (tmp_path / "out" / "quad.classify.json").exists()


def test_classify_c3_violation_exits_one(tmp_path):
    doc = {
        "name": "bad-c3",
        "field": {
            "upper": {"X": [[0, 0, 1.0]], "Y": [[1, 0, -1.0]]},
            "lower": {"X": [[0, 0, 1.0]], "Y": [[1, 0, 1.0]]},
        },
        "window": {"center": 0.0, "radius": 0.3},
        "outputs": str(tmp_path / "out"),
    }
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, report = run(str(path), "classify")
    assert code == 1
    assert report["status"] == "error"
    assert any("C3" in d for d in report["diagnostics"])


def test_malformed_scenario_is_input_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(InputError):
        run(str(path), "classify")
    assert main(["classify", "--config", str(path)]) == 1


def test_unknown_command_rejected(scenario_path):
    path = scenario_path(family_doc("quad", 2, 1.0))
    with pytest.raises(InputError):
        run(path, "frobnicate")


def test_verify_lemma1_gate_controls_exit(scenario_path):
    unfold = {"k": 2, "lambda": [-1.0, 1.0], "epsilon": 0.1, "b": 0.0,
              "shift": "minus"}
    path = scenario_path(family_doc("quad", 2, 1.0, unfold=unfold))
    code, report = run(path, "verify-lemma1")
    assert code == 0
    assert report["payload"]["max_residual"] < 1e-8
    code, report = run(path, "verify-lemma1", gate=1e-30)
    assert code == 3
    assert report["status"] == "mismatch"


def test_verify_lemma1_random_draws_seeded(scenario_path):
    unfold = {"k": 2, "lambda": [-1.0, 1.0], "epsilon": 0.1, "b": 0.0,
              "shift": "minus"}
    path = scenario_path(family_doc("quad", 2, 1.0, unfold=unfold))
    code, rep1 = run(path, "verify-lemma1", draws=4, seed=123)
    code2, rep2 = run(path, "verify-lemma1", draws=4, seed=123)
    assert code == code2 == 0
    assert rep1["payload"]["runs"] == rep2["payload"]["runs"]


def test_cycles_exit_codes(scenario_path):
    unfold = {"k": 2, "lambda": [-1.0, 1.0], "epsilon": 0.1, "b": -1e-6,
              "shift": "minus"}
    path = scenario_path(family_doc("quad", 2, 1.0, unfold=unfold))
    code, report = run(path, "cycles")
    assert code == 0
    assert report["payload"]["pass"] is True
    assert len(report["payload"]["cycles"]) == 2
    # flipping the sign must produce the no-cycle branch and exit 3
    code, report = run(path, "cycles", b=1e-6)
    assert code == 3
    assert report["payload"]["pass"] is False
    assert report["payload"]["cycles"] == []


def test_ladder_and_v2_limit_ok(scenario_path):
    unfold = {"k": 2, "lambda": [-1.0, 1.0], "epsilon": 0.1, "b": 0.0,
              "shift": "minus"}
    path = scenario_path(family_doc("quad", 2, 1.0, unfold=unfold))
    assert run(path, "verify-ladder")[0] == 0
    assert run(path, "verify-v2-limit")[0] == 0


def test_numerical_failure_exits_two(tmp_path):
    # an upward field never returns to the line: delta sampling must fail
    doc = {
        "name": "updrift",
        "field": {
            "upper": {"X": [[0, 0, 1.0]], "Y": [[0, 0, 1.0]]},
            "lower": {"X": [[0, 0, -1.0]], "Y": [[1, 0, -1.0]]},
        },
        "integrator": {"max_time": 2.0},
        "window": {"center": 0.0, "radius": 0.2},
        "outputs": str(tmp_path / "out"),
    }
    path = tmp_path / "updrift.json"
    path.write_text(json.dumps(doc))
    code, report = run(str(path), "delta-dump")
    assert code == 2
    assert report["status"] == "error"


def test_determinism_byte_identical_modulo_timestamp(scenario_path, tmp_path):
    path = scenario_path(family_doc("quad", 2, 1.0))
    run(path, "classify")
    first = (tmp_path / "out" / "quad.classify.json").read_text()
    run(path, "classify")
    second = (tmp_path / "out" / "quad.classify.json").read_text()

    def strip_ts(text):
        return [ln for ln in text.splitlines() if '"timestamp"' not in ln]

    assert strip_ts(first) == strip_ts(second)


def test_dump_normalized_round_trip(scenario_path, tmp_path):
    unfold = {"k": 2, "lambda": [-1.0, 1.0], "epsilon": 0.1, "b": -1e-6,
              "shift": "minus"}
    path = scenario_path(family_doc("quad", 2, 1.0, unfold=unfold))
    code, doc = run(path, "classify", dump_normalized=True)
    assert code == 0
    reparsed = scenario_from_dict(doc)
    assert scenario_to_dict(reparsed) == doc
    on_disk = json.loads((tmp_path / "out" / "quad.normalized.json").read_text())
    assert on_disk == doc


def test_delta_dump_csv(scenario_path, tmp_path):
    path = scenario_path(family_doc("two", 1, 1.0))
    code, report = run(path, "delta-dump")
    assert code == 0
    lines = (tmp_path / "out" / "two.delta.csv").read_text().splitlines()
    assert lines[0] == "x,delta"
    assert len(lines) == 34


def test_scan_outputs(scenario_path, tmp_path):
    path = scenario_path(family_doc("two", 1, 1.0))
    code, report = run(path, "scan", b_values=[-1e-4, 1e-4])
    assert code == 0
    rows = report["payload"]["rows"]
    assert [r["n_cycles"] for r in rows] == [1, 0]
    lines = (tmp_path / "out" / "two.scan.csv").read_text().splitlines()
    assert lines[0] == \
        "b,n_cycles,stability,sliding_kind,amplitude,predicted_amplitude"


def test_portrait_no_shift_has_no_sliding(scenario_path, tmp_path):
    unfold = {"k": 1, "lambda": [], "epsilon": 0.1, "b": 0.0,
              "shift": "minus"}
    path = scenario_path(family_doc("two", 1, 1.0, unfold=unfold))
    code, report = run(path, "portrait")
    assert code == 0
    assert report["payload"]["n_solid_segments"] == 0
    svg = (tmp_path / "out" / "two.portrait.svg").read_text()
    assert "<svg" in svg and "stroke-dasharray" in svg
    assert 'class="cycle-0"' not in svg


def test_portrait_with_cycle(scenario_path, tmp_path):
    unfold = {"k": 1, "lambda": [], "epsilon": 0.1, "b": -1e-4,
              "shift": "minus"}
    path = scenario_path(family_doc("two", 1, 1.0, unfold=unfold,
                                    window={"center": 0.0, "radius": 0.1}))
    code, report = run(path, "portrait")
    assert code == 0
    assert report["payload"]["n_solid_segments"] == 1
    assert report["payload"]["n_cycles_drawn"] == 1
    svg = (tmp_path / "out" / "two.portrait.svg").read_text()
    assert 'class="cycle-0"' in svg
    csv = (tmp_path / "out" / "two.portrait.csv").read_text().splitlines()
    assert csv[0] == "curve,x,y"
    assert any(ln.startswith("cycle-0,") for ln in csv)


def test_console_entry_point(scenario_path):
    path = scenario_path(family_doc("quad", 2, 1.0))
    proc = subprocess.run(
        [sys.executable, "-m", "filippov", "classify", "--config", path],
        capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert "quad.classify: ok" in proc.stdout


def test_shipped_scenarios_parse():
    import pathlib
    root = pathlib.Path(__file__).resolve().parents[1] / "scenarios"
    files = sorted(root.glob("*.json"))
    assert files, "shipped scenario files are missing"
    for f in files:
        load_scenario(str(f))
