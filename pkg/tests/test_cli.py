import json
import pathlib
import subprocess
import sys

import numpy as np
import pytest

from qmeasure import (
    PAULI_X,
    PAULI_Z,
    dilation_model,
    pvm_from_observable,
    scenario_to_json,
    unsharp_qubit_povm,
    von_neumann_model,
)
from qmeasure.cli import main

REPO = pathlib.Path(__file__).resolve().parent.parent
OIT_SCENARIO = REPO / "scenarios" / "oit_sigma_z.json"
UNSHARP_SCENARIO = REPO / "scenarios" / "unsharp_eta08.json"

SIGMA_Z_PVM = pvm_from_observable(PAULI_Z)
SIGMA_X_PVM = pvm_from_observable(PAULI_X)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
GROUND = np.array([1, 0], dtype=complex)


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def _write(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def _noncommuting_joint_doc():
    return scenario_to_json(
        PLUS,
        SIGMA_Z_PVM,
        [von_neumann_model(SIGMA_Z_PVM), von_neumann_model(SIGMA_X_PVM)],
        "joint",
    )


@pytest.mark.parametrize("scenario", [OIT_SCENARIO, UNSHARP_SCENARIO])
def test_validate_bundled_scenarios(capsys, scenario):
    code, out, _ = _run(capsys, "validate", scenario)
    assert code == 0
    assert out.startswith("valid:")


def test_run_bundled_oit_scenario(capsys):
    code, out, _ = _run(capsys, "run", OIT_SCENARIO)
    assert code == 0
    report = json.loads(out)
    assert report["experiment"] == "oit"
    assert report["results"]["intersubjective"] is True
    assert report["results"]["off_diagonal_mass"] < 1e-10
    # reports carry every tolerance actually used
    assert set(report["diagnostics"]["tolerances"]) == {
        "cluster", "commutation", "oit", "reproducibility",
    }


def test_run_bundled_unsharp_scenario(capsys):
    code, out, _ = _run(capsys, "run", UNSHARP_SCENARIO)
    assert code == 0
    report = json.loads(out)
    assert report["results"]["agreement_probability"] == pytest.approx(0.82, abs=1e-9)
    table = np.array(report["results"]["joint_table"])
    assert np.abs(table - [[0.01, 0.09], [0.09, 0.81]]).max() < 1e-9


def test_run_out_flag_writes_report_file(capsys, tmp_path):
    out_path = tmp_path / "report.json"
    code, out, err = _run(capsys, "run", OIT_SCENARIO, "--out", out_path)
    assert code == 0
    assert out == ""
    assert json.loads(out_path.read_text())["results"]["intersubjective"] is True


def test_run_rejects_unnormalized_state(capsys, tmp_path):
    doc = json.loads(OIT_SCENARIO.read_text())
    doc["system"]["state"] = [[1.0, 0.0], [0.5, 0.0]]
    code, out, err = _run(capsys, "run", _write(tmp_path, doc))
    assert code == 2
    assert "norm" in err


def test_run_rejects_subnormalized_povm(capsys, tmp_path):
    half = {"rows": 2, "cols": 2,
            "entries": [[0.45, 0.0], [0.0, 0.0], [0.0, 0.0], [0.45, 0.0]]}
    doc = {
        "schema_version": "1",
        "system": {"dim": 2, "state": [[1.0, 0.0], [0.0, 0.0]]},
        "observable": {"povm": {"dim": 2, "outcomes": [-1.0, 1.0],
                                "effects": [half, half]}},
        "processes": [{"model": "dilation"}],
        "experiment": "induce",
    }
    code, _, err = _run(capsys, "validate", _write(tmp_path, doc))
    assert code == 2
    assert "identity" in err


def test_run_rejects_non_unitary_custom_interaction(capsys, tmp_path):
    doc = scenario_to_json(GROUND, SIGMA_Z_PVM, [von_neumann_model(SIGMA_Z_PVM)], "induce")
    doc["processes"][0]["unitary"]["entries"][0] = [2.0, 0.0]
    code, _, err = _run(capsys, "validate", _write(tmp_path, doc))
    assert code == 2
    assert "unitary" in err


def test_run_missing_file_and_malformed_json(capsys, tmp_path):
    code, _, _ = _run(capsys, "run", tmp_path / "absent.json")
    assert code == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, _ = _run(capsys, "validate", bad)
    assert code == 2


def test_run_unknown_field_rejected(capsys, tmp_path):
    doc = json.loads(OIT_SCENARIO.read_text())
    doc["extra"] = 1
    code, _, err = _run(capsys, "run", _write(tmp_path, doc))
    assert code == 2
    assert "unknown field" in err


def test_run_non_commuting_meters_exit_code(capsys, tmp_path):
    path = _write(tmp_path, _noncommuting_joint_doc())
    code, _, err = _run(capsys, "run", path)
    assert code == 3
    assert "commute" in err


def test_run_tol_override_relaxes_commutation_gate(capsys, tmp_path):
    path = _write(tmp_path, _noncommuting_joint_doc())
    code, out, _ = _run(capsys, "run", path, "--tol", "1.0")
    assert code == 0
    assert json.loads(out)["diagnostics"]["tolerances"]["commutation"] == 1.0


def test_run_tol_override_flips_reproducibility_verdict(capsys, tmp_path):
    doc = scenario_to_json(
        GROUND, SIGMA_Z_PVM, [dilation_model(unsharp_qubit_povm(0.8))], "reproduce"
    )
    path = _write(tmp_path, doc)
    code, out, _ = _run(capsys, "run", path)
    assert code == 0
    strict = json.loads(out)["results"]
    assert strict["reproducible"] is False
    assert strict["max_operator_deviation"] == pytest.approx(0.1, abs=1e-9)
    code, out, _ = _run(capsys, "run", path, "--tol", "0.2")
    assert code == 0
    assert json.loads(out)["results"]["reproducible"] is True


def test_run_oit_precondition_exit_code(capsys, tmp_path):
    doc = scenario_to_json(
        PLUS,
        SIGMA_Z_PVM,
        [von_neumann_model(SIGMA_Z_PVM), dilation_model(unsharp_qubit_povm(0.8))],
        "oit",
    )
    code, _, err = _run(capsys, "run", _write(tmp_path, doc))
    assert code == 3
    assert "reproduce" in err


def test_run_sample_seed_override(capsys, tmp_path):
    povm = unsharp_qubit_povm(0.8)
    doc = scenario_to_json(
        GROUND, povm, [dilation_model(povm), dilation_model(povm)],
        "sample", n_samples=2000, seed=5,
    )
    path = _write(tmp_path, doc)
    code1, out1, _ = _run(capsys, "run", path)
    code2, out2, _ = _run(capsys, "run", path)
    code3, out3, _ = _run(capsys, "run", path, "--seed", "6")
    assert code1 == code2 == code3 == 0
    assert out1 == out2
    first = json.loads(out1)["results"]
    third = json.loads(out3)["results"]
    assert first["seed"] == 5 and third["seed"] == 6
    assert first["counts"] != third["counts"]
    assert sum(map(sum, first["counts"])) == 2000


def test_report_round_trip_is_stable(capsys, tmp_path):
    # serialize programmatically built objects, reload, and rerun: identical reports
    doc = scenario_to_json(
        PLUS, SIGMA_Z_PVM,
        [von_neumann_model(SIGMA_Z_PVM), von_neumann_model(SIGMA_Z_PVM)],
        "oit",
    )
    path = _write(tmp_path, doc)
    _, out1, _ = _run(capsys, "run", path)
    _, out2, _ = _run(capsys, "run", path)
    assert out1 == out2
    report = json.loads(out1)
    assert report["results"]["off_diagonal_mass"] < 1e-10


def test_sweep_bundled_scenario_matches_curve(capsys):
    code, out, _ = _run(capsys, "sweep", UNSHARP_SCENARIO,
                        "--param", "eta", "--values", "0,0.5,1")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "eta,agreement"
    rows = [tuple(map(float, line.split(","))) for line in lines[1:]]
    assert [r[0] for r in rows] == [0.0, 0.5, 1.0]
    assert rows[0][1] == pytest.approx(0.5, abs=1e-9)
    assert rows[1][1] == pytest.approx(0.625, abs=1e-9)
    assert rows[2][1] == pytest.approx(1.0, abs=1e-9)


def test_sweep_single_value_matches_run(capsys):
    code, out, _ = _run(capsys, "sweep", UNSHARP_SCENARIO,
                        "--param", "eta", "--values", "0.8")
    assert code == 0
    swept = float(out.strip().splitlines()[1].split(",")[1])
    _, run_out, _ = _run(capsys, "run", UNSHARP_SCENARIO)
    direct = json.loads(run_out)["results"]["agreement_probability"]
    assert swept == pytest.approx(direct, abs=1e-12)


def test_sweep_rejects_out_of_range_eta(capsys):
    code, _, err = _run(capsys, "sweep", UNSHARP_SCENARIO,
                        "--param", "eta", "--values", "0.5,1.2")
    assert code == 2
    assert "eta" in err


def test_sweep_rejects_non_sweepable_scenario(capsys):
    code, _, err = _run(capsys, "sweep", OIT_SCENARIO,
                        "--param", "eta", "--values", "0.5")
    assert code == 2
    assert "unsharp" in err


def test_sweep_unknown_param_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", str(UNSHARP_SCENARIO), "--param", "gamma", "--values", "0.5"])
    assert exc.value.code == 2


def test_validate_and_run_accept_the_same_inputs(capsys, tmp_path):
    # shared loader: whatever validates must not be rejected by run as invalid
    cases = [OIT_SCENARIO, UNSHARP_SCENARIO,
             _write(tmp_path, _noncommuting_joint_doc())]
    for path in cases:
        v_code, _, _ = _run(capsys, "validate", path)
        r_code, _, _ = _run(capsys, "run", path)
        assert v_code == 0
        assert r_code in (0, 3)


def test_console_script_end_to_end():
    proc = subprocess.run(
        [sys.executable, "-m", "qmeasure", "run", str(OIT_SCENARIO)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["intersubjective"] is True
