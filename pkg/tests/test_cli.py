import json

import numpy as np
import pytest

from sectint.cli import main
from sectint.checks import all_passed, run_action_checks
from sectint.fields import ScalarField
from sectint.groups import Family, GroupSpec
from sectint.actions import ConjugationAction, DirectSumAction

SO3K2 = '{"kind":"direct_sum","field":"R","n":3,"k":2}'
SU2 = '{"kind":"conjugation","family":"SU","n":2}'


def run_cli(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


# --- the check suite ------------------------------------------------------------

def test_checks_pass_for_reference_actions():
    for action in [
        DirectSumAction(ScalarField.REAL, 3, 2),
        DirectSumAction(ScalarField.QUATERNION, 3, 2),
        ConjugationAction(GroupSpec(Family.SU, 2)),
    ]:
        assert all_passed(run_action_checks(action, seed=1, n_points=6))


def test_checks_negative_control():
    res = run_action_checks(DirectSumAction(ScalarField.REAL, 3, 2), seed=1, n_points=4, corrupt_metric=1.05)
    assert not all_passed(res)


# --- delta ------------------------------------------------------------------------

def test_delta_known_value(capsys):
    code, rep = run_cli(capsys, ["delta", "--action", SO3K2, "--point", "[[1,0],[0,1]]"])
    assert code == 0
    assert rep["pass"] is True
    assert rep["results"]["delta_generic"] == pytest.approx(0.5, abs=1e-12)
    assert rep["results"]["delta_closed_form"] == pytest.approx(0.5, abs=1e-15)
    assert rep["results"]["regularity"] == "regular"


def test_delta_singular_point(capsys):
    code, rep = run_cli(capsys, ["delta", "--action", SO3K2, "--point", "[[1,0],[0,0]]"])
    assert rep["results"]["delta_generic"] == 0.0
    assert rep["results"]["delta_closed_form"] == 0.0
    assert rep["results"]["regularity"] == "singular"


def test_delta_quaternionic_agreement(capsys):
    action = '{"kind":"direct_sum","field":"H","n":3,"k":2}'
    point = json.dumps(np.random.default_rng(5).standard_normal((2, 2, 4)).tolist())
    code, rep = run_cli(capsys, ["delta", "--action", action, "--point", point])
    assert code == 0
    gap = abs(rep["results"]["delta_generic"] - rep["results"]["delta_closed_form"])
    assert gap <= 1e-8 * (1 + rep["results"]["delta_closed_form"])


def test_delta_conjugation_angles(capsys):
    code, rep = run_cli(capsys, ["delta", "--action", SU2, "--point", '{"angles":[1.0]}'])
    assert code == 0
    assert rep["results"]["delta_generic"] == pytest.approx(4 * np.sin(1.0) ** 2, rel=1e-10)


def test_delta_conjugation_singular_angle(capsys):
    code, rep = run_cli(capsys, ["delta", "--action", SU2, "--point", '{"angles":[0.0]}'])
    assert rep["results"]["delta_generic"] == 0.0
    assert rep["results"]["regularity"] == "singular"


def test_bad_function_name_exits_nonzero(capsys):
    code = main(["integrate", "--action", SO3K2, "--functions", "nope", "--n", "100"])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_delta_malformed_point_reports_position(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["delta", "--action", SO3K2, "--point", '[[1,"x"],[0,1]]'])
    assert "row 1, column 2" in str(exc.value)


# --- verify -------------------------------------------------------------------------

def test_verify_exit_zero(capsys):
    code, rep = run_cli(capsys, ["verify", "--action", SO3K2, "--points", "5", "--seed", "3"])
    assert code == 0 and rep["pass"] is True
    names = {c["name"] for c in rep["checks"]}
    assert "reductive_bracket" in names and "block_diagonality" in names


def test_verify_su2_polar_branch(capsys):
    code, rep = run_cli(capsys, ["verify", "--action", SU2, "--points", "5", "--seed", "3"])
    assert code == 0 and rep["pass"] is True


def test_verify_corrupted_metric_fails(capsys):
    code, rep = run_cli(
        capsys,
        ["verify", "--action", SO3K2, "--points", "4", "--corrupt-metric", "1.1"],
    )
    assert code == 1 and rep["pass"] is False


# --- integrate ----------------------------------------------------------------------

def test_integrate_report(capsys):
    code, rep = run_cli(
        capsys,
        ["integrate", "--action", SO3K2, "--seed", "7", "--n", "60000"],
    )
    assert code == 0 and rep["pass"] is True
    assert rep["results"]["vol_gn"]["mean"] == pytest.approx(4 * np.pi, rel=0.05)
    assert {c["name"] for c in rep["checks"]} >= {"calibration_consistency"}


def test_integrate_conjugation(capsys):
    code, rep = run_cli(
        capsys,
        ["integrate", "--action", SU2, "--seed", "7", "--n", "20000"],
    )
    assert code == 0
    assert rep["results"]["vol_gn"]["mean"] == pytest.approx(np.pi, rel=0.05)


# --- ensemble -----------------------------------------------------------------------

def test_ensemble_csv_and_report(capsys, tmp_path):
    csv_path = tmp_path / "h.csv"
    code, rep = run_cli(
        capsys,
        [
            "ensemble", "--action", SO3K2, "--seed", "22", "--n", "20000",
            "--bins", "20", "--out-csv", str(csv_path),
        ],
    )
    assert code == 0
    assert rep["results"]["p_value"] >= 0.01
    header = csv_path.read_text().splitlines()[0]
    assert header == "bin_lo,bin_hi,empirical,reference"


# --- volumes ------------------------------------------------------------------------

def test_volumes_report(capsys):
    code, rep = run_cli(
        capsys,
        ["volumes", "--action", SU2, "--seed", "2", "--n", "40000"],
    )
    assert code == 0 and rep["pass"] is True
    assert rep["results"]["vol_w"]["mean"] == 2.0
    assert rep["results"]["vol_gh"]["mean"] == pytest.approx(2 * np.pi, rel=0.05)


# --- reproducibility -----------------------------------------------------------------

def test_reports_byte_identical(capsys):
    argv = ["integrate", "--action", SO3K2, "--seed", "11", "--n", "20000"]
    main(argv)
    out1 = capsys.readouterr().out
    main(argv)
    out2 = capsys.readouterr().out
    assert out1 == out2


def test_reports_worker_independent(capsys):
    base = ["integrate", "--action", SO3K2, "--seed", "11", "--n", "20000"]
    main(base + ["--workers", "1"])
    out1 = capsys.readouterr().out
    main(base + ["--workers", "4"])
    out2 = capsys.readouterr().out
    assert out1 == out2


def test_action_from_file(capsys, tmp_path):
    path = tmp_path / "action.json"
    path.write_text(SO3K2)
    code, rep = run_cli(
        capsys, ["delta", "--action", f"@{path}", "--point", "[[2,0],[0,1]]"]
    )
    assert code == 0
    assert rep["results"]["delta_closed_form"] == pytest.approx(1.0)


def test_out_file_written(capsys, tmp_path):
    out = tmp_path / "r.json"
    main(["delta", "--action", SO3K2, "--point", "[[1,0],[0,1]]", "--out", str(out)])
    capsys.readouterr()
    assert json.loads(out.read_text())["pass"] is True
