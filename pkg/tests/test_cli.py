import json
import subprocess
import sys

import numpy as np
import pytest

from cpmasa.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def write_json(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


@pytest.fixture
def map_problem(tmp_path):
    s = 1 / np.sqrt(2)
    return write_json(
        tmp_path / "map.json",
        {
            "kind": "cp_map",
            "kraus": [
                [[[s, 0], [0, 0]], [[0.5, 0], [0.5, 0]]],
                [[[0, 0], [s, 0]], [[-0.5, 0], [0.5, 0]]],
            ],
        },
    )


@pytest.fixture
def generator_problem(tmp_path):
    return write_json(
        tmp_path / "gen.json",
        {
            "kind": "generator",
            "kraus": [[[[0, 0], [0, 0]], [[1, 0], [0, 0]]]],
            "hamiltonian": [[[0.5, 0], [0, 0]], [[0, 0], [-0.5, 0]]],
        },
    )


def test_check_invariance_map(capsys, map_problem):
    code, report = run_cli(capsys, "check-invariance", "--input", map_problem)
    assert code == 0
    assert report["invariant"]["ok"] is True
    assert report["invariant"]["residual"] <= 1e-10
    assert report["tolerance"] == {"atol": 1e-9, "rtol": 1e-9}
    assert report["inputs"]["kind"] == "cp_map"


def test_check_invariance_generator(capsys, generator_problem):
    code, report = run_cli(capsys, "check-invariance", "--input", generator_problem)
    assert code == 0
    assert report["invariant"]["ok"] is True


def test_tolerance_flags_override(capsys, map_problem):
    code, report = run_cli(
        capsys, "check-invariance", "--input", map_problem, "--atol", "1e-4", "--rtol", "1e-5"
    )
    assert code == 0
    assert report["tolerance"] == {"atol": 1e-4, "rtol": 1e-5}


def test_masa_file_flag(capsys, map_problem, tmp_path):
    # eigenbasis of sigma_x + sigma_y: the map does not preserve this masa
    c = np.array([[0, 1 - 1j], [1 + 1j, 0]], dtype=complex)
    _, u = np.linalg.eigh(c)
    masa_file = write_json(
        tmp_path / "masa.json",
        {"masa": [[[v.real, v.imag] for v in row] for row in u]},
    )
    code, report = run_cli(
        capsys, "check-invariance", "--input", map_problem, "--masa", masa_file
    )
    assert code == 0
    assert report["invariant"]["ok"] is False
    # with --assert the exit code flips
    code, _ = run_cli(
        capsys, "check-invariance", "--input", map_problem, "--masa", masa_file, "--assert"
    )
    assert code == 1


def test_find_masa_m2(capsys, map_problem):
    code, report = run_cli(capsys, "find-masa", "--input", map_problem)
    assert code == 0
    assert report["method"] == "pauli_eigenvector"
    assert report["invariant"]["ok"] is True
    u = np.array([[complex(re, im) for re, im in row] for row in report["masa"]["basis_unitary"]])
    assert np.linalg.norm(u.conj().T @ u - np.eye(2)) < 1e-9


def test_search_masa(capsys, map_problem):
    code, report = run_cli(
        capsys, "search-masa", "--input", map_problem, "--restarts", "10", "--seed", "5"
    )
    assert code == 0
    assert report["restarts"] == 10
    assert report["seed"] == 5
    assert report["search_residual"] <= 1e-8
    assert report["invariant"]["ok"] is True


def test_criterion_thm11(capsys, map_problem):
    code, report = run_cli(capsys, "criterion", "thm11", "--input", map_problem)
    assert code == 0
    assert report["criterion"] == "thm11"
    assert report["result"]["feasible"] is True
    assert report["result"]["residual"] <= 1e-8


def test_criterion_thm12(capsys, generator_problem):
    code, report = run_cli(capsys, "criterion", "thm12", "--input", generator_problem)
    assert code == 0
    assert report["criterion"] == "thm12"
    assert report["result"]["feasible"] is True


def test_criterion_kind_mismatch(capsys, map_problem):
    code, _ = run_cli(capsys, "criterion", "thm12", "--input", map_problem)
    assert code == 2


def test_rebolledo(capsys, map_problem):
    code, report = run_cli(capsys, "rebolledo", "--input", map_problem)
    assert code == 0
    assert report["patterns_examined"] == 9
    assert report["compatible_elements"] == []
    assert report["all_operators_pass"] is False
    code, _ = run_cli(capsys, "rebolledo", "--input", map_problem, "--assert")
    assert code == 1


def test_split_commands(capsys, generator_problem):
    code, report = run_cli(capsys, "split", "cp-part", "--input", generator_problem)
    assert code == 0
    assert report["split"] == "cp-part"
    assert report["result"]["feasible"] is True
    code, report = run_cli(capsys, "split", "hamiltonian", "--input", generator_problem)
    assert code == 0
    assert report["result"]["feasible"] is True


def test_split_infeasible_certificate(capsys, tmp_path):
    gen_file = write_json(
        tmp_path / "blocked.json",
        {
            "kind": "generator",
            "kraus": [
                [[[1, 0], [1, 0]], [[1, 0], [1, 0]]],
                [[[1, 0], [2, 0]], [[2, 0], [2, 0]]],
            ],
            "beta": [[[-3.5, 0], [-3, 0]], [[-5, 0], [-5, 0]]],
        },
    )
    code, report = run_cli(capsys, "split", "hamiltonian", "--input", gen_file)
    assert code == 0
    result = report["result"]
    assert result["feasible"] is False
    cert = result["certificate"]
    assert set(cert["row_labels"]) == {"(0,1).re", "(0,1).im", "(1,0).re", "(1,0).im"}
    assert len(cert["violations"]) == 2


def test_equiv_same_presentation(capsys, generator_problem):
    code, report = run_cli(
        capsys, "equiv", "--input", generator_problem, "--other", generator_problem
    )
    assert code == 0
    assert report["result"]["equivalent"] is True
    assert report["result"]["checks"]["superoperator_distance"] <= 1e-12


def test_restrict(capsys, generator_problem):
    code, report = run_cli(capsys, "restrict", "--input", generator_problem)
    assert code == 0
    a = np.array(report["restriction"])
    assert a.shape == (2, 2)
    assert np.allclose(np.array(report["row_sums"]), 0, atol=1e-10)


def test_corpus_command(capsys):
    code, report = run_cli(capsys, "corpus", "ex2_1")
    assert code == 0
    assert report["ok"] is True
    assert report["id"] == "ex2_1"
    code, _ = run_cli(capsys, "corpus", "ex2_1", "--assert")
    assert code == 0


def test_timing_flag(capsys, map_problem):
    code, report = run_cli(capsys, "check-invariance", "--input", map_problem, "--timing")
    assert code == 0
    assert report["timing"]["seconds"] >= 0


def test_error_exit_codes(capsys, tmp_path):
    assert main(["check-invariance", "--input", str(tmp_path / "missing.json")]) == 2
    bad = write_json(tmp_path / "bad.json", {"kind": "cp_map"})
    assert main(["check-invariance", "--input", bad]) == 2
    assert main(["corpus", "ex0_0"]) == 2


def test_console_script_entry_point(map_problem):
    out = subprocess.run(
        ["cpmasa", "check-invariance", "--input", map_problem],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0
    assert json.loads(out.stdout)["invariant"]["ok"] is True
