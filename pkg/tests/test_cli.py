"""End-to-end CLI behavior: subcommands, exit codes, determinism."""

import json
import subprocess
import sys

import numpy as np
import pytest

from ltshadow.linalg import kron, sym_part
from ltshadow.processes import swap_process
from ltshadow.serialize import dumps, matrix_to_json, process_to_json


def run_cli(args, stdin_text=None):
    proc = subprocess.run(
        [sys.executable, "-m", "ltshadow", *args],
        input=stdin_text,
        capture_output=True,
        text=True,
        timeout=600,
    )
    return proc


def epr_projector():
    z = np.array([0.0, 1.0, 1.0, 0.0]) / np.sqrt(2)
    return np.outer(z, z)


def epr_json():
    return dumps(matrix_to_json(epr_projector(), dims=(2, 2)))


def test_version():
    proc = run_cli(["--version"])
    assert proc.returncode == 0
    assert proc.stdout.strip() == "0.1.0"


def test_shadow_command_epr(tmp_path):
    proc = run_cli(["shadow", "--dims", "2,2"], stdin_text=epr_json())
    assert proc.returncode == 0, proc.stderr
    out = json.loads(proc.stdout)
    w = np.asarray(out["rows"])
    s = sym_part(np.outer([1.0, 0.0], [0.0, 1.0]))
    closed = 0.5 * (kron(np.diag([1.0, 0]), np.diag([0, 1.0]))
                    + kron(np.diag([0, 1.0]), np.diag([1.0, 0]))) + kron(s, s)
    np.testing.assert_allclose(w, closed, atol=1e-12)
    assert out["kernel_component_norm"] == pytest.approx(0.5, abs=1e-12)


def test_decompose_command():
    proc = run_cli(["decompose"], stdin_text=epr_json())
    assert proc.returncode == 0, proc.stderr
    out = json.loads(proc.stdout)
    assert out["aa_norm"] == pytest.approx(0.5, abs=1e-12)
    assert out["sa_norm"] == pytest.approx(0.0, abs=1e-12)
    assert len(out["coords"]["ss"]) == 9


def test_cone_command_boxtimes_member(tmp_path):
    shadow_file = tmp_path / "w.json"
    run1 = run_cli(["shadow", "--dims", "2,2", "-o", str(shadow_file)],
                   stdin_text=epr_json())
    assert run1.returncode == 0
    proc = run_cli(["cone", "--cone", "boxtimes", "--seed", "7",
                    "-i", str(shadow_file)])
    assert proc.returncode == 0, proc.stderr
    out = json.loads(proc.stdout)
    assert out["verdict"] == "member"
    assert out["seed"] == 7
    k = np.asarray(out["certificate"]["kernel_offset"])
    w = np.asarray(json.loads(shadow_file.read_text())["rows"])
    assert np.linalg.eigvalsh(w + k)[0] >= -1e-8


def test_cone_command_requires_seed():
    proc = run_cli(["cone", "--cone", "boxtimes"], stdin_text=epr_json())
    assert proc.returncode == 2
    assert "seed" in proc.stderr


def test_malformed_json_exit_2():
    proc = run_cli(["decompose", "--dims", "2,2"], stdin_text="{not json")
    assert proc.returncode == 2
    assert proc.stdout == ""


def test_dimension_mismatch_exit_3():
    proc = run_cli(["decompose", "--dims", "3,3"], stdin_text=epr_json())
    assert proc.returncode == 3


def test_missing_dims_exit_3():
    bare = dumps(matrix_to_json(epr_projector()))
    proc = run_cli(["shadow"], stdin_text=bare)
    assert proc.returncode == 3


def test_map_command_local_positive():
    proc = run_cli(["map", "--check", "local-positive"],
                   stdin_text=dumps(process_to_json(swap_process((2, 2)))))
    assert proc.returncode == 0, proc.stderr
    out = json.loads(proc.stdout)
    assert out["locally_positive"] is True


def test_map_command_shadow_refusal_exit_4():
    from ltshadow.processes import epsilon_functional

    proc = run_cli(["map", "--check", "shadow"],
                   stdin_text=dumps(process_to_json(epsilon_functional((2, 2)))))
    assert proc.returncode == 4


def test_map_command_positive():
    proc = run_cli(["map", "--check", "positive", "--seed", "3"],
                   stdin_text=dumps(process_to_json(swap_process((2, 2)))))
    assert proc.returncode == 0, proc.stderr
    out = json.loads(proc.stdout)
    assert out["verdict"] == "positive"
    assert out["seed"] == 3


def test_fiber_command_with_map(tmp_path):
    demo = 0.5 * epr_projector() + 0.5 * np.eye(4) / 4
    from ltshadow.shadow import local_shadow_matrix

    shadow_file = tmp_path / "shadow.json"
    shadow_file.write_text(dumps(matrix_to_json(local_shadow_matrix(demo, (2, 2)),
                                                dims=(2, 2))))
    map_file = tmp_path / "map.json"
    map_file.write_text(dumps(process_to_json(swap_process((2, 2)))))
    proc = run_cli(["fiber", "--shadow", str(shadow_file), "--n", "20",
                    "--seed", "5", "--map", str(map_file)])
    assert proc.returncode == 0, proc.stderr
    out = json.loads(proc.stdout)
    assert out["seed"] == 5
    assert out["kernel_dim"] == 1
    assert out["n_accepted"] >= 15
    assert out["spread"]["deterministic"] is True


def test_examples_exit_zero_and_byte_identical(tmp_path):
    one = run_cli(["examples", "--seed", "7"])
    two = run_cli(["examples", "--seed", "7"])
    assert one.returncode == 0, one.stdout[-2000:]
    assert two.returncode == 0
    assert one.stdout == two.stdout
    report = json.loads(one.stdout)
    assert report["all_pass"] is True
    assert {c["name"] for c in report["checks"]} >= {
        "example1_epr_shadow",
        "example2_pairing_functional",
        "shadow_equals_defining_system",
        "upb_witness_chain",
    }


def test_examples_upb_flag():
    proc = run_cli(["examples", "--seed", "7", "--upb"])
    assert proc.returncode == 0
    report = json.loads(proc.stdout)
    rho = np.asarray(report["upb_state"]["rows"])
    assert np.trace(rho) == pytest.approx(1.0, abs=1e-12)
    assert len(report["upb_vectors"]) == 5
