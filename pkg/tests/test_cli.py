"""The ftrepair command line front end."""
import json

import pytest
from click.testing import CliRunner

from ftrepair.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def test_example_writes_models(runner, tmp_path):
    res = runner.invoke(main, ["example", "smart-grid", "--max", "1", "--out", str(tmp_path)])
    assert res.exit_code == 0, res.output
    assert (tmp_path / "smart_grid_db.model").exists()
    res = runner.invoke(main, ["example", "pressure-cooker", "--out", str(tmp_path)])
    assert res.exit_code == 0
    assert (tmp_path / "pressure_cooker.model").exists()


def test_repair_smart_grid(runner, tmp_path):
    runner.invoke(main, ["example", "smart-grid", "--max", "2", "--out", str(tmp_path)])
    model = str(tmp_path / "smart_grid_db.model")
    res = runner.invoke(main, ["repair", model, "--mode", "stabilize", "--out", str(tmp_path)])
    assert res.exit_code == 0, res.output
    report = json.loads(res.output)
    assert report["outcome"] == "repaired" and report["verified"] is True
    assert report["k"] == 2 and "delta_p_prime" in report["sizes"]
    assert set(report["timings"]) == {"load", "repair", "verify"}
    artifact = tmp_path / "smart_grid_db.repaired.json"
    doc = json.loads(artifact.read_text())
    assert doc["report"]["outcome"] == "repaired"
    assert doc["delta_p_prime"] and doc["invariant_prime"]


def test_repair_artifact_is_byte_deterministic(runner, tmp_path):
    runner.invoke(main, ["example", "smart-grid", "--max", "1", "--out", str(tmp_path)])
    model = str(tmp_path / "smart_grid_db.model")
    runner.invoke(main, ["repair", model, "--out", str(tmp_path / "a")])
    runner.invoke(main, ["repair", model, "--out", str(tmp_path / "b")])
    first = (tmp_path / "a" / "smart_grid_db.repaired.json").read_bytes()
    second = (tmp_path / "b" / "smart_grid_db.repaired.json").read_bytes()
    assert first == second


def test_repair_not_possible_exit_code(runner, tmp_path):
    runner.invoke(main, ["example", "smart-grid", "--max", "1", "--variant", "db2",
                         "--out", str(tmp_path)])
    model = str(tmp_path / "smart_grid_db2.model")
    res = runner.invoke(main, ["repair", model, "--out", str(tmp_path)])
    assert res.exit_code == 2, res.output
    assert json.loads(res.output)["outcome"] == "not-possible"


def test_repair_k_override_uses_general_algorithm(runner, tmp_path):
    runner.invoke(main, ["example", "smart-grid", "--max", "1", "--variant", "db2",
                         "--out", str(tmp_path)])
    model = str(tmp_path / "smart_grid_db2.model")
    res = runner.invoke(main, ["repair", model, "--k-override", "3", "--out", str(tmp_path)])
    assert res.exit_code == 0, res.output
    report = json.loads(res.output)
    assert report["k"] == 3 and report["verified"] is True


def test_ft_repair_with_wider_window_needs_sound_only(runner, tmp_path):
    runner.invoke(main, ["example", "smart-grid", "--max", "1", "--out", str(tmp_path)])
    model = str(tmp_path / "smart_grid_db.model")
    res = runner.invoke(main, ["repair", model, "--mode", "masking",
                               "--k-override", "3", "--out", str(tmp_path)])
    assert res.exit_code == 3


def test_check_pressure_cooker(runner, tmp_path):
    runner.invoke(main, ["example", "pressure-cooker", "--out", str(tmp_path)])
    model = str(tmp_path / "pressure_cooker.model")
    res = runner.invoke(main, ["check", model, "--property", "stabilization"])
    assert res.exit_code == 0 and "pass" in res.output


def test_check_leadsto(runner, tmp_path):
    runner.invoke(main, ["example", "pressure-cooker", "--out", str(tmp_path)])
    model = str(tmp_path / "pressure_cooker.model")
    res = runner.invoke(main, ["check", model, "--property", "leadsto",
                               "--origin", "p == 6", "--goal", "p <= 3"])
    assert res.exit_code == 0, res.output
    res = runner.invoke(main, ["check", model, "--property", "leadsto"])
    assert res.exit_code == 3  # origin/goal missing


def test_check_candidate_file(runner, tmp_path):
    runner.invoke(main, ["example", "smart-grid", "--max", "1", "--out", str(tmp_path)])
    model = str(tmp_path / "smart_grid_db.model")
    runner.invoke(main, ["repair", model, "--out", str(tmp_path)])
    cand = str(tmp_path / "smart_grid_db.repaired.json")
    res = runner.invoke(main, ["check", model, "--property", "stabilization",
                               "--candidate", cand])
    assert res.exit_code == 0, res.output


def test_check_failure_prints_trace(runner, tmp_path):
    (tmp_path / "stuck.model").write_text("""
    model stuck {
        var x: 0..2;
        invariant: x == 0;
        program { x == 1 && x' == 0; }
        environment {}
        bad {}
        restricted {}
        faults {}
        k: 2;
    }
    """)
    res = runner.invoke(main, ["check", str(tmp_path / "stuck.model"),
                               "--property", "stabilization", "--trace"])
    assert res.exit_code == 2
    assert "fail" in res.output


def test_usage_error_on_broken_model(runner, tmp_path):
    (tmp_path / "broken.model").write_text("model broken {")
    res = runner.invoke(main, ["repair", str(tmp_path / "broken.model")])
    assert res.exit_code == 3
