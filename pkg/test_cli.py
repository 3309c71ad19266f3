"""
시나리오 로드 / 검증 / CLI 실행 테스트
"""
import json
import os
import sys

import pytest
import yaml

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from sap_simulator.cli import main
from sap_simulator.errors import ConfigError
from sap_simulator.scenario import (
    ModelChoice, RunMode, apply_override, list_presets, load_scenario, validate_scenario,
)
from sap_simulator.store import read_csv, read_json


def _write_yaml(path, data):
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(data, f)
    return str(path)


# ============================================================
# 시나리오
# ============================================================
@pytest.mark.parametrize("name", list_presets())
def test_every_preset_loads(name):
    scenario = load_scenario(preset=name)
    assert scenario.name == name
    assert validate_scenario(scenario)["ok"]


def test_preset_values():
    scenario = load_scenario(preset="fig6a")
    assert scenario.mode == RunMode.HUBBARD_RUN
    assert scenario.flags.model == ModelChoice.BOSE
    assert scenario.flags.cotunneling is False
    assert scenario.interaction()["E_g"] == 1.25


def test_unknown_preset():
    with pytest.raises(ConfigError):
        load_scenario(preset="no-such-preset")


def test_override_parsing():
    data = apply_override({}, "physics.E_g=1.6")
    data = apply_override(data, "flags.cotunneling=false")
    assert data == {"physics": {"E_g": 1.6}, "flags": {"cotunneling": False}}
    with pytest.raises(ConfigError):
        apply_override({}, "physics.E_g")


def test_file_then_overrides(tmp_path):
    path = _write_yaml(tmp_path / "s.yaml", {"name": "custom", "mode": "spectrum",
                                              "physics": {"E_g": 1.25}, "flags": {"model": "bose"}})
    scenario = load_scenario(path, preset="fig3a", overrides=["physics.E_g=1.05"])
    assert scenario.name == "custom"
    assert scenario.flags.model == ModelChoice.BOSE
    assert scenario.physics.E_g == 1.05
    assert scenario.numerics.k == 12


def test_invalid_energy_rejected():
    with pytest.raises(ConfigError) as exc:
        load_scenario(preset="fig3b", overrides=["physics.E_g=2.0"])
    assert exc.value.exit_code == 2
    assert exc.value.details["errors"]


def test_mode_requirements():
    with pytest.raises(ConfigError):
        load_scenario(preset="fig6a", overrides=["flags.model=exact"])
    with pytest.raises(ConfigError):
        load_scenario(preset="fig3a", overrides=["physics.g=0.5"])


def test_scenario_hash_is_stable():
    a = load_scenario(preset="fig1")
    b = load_scenario(preset="fig1")
    c = load_scenario(preset="fig1", overrides=["physics.T=5000"])
    assert a.scenario_hash() == b.scenario_hash()
    assert a.scenario_hash() != c.scenario_hash()


@pytest.mark.parametrize("override", ["physics.trajectory.d_min=9.0", "physics.trajectory.d_min=10",
                                      "physics.trajectory.d_min=-1"])
def test_bad_geometry_rejected_at_load(override):
    with pytest.raises(ConfigError) as exc:
        load_scenario(preset="fig1", overrides=[override])
    assert exc.value.exit_code == 2
    assert any(e["loc"].startswith("physics.trajectory") for e in exc.value.details["errors"])


def test_validate_reports_small_grid():
    scenario = load_scenario(preset="fig3a", overrides=["numerics.grid.x_min=-8", "numerics.grid.x_max=8"])
    report = validate_scenario(scenario)
    assert not report["ok"]
    assert any(e.startswith("grid") for e in report["errors"])


# ============================================================
# CLI
# ============================================================
def test_cli_validate_exit_codes(capsys):
    assert main(["validate", "--preset", "fig1"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["ok"]
    assert main(["validate", "--preset", "fig3b", "--set", "physics.E_g=2.0"]) == 2
    assert "config" in capsys.readouterr().err


def test_cli_presets(capsys):
    assert main(["presets"]) == 0
    names = capsys.readouterr().out.split()
    assert "fig1" in names and "desk-sap" in names


def test_cli_requires_scenario(capsys):
    assert main(["trajectory"]) == 2


def test_cli_bad_geometry_is_config_error(tmp_path, capsys):
    out = tmp_path / "never"
    code = main(["trajectory", "--preset", "fig1", "--set", "physics.trajectory.d_min=10", "--out", str(out)])
    assert code == 2
    assert "config" in capsys.readouterr().err
    assert not out.exists()


def test_cli_trajectory_run_is_reproducible(tmp_path, capsys):
    out = tmp_path / "traj"
    assert main(["trajectory", "--preset", "fig1", "--out", str(out)]) == 0
    header, rows = read_csv(str(out / "trajectory.csv"))
    assert header == ["t", "d_L", "d_M", "d_R"]
    assert len(rows) == 801
    assert [float(v) for v in rows[0]] == [0.0, -9.0, 0.0, 9.0]
    manifest = read_json(str(out / "manifest.json"))
    assert manifest["mode"] == "trajectory"
    assert manifest["ramp"] == "raised_cosine"
    assert "trajectory.csv" in manifest["outputs"]
    first = (out / "trajectory.csv").read_bytes()

    assert main(["trajectory", "--preset", "fig1", "--out", str(out)]) == 0
    assert (out / "trajectory.csv").read_bytes() == first
    assert read_json(str(out / "manifest.json"))["scenario_hash"] == manifest["scenario_hash"]


def test_cli_rates_run(tmp_path):
    path = _write_yaml(tmp_path / "rates.yaml", {
        "name": "rates-small", "mode": "rates",
        "physics": {"E_g": 1.25, "trajectory": {"d_min": 3.0, "d_max": 4.0}},
        "numerics": {"rates": {"d_lo": 3.0, "d_hi": 4.0, "d_step": 0.5}},
    })
    out = tmp_path / "rates"
    assert main(["rates", "--config", path, "--out", str(out)]) == 0
    header, rows = read_csv(str(out / "rates.csv"))
    assert header == ["d", "omega0", "omega1", "omega_co"]
    assert len(rows) == 3
    assert all(float(r[1]) < 0 for r in rows)


def test_cli_hubbard_run(tmp_path):
    path = _write_yaml(tmp_path / "hub.yaml", {
        "name": "hub-small", "mode": "hubbard-run",
        "physics": {"E_g": 1.0, "T": 200.0},
        "flags": {"model": "three-mode"},
        "numerics": {"hubbard_dt": 0.5, "n_records": 21, "rates": {"d_step": 0.5}},
    })
    out = tmp_path / "hub"
    assert main(["hubbard-run", "--config", path, "--out", str(out)]) == 0
    header, rows = read_csv(str(out / "populations.csv"))
    assert header == ["t", "l", "m", "r"]
    assert len(rows) == 21
    final = read_json(str(out / "final_populations.json"))
    assert final["target"] == "r"
    assert sum(final["final"].values()) == pytest.approx(1.0, abs=1e-8)


def test_cli_hubbard_spectrum(tmp_path):
    path = _write_yaml(tmp_path / "spec.yaml", {
        "name": "spec-small", "mode": "spectrum",
        "physics": {"E_g": 1.25, "T": 1000.0},
        "flags": {"model": "bose"},
        "numerics": {"n_slices": 41, "rates": {"d_step": 0.5}},
    })
    out = tmp_path / "spec"
    assert main(["spectrum", "--config", path, "--out", str(out)]) == 0
    for name in ("spectrum.csv", "tracks.csv", "crossings.json", "dark_state.csv", "eigenstate_populations.csv"):
        assert (out / name).exists()
    crossings = read_json(str(out / "crossings.json"))
    assert crossings["bands"][crossings["dark_track"]] == "pair"
