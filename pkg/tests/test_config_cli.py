import json
from pathlib import Path

import numpy as np
import pytest

from mpemba.cli import main
from mpemba.config import load_config, parse_config
from mpemba.errors import ConfigError

REPO = Path(__file__).resolve().parent.parent
CONFIGS = REPO / "configs"


def write_config(tmp_path, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


BASE = {
    "model": {"name": "single_qubit", "omega": 5.0},
    "bath": {"temperature": 10.0, "gamma": 1.0},
    "initial_state": {"kind": "bloch", "r": [0.276, 0.359, 0.303]},
    "transform": {"kind": "exact"},
    "time_grid": {"t_max": 4.0, "n_points": 101},
    "outputs": {"directory": "out"},
}


class TestSchema:
    def test_valid_config_parses(self, tmp_path):
        cfg = load_config(write_config(tmp_path, BASE))
        assert cfg.model_name == "single_qubit"
        assert cfg.transform.kind == "exact"
        assert cfg.time_grid.times().size == 101

    def test_unknown_top_level_key(self):
        bad = dict(BASE, experiment="x")
        with pytest.raises(ConfigError, match="experiment"):
            parse_config(bad)

    def test_unknown_model_parameter_path_in_error(self):
        bad = dict(BASE, model={"name": "single_qubit", "omege": 5.0})
        with pytest.raises(ConfigError, match="model.omege"):
            parse_config(bad)

    def test_unknown_model_name(self):
        bad = dict(BASE, model={"name": "heisenberg"})
        with pytest.raises(ConfigError, match="model.name"):
            parse_config(bad)

    def test_temperature_and_beta_conflict(self):
        bad = dict(BASE, bath={"temperature": 10.0, "beta": 0.1})
        with pytest.raises(ConfigError, match="bath"):
            parse_config(bad)

    def test_overlong_bloch_vector(self):
        bad = dict(BASE, initial_state={"kind": "bloch", "r": [1.0, 1.0, 1.0]})
        with pytest.raises(ConfigError, match="initial_state.r"):
            parse_config(bad)

    def test_metropolis_requires_budget_fields(self):
        bad = dict(BASE, transform={"kind": "swap-metropolis"})
        with pytest.raises(ConfigError, match="transform"):
            parse_config(bad)

    def test_missing_file_and_bad_json(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "nope.json")
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="JSON"):
            load_config(path)

    def test_checked_in_configs_all_parse(self):
        for path in sorted(CONFIGS.glob("*.json")):
            load_config(path)


class TestCliSpectrum:
    def test_qubit_table(self, tmp_path):
        rc = main(["spectrum", "--config", str(CONFIGS / "qubit_demo.json"), "--out", str(tmp_path)])
        assert rc == 0
        lines = (tmp_path / "spectrum.tsv").read_text().splitlines()
        assert "complex-pair" in lines[0]
        assert len(lines) == 2 + 4

    def test_tfim5_has_1024_rows(self, tmp_path):
        rc = main(["spectrum", "--config", str(CONFIGS / "spectrum_tfim5.json"), "--out", str(tmp_path)])
        assert rc == 0
        lines = (tmp_path / "spectrum.tsv").read_text().splitlines()
        assert len(lines) == 2 + 1024

    def test_malformed_config_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{}")
        rc = main(["spectrum", "--config", str(bad), "--out", str(tmp_path)])
        assert rc == 2
        assert "config error" in capsys.readouterr().err

    def test_degenerate_model_names_fallback_flag(self, tmp_path, capsys):
        rc = main(["spectrum", "--config", str(CONFIGS / "dot_metropolis.json"), "--out", str(tmp_path)])
        assert rc == 3
        assert "--dense-fallback" in capsys.readouterr().err
        rc = main([
            "spectrum", "--config", str(CONFIGS / "dot_metropolis.json"),
            "--out", str(tmp_path), "--dense-fallback",
        ])
        assert rc == 0
        assert "real" in (tmp_path / "spectrum.tsv").read_text().splitlines()[0]


class TestCliEvolve:
    def test_qubit_demo_emits_both_trajectories_with_crossing(self, tmp_path):
        rc = main(["evolve", "--config", str(CONFIGS / "qubit_demo.json"), "--out", str(tmp_path)])
        assert rc == 0
        plain = np.genfromtxt(tmp_path / "trajectory.csv", delimiter=",", names=True)
        moved = np.genfromtxt(tmp_path / "trajectory_transformed.csv", delimiter=",", names=True)
        assert moved["F_neq"][0] > plain["F_neq"][0]
        assert moved["F_neq"][-1] < plain["F_neq"][-1]  # curves crossed
        assert (tmp_path / "trajectory.gp").exists()

    def test_single_point_grid_drops_spohn(self, tmp_path):
        payload = dict(BASE, time_grid={"t_max": 1.0, "n_points": 1}, transform={"kind": "none"})
        cfg = write_config(tmp_path, payload)
        rc = main(["evolve", "--config", str(cfg), "--out", str(tmp_path)])
        assert rc == 0
        header = (tmp_path / "trajectory.csv").read_text().splitlines()[0]
        assert header == "t,F_neq,D,P,C,L1,T1"

    def test_threads_flag_matches_serial(self, tmp_path):
        rc = main(["evolve", "--config", str(CONFIGS / "qubit_demo.json"), "--out", str(tmp_path / "a")])
        assert rc == 0
        rc = main([
            "evolve", "--config", str(CONFIGS / "qubit_demo.json"),
            "--out", str(tmp_path / "b"), "--threads", "2",
        ])
        assert rc == 0
        assert (tmp_path / "a/trajectory.csv").read_bytes() == (tmp_path / "b/trajectory.csv").read_bytes()


class TestCliMpemba:
    def test_qubit_demo_certificate(self, tmp_path):
        rc = main(["mpemba", "--config", str(CONFIGS / "qubit_demo.json"), "--out", str(tmp_path)])
        assert rc == 0
        text = (tmp_path / "certificate.txt").read_text()
        assert "status: ok" in text
        assert "crossing_time: none" not in text

    def test_thermal_input_not_applicable(self, tmp_path):
        payload = dict(BASE, initial_state={"kind": "thermal", "temperature": 10.0})
        cfg = write_config(tmp_path, payload)
        rc = main(["mpemba", "--config", str(cfg), "--out", str(tmp_path)])
        assert rc == 0
        text = (tmp_path / "certificate.txt").read_text()
        assert "status: not-applicable" in text
        assert "fixed point" in text

    def test_outputs_regenerate_bit_identically(self, tmp_path):
        for sub in ("a", "b"):
            rc = main(["mpemba", "--config", str(CONFIGS / "qubit_demo.json"), "--out", str(tmp_path / sub)])
            assert rc == 0
        for name in ("certificate.txt", "trajectory.csv", "trajectory_transformed.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


class TestCliMetropolis:
    def test_swap_config_converges(self, tmp_path):
        rc = main(["metropolis", "--config", str(CONFIGS / "metropolis_swap.json"), "--out", str(tmp_path)])
        assert rc == 0
        lines = (tmp_path / "trace.csv").read_text().splitlines()
        assert lines[0] == "iteration,cost,T_eff,accepted"
        final_cost = float(lines[-1].split(",")[1])
        assert final_cost < 1e-5 or any(float(l.split(",")[1]) < 1e-6 for l in lines[1:])

    def test_seed_flag_changes_walk_deterministically(self, tmp_path):
        args = ["metropolis", "--config", str(CONFIGS / "metropolis_swap.json"), "--seed", "123"]
        assert main(args + ["--out", str(tmp_path / "a")]) == 0
        assert main(args + ["--out", str(tmp_path / "b")]) == 0
        assert (tmp_path / "a/trace.csv").read_bytes() == (tmp_path / "b/trace.csv").read_bytes()

    def test_budget_exhaustion_exit_code(self, tmp_path, capsys):
        payload = json.loads((CONFIGS / "metropolis_swap.json").read_text())
        payload["transform"]["max_total_iterations"] = 25
        payload["transform"]["threshold_eps"] = 1e-14
        cfg = write_config(tmp_path, payload)
        rc = main(["metropolis", "--config", str(cfg), "--out", str(tmp_path)])
        assert rc == 4
        assert "converge" in capsys.readouterr().err
        assert (tmp_path / "trace.csv").exists()

    def test_requires_metropolis_transform(self, tmp_path):
        cfg = write_config(tmp_path, BASE)
        rc = main(["metropolis", "--config", str(cfg), "--out", str(tmp_path)])
        assert rc == 2


class TestOutputDirPrecedence:
    def test_env_overrides_config(self, tmp_path, monkeypatch):
        payload = dict(BASE, outputs={"directory": str(tmp_path / "from_config")})
        cfg = write_config(tmp_path, payload)
        monkeypatch.setenv("MPEMBA_OUT", str(tmp_path / "from_env"))
        rc = main(["spectrum", "--config", str(cfg)])
        assert rc == 0
        assert (tmp_path / "from_env/spectrum.tsv").exists()
        assert not (tmp_path / "from_config").exists()

    def test_flag_overrides_env(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path, BASE)
        monkeypatch.setenv("MPEMBA_OUT", str(tmp_path / "from_env"))
        rc = main(["spectrum", "--config", str(cfg), "--out", str(tmp_path / "from_flag")])
        assert rc == 0
        assert (tmp_path / "from_flag/spectrum.tsv").exists()
        assert not (tmp_path / "from_env").exists()
