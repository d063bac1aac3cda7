import json

import numpy as np
import pytest

from flamefront.cli import main
from flamefront.io import (OUTPUT_ENV, SNAPSHOT_COLUMNS, TIMESERIES_COLUMNS, Checkpoint,
                           ConfigError, RunConfig, read_snapshot, state_from_dict, state_to_dict)
from flamefront.turbulence import synthesize


def small_config(**sections):
    cfg = {"physical": {"theta": 6.0},
           "initial": {"radius": 1.0, "modes": [[3, 0.01, 0.0]]},
           "numerical": {"n_markers": 64, "t_end": 0.02, "resample_every": 3},
           "output": {"snapshot_every": 2, "checkpoint_every": 2}}
    for key, value in sections.items():
        cfg.setdefault(key, {}).update(value)
    return cfg


def write_config(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


@pytest.mark.parametrize("section, key, value", [
    ("physical", "theta", 0.5), ("initial", "radius", 0.0), ("initial", "modes", [[3, 0.3, 0]]),
    ("numerical", "n_markers", 32), ("numerical", "n_markers", 65), ("numerical", "cfl", 0.9),
    ("turbulence", "u_rms", -0.1)])
def test_config_validation(section, key, value):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(small_config(**{section: {key: value}}))


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="numerical.markers"):
        RunConfig.from_dict(small_config(numerical={"markers": 64}))


def test_parse_error_reports_location(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "physical": {"theta": 6.0,}\n}')
    with pytest.raises(ConfigError, match="line 2"):
        RunConfig.from_file(path)


def test_hash_ignores_output_and_duration():
    a = RunConfig.from_dict(small_config())
    b = RunConfig.from_dict(small_config(numerical={"t_end": 5.0}, output={"directory": "x"}))
    c = RunConfig.from_dict(small_config(physical={"theta": 5.0}))
    assert a.hash() == b.hash() != c.hash()


def test_state_hex_round_trip():
    rng = np.random.default_rng(0)
    cfg = RunConfig.from_dict(small_config())
    front = cfg.initial_state().replace(psi=rng.standard_normal(64), tau=0.1 + 1e-17)
    back = state_from_dict(state_to_dict(front))
    assert np.array_equal(back.markers, front.markers)
    assert np.array_equal(back.psi, front.psi) and back.tau == front.tau


def test_checkpoint_byte_identical(tmp_path):
    cfg = RunConfig.from_dict(small_config(turbulence={"u_rms": 0.2}))
    turb = cfg.turbulence_field()
    ck = Checkpoint(cfg.initial_state(turb), cfg, 7, turb)
    path = ck.save(tmp_path / "a.json")
    again = Checkpoint.load(path)
    assert again.dumps() == path.read_text()
    assert again.step == 7
    assert np.array_equal(again.turbulence.amplitudes, turb.amplitudes)


def test_checkpoint_version_checked(tmp_path):
    cfg = RunConfig.from_dict(small_config())
    d = Checkpoint(cfg.initial_state(), cfg, 0).to_dict()
    d["version"] = 99
    with pytest.raises(Exception, match="version"):
        Checkpoint.from_dict(d)


def test_dispersion_command(capsys):
    assert main(["dispersion", "--theta", "5", "--k", "1"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["sigma"] == pytest.approx(1.1736, abs=1e-4)
    assert rec["residual"] < 1e-12


def test_dispersion_bad_wavenumber(capsys):
    assert main(["dispersion", "--theta", "5", "--k", "-1"]) == 2


def test_run_outputs(tmp_path, capsys):
    cfg_path = write_config(tmp_path, small_config())
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg_path), "--output", str(out)]) == 0
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["config_hash"] == RunConfig.from_file(cfg_path).hash()
    assert meta["filter"]["keep_fraction"] == pytest.approx(2 / 3)
    rows = (out / "timeseries.csv").read_text().splitlines()
    assert rows[0].split(",") == list(TIMESERIES_COLUMNS)
    snaps = sorted((out / "snapshots").glob("*.csv"))
    header, cols = read_snapshot(snaps[0])
    assert header["N"] == 64 and header["theta"] == 6.0
    assert tuple(cols) == SNAPSHOT_COLUMNS
    assert (out / "summary.json").exists()
    assert sorted((out / "checkpoints").glob("*.json"))


def test_circle_run_mean_speed(tmp_path):
    cfg = small_config(initial={"modes": []}, output={"snapshot_every": 0, "checkpoint_every": 0})
    out = tmp_path / "circle"
    assert main(["run", "--config", str(write_config(tmp_path, cfg)), "--output", str(out)]) == 0
    lines = (out / "timeseries.csv").read_text().splitlines()[1:]
    mean_vs = np.array([float(r.split(",")[3]) for r in lines])
    assert np.all(np.abs(mean_vs / 6.0 - 1) < 0.005)


def test_output_dir_from_environment(tmp_path, monkeypatch):
    target = tmp_path / "env_out"
    monkeypatch.setenv(OUTPUT_ENV, str(target))
    cfg = small_config(numerical={"max_steps": 1})
    assert main(["run", "--config", str(write_config(tmp_path, cfg))]) == 0
    assert (target / "metadata.json").exists()


def test_resume_matches_uninterrupted(tmp_path):
    cfg_path = write_config(tmp_path, small_config())
    full, part = tmp_path / "full", tmp_path / "part"
    assert main(["run", "--config", str(cfg_path), "--output", str(full)]) == 0
    ck = full / "checkpoints" / "ckpt_000002.json"
    assert main(["run", "--config", str(cfg_path), "--output", str(part),
                 "--resume", str(ck)]) == 0
    a = json.loads((full / "summary.json").read_text())
    b = json.loads((part / "summary.json").read_text())
    assert a["area"] == b["area"] and a["tau"] == b["tau"]
    tail = lambda d: (d / "timeseries.csv").read_text().splitlines()[-1]
    assert tail(full) == tail(part)


def test_resume_refuses_changed_config(tmp_path, capsys):
    cfg_path = write_config(tmp_path, small_config())
    out = tmp_path / "a"
    assert main(["run", "--config", str(cfg_path), "--output", str(out)]) == 0
    other = write_config(tmp_path, small_config(physical={"theta": 5.0}), "other.json")
    ck = str(out / "checkpoints" / "ckpt_000002.json")
    assert main(["run", "--config", str(other), "--output", str(tmp_path / "b"),
                 "--resume", ck]) == 2
    assert "different configuration" in capsys.readouterr().err
    assert main(["run", "--config", str(other), "--output", str(tmp_path / "b"),
                 "--resume", ck, "--force"]) == 0


def test_bad_config_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{")
    assert main(["run", "--config", str(path)]) == 2
    assert "line 1" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 2


def test_deterministic_outputs(tmp_path):
    cfg_path = write_config(tmp_path, small_config(turbulence={"u_rms": 0.1}))
    for name in ("a", "b"):
        assert main(["run", "--config", str(cfg_path), "--output", str(tmp_path / name)]) == 0
    for rel in ("timeseries.csv", "snapshots/snap_000002.csv", "checkpoints/ckpt_000002.json"):
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()


def test_frankel_command(tmp_path):
    cfg = small_config(physical={"theta": 1.2})
    out = tmp_path / "fr"
    assert main(["frankel", "--config", str(write_config(tmp_path, cfg)), "--output", str(out)]) == 0
    assert json.loads((out / "metadata.json").read_text())["model"] == "small-expansion"


def test_turbulence_recorded_in_metadata(tmp_path):
    cfg = small_config(turbulence={"u_rms": 0.1}, numerical={"max_steps": 1})
    out = tmp_path / "t"
    assert main(["run", "--config", str(write_config(tmp_path, cfg)), "--output", str(out)]) == 0
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["turbulence"]["n_modes"] == 64
    assert meta["turbulence"]["seed"] == 0


def test_seed_changes_turbulence():
    a = RunConfig.from_dict(small_config(turbulence={"u_rms": 0.1})).turbulence_field()
    b = RunConfig.from_dict(dict(small_config(turbulence={"u_rms": 0.1}), seed=1)).turbulence_field()
    assert not np.array_equal(a.phases, b.phases)
    assert np.array_equal(a.amplitudes, synthesize(0.1, seed=0).amplitudes)
