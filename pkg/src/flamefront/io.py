"""Run configuration, output sinks and checkpoints."""
from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .evolution import AMPLITUDE_MODES, Sink, StepConfig, physical_omega
from .geometry import FrontState
from .solver import PhysicalParams
from .turbulence import TurbulenceField, synthesize

OUTPUT_ENV = "FLAMEFRONT_OUTPUT_DIR"
CHECKPOINT_VERSION = 1
SNAPSHOT_COLUMNS = ("idx", "x", "y", "phi_minus", "V_s", "psi", "omega", "Y", "kappa")
TIMESERIES_COLUMNS = ("tau", "perimeter", "area", "mean_Vs", "residual") + tuple(
    f"amp_m{m}" for m in AMPLITUDE_MODES)


class ConfigError(ValueError):
    pass


class ResumeError(RuntimeError):
    pass


_DEFAULTS = {
    "physical": {"theta": 6.0, "lambda_c": 0.0},
    "initial": {"radius": 1.0, "modes": [], "growing": False},
    "numerical": {"n_markers": 256, "cfl": 0.25, "filter_keep": 2.0 / 3.0, "resample_every": 10,
                  "t_end": 0.1, "dt": None, "max_steps": None, "gauge_projection": True,
                  "resample_method": "spectral"},
    "turbulence": {"u_rms": 0.0, "integral_scale": 1.0, "n_modes": 64,
                   "spectrum_exponent": -5.0 / 3.0},
    "output": {"directory": "flamefront_out", "snapshot_every": 0, "timeseries_every": 1,
               "checkpoint_every": 0},
    "seed": 0,
}


def _merge(defaults: dict, given: dict, path: str = "") -> dict:
    out = {}
    for key in given:
        if key not in defaults:
            raise ConfigError(f"unknown config key '{path}{key}'")
    for key, default in defaults.items():
        value = given.get(key, default)
        if isinstance(default, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key '{path}{key}' must be an object")
            out[key] = _merge(default, value, f"{path}{key}.")
        else:
            out[key] = value
    return out


@dataclass
class RunConfig:
    physical: dict
    initial: dict
    numerical: dict
    turbulence: dict
    output: dict
    seed: int = 0
    source: Optional[str] = field(default=None, compare=False)

    @classmethod
    def from_dict(cls, data: dict, source: Optional[str] = None) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        merged = _merge(_DEFAULTS, data)
        cfg = cls(**merged, source=source)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        text = Path(path).read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise ConfigError(f"{path}: line {err.lineno}, column {err.colno}: {err.msg}") from err
        return cls.from_dict(data, source=str(path))

    def to_dict(self) -> dict:
        return {"physical": self.physical, "initial": self.initial, "numerical": self.numerical,
                "turbulence": self.turbulence, "output": self.output, "seed": self.seed}

    def validate(self) -> None:
        def num(section, key, cond, msg):
            value = getattr(self, section)[key]
            try:
                ok = cond(value)
            except TypeError:
                ok = False
            if not ok:
                raise ConfigError(f"config key '{section}.{key}' {msg} (got {value!r})")

        num("physical", "theta", lambda v: v >= 1, "must be >= 1")
        num("physical", "lambda_c", lambda v: v >= 0, "must be >= 0")
        num("initial", "radius", lambda v: v > 0, "must be positive")
        radius = self.initial["radius"]
        for i, mode in enumerate(self.initial["modes"]):
            if not (isinstance(mode, (list, tuple)) and len(mode) == 3):
                raise ConfigError(f"config key 'initial.modes[{i}]' must be [m, amplitude, phase]")
            if abs(mode[1]) >= 0.2 * radius:
                raise ConfigError(f"config key 'initial.modes[{i}]' amplitude must be < 0.2 * radius")
        num("numerical", "n_markers", lambda v: int(v) == v and v >= 64 and v % 2 == 0,
            "must be an even integer >= 64")
        num("numerical", "t_end", lambda v: v >= 0, "must be >= 0")
        num("turbulence", "u_rms", lambda v: v >= 0, "must be >= 0")
        num("turbulence", "n_modes", lambda v: int(v) == v and v >= 1, "must be a positive integer")
        try:
            self.step_config()
        except ValueError as err:
            raise ConfigError(f"numerical settings: {err}") from err

    # -- derived objects -------------------------------------------------------

    def params(self) -> PhysicalParams:
        return PhysicalParams(float(self.physical["theta"]), float(self.physical["lambda_c"]))

    def step_config(self) -> StepConfig:
        n, o = self.numerical, self.output
        return StepConfig(cfl=float(n["cfl"]), keep=float(n["filter_keep"]),
                          resample_every=int(n["resample_every"]), t_end=float(n["t_end"]),
                          dt=None if n["dt"] is None else float(n["dt"]),
                          max_steps=None if n["max_steps"] is None else int(n["max_steps"]),
                          resample_method=n["resample_method"],
                          gauge_projection=bool(n["gauge_projection"]),
                          snapshot_every=int(o["snapshot_every"]),
                          timeseries_every=int(o["timeseries_every"]),
                          checkpoint_every=int(o["checkpoint_every"]))

    def turbulence_field(self) -> Optional[TurbulenceField]:
        t = self.turbulence
        if t["u_rms"] == 0:
            return None
        return synthesize(float(t["u_rms"]), float(t["integral_scale"]), int(t["n_modes"]),
                          float(t["spectrum_exponent"]), int(self.seed))

    def initial_state(self, turbulence=None) -> FrontState:
        from .evolution import circle_front

        ini = self.initial
        return circle_front(float(ini["radius"]), int(self.numerical["n_markers"]), self.params(),
                            [tuple(m) for m in ini["modes"]], growing=bool(ini["growing"]),
                            turbulence=turbulence)

    def output_dir(self) -> Path:
        return Path(os.environ.get(OUTPUT_ENV) or self.output["directory"])

    def hash(self) -> str:
        """Digest of everything that affects the trajectory."""
        d = self.to_dict()
        d.pop("output")
        d["numerical"] = {k: v for k, v in d["numerical"].items() if k not in ("t_end", "max_steps")}
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


# -- lossless serialisation ------------------------------------------------------

def _hex(a) -> list:
    return [float(x).hex() for x in np.asarray(a, float).ravel()]


def _unhex(values, shape=None) -> np.ndarray:
    a = np.array([float.fromhex(v) for v in values], float)
    return a.reshape(shape) if shape is not None else a


def state_to_dict(front: FrontState) -> dict:
    return {"n_markers": front.n_markers, "tau": float(front.tau).hex(),
            "markers": _hex(front.markers), "psi": _hex(front.psi), "omega": _hex(front.omega)}


def state_from_dict(d: dict) -> FrontState:
    n = int(d["n_markers"])
    return FrontState(_unhex(d["markers"], (n, 2)), _unhex(d["psi"]), _unhex(d["omega"]),
                      float.fromhex(d["tau"]))


def _turbulence_to_dict(field: Optional[TurbulenceField]) -> Optional[dict]:
    if field is None:
        return None
    d = field.to_dict()
    for key in ("wavevectors", "amplitudes", "phases"):
        d[key] = _hex(getattr(field, key))
    d["n_modes"] = field.n_modes
    return d


def _turbulence_from_dict(d: Optional[dict]) -> Optional[TurbulenceField]:
    if d is None:
        return None
    n = int(d["n_modes"])
    return TurbulenceField(_unhex(d["wavevectors"], (n, 2)), _unhex(d["amplitudes"], (n, 2)),
                           _unhex(d["phases"]), d["u_rms"], d["integral_scale"],
                           d["spectrum_exponent"], d["seed"])


@dataclass
class Checkpoint:
    front: FrontState
    config: RunConfig
    step: int
    turbulence: Optional[TurbulenceField] = None
    version: int = CHECKPOINT_VERSION

    @property
    def tau(self) -> float:
        return self.front.tau

    def to_dict(self) -> dict:
        return {"version": self.version, "step": self.step, "tau": float(self.front.tau).hex(),
                "config": self.config.to_dict(), "config_hash": self.config.hash(),
                "turbulence": _turbulence_to_dict(self.turbulence),
                "state": state_to_dict(self.front)}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps())
        return path

    @classmethod
    def from_dict(cls, d: dict) -> "Checkpoint":
        if d.get("version") != CHECKPOINT_VERSION:
            raise ResumeError(f"unsupported checkpoint version {d.get('version')!r}")
        return cls(state_from_dict(d["state"]), RunConfig.from_dict(d["config"]), int(d["step"]),
                   _turbulence_from_dict(d["turbulence"]), d["version"])

    @classmethod
    def load(cls, path) -> "Checkpoint":
        return cls.from_dict(json.loads(Path(path).read_text()))


# -- sinks -------------------------------------------------------------------

def _fmt(x) -> str:
    return repr(float(x))


def write_snapshot(path, front, frame, trace, params: PhysicalParams) -> Path:
    """CSV snapshot with a self-describing comment header."""
    path = Path(path)
    omega = physical_omega(front, trace, params)
    with path.open("w", newline="") as fh:
        fh.write(f"# tau={_fmt(front.tau)} theta={_fmt(params.theta)} "
                 f"lambda_c={_fmt(params.lambda_c)} N={front.n_markers}\n")
        w = csv.writer(fh)
        w.writerow(SNAPSHOT_COLUMNS)
        cols = (front.markers[:, 0], front.markers[:, 1], trace.phi_minus, trace.v_s, front.psi,
                omega, trace.stretch, frame.curvature)
        for i in range(front.n_markers):
            w.writerow([i] + [_fmt(c[i]) for c in cols])
    return path


def read_snapshot(path) -> tuple[dict, dict]:
    """Header values and columns of a snapshot file."""
    with Path(path).open() as fh:
        header = fh.readline().lstrip("#").split()
        meta = {}
        for item in header:
            key, value = item.split("=")
            meta[key] = int(value) if key == "N" else float(value)
        rows = list(csv.reader(fh))
    names = rows[0]
    data = np.array(rows[1:], float)
    return meta, {name: data[:, i] for i, name in enumerate(names)}


class DirectorySink(Sink):
    """Writes snapshots, the time series and checkpoints below one directory."""

    def __init__(self, directory, config: RunConfig, turbulence=None, resume_tau=None,
                 extra_meta: Optional[dict] = None):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        (self.dir / "snapshots").mkdir(exist_ok=True)
        (self.dir / "checkpoints").mkdir(exist_ok=True)
        self.config = config
        self.params = config.params()
        self.turbulence = turbulence
        self._write_metadata(extra_meta or {})
        ts = self.dir / "timeseries.csv"
        kept = []
        if resume_tau is not None and ts.exists():
            with ts.open() as fh:
                rows = list(csv.reader(fh))
            kept = [r for r in rows[1:] if float(r[0]) < resume_tau]
        self._ts = ts.open("w", newline="")
        self._writer = csv.writer(self._ts)
        self._writer.writerow(TIMESERIES_COLUMNS)
        self._writer.writerows(kept)

    def _write_metadata(self, extra):
        cfg = self.config.step_config()
        meta = {
            "code_version": __version__,
            "config": self.config.to_dict(),
            "config_hash": self.config.hash(),
            "filter": {"keep_fraction": cfg.keep, "applied_every_step": cfg.keep < 1.0},
            "resampling": {"every": cfg.resample_every, "method": cfg.resample_method},
            "gauge_projection": cfg.gauge_projection,
            "turbulence": _turbulence_to_dict(self.turbulence),
            "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        }
        meta.update(extra)
        (self.dir / "metadata.json").write_text(json.dumps(meta, indent=1, sort_keys=True))

    def snapshot(self, step, front, frame, trace, params):
        write_snapshot(self.dir / "snapshots" / f"snap_{step:06d}.csv", front, frame, trace, params)

    def timeseries(self, step, row):
        self._writer.writerow([_fmt(row[c]) for c in TIMESERIES_COLUMNS])
        self._ts.flush()

    def checkpoint(self, step, front):
        Checkpoint(front, self.config, step, self.turbulence).save(
            self.dir / "checkpoints" / f"ckpt_{step:06d}.json")

    def failure(self, step, front, error):
        if front is None:
            return
        with (self.dir / "failure_markers.csv").open("w", newline="") as fh:
            fh.write(f"# tau={_fmt(front.tau)} step={step} error={str(error)!r}\n")
            w = csv.writer(fh)
            w.writerow(("idx", "x", "y", "psi", "omega"))
            for i in range(front.n_markers):
                w.writerow([i, _fmt(front.markers[i, 0]), _fmt(front.markers[i, 1]),
                            _fmt(front.psi[i]), _fmt(front.omega[i])])

    def close(self):
        if not self._ts.closed:
            self._ts.close()


def write_summary(directory, summary) -> Path:
    path = Path(directory) / "summary.json"
    path.write_text(json.dumps(summary.as_record(), indent=1, sort_keys=True))
    return path
