"""Run configuration: one TOML file with a section per pipeline stage."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from ringrc.errors import ConfigError
from ringrc.integrator import IntegratorConfig, steps_per_sample
from ringrc.physics import DEFAULT_DEVICE_FILE, MrrParams, tomllib
from ringrc.readout import DEFAULT_LAMBDA, LAMBDA_GRID
from ringrc.tdrc import FeedbackLine, TdrcConfig

DEFAULT_SEEDS = tuple(range(10))

# (tau_fc, tau_th) in seconds
PRESETS = {
    "baseline": (10e-9, 50e-9),
    "thermal": (10e-9, 200e-9),
    "carrier": (1e-6, 50e-9),
    "fast_carrier": (12e-12, 50e-9),
}


@dataclass(frozen=True)
class TaskConfig:
    warmup: int = 100
    train: int = 3000
    test: int = 1000
    # state row k predicts y(k + target_shift)
    target_shift: int = 1
    seeds: tuple = DEFAULT_SEEDS

    def __post_init__(self) -> None:
        if min(self.warmup, self.train, self.test) < 0 or self.train < 2 or self.test < 2:
            raise ConfigError("task sizes must be non-negative with train, test >= 2")
        if self.target_shift < 0:
            raise ConfigError("target_shift must be >= 0")
        if len(set(self.seeds)) != len(self.seeds) or not self.seeds:
            raise ConfigError(f"seeds must be non-empty and distinct, got {self.seeds!r}")

    @property
    def n_symbols(self) -> int:
        return self.warmup + self.train + self.test


@dataclass(frozen=True)
class ReadoutConfig:
    lam: float = DEFAULT_LAMBDA
    search: bool = True
    grid: tuple = LAMBDA_GRID
    val_fraction: float = 0.2
    standardize: bool = True

    def __post_init__(self) -> None:
        if self.lam < 0 or any(g < 0 for g in self.grid):
            raise ConfigError("ridge parameters must be >= 0")
        if self.search and not self.grid:
            raise ConfigError("lambda grid is empty")
        if not 0 < self.val_fraction < 1:
            raise ConfigError("val_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class SweepGrid:
    detuning_ghz: tuple = tuple(-200.0 + 10.0 * i for i in range(41))
    pin_dbm: tuple = tuple(-20.0 + 1.0 * i for i in range(41))
    tau_fc: tuple = (PRESETS["baseline"][0],)
    tau_th: tuple = (PRESETS["baseline"][1],)

    def __post_init__(self) -> None:
        for name in ("detuning_ghz", "pin_dbm", "tau_fc", "tau_th"):
            axis = getattr(self, name)
            if not axis:
                raise ConfigError(f"sweep axis {name} is empty")
            if any(b <= a for a, b in zip(axis, axis[1:])):
                raise ConfigError(f"sweep axis {name} must be strictly increasing")
        if any(t <= 0 for t in self.tau_fc + self.tau_th):
            raise ConfigError("lifetimes must be positive")

    @staticmethod
    def linspace(lo: float, hi: float, n: int) -> tuple:
        if n == 1:
            return (float(lo),)
        return tuple(lo + (hi - lo) * i / (n - 1) for i in range(n))

    def points(self):
        """Grid coordinates in row-major order: tau_fc, tau_th, power, detuning."""
        return [
            (d, p, fc, th)
            for fc in self.tau_fc
            for th in self.tau_th
            for p in self.pin_dbm
            for d in self.detuning_ghz
        ]


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines a result. Hashing this identifies a run."""

    mrr: MrrParams = field(default_factory=MrrParams.default)
    tdrc: TdrcConfig = field(default_factory=TdrcConfig)
    feedback: FeedbackLine = field(default_factory=FeedbackLine)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    task: TaskConfig = field(default_factory=TaskConfig)
    readout: ReadoutConfig = field(default_factory=ReadoutConfig)

    def __post_init__(self) -> None:
        dt = self.integrator.dt
        steps_per_sample(self.tdrc.chip_duration, dt)
        if self.feedback.gain > 0:
            steps_per_sample(self.feedback.delay, dt)

    def to_dict(self) -> dict:
        fb = self.feedback
        return {
            "device": dataclasses.asdict(self.mrr),
            "tdrc": dataclasses.asdict(self.tdrc),
            "feedback": {"delay": fb.delay, "phase": fb.phase, "gain": fb.gain},
            "integrator": dataclasses.asdict(self.integrator),
            "task": {**dataclasses.asdict(self.task), "seeds": list(self.task.seeds)},
            "readout": {**dataclasses.asdict(self.readout), "grid": list(self.readout.grid)},
        }


@dataclass(frozen=True)
class RunConfig:
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    sweep: SweepGrid = field(default_factory=SweepGrid)
    device_file: Path = DEFAULT_DEVICE_FILE
    output_dir: Path = Path("out")
    workers: int = 1

    def to_dict(self) -> dict:
        return {
            **self.experiment.to_dict(),
            "sweep": {k: list(v) for k, v in dataclasses.asdict(self.sweep).items()},
            "device_file": str(self.device_file),
        }

    def config_hash(self) -> str:
        """SHA-256 of the result-determining config. Worker count and paths are excluded."""
        payload = {k: v for k, v in self.to_dict().items() if k != "device_file"}
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def default_workers() -> int:
    env = os.environ.get("RING_RC_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"RING_RC_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ConfigError("RING_RC_THREADS must be >= 1")
        return n
    return 1


def _build(cls, section: dict, name: str, **extra):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(section) - names
    if unknown:
        raise ConfigError(f"unknown keys in [{name}]: {sorted(unknown)}")
    values = {**section, **extra}
    for key, value in values.items():
        if isinstance(value, list):
            values[key] = tuple(value)
    try:
        return cls(**values)
    except TypeError as exc:
        raise ConfigError(f"bad [{name}] section: {exc}") from None


def _sweep_section(section: dict) -> SweepGrid:
    section = dict(section)
    # Axes may be given as explicit lists or as {min, max, points}.
    for key in ("detuning_ghz", "pin_dbm"):
        spec = section.get(key)
        if isinstance(spec, dict):
            try:
                section[key] = SweepGrid.linspace(float(spec["min"]), float(spec["max"]), int(spec["points"]))
            except KeyError as exc:
                raise ConfigError(f"[sweep] {key} range needs min, max and points, missing {exc}") from None
    preset = section.pop("preset", None)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        section.setdefault("tau_fc", [PRESETS[preset][0]])
        section.setdefault("tau_th", [PRESETS[preset][1]])
    return _build(SweepGrid, section, "sweep")


def load_run_config(path: Optional[str | Path] = None, overrides: Optional[dict[str, dict[str, Any]]] = None) -> RunConfig:
    """
    Read a run config file and apply per-section overrides.

    ``overrides`` maps section name to key/value pairs and wins over the file.
    A missing ``path`` means all defaults. Invalid values fail here, before
    any computation.
    """
    raw: dict = {}
    base = Path.cwd()
    if path is not None:
        path = Path(path)
        try:
            with path.open("rb") as fh:
                raw = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"cannot parse config file {path}: {exc}") from None
        base = path.parent
    for section, values in (overrides or {}).items():
        raw.setdefault(section, {}).update({k: v for k, v in values.items() if v is not None})

    known = {"run", "device", "tdrc", "feedback", "integrator", "task", "readout", "sweep"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    run = dict(raw.get("run", {}))
    device_file = run.pop("device", None)
    device_file = DEFAULT_DEVICE_FILE if device_file is None else (base / device_file)
    device_overrides = dict(raw.get("device", {}))
    if "detuning_ghz" in device_overrides:
        device_overrides["delta_omega"] = 2 * math.pi * 1e9 * float(device_overrides.pop("detuning_ghz"))
    mrr = MrrParams.from_toml(device_file, **device_overrides)

    tdrc_section = dict(raw.get("tdrc", {}))
    if "pin_dbm" in tdrc_section:
        tdrc_section["p_in_avg"] = 10 ** (float(tdrc_section.pop("pin_dbm")) / 10) * 1e-3

    experiment = ExperimentConfig(
        mrr=mrr,
        tdrc=_build(TdrcConfig, tdrc_section, "tdrc"),
        feedback=_build(FeedbackLine, raw.get("feedback", {}), "feedback"),
        integrator=_build(IntegratorConfig, raw.get("integrator", {}), "integrator"),
        task=_build(TaskConfig, raw.get("task", {}), "task"),
        readout=_build(ReadoutConfig, raw.get("readout", {}), "readout"),
    )
    workers = run.pop("workers", None)
    output_dir = Path(run.pop("output_dir", "out"))
    if run:
        raise ConfigError(f"unknown keys in [run]: {sorted(run)}")
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    sweep_section = dict(raw.get("sweep", {}))
    if "preset" not in sweep_section:
        # lifetimes not swept explicitly fall back to the device file
        sweep_section.setdefault("tau_fc", [mrr.tau_fc])
        sweep_section.setdefault("tau_th", [mrr.tau_th])
    return RunConfig(
        experiment=experiment,
        sweep=_sweep_section(sweep_section),
        device_file=device_file,
        output_dir=output_dir,
        workers=workers,
    )
