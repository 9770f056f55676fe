"""
Time-delay reservoir around the ring: masking, optical encoding, the
through-to-add delay loop and drop-port sampling into virtual nodes.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ringrc.errors import BiasTooSmall, ConfigError, ConfigMismatch
from ringrc.integrator import IntegratorConfig, integrate, steps_per_sample
from ringrc.physics import MrrParams, MrrState

ENCODINGS = ("power", "field")


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) * 1e-3


@dataclass(frozen=True)
class TdrcConfig:
    n_nodes: int = 50
    chip_duration: float = 20e-12  # s, one virtual node at 50 GBd
    bias_beta: float = 8.0
    p_in_avg: float = 1e-3  # W
    mask_seed: int = 0
    encoding: str = "power"

    def __post_init__(self) -> None:
        if self.n_nodes < 1:
            raise ConfigError(f"n_nodes must be >= 1, got {self.n_nodes}")
        if not self.chip_duration > 0:
            raise ConfigError(f"chip_duration must be positive, got {self.chip_duration!r}")
        if not (math.isfinite(self.p_in_avg) and self.p_in_avg >= 0):
            raise ConfigError(f"p_in_avg must be >= 0, got {self.p_in_avg!r}")
        if self.encoding not in ENCODINGS:
            raise ConfigError(f"encoding must be one of {ENCODINGS}, got {self.encoding!r}")

    @property
    def symbol_duration(self) -> float:
        return self.n_nodes * self.chip_duration


@dataclass
class FeedbackLine:
    """
    Through-to-add delay loop: E_add(t) = gain·exp(i·phase)·E_through(t - delay).

    The compiled integrator keeps its own copy of the delay buffer; the
    ``push``/``read`` methods serve step-by-step Python loops.
    """

    delay: float = 0.5e-9  # s
    phase: float = 0.0  # rad
    gain: float = 1.0
    buffer: deque = field(default_factory=deque, repr=False)

    def __post_init__(self) -> None:
        if not 0.0 <= self.gain <= 1.0:
            raise ConfigError(f"feedback gain must lie in [0, 1], got {self.gain!r}")
        if not self.delay > 0:
            raise ConfigError(f"feedback delay must be positive, got {self.delay!r}")

    @property
    def factor(self) -> complex:
        return self.gain * complex(math.cos(self.phase), math.sin(self.phase))

    def prime(self, dt: float) -> None:
        """Empty the line: ``delay/dt`` zero samples standing for t < 0."""
        n = steps_per_sample(self.delay, dt)
        self.buffer = deque([0j] * n, maxlen=n + 1)

    def push(self, e_through: complex) -> None:
        """Append the through field of the current grid time."""
        self.buffer.append(e_through)

    def read(self, ahead: int = 0) -> complex:
        """
        E_add at the current grid time (``ahead=0``) or one step later
        (``ahead=1``). Valid after the current through field was pushed.
        """
        return self.factor * self.buffer[ahead]


@dataclass(frozen=True)
class EncodedWaveform:
    """Input-port envelope [sqrt(W)], one sample per chip, held for ``sample_period``."""

    samples: np.ndarray
    sample_period: float
    n_symbols: int
    modulation_index: float

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.samples) ** 2


@dataclass(frozen=True)
class StateMatrix:
    """Drop-port power [W] at each virtual node, one row per symbol."""

    states: np.ndarray
    modulation_index: float = float("nan")

    @property
    def shape(self):
        return self.states.shape

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"node_{j}" for j in range(self.states.shape[1])])
            for row in self.states:
                w.writerow([repr(float(v)) for v in row])


def generate_mask(seed: int, n_nodes: int) -> np.ndarray:
    """I.i.d. uniform [0, 1] mask, reused for every symbol."""
    if n_nodes < 1:
        raise ConfigError(f"n_nodes must be >= 1, got {n_nodes}")
    return np.random.default_rng(seed).uniform(0.0, 1.0, size=n_nodes)


def encode(u, mask, cfg: TdrcConfig, dt: float) -> EncodedWaveform:
    """
    Modulate the pump with u(k)·m(j) + β, one chip per mask entry.

    In ``power`` encoding the optical power follows the masked input; in
    ``field`` encoding the field amplitude does. Either way the average
    power is rescaled to ``cfg.p_in_avg``.
    """
    steps_per_sample(cfg.chip_duration, dt)
    u = np.asarray(u, dtype=float)
    mask = np.asarray(mask, dtype=float)
    if mask.shape != (cfg.n_nodes,):
        raise ConfigMismatch(f"mask has shape {mask.shape}, expected ({cfg.n_nodes},)")
    drive = (u[:, None] * mask[None, :] + cfg.bias_beta).ravel()
    if np.any(drive <= 0):
        raise BiasTooSmall(f"bias {cfg.bias_beta} does not keep u·m + bias positive (min {drive.min():.3g})")
    power = drive if cfg.encoding == "power" else drive**2
    power = power * (cfg.p_in_avg / power.mean()) if cfg.p_in_avg > 0 else np.zeros_like(power)
    pmax, pmin = power.max(), power.min()
    index = float((pmax - pmin) / (pmax + pmin)) if pmax > 0 else 0.0
    return EncodedWaveform(
        samples=np.sqrt(power).astype(np.complex128),
        sample_period=cfg.chip_duration,
        n_symbols=len(u),
        modulation_index=index,
    )


def run_reservoir(
    u,
    mrr: MrrParams,
    cfg: TdrcConfig,
    fb: Optional[FeedbackLine],
    icfg: IntegratorConfig,
    warmup_symbols: int = 100,
    mask: Optional[np.ndarray] = None,
) -> StateMatrix:
    """
    Drive the ring with the encoded input and sample the drop port.

    Each node value is the drop power at the end of its chip. The ring starts
    empty and cold; the first ``warmup_symbols`` rows are discarded.
    """
    if warmup_symbols < 0 or warmup_symbols > len(u):
        raise ConfigError(f"warmup_symbols must lie in [0, {len(u)}], got {warmup_symbols}")
    if mask is None:
        mask = generate_mask(cfg.mask_seed, cfg.n_nodes)
    waveform = encode(u, mask, cfg, icfg.dt)
    stride = steps_per_sample(cfg.chip_duration, icfg.dt)
    icfg.check_resolution(mrr, cfg.chip_duration)
    trace = integrate(MrrState(), waveform, mrr, IntegratorConfig(icfg.dt, stride), fb)
    states = trace.p_drop[1:].reshape(len(u), cfg.n_nodes)
    return StateMatrix(states=states[warmup_symbols:], modulation_index=waveform.modulation_index)
