"""Fixed-step RK4 integration of the ring equations."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Optional

import numpy as np

from ringrc import _kernel
from ringrc.errors import ConfigError, ConfigMismatch, NonFinite
from ringrc.physics import (
    E_UNIT,
    N_UNIT,
    P_UNIT,
    T_UNIT,
    DriveField,
    MrrParams,
    MrrState,
    normalized_coefficients,
    rhs,
)

if TYPE_CHECKING:
    from ringrc.tdrc import EncodedWaveform, FeedbackLine

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-12  # s
    record_stride: int = 1

    def __post_init__(self) -> None:
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt must be positive, got {self.dt!r}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ConfigError(f"record_stride must be a positive integer, got {self.record_stride!r}")

    def check_resolution(self, params: MrrParams, chip_duration: float | None = None) -> bool:
        """Warn when dt is coarser than a tenth of the fastest time scale."""
        scales = [params.tau_fc, params.tau_th, params.tau_c]
        if chip_duration is not None:
            scales.append(chip_duration)
        limit = min(scales) / 10.0
        if self.dt > limit * (1 + 1e-9):
            log.warning("dt=%.3g s exceeds min(time scales)/10 = %.3g s", self.dt, limit)
            return False
        return True


def _combine(s: MrrState, k: MrrState, h: float) -> MrrState:
    return MrrState(s.a + h * k.a, s.deltaN + h * k.deltaN, s.deltaT + h * k.deltaT)


def rk4_step(
    state: MrrState,
    drive_at_t: DriveField,
    drive_at_t_half: DriveField,
    drive_at_t_next: DriveField,
    dt: float,
    params: MrrParams,
) -> MrrState:
    """
    Advance the SI-unit model by one classical RK4 step.

    This is the readable reference path; long runs go through
    :func:`integrate`, which evaluates the same update in compiled code.
    """
    if not dt > 0:
        raise ConfigError(f"dt must be positive, got {dt!r}")
    k1 = rhs(state, drive_at_t, params)
    k2 = rhs(_combine(state, k1, dt / 2), drive_at_t_half, params)
    k3 = rhs(_combine(state, k2, dt / 2), drive_at_t_half, params)
    k4 = rhs(_combine(state, k3, dt), drive_at_t_next, params)
    new = MrrState(
        state.a + dt / 6 * (k1.a + 2 * k2.a + 2 * k3.a + k4.a),
        state.deltaN + dt / 6 * (k1.deltaN + 2 * k2.deltaN + 2 * k3.deltaN + k4.deltaN),
        state.deltaT + dt / 6 * (k1.deltaT + 2 * k2.deltaT + 2 * k3.deltaT + k4.deltaT),
    )
    if not new.is_finite():
        raise NonFinite("RK4 step produced a non-finite state; reduce dt or check parameters")
    return new


@dataclass
class Trace:
    """Recorded samples of one integration, SI units."""

    t: np.ndarray
    a: np.ndarray
    deltaN: np.ndarray
    deltaT: np.ndarray
    p_drop: np.ndarray
    e_through: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def state(self, i: int) -> MrrState:
        return MrrState(complex(self.a[i]), float(self.deltaN[i]), float(self.deltaT[i]))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t_s", "re_a", "im_a", "deltaN_m3", "deltaT_K", "p_drop_W"])
            for row in zip(self.t, self.a.real, self.a.imag, self.deltaN, self.deltaT, self.p_drop):
                w.writerow([repr(float(v)) for v in row])


def steps_per_sample(sample_period: float, dt: float) -> int:
    ratio = sample_period / dt
    k = int(round(ratio))
    if k < 1 or abs(ratio - k) > 1e-9 * max(1.0, ratio):
        raise ConfigMismatch(f"sample period {sample_period!r} s is not an integer multiple of dt={dt!r} s")
    return k


def integrate(
    initial: MrrState,
    waveform: "EncodedWaveform",
    params: MrrParams,
    cfg: IntegratorConfig,
    feedback: Optional["FeedbackLine"] = None,
) -> Trace:
    """
    Integrate the ring under ``waveform`` with an optional through-to-add loop.

    The waveform is held constant over each of its samples, and its sample
    period must be an integer multiple of ``cfg.dt``. With a feedback line,
    E_add(t) = gain·exp(iφ)·E_through(t - delay), zero before the first
    delay has elapsed. Records every ``cfg.record_stride`` steps, t=0 included.
    """
    if not initial.is_finite():
        raise NonFinite("initial state is not finite", t=0.0)
    k = steps_per_sample(waveform.sample_period, cfg.dt)
    samples = np.ascontiguousarray(waveform.samples, dtype=np.complex128) / math.sqrt(P_UNIT)
    n_steps = len(samples) * k
    n_rec = n_steps // cfg.record_stride + 1

    if feedback is not None and feedback.gain != 0.0:
        delay_steps = steps_per_sample(feedback.delay, cfg.dt)
        fb = feedback.gain * np.exp(1j * feedback.phase)
    else:
        delay_steps, fb = 0, 0j

    out_a = np.empty(n_rec, np.complex128)
    out_n = np.empty(n_rec)
    out_t = np.empty(n_rec)
    out_drop = np.empty(n_rec)
    out_thru = np.empty(n_rec, np.complex128)
    coeffs = tuple(normalized_coefficients(params))
    failed = _kernel.run(
        complex(initial.a) / math.sqrt(E_UNIT),
        initial.deltaN / N_UNIT,
        initial.deltaT,
        samples,
        k,
        cfg.dt / T_UNIT,
        coeffs,
        delay_steps,
        complex(fb),
        cfg.record_stride,
        out_a,
        out_n,
        out_t,
        out_drop,
        out_thru,
    )
    if failed >= 0:
        t_fail = (failed + 1) * cfg.dt
        raise NonFinite(f"state became non-finite at t={t_fail:.6g} s", t=t_fail)
    return Trace(
        t=np.arange(n_rec) * cfg.record_stride * cfg.dt,
        a=out_a * math.sqrt(E_UNIT),
        deltaN=out_n * N_UNIT,
        deltaT=out_t,
        p_drop=out_drop * P_UNIT,
        e_through=out_thru * math.sqrt(P_UNIT),
    )
