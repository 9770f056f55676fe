"""Analytic oracle battery run by ``ringrc validate``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ringrc.errors import RingRCError
from ringrc.integrator import IntegratorConfig, integrate
from ringrc.physics import C_LIGHT, MrrParams, MrrState, steady_state_energy_linear
from ringrc.readout import nmse, ridge_train
from ringrc.tasks import narma10_response
from ringrc.tdrc import EncodedWaveform

NARMA_FIXED_POINT = 0.7 - math.sqrt(0.29)


@dataclass
class OracleResult:
    name: str
    passed: bool
    measured: float
    tolerance: str
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: measured={self.measured:.6g} tolerance={self.tolerance} {self.detail}".rstrip()


def constant_waveform(value: complex, n: int, period: float) -> EncodedWaveform:
    return EncodedWaveform(
        samples=np.full(n, value, dtype=np.complex128), sample_period=period, n_symbols=n, modulation_index=0.0
    )


def linear_gamma(params: MrrParams) -> float:
    return 2.0 / params.tau_c + C_LIGHT * params.alpha / (2.0 * params.n_si)


def _linear_decay_error(params: MrrParams, gamma: float, t_end: float, dt: float) -> float:
    n = max(1, int(round(t_end / dt)))
    a0 = 1e-7  # sqrt(J)
    tr = integrate(MrrState(a=a0), constant_waveform(0j, n, dt), params, IntegratorConfig(dt, n))
    exact = a0 * math.exp(-gamma * n * dt)
    return abs(tr.a[-1] - exact) / exact


def decay_convergence_ratio(params: MrrParams, dt: float, gamma: float | None = None, lifetimes: float = 5.0):
    """Error ratio of the mode-amplitude decay at dt versus dt/2 (about 16 for RK4)."""
    p = params.linearized().replace(delta_omega=0.0)
    if gamma is None:
        gamma = linear_gamma(p)
    t_end = lifetimes / gamma
    e1 = _linear_decay_error(p, gamma, t_end, dt)
    e2 = _linear_decay_error(p, gamma, t_end, dt / 2)
    return e1 / e2, e1, e2


def relaxation_error(params: MrrParams, dt: float, which: str, lifetimes: float = 5.0) -> float:
    """Max relative deviation of a free carrier or thermal decay from the exponential."""
    tau = params.tau_fc if which == "carrier" else params.tau_th
    n = int(round(lifetimes * tau / dt))
    stride = max(1, n // 200)
    n = (n // stride) * stride
    start = MrrState(deltaN=1e23) if which == "carrier" else MrrState(deltaT=1.0)
    tr = integrate(start, constant_waveform(0j, n, dt), params, IntegratorConfig(dt, stride))
    values = tr.deltaN / 1e23 if which == "carrier" else tr.deltaT
    exact = np.exp(-tr.t / tau)
    return float(np.max(np.abs(values - exact) / exact))


def lorentzian_error(params: MrrParams, dt: float, detuning: float, p_in: float = 1e-3, lifetimes: float = 10.0) -> float:
    p = params.linearized().replace(delta_omega=detuning)
    gamma = linear_gamma(p)
    n = int(math.ceil(lifetimes / gamma / dt))
    e_in = math.sqrt(p_in)
    tr = integrate(MrrState(), constant_waveform(e_in, n, dt), p, IntegratorConfig(dt, n))
    expected = steady_state_energy_linear(e_in, p)
    return abs(abs(tr.a[-1]) ** 2 - expected) / expected


def ridge_oracle_error(n_systems: int = 100, rows: int = 200, cols: int = 51, lam: float = 1e-3, seed: int = 0) -> float:
    """Worst relative gap between ridge_train and a least-squares solve of the augmented system."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_systems):
        X = rng.standard_normal((rows, cols))
        y = rng.standard_normal(rows)
        w = ridge_train(X, y, lam).weights
        A = np.vstack([X, math.sqrt(lam) * np.eye(cols)])
        b = np.concatenate([y, np.zeros(cols)])
        ref = np.linalg.lstsq(A, b, rcond=None)[0]
        worst = max(worst, float(np.linalg.norm(w - ref) / np.linalg.norm(ref)))
    return worst


def run_all(params: MrrParams, dt: float) -> list[OracleResult]:
    out: list[OracleResult] = []

    def guard(name, tol, fn):
        try:
            out.append(fn())
        except RingRCError as exc:
            out.append(OracleResult(name, False, float("nan"), tol, f"({type(exc).__name__}: {exc})"))

    scales = {"tau_fc": params.tau_fc, "tau_th": params.tau_th, "tau_c": params.tau_c}
    fastest = min(scales, key=scales.get)
    out.append(
        OracleResult(
            "resolution_guard",
            dt <= scales[fastest] / 10 * (1 + 1e-9),
            dt,
            f"<= {fastest}/10 = {scales[fastest] / 10:.3g} s",
        )
    )

    def order():
        ratio, e1, e2 = decay_convergence_ratio(params, dt)
        return OracleResult("rk4_order", 12.0 <= ratio <= 20.0, ratio, "[12, 20]", f"(err dt={e1:.3g}, dt/2={e2:.3g})")

    guard("rk4_order", "[12, 20]", order)

    for which in ("carrier", "thermal"):
        def relax(which=which):
            err = relaxation_error(params, dt, which)
            return OracleResult(f"{which}_relaxation", err <= 1e-6, err, "<= 1e-6 relative")

        guard(f"{which}_relaxation", "<= 1e-6 relative", relax)

    gamma = linear_gamma(params)
    for label, det in (("-gamma", -gamma), ("0", 0.0), ("+gamma", gamma)):
        def lor(det=det, label=label):
            err = lorentzian_error(params, dt, det)
            return OracleResult(f"lorentzian[{label}]", err <= 5e-3, err, "<= 0.5%")

        guard(f"lorentzian[{label}]", "<= 0.5%", lor)

    err = ridge_oracle_error(n_systems=20)
    out.append(OracleResult("ridge_normal_equations", err <= 1e-10, err, "<= 1e-10 relative"))

    target = np.array([0.0, 1.0, 2.0, 3.0])
    hand = nmse(np.array([0.0, 1.0, 2.0, 4.0]), target)
    mean_pred = nmse(np.full(4, target.mean()), target)
    ok = abs(hand - 0.2) <= 1e-12 and abs(mean_pred - 1.0) <= 1e-12
    out.append(OracleResult("nmse_definition", ok, hand, "0.2 and mean-predictor 1.0 within 1e-12"))

    y = narma10_response(np.zeros(220))
    gap = abs(y[210] - NARMA_FIXED_POINT)
    out.append(OracleResult("narma10_fixed_point", gap <= 1e-6, gap, "<= 1e-6 after 200 steps"))
    return out
