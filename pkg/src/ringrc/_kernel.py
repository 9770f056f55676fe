"""Compiled inner loop: RK4 over the ring equations with a delayed feedback line.

Everything here is in the normalized units of ``physics.KernelCoefficients``.
The drive is piecewise constant: input sample ``n // steps_per_sample`` covers
step ``n``, and the feedback field is read from a ring buffer of through-port
samples taken on the step grid.
"""

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _deriv(a, dN, dT, e, c):
    (delta0, shift_n, shift_t, gamma0, gamma_lin_abs, tpa, fca, kappa, gen, inv_tau_fc, inv_tau_th, heat) = c
    energy = a.real * a.real + a.imag * a.imag
    g_tpa = tpa * energy
    g_fca = fca * dN
    delta = delta0 + shift_n * dN + shift_t * dT
    gamma = gamma0 + g_tpa + g_fca
    da = complex(-gamma, delta) * a + 1j * kappa * e
    ddN = -dN * inv_tau_fc + gen * energy * energy
    ddT = -dT * inv_tau_th + heat * 2.0 * (gamma_lin_abs + g_tpa + g_fca) * energy
    return da, ddN, ddT


@njit(cache=True)
def rk4_single(a, dN, dT, e0, eh, e1, dt, c):
    """One classical RK4 step with drive samples at t, t+dt/2 and t+dt."""
    k1a, k1n, k1t = _deriv(a, dN, dT, e0, c)
    h = 0.5 * dt
    k2a, k2n, k2t = _deriv(a + h * k1a, dN + h * k1n, dT + h * k1t, eh, c)
    k3a, k3n, k3t = _deriv(a + h * k2a, dN + h * k2n, dT + h * k2t, eh, c)
    k4a, k4n, k4t = _deriv(a + dt * k3a, dN + dt * k3n, dT + dt * k3t, e1, c)
    s = dt / 6.0
    return (
        a + s * (k1a + 2.0 * k2a + 2.0 * k3a + k4a),
        dN + s * (k1n + 2.0 * k2n + 2.0 * k3n + k4n),
        dT + s * (k1t + 2.0 * k2t + 2.0 * k3t + k4t),
    )


@njit(cache=True)
def run(a, dN, dT, samples, steps_per_sample, dt, c, delay_steps, fb, stride, out_a, out_n, out_t, out_drop, out_thru):
    """
    Integrate over ``len(samples) * steps_per_sample`` steps.

    ``fb`` is the complex feedback factor gain·exp(iφ); with ``fb == 0`` the
    add port stays dark. Records the state every ``stride`` steps, starting
    with the initial state. Returns the index of the first non-finite step,
    or -1 when the whole run stayed finite.
    """
    kappa = c[7]
    n_steps = samples.shape[0] * steps_per_sample
    use_fb = fb != 0.0 and delay_steps > 0
    buf_len = delay_steps + 1 if use_fb else 1
    buf = np.zeros(buf_len, dtype=np.complex128)

    e_in = samples[0]
    e_thru = e_in + 1j * kappa * a
    buf[0] = e_thru
    out_a[0] = a
    out_n[0] = dN
    out_t[0] = dT
    out_drop[0] = kappa * kappa * (a.real * a.real + a.imag * a.imag)
    out_thru[0] = e_thru
    rec = 1

    for n in range(n_steps):
        e_next = samples[(n + 1) // steps_per_sample] if n + 1 < n_steps else e_in
        # the drive is held over the whole step; only feedback varies inside it
        e0 = e_in
        e1 = e_in
        if use_fb:
            # through-port history: buf[k % buf_len] holds step k
            if n >= delay_steps:
                e0 = e0 + fb * buf[(n - delay_steps) % buf_len]
            if n + 1 >= delay_steps:
                e1 = e1 + fb * buf[(n + 1 - delay_steps) % buf_len]
        a, dN, dT = rk4_single(a, dN, dT, e0, e0, e1, dt, c)
        if not (np.isfinite(a.real) and np.isfinite(a.imag) and np.isfinite(dN) and np.isfinite(dT)):
            return n
        e_in = e_next
        e_thru = e_in + 1j * kappa * a
        if use_fb:
            buf[(n + 1) % buf_len] = e_thru
        if (n + 1) % stride == 0:
            out_a[rec] = a
            out_n[rec] = dN
            out_t[rec] = dT
            out_drop[rec] = kappa * kappa * (a.real * a.real + a.imag * a.imag)
            out_thru[rec] = e_thru
            rec += 1
    return -1
