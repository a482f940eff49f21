"""Numpy fallback for the compiled RK4 kernels in _rk4.pyx.

Same signatures and the same arithmetic. The mask is applied by zeroing
coupling-table entries up front, which adds exact zeros where the compiled
kernel skips terms, so both agree to floating-point roundoff.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"

# block id per (row channel, col channel): 0 ++, 1 --, 2 +-, 3 -+
_BLOCK_ID = np.array(
    [[0, 0, 2, 2], [0, 0, 2, 2], [3, 3, 1, 1], [3, 3, 1, 1]], dtype=np.intp
)


def _envelope(t, ramp, total):
    if t < 0.0 or t > total:
        return 0.0
    if ramp > 0.0:
        if t < ramp:
            return math.sin(math.pi * t / (2.0 * ramp)) ** 2
        if t > total - ramp:
            return math.sin(math.pi * (total - t) / (2.0 * ramp)) ** 2
    return 1.0


def _envelope_slope(t, ramp, total):
    if t < 0.0 or t > total or ramp <= 0.0:
        return 0.0
    if t < ramp:
        return (math.pi / (2.0 * ramp)) * math.sin(math.pi * t / ramp)
    if t > total - ramp:
        return -(math.pi / (2.0 * ramp)) * math.sin(math.pi * (total - t) / ramp)
    return 0.0


def _masked(table, mask):
    gate = np.asarray(mask, dtype=bool)[_BLOCK_ID]
    return np.where(gate[None, :, :], table, 0.0)


def _dirac_deriv(t, b, en, l_minus, l_plus, amp, omega, ramp, total):
    v = -(0.5 * amp) * math.sin(omega * t) * _envelope(t, ramp, total)
    if v == 0.0:
        return np.zeros_like(b)
    u = np.exp(1j * en * t)
    # column factor conj(e^{i gamma' E t}) per channel, row factor e^{i gamma E t}
    colf = np.empty_like(b)
    colf[:, :2] = np.conj(u)[:, None]
    colf[:, 2:] = u[:, None]
    roww = np.empty_like(b)
    roww[:, :2] = u[:, None]
    roww[:, 2:] = np.conj(u)[:, None]
    w = colf * b
    acc = np.zeros_like(b)
    acc[1:] = np.einsum("mrc,mc->mr", l_minus[1:], w[:-1])
    acc[:-1] += np.einsum("mrc,mc->mr", l_plus[:-1], w[1:])
    return (-1j * v) * roww * acc


def dirac_rk4(b, t0, n_steps, h, energies, l_minus, l_plus, mask,
              amp, omega, ramp, total):
    """Advance b in place by n_steps of size h starting at t0."""
    lm = _masked(np.asarray(l_minus), mask)
    lp = _masked(np.asarray(l_plus), mask)
    en = np.asarray(energies)
    h2 = 0.5 * h
    h6 = h / 6.0
    for i in range(n_steps):
        t = t0 + i * h
        k1 = _dirac_deriv(t, b, en, lm, lp, amp, omega, ramp, total)
        k2 = _dirac_deriv(t + h2, b + h2 * k1, en, lm, lp, amp, omega, ramp, total)
        k3 = _dirac_deriv(t + h2, b + h2 * k2, en, lm, lp, amp, omega, ramp, total)
        k4 = _dirac_deriv(t + h, b + h * k3, en, lm, lp, amp, omega, ramp, total)
        b += h6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _traj_deriv(t, s, amp, kl, omega, ramp, total, gamma_one):
    xi = _envelope(t, ramp, total)
    xis = _envelope_slope(t, ramp, total)
    cos_x = math.cos(kl * s[0])
    sin_x = math.sin(kl * s[0])
    sin_t = math.sin(omega * t)
    cos_t = math.cos(omega * t)
    e_field = -amp * kl * cos_x * (cos_t * xi + sin_t * xis / omega)
    b_field = amp * kl * sin_x * sin_t * xi
    if gamma_one:
        g = 1.0
    else:
        g = math.sqrt(1.0 + s[3] ** 2 + s[4] ** 2 + s[5] ** 2)
    return np.array(
        [
            s[3] / g,
            s[4] / g,
            s[5] / g,
            -b_field * s[5] / g,
            0.0,
            e_field + b_field * s[3] / g,
            e_field * s[5] / g,
        ]
    )


def traj_rk4(s, t0, n_steps, h, amp, kl, omega, ramp, total, gamma_one):
    """Advance the 7-component trajectory state in place."""
    cur = np.asarray(s, dtype=float).copy()
    h2 = 0.5 * h
    h6 = h / 6.0
    for i in range(n_steps):
        t = t0 + i * h
        k1 = _traj_deriv(t, cur, amp, kl, omega, ramp, total, gamma_one)
        k2 = _traj_deriv(t + h2, cur + h2 * k1, amp, kl, omega, ramp, total, gamma_one)
        k3 = _traj_deriv(t + h2, cur + h2 * k2, amp, kl, omega, ramp, total, gamma_one)
        k4 = _traj_deriv(t + h, cur + h * k3, amp, kl, omega, ramp, total, gamma_one)
        cur += h6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    s[:] = cur
