# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled fixed-step RK4 kernels.

Two hot loops live here: the interaction-picture mode-ladder amplitude
integrator and the relativistic trajectory integrator. kdlab selects this
module at import when the extension built, otherwise the numpy twins in
_rk4_py take over (same signatures, same arithmetic).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport M_PI, cos, sin, sqrt

BACKEND = "compiled"


cdef inline double _envelope(double t, double ramp, double total) nogil:
    cdef double s
    if t < 0.0 or t > total:
        return 0.0
    if ramp > 0.0:
        if t < ramp:
            s = sin(M_PI * t / (2.0 * ramp))
            return s * s
        if t > total - ramp:
            s = sin(M_PI * (total - t) / (2.0 * ramp))
            return s * s
    return 1.0


cdef inline double _envelope_slope(double t, double ramp, double total) nogil:
    if t < 0.0 or t > total or ramp <= 0.0:
        return 0.0
    if t < ramp:
        return (M_PI / (2.0 * ramp)) * sin(M_PI * t / ramp)
    if t > total - ramp:
        return -(M_PI / (2.0 * ramp)) * sin(M_PI * (total - t) / ramp)
    return 0.0


# ------------------------------------------------------------------ Dirac

cdef void _dirac_deriv(double t,
                       double complex[:, ::1] b,
                       double complex[:, ::1] out,
                       const double[::1] en,
                       const double[:, :, ::1] l_minus,
                       const double[:, :, ::1] l_plus,
                       const unsigned char[::1] mask,
                       double amp, double omega, double ramp, double total,
                       double[::1] ph_re, double[::1] ph_im) nogil:
    """out = db/dt for the interaction picture amplitudes b[mode, channel].

    The diagonal +-E_n phases are analytic; only the neighbor couplings
    -i v(t) L e^{i(gamma E_n - gamma' E_n') t} are integrated, with
    v(t) = -(eA0/2) sin(omega t) xi(t). Channel order (+u,+d,-u,-d); the
    mask gates the four (gamma, gamma') blocks by skipping, not scaling,
    so an all-on mask executes exactly the unmasked arithmetic.
    """
    cdef Py_ssize_t m_count = b.shape[0]
    cdef Py_ssize_t m, r, c, q
    cdef int rn, cn, bid
    cdef double v = -(0.5 * amp) * sin(omega * t) * _envelope(t, ramp, total)
    cdef double complex acc, w, rowf
    cdef double lv

    if v == 0.0:
        for m in range(m_count):
            for r in range(4):
                out[m, r] = 0.0
        return

    for m in range(m_count):
        ph_re[m] = cos(en[m] * t)
        ph_im[m] = sin(en[m] * t)

    for m in range(m_count):
        for r in range(4):
            rn = 1 if r >= 2 else 0
            acc = 0.0
            # neighbor n-1
            if m > 0:
                q = m - 1
                for c in range(4):
                    lv = l_minus[m, r, c]
                    if lv != 0.0:
                        cn = 1 if c >= 2 else 0
                        bid = (1 if cn else 3) if rn else (2 if cn else 0)
                        if mask[bid]:
                            # column factor conj(e^{i gamma' E_q t})
                            if cn:
                                w = ph_re[q] + 1j * ph_im[q]
                            else:
                                w = ph_re[q] - 1j * ph_im[q]
                            acc = acc + lv * w * b[q, c]
            # neighbor n+1
            if m < m_count - 1:
                q = m + 1
                for c in range(4):
                    lv = l_plus[m, r, c]
                    if lv != 0.0:
                        cn = 1 if c >= 2 else 0
                        bid = (1 if cn else 3) if rn else (2 if cn else 0)
                        if mask[bid]:
                            if cn:
                                w = ph_re[q] + 1j * ph_im[q]
                            else:
                                w = ph_re[q] - 1j * ph_im[q]
                            acc = acc + lv * w * b[q, c]
            if rn:
                rowf = ph_re[m] - 1j * ph_im[m]
            else:
                rowf = ph_re[m] + 1j * ph_im[m]
            out[m, r] = -1j * v * rowf * acc


def dirac_rk4(double complex[:, ::1] b, double t0, long n_steps, double h,
              const double[::1] energies,
              const double[:, :, ::1] l_minus, const double[:, :, ::1] l_plus,
              const unsigned char[::1] mask,
              double amp, double omega, double ramp, double total):
    """Advance b in place by n_steps of size h starting at t0."""
    cdef Py_ssize_t m_count = b.shape[0]
    k1_a = np.empty((m_count, 4), dtype=np.complex128)
    k2_a = np.empty((m_count, 4), dtype=np.complex128)
    k3_a = np.empty((m_count, 4), dtype=np.complex128)
    k4_a = np.empty((m_count, 4), dtype=np.complex128)
    tmp_a = np.empty((m_count, 4), dtype=np.complex128)
    pr_a = np.empty(m_count, dtype=np.float64)
    pi_a = np.empty(m_count, dtype=np.float64)
    cdef double complex[:, ::1] k1 = k1_a
    cdef double complex[:, ::1] k2 = k2_a
    cdef double complex[:, ::1] k3 = k3_a
    cdef double complex[:, ::1] k4 = k4_a
    cdef double complex[:, ::1] tmp = tmp_a
    cdef double[::1] pr = pr_a
    cdef double[::1] pi = pi_a
    cdef Py_ssize_t i, m, r
    cdef double t, h2 = 0.5 * h, h6 = h / 6.0

    with nogil:
        for i in range(n_steps):
            t = t0 + i * h
            _dirac_deriv(t, b, k1, energies, l_minus, l_plus, mask,
                         amp, omega, ramp, total, pr, pi)
            for m in range(m_count):
                for r in range(4):
                    tmp[m, r] = b[m, r] + h2 * k1[m, r]
            _dirac_deriv(t + h2, tmp, k2, energies, l_minus, l_plus, mask,
                         amp, omega, ramp, total, pr, pi)
            for m in range(m_count):
                for r in range(4):
                    tmp[m, r] = b[m, r] + h2 * k2[m, r]
            _dirac_deriv(t + h2, tmp, k3, energies, l_minus, l_plus, mask,
                         amp, omega, ramp, total, pr, pi)
            for m in range(m_count):
                for r in range(4):
                    tmp[m, r] = b[m, r] + h * k3[m, r]
            _dirac_deriv(t + h, tmp, k4, energies, l_minus, l_plus, mask,
                         amp, omega, ramp, total, pr, pi)
            for m in range(m_count):
                for r in range(4):
                    b[m, r] = b[m, r] + h6 * (k1[m, r] + 2.0 * k2[m, r]
                                              + 2.0 * k3[m, r] + k4[m, r])


# ------------------------------------------------------------- trajectory

cdef void _traj_deriv(double t, double* s, double* ds,
                      double amp, double kl, double omega,
                      double ramp, double total, bint gamma_one) nogil:
    """State s = (x1, x2, x3, p1, p2, p3, W), W = accumulated eE.v work.

    dp/dt = eE + (p/gamma) x eB with eE along e3 (including the envelope
    slope term during ramps) and eB along e2; dx/dt = p/gamma.
    """
    cdef double xi = _envelope(t, ramp, total)
    cdef double xis = _envelope_slope(t, ramp, total)
    cdef double cos_x = cos(kl * s[0])
    cdef double sin_x = sin(kl * s[0])
    cdef double sin_t = sin(omega * t)
    cdef double cos_t = cos(omega * t)
    cdef double e_field = -amp * kl * cos_x * (cos_t * xi + sin_t * xis / omega)
    cdef double b_field = amp * kl * sin_x * sin_t * xi
    cdef double g
    if gamma_one:
        g = 1.0
    else:
        g = sqrt(1.0 + s[3] * s[3] + s[4] * s[4] + s[5] * s[5])
    ds[0] = s[3] / g
    ds[1] = s[4] / g
    ds[2] = s[5] / g
    # p x e2 = (-p3, 0, p1)
    ds[3] = -b_field * s[5] / g
    ds[4] = 0.0
    ds[5] = e_field + b_field * s[3] / g
    ds[6] = e_field * s[5] / g


def traj_rk4(double[::1] s, double t0, long n_steps, double h,
             double amp, double kl, double omega,
             double ramp, double total, bint gamma_one):
    """Advance the 7-component trajectory state in place."""
    cdef double k1[7]
    cdef double k2[7]
    cdef double k3[7]
    cdef double k4[7]
    cdef double tmp[7]
    cdef double cur[7]
    cdef Py_ssize_t i, j
    cdef double t, h2 = 0.5 * h, h6 = h / 6.0

    for j in range(7):
        cur[j] = s[j]
    with nogil:
        for i in range(n_steps):
            t = t0 + i * h
            _traj_deriv(t, cur, k1, amp, kl, omega, ramp, total, gamma_one)
            for j in range(7):
                tmp[j] = cur[j] + h2 * k1[j]
            _traj_deriv(t + h2, tmp, k2, amp, kl, omega, ramp, total, gamma_one)
            for j in range(7):
                tmp[j] = cur[j] + h2 * k2[j]
            _traj_deriv(t + h2, tmp, k3, amp, kl, omega, ramp, total, gamma_one)
            for j in range(7):
                tmp[j] = cur[j] + h * k3[j]
            _traj_deriv(t + h, tmp, k4, amp, kl, omega, ramp, total, gamma_one)
            for j in range(7):
                cur[j] = cur[j] + h6 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
    for j in range(7):
        s[j] = cur[j]
