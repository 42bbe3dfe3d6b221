# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled time-stepping kernels. Same contract as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()


cdef inline void _phase(double e, const double[::1] h, double dt, double sign,
                        double complex[::1] out) noexcept nogil:
    cdef Py_ssize_t k
    cdef double th
    for k in range(h.shape[0]):
        th = sign * 0.5 * e * dt * h[k]
        out[k] = cos(th) + 1j * sin(th)


cdef inline void _step(const double complex[:, ::1] U, double complex[::1] a,
                       double complex[::1] psi, double complex[::1] tmp) noexcept nogil:
    cdef Py_ssize_t r, c, d = psi.shape[0]
    cdef double complex acc
    for c in range(d):
        tmp[c] = a[c] * psi[c]
    for r in range(d):
        acc = 0
        for c in range(d):
            acc = acc + U[r, c] * tmp[c]
        psi[r] = a[r] * acc


def evolve_forward(U, h, eps, double dt, psi0, bint store):
    cdef const double complex[:, ::1] Uv = np.ascontiguousarray(U, dtype=np.complex128)
    cdef const double[::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef const double[::1] ev = np.ascontiguousarray(eps, dtype=np.float64)
    cdef Py_ssize_t n = ev.shape[0], d = hv.shape[0], j
    psi_arr = np.array(psi0, dtype=np.complex128)
    cdef double complex[::1] psi = psi_arr
    cdef double complex[::1] a = np.empty(d, dtype=np.complex128)
    cdef double complex[::1] tmp = np.empty(d, dtype=np.complex128)
    traj_arr = np.empty((n + 1 if store else 1, d), dtype=np.complex128)
    cdef double complex[:, ::1] traj = traj_arr
    with nogil:
        if store:
            traj[0, :] = psi
        for j in range(n):
            _phase(ev[j], hv, dt, -1.0, a)
            _step(Uv, a, psi, tmp)
            if store:
                traj[j + 1, :] = psi
    return traj_arr if store else psi_arr


def evolve_backward(UH, h, eps, double dt, chiT, bint store):
    cdef const double complex[:, ::1] Uv = np.ascontiguousarray(UH, dtype=np.complex128)
    cdef const double[::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef const double[::1] ev = np.ascontiguousarray(eps, dtype=np.float64)
    cdef Py_ssize_t n = ev.shape[0], d = hv.shape[0], j
    chi_arr = np.array(chiT, dtype=np.complex128)
    cdef double complex[::1] chi = chi_arr
    cdef double complex[::1] a = np.empty(d, dtype=np.complex128)
    cdef double complex[::1] tmp = np.empty(d, dtype=np.complex128)
    traj_arr = np.empty((n + 1 if store else 1, d), dtype=np.complex128)
    cdef double complex[:, ::1] traj = traj_arr
    with nogil:
        if store:
            traj[n, :] = chi
        for j in range(n - 1, -1, -1):
            _phase(ev[j], hv, dt, 1.0, a)
            _step(Uv, a, chi, tmp)
            if store:
                traj[j, :] = chi
    return traj_arr if store else chi_arr


def krotov_sweep(U, h, eps_old, double dt, chi, psi0, double inv_lambda):
    cdef const double complex[:, ::1] Uv = np.ascontiguousarray(U, dtype=np.complex128)
    cdef const double[::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef const double[::1] ev = np.ascontiguousarray(eps_old, dtype=np.float64)
    cdef const double complex[:, ::1] cv = np.ascontiguousarray(chi, dtype=np.complex128)
    cdef Py_ssize_t n = ev.shape[0], d = hv.shape[0], j, k
    psi_arr = np.array(psi0, dtype=np.complex128)
    cdef double complex[::1] psi = psi_arr
    cdef double complex[::1] a = np.empty(d, dtype=np.complex128)
    cdef double complex[::1] tmp = np.empty(d, dtype=np.complex128)
    new_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] new = new_arr
    cdef double g, e
    with nogil:
        for j in range(n):
            g = 0.0
            for k in range(d):
                # Im(conj(chi) * h * psi)
                g = g + hv[k] * (cv[j, k].real * psi[k].imag - cv[j, k].imag * psi[k].real)
            e = ev[j] + inv_lambda * g
            new[j] = e
            _phase(e, hv, dt, -1.0, a)
            _step(Uv, a, psi, tmp)
    return new_arr, psi_arr
