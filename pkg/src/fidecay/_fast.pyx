# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: spin-chain Hamiltonian apply and displacement matrices.

Interface-compatible with the pure-numpy fallback in ``_slow``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, cos, exp, lgamma, log, sin, sqrt

cnp.import_array()


cdef class SpinPlan:
    cdef public Py_ssize_t n_sites, dim, n_bonds
    cdef double hx
    cdef bint has_flip
    cdef double[::1] diag
    cdef long[::1] flip_mask      # one-site masks for the transverse field
    cdef long[::1] bond_mask      # two-site masks for XX/YY flips
    cdef long[::1] bond_shift_i
    cdef long[::1] bond_shift_j
    cdef double[:, ::1] bond_coeff  # [bond, parity of the two bits]

    def __init__(self, n_sites, jzz, jxx, jyy, hx, hz, periodic):
        self.n_sites = n_sites
        self.dim = 1 << n_sites
        self.hx = hx

        idx = np.arange(self.dim, dtype=np.int64)
        s = 1.0 - 2.0 * ((idx[:, None] >> np.arange(n_sites)) & 1)
        bonds = [(i, i + 1) for i in range(n_sites - 1)]
        if periodic and n_sites > 2:
            bonds.append((n_sites - 1, 0))
        diag = np.zeros(self.dim)
        if hz:
            diag += hz * s.sum(axis=1)
        if jzz:
            for i, j in bonds:
                diag += jzz * s[:, i] * s[:, j]
        self.diag = diag

        self.flip_mask = (1 << np.arange(n_sites, dtype=np.int64)) if hx else np.empty(0, dtype=np.int64)

        self.has_flip = bool(jxx) or bool(jyy)
        self.n_bonds = len(bonds) if self.has_flip else 0
        self.bond_mask = np.array(
            [(1 << i) | (1 << j) for i, j in bonds], dtype=np.int64
        ) if self.has_flip else np.empty(0, dtype=np.int64)
        self.bond_shift_i = np.array([b[0] for b in bonds], dtype=np.int64)
        self.bond_shift_j = np.array([b[1] for b in bonds], dtype=np.int64)
        # gathered coefficient jxx - jyy * s_i * s_j, keyed by bit parity
        self.bond_coeff = np.array(
            [[jxx - jyy, jxx + jyy]] * max(1, len(bonds)), dtype=np.float64
        )


def make_spin_plan(n_sites, jzz, jxx, jyy, hx, hz, periodic):
    return SpinPlan(n_sites, jzz, jxx, jyy, hx, hz, periodic)


def spin_apply(SpinPlan plan, cnp.ndarray[cnp.complex128_t, ndim=1] psi):
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(plan.dim, dtype=np.complex128)
    cdef double complex[::1] pv = psi
    cdef double complex[::1] ov = out
    cdef double[::1] diag = plan.diag
    cdef long[::1] fmask = plan.flip_mask
    cdef long[::1] bmask = plan.bond_mask
    cdef long[::1] bi = plan.bond_shift_i
    cdef long[::1] bj = plan.bond_shift_j
    cdef double[:, ::1] bcoeff = plan.bond_coeff
    cdef Py_ssize_t idx, i, b
    cdef Py_ssize_t dim = plan.dim
    cdef Py_ssize_t n_flip = fmask.shape[0]
    cdef Py_ssize_t n_bonds = plan.n_bonds
    cdef double hx = plan.hx
    cdef double complex acc

    with nogil:
        for idx in range(dim):
            acc = diag[idx] * pv[idx]
            for i in range(n_flip):
                acc = acc + hx * pv[idx ^ fmask[i]]
            for b in range(n_bonds):
                acc = acc + bcoeff[b, ((idx >> bi[b]) ^ (idx >> bj[b])) & 1] * pv[idx ^ bmask[b]]
            ov[idx] = acc
    return out


def displacement_matrix(alpha, Py_ssize_t size):
    """Matrix <m|D(alpha)|n> for m, n = 0..size-1 (normalized recurrence)."""
    cdef double complex a = alpha
    if size < 1:
        raise ValueError("size must be >= 1")
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.zeros((size, size), dtype=np.complex128)
    cdef double complex[:, ::1] ov = out
    cdef double x, r, theta, e_prev, e_cur, e_next, c, s, sign
    cdef Py_ssize_t j, n
    cdef double complex up, lo

    if a == 0:
        for j in range(size):
            ov[j, j] = 1.0
        return out

    r = abs(a)
    theta = atan2(a.imag, a.real)
    x = r * r
    with nogil:
        for j in range(size):
            e_prev = 0.0
            e_cur = exp(-0.5 * x + j * log(r) - 0.5 * lgamma(j + 1.0))
            c = cos(theta * j)
            s = sin(theta * j)
            up = c + 1j * s
            sign = 1.0 if j % 2 == 0 else -1.0
            lo = sign * (c - 1j * s)
            for n in range(size - j):
                ov[n + j, n] = e_cur * up
                if j > 0:
                    ov[n, n + j] = e_cur * lo
                e_next = ((2.0 * n + j + 1.0 - x) * e_cur - sqrt(n * (n + j)) * e_prev) / sqrt(
                    (n + 1.0) * (n + j + 1.0)
                )
                e_prev = e_cur
                e_cur = e_next
    return out
