"""Pure-numpy implementations of the hot kernels.

Mirrors the interface of the compiled `_fast` extension: a spin-chain
Hamiltonian apply over bit-encoded basis states, and the Fock matrix of
the displacement operator exp(alpha a^dag - conj(alpha) a) filled through
a normalized three-term recurrence whose values stay bounded by 1.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammaln


class SpinPlan:
    """Precomputed gather indices and coefficient vectors for one chain."""

    __slots__ = ("n_sites", "dim", "diag", "hx", "site_perms", "bond_perms", "bond_coeffs")

    def __init__(self, n_sites, jzz, jxx, jyy, hx, hz, periodic):
        self.n_sites = n_sites
        dim = 1 << n_sites
        self.dim = dim
        idx = np.arange(dim, dtype=np.intp)
        # s[:, i] = sigma_z eigenvalue of site i (bit 0 -> up -> +1)
        s = 1.0 - 2.0 * ((idx[:, None] >> np.arange(n_sites)) & 1)

        bonds = [(i, i + 1) for i in range(n_sites - 1)]
        if periodic and n_sites > 2:
            bonds.append((n_sites - 1, 0))

        diag = np.zeros(dim)
        if hz:
            diag += hz * s.sum(axis=1)
        if jzz:
            for i, j in bonds:
                diag += jzz * s[:, i] * s[:, j]
        self.diag = diag

        self.hx = float(hx)
        self.site_perms = [idx ^ (1 << i) for i in range(n_sites)] if hx else []

        self.bond_perms = []
        self.bond_coeffs = []
        if jxx or jyy:
            for i, j in bonds:
                mask = (1 << i) | (1 << j)
                self.bond_perms.append(idx ^ mask)
                # sigma_x sigma_x gathers with weight jxx; sigma_y sigma_y with
                # weight -jyy * s_i * s_j evaluated at the target index.
                self.bond_coeffs.append(jxx - jyy * s[:, i] * s[:, j])


def make_spin_plan(n_sites, jzz, jxx, jyy, hx, hz, periodic):
    return SpinPlan(n_sites, jzz, jxx, jyy, hx, hz, periodic)


def spin_apply(plan, psi):
    out = plan.diag * psi
    for perm in plan.site_perms:
        out += plan.hx * psi[perm]
    for perm, coeff in zip(plan.bond_perms, plan.bond_coeffs):
        out += coeff * psi[perm]
    return out


def displacement_matrix(alpha, size):
    """Matrix <m|D(alpha)|n> for m, n = 0..size-1.

    Works one diagonal offset at a time; the recurrence runs on the final
    normalized elements, so no factorial overflow can occur.
    """
    alpha = complex(alpha)
    if size < 1:
        raise ValueError("size must be >= 1")
    out = np.zeros((size, size), dtype=np.complex128)
    if alpha == 0:
        np.fill_diagonal(out, 1.0)
        return out

    x = abs(alpha) ** 2
    r = abs(alpha)
    theta = np.angle(alpha)
    j = np.arange(size, dtype=np.float64)

    # e[j] tracks sqrt(n!/(n+j)!) e^{-x/2} r^j L_n^j(x) while n advances.
    e_prev = np.zeros(size)
    e_cur = np.exp(-0.5 * x + j * np.log(r) - 0.5 * gammaln(j + 1.0))
    phase_up = np.exp(1j * theta * j)
    phase_lo = np.where(np.arange(size) % 2 == 0, 1.0, -1.0) * np.exp(-1j * theta * j)

    for n in range(size):
        width = size - n
        cols = np.arange(width)
        vals = e_cur[:width]
        out[n + cols, n] = vals * phase_up[:width]
        if width > 1:
            out[n, n + cols[1:]] = vals[1:] * phase_lo[1:width]
        if n == size - 1:
            break
        e_next = ((2 * n + j + 1.0 - x) * e_cur - np.sqrt(n * (n + j)) * e_prev) / np.sqrt(
            (n + 1.0) * (n + j + 1.0)
        )
        e_prev, e_cur = e_cur, e_next
    return out
