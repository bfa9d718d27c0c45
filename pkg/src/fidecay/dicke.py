"""Closed-form survival amplitudes for the frozen-sector radiation dynamics.

The propagator of omega a^dag a + N g (a^dag + a) factorizes into a
c-number phase, a mode rotation, and a displacement:

    U(t) = e^{i phi(t)} e^{-i omega a^dag a t} D(alpha(t)),
    phi(t)   = (N g / omega)^2 (omega t - sin omega t),
    alpha(t) = (N g / omega) (1 - e^{i omega t}).

Survival amplitudes of truncated Fock expansions follow from the
displaced-state matrix elements, which involve associated Laguerre
polynomials.  Everything here is cross-checked against brute-force
propagation in the test suite.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConvergenceError, ValidationError
from .operators import DickeParams, fock_cutoff
from .states import QuantumState, fock_basis, spin_fock_basis

AMPLITUDE_SLACK = 1e-10


def global_phase(t: float, params: DickeParams) -> float:
    """Phase drift (Ng/omega)^2 (omega t - sin omega t) of the factorized propagator."""
    w = params.mode_freq
    scale = (params.n_atoms * params.coupling / w) ** 2
    return scale * (w * t - np.sin(w * t))


def displacement_amplitude(t: float, params: DickeParams) -> complex:
    """Coherent displacement (Ng/omega)(1 - e^{i omega t}) traced by the mode."""
    w = params.mode_freq
    return (params.n_atoms * params.coupling / w) * (1.0 - np.exp(1j * w * t))


def assoc_laguerre(n: int, k: int, x):
    """Associated Laguerre polynomial L_n^k(x) by the upward recurrence in n.

    Negative integer k is reduced through
    L_n^{-j}(x) = (-x)^j (n-j)!/n! L_{n-j}^{j}(x).  Accepts scalar or
    ndarray x >= 0; values outside float range overflow to inf honestly.
    """
    if n < 0 or n != int(n):
        raise ValidationError("degree n must be a non-negative integer")
    if k != int(k):
        raise ValidationError("order k must be an integer")
    n, k = int(n), int(k)
    if n + min(k, 0) < 0:
        raise ValidationError(f"domain violation: n + min(k, 0) = {n + min(k, 0)} < 0")
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0):
        raise ValidationError("x must be >= 0")
    if k < 0:
        j = -k
        factor = (-x) ** j * math.exp(math.lgamma(n - j + 1) - math.lgamma(n + 1))
        out = factor * assoc_laguerre(n - j, j, x)
        return out if out.ndim else float(out)

    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    for i in range(n):
        prev, cur = cur, ((2 * i + k + 1 - x) * cur - (i + k) * prev) / (i + 1)
    return cur if cur.ndim else float(cur)


def displaced_fock_element(m: int, n: int, alpha: complex) -> complex:
    """<m|D(alpha)|n> in the unitary normalization sqrt(n!/m!) e^{-|a|^2/2} a^{m-n} L_n^{m-n}(|a|^2).

    Factorial ratios and the power of alpha are accumulated in the log
    domain, so arbitrary m, n are safe from overflow.
    """
    if m < 0 or n < 0:
        raise ValidationError("Fock indices must be non-negative")
    alpha = complex(alpha)
    if alpha == 0:
        return 1.0 + 0j if m == n else 0j
    r = abs(alpha)
    theta = cmath.phase(alpha)
    x = r * r
    if m >= n:
        j, lo = m - n, n
        phase = cmath.exp(1j * theta * j)
    else:
        j, lo = n - m, m
        phase = (-1) ** j * cmath.exp(-1j * theta * j)
    # e_i = sqrt(i!/(i+j)!) e^{-x/2} r^j L_i^j(x), bounded by 1 for all i.
    e_prev = 0.0
    e_cur = math.exp(-0.5 * x + j * math.log(r) - 0.5 * math.lgamma(j + 1))
    for i in range(lo):
        e_prev, e_cur = e_cur, (
            (2 * i + j + 1 - x) * e_cur - math.sqrt(i * (i + j)) * e_prev
        ) / math.sqrt((i + 1) * (i + j + 1))
    return e_cur * phase


@dataclass(frozen=True)
class RadiationState:
    """Truncated Fock expansion sum_n c_n |n> with unit norm."""

    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.ascontiguousarray(self.coeffs, dtype=np.complex128)
        object.__setattr__(self, "coeffs", c)
        if c.ndim != 1 or c.size == 0:
            raise ValidationError("coeffs must be a non-empty 1-d vector")
        total = float(np.sum(np.abs(c) ** 2))
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"sum |c_n|^2 = {total!r} deviates from 1 beyond 1e-12")

    @property
    def n_max(self) -> int:
        return self.coeffs.size - 1

    @property
    def top_level(self) -> int:
        """Highest Fock level carrying weight above 1e-14."""
        occupied = np.nonzero(np.abs(self.coeffs) > 1e-14)[0]
        return int(occupied[-1]) if occupied.size else 0

    @classmethod
    def fock(cls, n: int) -> "RadiationState":
        c = np.zeros(n + 1, dtype=np.complex128)
        c[n] = 1.0
        return cls(c)

    @classmethod
    def pair_superposition(cls, n: int) -> "RadiationState":
        """(|n> + |n-1>)/sqrt(2), n >= 1."""
        if n < 1:
            raise ValidationError("pair superposition needs n >= 1")
        c = np.zeros(n + 1, dtype=np.complex128)
        c[n] = c[n - 1] = 1.0 / math.sqrt(2.0)
        return cls(c)

    def padded(self, size: int) -> np.ndarray:
        if size < self.coeffs.size:
            raise ValidationError("cannot pad below the state's own length")
        out = np.zeros(size, dtype=np.complex128)
        out[: self.coeffs.size] = self.coeffs
        return out

    def to_quantum_state(self, n_max: int) -> QuantumState:
        return QuantumState(self.padded(n_max + 1), fock_basis(n_max))


@dataclass(frozen=True)
class SurvivalAmplitude:
    """Complex survival amplitude plus a bound on the truncation remainder."""

    value: complex
    truncation_error_bound: float

    def __post_init__(self):
        if abs(self.value) > 1.0 + AMPLITUDE_SLACK:
            raise ValidationError(f"|amplitude| = {abs(self.value)} exceeds 1 beyond slack")


def _series_cutoff(chi: RadiationState, params: DickeParams) -> int:
    """Truncation rule plus a doubling check at the worst sampled time."""
    size = fock_cutoff(params, chi.top_level) + 1
    t_worst = math.pi / params.mode_freq
    ref = _series_values(chi, np.array([t_worst]), params, size)[0][0]
    for _ in range(4):
        wider = _series_values(chi, np.array([t_worst]), params, 2 * size)[0][0]
        if abs(wider - ref) < 1e-10:
            return size
        size *= 2
        ref = wider
    raise ConvergenceError("Fock truncation did not stabilize after doubling 4 times")


def _series_values(chi, times, params, size, include_global_phase=True):
    c = chi.padded(size)
    w = params.mode_freq
    values = np.empty(len(times), dtype=np.complex128)
    bounds = np.empty(len(times))
    rotation = np.exp(-1j * w * np.outer(np.asarray(times), np.arange(size)))
    weights = np.abs(c)
    for i, t in enumerate(times):
        d = kernels.displacement_matrix(displacement_amplitude(t, params), size)
        values[i] = (np.conj(c) * rotation[i]) @ (d @ c)
        column_tail = np.maximum(0.0, 1.0 - np.sum(np.abs(d) ** 2, axis=0))
        bounds[i] = float(weights @ np.sqrt(column_tail))
    if include_global_phase:
        values *= np.exp(1j * np.array([global_phase(t, params) for t in times]))
    return values, bounds


def survival_curve(
    chi: RadiationState,
    times,
    params: DickeParams,
    *,
    include_global_phase: bool = True,
):
    """Survival amplitudes on a time grid: (complex values, truncation bounds)."""
    times = np.asarray(times, dtype=np.float64)
    if times.ndim != 1 or times.size == 0:
        raise ValidationError("times must be a non-empty 1-d grid")
    size = _series_cutoff(chi, params)
    return _series_values(chi, times, params, size, include_global_phase)


def survival_amplitude(
    chi: RadiationState,
    t: float,
    params: DickeParams,
    *,
    include_global_phase: bool = True,
) -> SurvivalAmplitude:
    """<chi| U(t) |chi> for the factorized frozen-sector propagator."""
    values, bounds = survival_curve(
        chi, [t], params, include_global_phase=include_global_phase
    )
    return SurvivalAmplitude(complex(values[0]), float(bounds[0]))


def ground_fidelity_exact(t, params: DickeParams):
    """|<0|U(t)|0>|^2 = exp(-2 (Ng/omega)^2 (1 - cos omega t)), exactly periodic."""
    w = params.mode_freq
    scale = 2.0 * (params.n_atoms * params.coupling / w) ** 2
    out = np.exp(-scale * (1.0 - np.cos(w * np.asarray(t, dtype=np.float64))))
    return out if out.ndim else float(out)


def fock_fidelity_smalltime(n: int, t, params: DickeParams):
    """Small-time fidelity of |n>: exp(-(Ngt)^2) L_n((Ngt)^2)^2.

    Defined for all t; accurate only while Ngt << 1 and omega t << 1.
    """
    u = (params.n_atoms * params.coupling * np.asarray(t, dtype=np.float64)) ** 2
    out = np.exp(-u) * assoc_laguerre(n, 0, u) ** 2
    return out if np.ndim(out) else float(out)


def fock_fidelity_gaussian(n: int, t, params: DickeParams):
    """Gaussian comparator exp(-(2n+1)(Ngt)^2) for the same window."""
    u = (params.n_atoms * params.coupling * np.asarray(t, dtype=np.float64)) ** 2
    out = np.exp(-(2 * n + 1) * u)
    return out if np.ndim(out) else float(out)


def sigma_fock(n: int, params: DickeParams) -> float:
    """Energy spread of |n> under the frozen-sector Hamiltonian: sqrt(2n+1) |Ng|."""
    if n < 0:
        raise ValidationError("Fock index must be non-negative")
    return math.sqrt(2 * n + 1) * abs(params.n_atoms * params.coupling)


def sigma_superposition(n: int, params: DickeParams) -> float:
    """Energy spread of (|n> + |n-1>)/sqrt(2): sqrt(n N^2 g^2 + omega^2/4)."""
    if n < 1:
        raise ValidationError("superposition sigma needs n >= 1")
    return math.sqrt(
        n * (params.n_atoms * params.coupling) ** 2 + params.mode_freq**2 / 4.0
    )


def gaussian_fidelity(sigma: float, t):
    """The limiting law exp(-sigma^2 t^2)."""
    out = np.exp(-((sigma * np.asarray(t, dtype=np.float64)) ** 2))
    return out if out.ndim else float(out)


def frozen_sector_state(chi: RadiationState, params: DickeParams, n_max: int) -> QuantumState:
    """x-polarized atoms tensor chi, for comparing against the full model."""
    n = params.n_atoms
    plus = np.full(1 << n, (0.5 ** (n / 2.0)), dtype=np.complex128)
    amps = np.kron(plus, chi.padded(n_max + 1))
    return QuantumState(amps, spin_fock_basis(n, n_max))
