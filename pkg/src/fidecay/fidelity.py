"""Fidelity curves, the extensive-variance condition check, and Gaussian convergence.

A product state whose energy variance grows linearly with system size
loses overlap with itself on the 1/sqrt(N) time scale; at finite N these
routines quantify how close the decay already is to exp(-(sigma t)^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .dicke import DickeParams, ground_fidelity_exact
from .errors import RangeError, ValidationError
from .operators import OperatorHandle, SpinChainSpec, build_spin_hamiltonian, variance
from .propagate import survival_series
from .states import QuantumState, bloch_site, product_state

CurveSource = str  # "exact-propagation" | "analytic-formula" | "gaussian-model"
VALUE_SLACK = 1e-12


@dataclass(frozen=True)
class FidelityCurve:
    """Survival probability F(t) sampled on an ascending time grid."""

    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    source: CurveSource
    params_label: str = ""

    def __post_init__(self):
        t = np.ascontiguousarray(self.times, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if t.ndim != 1 or t.size != v.size or t.size == 0:
            raise ValidationError("times and values must be matching 1-d arrays")
        if np.any(np.diff(t) <= 0):
            raise ValidationError("times must be strictly ascending")
        if np.any(v < -VALUE_SLACK) or np.any(v > 1.0 + VALUE_SLACK):
            raise ValidationError("fidelity values must lie in [0, 1] up to round-off")
        if t[0] == 0.0 and abs(v[0] - 1.0) > 1e-9:
            raise ValidationError("survival probability at t=0 must be 1")
        if self.source not in ("exact-propagation", "analytic-formula", "gaussian-model"):
            raise ValidationError(f"unknown curve source {self.source!r}")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", np.clip(v, 0.0, 1.0))

    def __len__(self) -> int:
        return self.times.size


@dataclass(frozen=True)
class ProductStateRule:
    """Per-site Bloch direction, uniform or alternating between two directions."""

    theta: float = 0.0
    phi: float = 0.0
    alt_theta: float | None = None
    alt_phi: float | None = None

    def state(self, n_sites: int) -> QuantumState:
        even = bloch_site(self.theta, self.phi)
        if self.alt_theta is None:
            return product_state(even, n_sites=n_sites)
        odd = bloch_site(self.alt_theta, self.alt_phi or 0.0)
        return product_state([even if i % 2 == 0 else odd for i in range(n_sites)])


ALL_UP = ProductStateRule(theta=0.0)


@dataclass(frozen=True)
class HMHReport:
    """Variance growth across an N sweep, with the extensivity constant."""

    n_values: list[int]
    sigma_sq: list[float]
    c_lower: float
    local_bound: float
    passed: bool


def fidelity_curve(
    op: OperatorHandle,
    phi: QuantumState,
    times,
    tol: float = 1e-10,
    *,
    params_label: str | None = None,
) -> FidelityCurve:
    """F(t_k) = |<phi| exp(-i H t_k) |phi>|^2 on an ascending grid starting at 0."""
    times = np.asarray(times, dtype=np.float64)
    if times.size == 0 or times[0] != 0.0:
        raise ValidationError("time grid must start at t=0")
    amps = survival_series(op, phi, times, tol)
    values = np.abs(amps) ** 2
    return FidelityCurve(
        times,
        np.clip(values, 0.0, 1.0),
        "exact-propagation",
        params_label if params_label is not None else op.description,
    )


def default_time_grid(sigma_est: float, n_points: int = 200, tau_cover: float = 3.0) -> np.ndarray:
    """Grid of n_points over [0, tau_cover/sigma]; captures the Gaussian core."""
    if sigma_est <= 0:
        raise ValidationError("sigma_est must be positive")
    return np.linspace(0.0, tau_cover / sigma_est, n_points)


def gaussian_model_curve(sigma: float, times, label: str = "") -> FidelityCurve:
    times = np.asarray(times, dtype=np.float64)
    return FidelityCurve(
        times, np.exp(-((sigma * times) ** 2)), "gaussian-model", label or f"gaussian[sigma={sigma}]"
    )


def analytic_ground_curve(params: DickeParams, times, label: str = "") -> FidelityCurve:
    times = np.asarray(times, dtype=np.float64)
    return FidelityCurve(
        times,
        ground_fidelity_exact(times, params),
        "analytic-formula",
        label or f"ground[N={params.n_atoms},g={params.coupling},omega={params.mode_freq}]",
    )


def tfi_family(j: float = 1.0, h: float = 1.0, boundary: str = "open") -> Callable[[int], SpinChainSpec]:
    """Transverse-field Ising chain family N -> spec(Jzz=j, hx=h)."""

    def make(n: int) -> SpinChainSpec:
        return SpinChainSpec(n_sites=n, coupling_zz=j, field_x=h, boundary=boundary)

    return make


def local_term_norm(spec: SpinChainSpec) -> float:
    """Operator norm of the densest local term (one bond plus its site fields)."""
    sx = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    sy = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
    sz = np.array([[1, 0], [0, -1]], dtype=np.complex128)
    eye = np.eye(2, dtype=np.complex128)
    term = (
        spec.coupling_zz * np.kron(sz, sz)
        + spec.coupling_xx * np.kron(sx, sx)
        + spec.coupling_yy * np.kron(sy, sy)
        + spec.field_x * np.kron(sx, eye)
        + spec.field_z * np.kron(sz, eye)
    )
    return float(np.max(np.abs(np.linalg.eigvalsh(term))))


def hmh_condition_check(
    spec_family: Callable[[int], SpinChainSpec],
    phi_family: ProductStateRule | Callable[[int], QuantumState],
    n_values: Sequence[int],
) -> HMHReport:
    """Does sigma^2 >= N*C hold across the sweep, with bounded local terms?

    c_lower is the largest C compatible with every sweep point; local_bound
    is the exact norm of the densest local term of the largest chain.
    """
    n_values = list(n_values)
    if n_values != sorted(n_values) or len(n_values) == 0:
        raise ValidationError("n_values must be a non-empty ascending list")
    state_for = phi_family.state if isinstance(phi_family, ProductStateRule) else phi_family
    sigma_sq = []
    for n in n_values:
        op = build_spin_hamiltonian(spec_family(n))
        sigma_sq.append(variance(op, state_for(n)))
    c_lower = min(s / n for s, n in zip(sigma_sq, n_values))
    local_bound = local_term_norm(spec_family(max(n_values)))
    passed = c_lower > 0 and math.isfinite(local_bound)
    return HMHReport(n_values, sigma_sq, c_lower, local_bound, passed)


@dataclass(frozen=True)
class GaussianDeviation:
    params_label: str
    sigma: float
    deviation: float


def gaussian_convergence(
    curves: Sequence[FidelityCurve],
    sigmas: Sequence[float],
    tau_max: float,
) -> list[GaussianDeviation]:
    """sup over tau in [0, tau_max] of |F(tau/sigma) - exp(-tau^2)| per curve.

    Monotone cubic interpolation on the sampled grid, evaluated on a
    10x refined tau grid.
    """
    if len(curves) != len(sigmas):
        raise ValidationError("need one sigma per curve")
    out = []
    for curve, sigma in zip(curves, sigmas):
        if sigma <= 0:
            raise ValidationError("sigma must be positive")
        tau_grid = sigma * curve.times
        if tau_grid[-1] < tau_max:
            raise RangeError(
                f"curve {curve.params_label!r} covers tau <= {tau_grid[-1]:.4g}, "
                f"requested tau_max={tau_max}"
            )
        interp = PchipInterpolator(curve.times, curve.values)
        n_within = int(np.searchsorted(tau_grid, tau_max, side="right"))
        tau_fine = np.linspace(0.0, tau_max, max(2, 10 * n_within))
        deviation = float(np.max(np.abs(interp(tau_fine / sigma) - np.exp(-(tau_fine**2)))))
        out.append(GaussianDeviation(curve.params_label, float(sigma), deviation))
    return out
