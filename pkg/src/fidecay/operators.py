"""Hermitian operators: spin chains, the radiation mode, and the full atom-field model.

Operators are exposed as apply-to-state handles.  Dense matrices are
materialized lazily and only for moderate dimensions; structured
realizations (bit kernels, tridiagonal, tensor factors) drive everything
else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .errors import CapacityError, ValidationError
from .states import Basis, QuantumState, fock_basis, spin_basis, spin_fock_basis

MAX_SPIN_SITES = 16
MAX_DICKE_ATOMS = 8
DENSE_MATRIX_MAX_DIM = 4096


@dataclass(frozen=True)
class SpinChainSpec:
    """Nearest-neighbor chain with per-bond couplings and uniform fields.

    H = sum_bonds (Jzz ZZ + Jxx XX + Jyy YY) + sum_sites (hx X + hz Z),
    bare Pauli matrices (eigenvalues +-1), bonds (i, i+1) plus the wrap
    bond for periodic chains with more than two sites.
    """

    n_sites: int
    coupling_zz: float = 0.0
    coupling_xx: float = 0.0
    coupling_yy: float = 0.0
    field_x: float = 0.0
    field_z: float = 0.0
    boundary: str = "open"

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValidationError("spin chain needs n_sites >= 2")
        for name in ("coupling_zz", "coupling_xx", "coupling_yy", "field_x", "field_z"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if self.boundary not in ("open", "periodic"):
            raise ValidationError("boundary must be 'open' or 'periodic'")

    @property
    def n_bonds(self) -> int:
        return self.n_sites - 1 + (1 if self.boundary == "periodic" and self.n_sites > 2 else 0)


@dataclass(frozen=True)
class DickeParams:
    """Atom count, coupling, mode frequency, level splitting, Fock truncation.

    n_max=None resolves through fock_cutoff() at the point of use.
    """

    n_atoms: int
    coupling: float
    mode_freq: float
    level_split: float = 0.0
    n_max: int | None = None

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValidationError("n_atoms must be >= 1")
        if not self.mode_freq > 0:
            raise ValidationError("mode_freq must be positive")
        for name in ("coupling", "level_split"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if self.n_max is not None and self.n_max < 1:
            raise ValidationError("n_max must be >= 1")

    @property
    def alpha_max(self) -> float:
        """Largest displacement reached during one period, 2|N g|/omega."""
        return 2.0 * abs(self.n_atoms * self.coupling) / self.mode_freq


def fock_cutoff(params: DickeParams, n_state: int = 0) -> int:
    """Truncation rule: highest occupied level plus room for the displacement.

    The displacement spreads occupation by roughly |alpha|, so the cutoff
    n_state + ceil(10*|alpha|_max + 20) keeps the tail weight below 1e-12.
    An explicit params.n_max takes precedence when it is at least as large
    as the occupied levels require.
    """
    rule = n_state + math.ceil(10.0 * params.alpha_max + 20.0)
    if params.n_max is not None:
        if params.n_max < n_state + 1:
            raise ValidationError(
                f"n_max={params.n_max} cannot hold a state occupying level {n_state}"
            )
        return params.n_max
    return rule


class OperatorHandle:
    """A Hermitian operator exposed as apply-to-state plus metadata.

    `tridiagonal` (diag, offdiag) and `dense_builder` are optional
    structure hints consumed by the propagator.
    """

    def __init__(
        self,
        apply: Callable[[np.ndarray], np.ndarray],
        dim: int,
        *,
        hermitian: bool = True,
        description: str = "",
        norm_bound: float | None = None,
        dense_builder: Callable[[], np.ndarray] | None = None,
        tridiagonal: tuple[np.ndarray, np.ndarray] | None = None,
        basis: Basis | None = None,
    ):
        self.apply = apply
        self.dim = dim
        self.hermitian = hermitian
        self.description = description
        self.norm_bound = norm_bound
        self.dense_builder = dense_builder
        self.tridiagonal = tridiagonal
        self.basis = basis
        self._cache: dict = {}

    def can_dense(self) -> bool:
        return self.tridiagonal is not None or (
            self.dense_builder is not None and self.dim <= DENSE_MATRIX_MAX_DIM
        )

    def matrix(self) -> np.ndarray:
        """Dense realization (cached).  Refused above DENSE_MATRIX_MAX_DIM."""
        cached = self._cache.get("matrix")
        if cached is not None:
            return cached
        if self.tridiagonal is not None:
            d, e = self.tridiagonal
            m = np.diag(d.astype(np.complex128))
            idx = np.arange(len(e))
            m[idx, idx + 1] = e
            m[idx + 1, idx] = e
        elif self.dense_builder is not None and self.dim <= DENSE_MATRIX_MAX_DIM:
            m = self.dense_builder()
        else:
            raise CapacityError(
                f"dense realization unavailable for dim={self.dim} "
                f"(limit {DENSE_MATRIX_MAX_DIM})"
            )
        self._cache["matrix"] = m
        return m

    def apply_state(self, state: QuantumState) -> np.ndarray:
        if state.dim != self.dim:
            raise ValidationError(
                f"state dim {state.dim} incompatible with operator dim {self.dim}"
            )
        return self.apply(state.amplitudes)


def build_spin_hamiltonian(spec: SpinChainSpec, *, max_sites: int = MAX_SPIN_SITES) -> OperatorHandle:
    """Nearest-neighbor chain Hamiltonian on 2^n_sites basis states."""
    if spec.n_sites > max_sites:
        raise CapacityError(f"n_sites={spec.n_sites} exceeds the configured maximum {max_sites}")
    plan = kernels.make_spin_plan(
        spec.n_sites,
        spec.coupling_zz,
        spec.coupling_xx,
        spec.coupling_yy,
        spec.field_x,
        spec.field_z,
        spec.boundary == "periodic",
    )
    dim = 1 << spec.n_sites

    def apply(vec: np.ndarray) -> np.ndarray:
        return kernels.spin_apply(plan, np.ascontiguousarray(vec, dtype=np.complex128))

    def dense() -> np.ndarray:
        return _spin_dense(spec)

    bound = spec.n_bonds * (
        abs(spec.coupling_zz) + abs(spec.coupling_xx) + abs(spec.coupling_yy)
    ) + spec.n_sites * (abs(spec.field_x) + abs(spec.field_z))
    return OperatorHandle(
        apply,
        dim,
        description=(
            f"spin-chain[n={spec.n_sites},Jzz={spec.coupling_zz},Jxx={spec.coupling_xx},"
            f"Jyy={spec.coupling_yy},hx={spec.field_x},hz={spec.field_z},{spec.boundary}]"
        ),
        norm_bound=bound,
        dense_builder=dense if dim <= DENSE_MATRIX_MAX_DIM else None,
        basis=spin_basis(spec.n_sites),
    )


def _spin_dense(spec: SpinChainSpec) -> np.ndarray:
    dim = 1 << spec.n_sites
    idx = np.arange(dim)
    s = 1.0 - 2.0 * ((idx[:, None] >> np.arange(spec.n_sites)) & 1)
    bonds = [(i, i + 1) for i in range(spec.n_sites - 1)]
    if spec.boundary == "periodic" and spec.n_sites > 2:
        bonds.append((spec.n_sites - 1, 0))
    h = np.zeros((dim, dim), dtype=np.complex128)
    diag = np.zeros(dim)
    if spec.field_z:
        diag += spec.field_z * s.sum(axis=1)
    if spec.coupling_zz:
        for i, j in bonds:
            diag += spec.coupling_zz * s[:, i] * s[:, j]
    h[idx, idx] = diag
    if spec.field_x:
        for i in range(spec.n_sites):
            h[idx, idx ^ (1 << i)] += spec.field_x
    if spec.coupling_xx or spec.coupling_yy:
        for i, j in bonds:
            mask = (1 << i) | (1 << j)
            h[idx, idx ^ mask] += spec.coupling_xx - spec.coupling_yy * s[:, i] * s[:, j]
    return h


def build_effective_radiation_hamiltonian(
    params: DickeParams, *, n_state: int = 0
) -> OperatorHandle:
    """Frozen-atom radiation Hamiltonian: omega a^dag a + N g (a^dag + a).

    Tridiagonal on the truncated Fock basis; the atomic factor is replaced
    by its frozen-sector value N.
    """
    m = fock_cutoff(params, n_state)
    lam = params.n_atoms * params.coupling
    diag = params.mode_freq * np.arange(m + 1, dtype=np.float64)
    off = lam * np.sqrt(np.arange(1, m + 1, dtype=np.float64))

    def apply(vec: np.ndarray) -> np.ndarray:
        out = diag * vec
        out[:-1] += off * vec[1:]
        out[1:] += off * vec[:-1]
        return out

    bound = params.mode_freq * m + 2.0 * abs(lam) * math.sqrt(m)
    return OperatorHandle(
        apply,
        m + 1,
        description=(
            f"radiation[N={params.n_atoms},g={params.coupling},"
            f"omega={params.mode_freq},n_max={m}]"
        ),
        norm_bound=bound,
        tridiagonal=(diag, off),
        basis=fock_basis(m),
    )


def build_full_dicke_hamiltonian(
    params: DickeParams, *, max_atoms: int = MAX_DICKE_ATOMS
) -> OperatorHandle:
    """(Delta/2) sum sigma_z + omega a^dag a + g sum sigma_x (a^dag + a).

    Tensor-product realization on 2^N * (n_max+1); intended as a small-N
    oracle for the frozen-sector reduction.
    """
    n = params.n_atoms
    if n > max_atoms:
        raise CapacityError(f"n_atoms={n} exceeds the configured maximum {max_atoms}")
    m = fock_cutoff(params)
    spin_dim = 1 << n
    fdim = m + 1
    dim = spin_dim * fdim

    sidx = np.arange(spin_dim)
    popcount = np.array([bin(i).count("1") for i in range(spin_dim)])
    sz_sum = (n - 2 * popcount).astype(np.float64)
    root = np.sqrt(np.arange(1, fdim, dtype=np.float64))
    nvec = np.arange(fdim, dtype=np.float64)
    flip_rows = [sidx ^ (1 << i) for i in range(n)]

    delta, omega, g = params.level_split, params.mode_freq, params.coupling

    def apply(vec: np.ndarray) -> np.ndarray:
        v = vec.reshape(spin_dim, fdim)
        out = (0.5 * delta) * sz_sum[:, None] * v
        out += omega * nvec[None, :] * v
        if g:
            w = np.zeros_like(v)
            w[:, :-1] += root[None, :] * v[:, 1:]
            w[:, 1:] += root[None, :] * v[:, :-1]
            for rows in flip_rows:
                out += g * w[rows, :]
        return out.reshape(dim)

    def dense() -> np.ndarray:
        eye = np.eye(dim, dtype=np.complex128)
        cols = [apply(eye[:, c]) for c in range(dim)]
        return np.column_stack(cols)

    bound = 0.5 * abs(delta) * n + omega * m + 2.0 * abs(g) * n * math.sqrt(fdim)
    return OperatorHandle(
        apply,
        dim,
        description=(
            f"dicke[N={n},g={g},omega={omega},delta={delta},n_max={m}]"
        ),
        norm_bound=bound,
        dense_builder=dense if dim <= DENSE_MATRIX_MAX_DIM else None,
        basis=spin_fock_basis(n, m),
    )


def expectation(op: OperatorHandle, state: QuantumState) -> float:
    """<psi|H|psi>, real for Hermitian operators."""
    return float(np.real(np.vdot(state.amplitudes, op.apply_state(state))))


def variance(op: OperatorHandle, state: QuantumState) -> float:
    """<H^2> - <H>^2 computed as ||H psi||^2 - <psi|H psi>^2 for stability."""
    w = op.apply_state(state)
    mean = np.real(np.vdot(state.amplitudes, w))
    var = float(np.real(np.vdot(w, w)) - mean * mean)
    if var < 0.0:
        scale = float(np.real(np.vdot(w, w))) + 1.0
        if var < -1e-12 * scale:
            raise ValidationError(f"variance {var} is negative beyond round-off")
        var = 0.0
    return var


def hermiticity_defect(op: OperatorHandle, rng: np.random.Generator, probes: int = 4) -> float:
    """Max |<phi|H psi> - conj(<psi|H phi>)| over random unit probe pairs."""
    worst = 0.0
    for _ in range(probes):
        phi = rng.normal(size=op.dim) + 1j * rng.normal(size=op.dim)
        psi = rng.normal(size=op.dim) + 1j * rng.normal(size=op.dim)
        phi /= np.linalg.norm(phi)
        psi /= np.linalg.norm(psi)
        lhs = np.vdot(phi, op.apply(psi))
        rhs = np.conj(np.vdot(psi, op.apply(phi)))
        worst = max(worst, abs(lhs - rhs))
    return worst
