"""State vectors over declared finite bases.

Spin convention used throughout the package: bare Pauli matrices with
eigenvalues +-1.  Basis index bit i encodes site i, bit value 0 meaning
spin up along z (sigma_z = +1), so index 0 is the all-up state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

NORM_TOL = 1e-12


@dataclass(frozen=True)
class Basis:
    """Tensor-product basis descriptor: one entry in `dims` per factor."""

    dims: tuple[int, ...]
    label: str

    @property
    def dim(self) -> int:
        return math.prod(self.dims)


def spin_basis(n_sites: int) -> Basis:
    if n_sites < 1:
        raise ValidationError("spin basis needs at least one site")
    return Basis((2,) * n_sites, f"spin[{n_sites}]")


def fock_basis(n_max: int) -> Basis:
    if n_max < 1:
        raise ValidationError("Fock truncation n_max must be >= 1")
    return Basis((n_max + 1,), f"fock[{n_max}]")


def spin_fock_basis(n_sites: int, n_max: int) -> Basis:
    if n_sites < 1 or n_max < 1:
        raise ValidationError("need n_sites >= 1 and n_max >= 1")
    return Basis((2,) * n_sites + (n_max + 1,), f"spin[{n_sites}]*fock[{n_max}]")


@dataclass(frozen=True)
class QuantumState:
    """Unit-norm complex amplitude vector over a declared basis."""

    amplitudes: np.ndarray = field(repr=False)
    basis: Basis

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        object.__setattr__(self, "amplitudes", amps)
        if amps.ndim != 1:
            raise ValidationError("amplitudes must be a 1-d vector")
        if amps.size != self.basis.dim:
            raise ValidationError(
                f"amplitude length {amps.size} != basis dimension {self.basis.dim}"
            )
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state norm {norm!r} deviates from 1 beyond {NORM_TOL}")

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @classmethod
    def normalized(cls, amplitudes: np.ndarray, basis: Basis) -> "QuantumState":
        """Build a state from an unnormalized vector."""
        amps = np.asarray(amplitudes, dtype=np.complex128)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValidationError("cannot normalize the zero vector")
        return cls(amps / norm, basis)

    def overlap(self, other: "QuantumState") -> complex:
        if other.dim != self.dim:
            raise ValidationError("dimension mismatch in overlap")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def basis_state(basis: Basis, index: int) -> QuantumState:
    if not 0 <= index < basis.dim:
        raise ValidationError(f"basis index {index} outside [0, {basis.dim})")
    amps = np.zeros(basis.dim, dtype=np.complex128)
    amps[index] = 1.0
    return QuantumState(amps, basis)


def fock_state(n: int, n_max: int) -> QuantumState:
    if n > n_max:
        raise ValidationError(f"Fock level {n} above truncation {n_max}")
    return basis_state(fock_basis(n_max), n)


def bloch_site(theta: float, phi: float = 0.0) -> np.ndarray:
    """Single-spin state cos(theta/2)|up> + e^{i phi} sin(theta/2)|down>."""
    return np.array(
        [math.cos(theta / 2.0), np.exp(1j * phi) * math.sin(theta / 2.0)],
        dtype=np.complex128,
    )


def product_state(site_vectors: list[np.ndarray] | np.ndarray, *, n_sites: int | None = None) -> QuantumState:
    """Tensor product of single-spin states.

    A single 2-vector is replicated across `n_sites` sites.
    """
    if isinstance(site_vectors, np.ndarray) and site_vectors.shape == (2,):
        if n_sites is None:
            raise ValidationError("n_sites required when replicating one site vector")
        site_vectors = [site_vectors] * n_sites
    vecs = [np.asarray(v, dtype=np.complex128) for v in site_vectors]
    if any(v.shape != (2,) for v in vecs):
        raise ValidationError("each site vector must have length 2")
    # basis-index bit i addresses site i, so site 0 is the least-significant factor
    amps = vecs[0]
    for v in vecs[1:]:
        amps = np.kron(v, amps)
    return QuantumState.normalized(amps, spin_basis(len(vecs)))


def all_up_state(n_sites: int) -> QuantumState:
    return basis_state(spin_basis(n_sites), 0)
