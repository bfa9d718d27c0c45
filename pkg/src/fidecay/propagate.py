"""Tolerance-controlled unitary propagation exp(-i H t) |psi>.

Two routes, selected by operator structure and size:

* spectral: tridiagonal or dense eigendecomposition, cached per operator;
  exact to round-off, used up to DENSE_EIGH_MAX.
* krylov: Lanczos with full reorthogonalization and adaptive substepping;
  the step is accepted when successive subspace sizes agree below the
  step tolerance, following the usual a-posteriori estimate.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConvergenceError, ValidationError
from .operators import OperatorHandle
from .states import QuantumState

DENSE_EIGH_MAX = 1024
PHASE_ACTION_MAX = 1e9
TOL_MIN, TOL_MAX = 1e-15, 1e-6


def _check_tol(tol: float) -> None:
    if not (TOL_MIN < tol < TOL_MAX):
        raise ValidationError(f"tol must lie in ({TOL_MIN}, {TOL_MAX}), got {tol}")


def _norm_estimate(op: OperatorHandle) -> float:
    if op.norm_bound is not None:
        return op.norm_bound
    est = op._cache.get("norm_est")
    if est is None:
        rng = np.random.default_rng(0)
        v = rng.normal(size=op.dim) + 1j * rng.normal(size=op.dim)
        v /= np.linalg.norm(v)
        for _ in range(8):
            w = op.apply(v)
            nw = np.linalg.norm(w)
            if nw == 0:
                break
            v = w / nw
        est = float(np.linalg.norm(op.apply(v)))
        op._cache["norm_est"] = est
    return est


def spectral_decomposition(op: OperatorHandle):
    """(eigenvalues, eigenvectors) when a direct factorization is feasible."""
    cached = op._cache.get("eigh")
    if cached is not None:
        return cached
    if op.tridiagonal is not None:
        d, e = op.tridiagonal
        w, v = eigh_tridiagonal(d, e)
    elif op.dense_builder is not None and op.dim <= DENSE_EIGH_MAX:
        w, v = np.linalg.eigh(op.matrix())
    else:
        return None
    op._cache["eigh"] = (w, v)
    return w, v


def _krylov_step(apply, psi, dt, tol, m_max):
    """One Lanczos step of exp(-i dt H) psi; returns (vector, ok)."""
    beta0 = np.linalg.norm(psi)
    if beta0 == 0:
        return psi.copy(), True
    basis = [psi / beta0]
    alphas: list[float] = []
    betas: list[float] = []
    prev = None
    for j in range(m_max):
        w = apply(basis[j])
        alphas.append(float(np.real(np.vdot(basis[j], w))))
        w = w - alphas[j] * basis[j]
        if j > 0:
            w = w - betas[j - 1] * basis[j - 1]
        # Full reorthogonalization keeps the basis unitary to round-off.
        for b in basis:
            w = w - np.vdot(b, w) * b
        beta = float(np.linalg.norm(w))
        happy = beta < 1e-14 * max(1.0, abs(alphas[j]))
        y = _tridiag_expm_e1(alphas, betas, dt)
        converged = happy
        if not converged and prev is not None:
            err = float(np.sqrt(np.sum(np.abs(y[:-1] - prev) ** 2) + np.abs(y[-1]) ** 2))
            converged = err * beta0 <= tol
        if converged:
            return beta0 * np.einsum("i,ij->j", y, np.asarray(basis)), True
        prev = y
        betas.append(beta)
        basis.append(w / beta)
    return psi, False


def _tridiag_expm_e1(alphas, betas, dt):
    """exp(-i dt T) e1 for the real symmetric tridiagonal T."""
    w, v = eigh_tridiagonal(np.asarray(alphas), np.asarray(betas[: len(alphas) - 1]))
    return (v * np.exp(-1j * dt * w)) @ v[0, :].conj()


def _krylov_evolve(apply, psi, t, tol, m_max=64, max_halvings=40):
    if t == 0:
        return psi.copy()
    remaining = float(t)
    dt = remaining
    halvings = 0
    out = psi
    while abs(remaining) > 0:
        if abs(dt) > abs(remaining):
            dt = remaining
        step_tol = tol * abs(dt) / abs(t)
        vec, ok = _krylov_step(apply, out, dt, step_tol, m_max)
        if not ok:
            dt *= 0.5
            halvings += 1
            if halvings > max_halvings:
                raise ConvergenceError(
                    f"Krylov propagation failed to converge after {max_halvings} step halvings"
                )
            continue
        out = vec
        remaining -= dt
    return out


def evolve(
    op: OperatorHandle,
    state: QuantumState,
    t: float,
    tol: float = 1e-10,
    *,
    method: str = "auto",
    m_max: int = 64,
) -> QuantumState:
    """Return exp(-i H t)|state> with norm error below tol."""
    _check_tol(tol)
    if not np.isfinite(t):
        raise ValidationError("t must be finite")
    if state.dim != op.dim:
        raise ValidationError(f"state dim {state.dim} != operator dim {op.dim}")
    if abs(t) * _norm_estimate(op) > PHASE_ACTION_MAX:
        raise ValidationError(
            f"|t|*||H|| = {abs(t) * _norm_estimate(op):.3g} exceeds {PHASE_ACTION_MAX:.0e}; "
            "the accumulated phase would be numerically meaningless"
        )
    if method not in ("auto", "spectral", "krylov"):
        raise ValidationError(f"unknown method {method!r}")

    spec = spectral_decomposition(op) if method in ("auto", "spectral") else None
    if spec is not None:
        w, v = spec
        coeff = v.conj().T @ state.amplitudes
        amps = v @ (np.exp(-1j * w * t) * coeff)
        return QuantumState(amps, state.basis)
    if method == "spectral":
        raise ValidationError("no spectral factorization available for this operator")
    amps = _krylov_evolve(op.apply, state.amplitudes, t, tol, m_max=m_max)
    return QuantumState(amps, state.basis)


def survival_series(
    op: OperatorHandle,
    state: QuantumState,
    times: np.ndarray,
    tol: float = 1e-10,
    *,
    method: str = "auto",
) -> np.ndarray:
    """Complex amplitudes <psi| exp(-i H t_k) |psi> on an ascending grid."""
    _check_tol(tol)
    times = np.asarray(times, dtype=np.float64)
    if times.ndim != 1 or times.size == 0:
        raise ValidationError("times must be a non-empty 1-d grid")
    if np.any(np.diff(times) < 0):
        raise ValidationError("times must be ascending")
    if state.dim != op.dim:
        raise ValidationError(f"state dim {state.dim} != operator dim {op.dim}")
    if times[-1] * _norm_estimate(op) > PHASE_ACTION_MAX:
        raise ValidationError("time grid reaches a numerically meaningless phase")

    spec = spectral_decomposition(op) if method in ("auto", "spectral") else None
    if spec is not None:
        w, v = spec
        weights = np.abs(v.conj().T @ state.amplitudes) ** 2
        return np.exp(-1j * np.outer(times, w)) @ weights.astype(np.complex128)
    if method == "spectral":
        raise ValidationError("no spectral factorization available for this operator")

    n_steps = max(1, times.size - 1)
    step_tol = tol / n_steps
    amps = np.empty(times.size, dtype=np.complex128)
    cur = state.amplitudes
    prev_t = 0.0
    for k, t in enumerate(times):
        dt = t - prev_t
        if dt != 0:
            cur = _krylov_evolve(op.apply, cur, dt, step_tol)
        amps[k] = np.vdot(state.amplitudes, cur)
        prev_t = t
    return amps
