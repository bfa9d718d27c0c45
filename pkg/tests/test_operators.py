import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fidecay import (
    CapacityError,
    DickeParams,
    QuantumState,
    SpinChainSpec,
    ValidationError,
    all_up_state,
    basis_state,
    bloch_site,
    build_effective_radiation_hamiltonian,
    build_full_dicke_hamiltonian,
    build_spin_hamiltonian,
    expectation,
    fock_cutoff,
    fock_state,
    product_state,
    spin_basis,
    variance,
)
from fidecay.operators import hermiticity_defect


def dense_moment_oracle(h_dense, psi):
    """Independent <H>, <H^2> through explicit dense matrix powers."""
    m1 = np.real(np.vdot(psi, h_dense @ psi))
    m2 = np.real(np.vdot(psi, h_dense @ (h_dense @ psi)))
    return m1, m2 - m1 * m1


class TestSpinChainBuilder:
    def test_single_zz_bond_eigenvalue(self):
        op = build_spin_hamiltonian(SpinChainSpec(n_sites=2, coupling_zz=1.0))
        up = all_up_state(2)
        assert expectation(op, up) == pytest.approx(1.0, abs=1e-14)

    def test_all_up_tfi_diagonal_element(self):
        # three ZZ bonds at J=1; the field part is purely off-diagonal
        op = build_spin_hamiltonian(SpinChainSpec(n_sites=4, coupling_zz=1.0, field_x=1.0))
        up = all_up_state(4)
        m1, _ = dense_moment_oracle(op.matrix(), up.amplitudes)
        assert expectation(op, up) == pytest.approx(3.0, abs=1e-13)
        assert m1 == pytest.approx(3.0, abs=1e-13)

    def test_field_z_spectrum(self):
        h = 0.75
        op = build_spin_hamiltonian(SpinChainSpec(n_sites=3, field_z=h))
        # 8x8 diagonal enumeration: eigenvalues h * (n_up - n_down)
        expected = sorted(
            h * ((3 - bin(i).count("1")) - bin(i).count("1")) for i in range(8)
        )
        got = sorted(np.linalg.eigvalsh(op.matrix()).real)
        assert np.allclose(got, expected, atol=1e-12)

    def test_capacity_refusal(self):
        with pytest.raises(CapacityError):
            build_spin_hamiltonian(SpinChainSpec(n_sites=18, coupling_zz=1.0))

    def test_spec_validation(self):
        with pytest.raises(ValidationError):
            SpinChainSpec(n_sites=1, coupling_zz=1.0)
        with pytest.raises(ValidationError):
            SpinChainSpec(n_sites=4, coupling_zz=math.inf)
        with pytest.raises(ValidationError):
            SpinChainSpec(n_sites=4, boundary="twisted")

    def test_periodic_adds_wrap_bond(self):
        ring = build_spin_hamiltonian(
            SpinChainSpec(n_sites=4, coupling_zz=1.0, boundary="periodic")
        )
        assert expectation(ring, all_up_state(4)) == pytest.approx(4.0, abs=1e-13)

    @pytest.mark.parametrize("n_sites", [2, 4, 6])
    def test_hermiticity_probe(self, n_sites, rng):
        op = build_spin_hamiltonian(
            SpinChainSpec(
                n_sites=n_sites,
                coupling_zz=0.7,
                coupling_xx=-0.2,
                coupling_yy=0.4,
                field_x=1.1,
                field_z=0.3,
            )
        )
        assert hermiticity_defect(op, rng) < 1e-10


class TestEffectiveRadiationBuilder:
    def test_pure_number_operator(self):
        p = DickeParams(n_atoms=1, coupling=0.0, mode_freq=1.0, n_max=12)
        op = build_effective_radiation_hamiltonian(p)
        for n in (0, 3, 7):
            assert expectation(op, fock_state(n, 12)) == pytest.approx(n, abs=1e-13)

    def test_vacuum_variance_is_ng_squared(self):
        p = DickeParams(n_atoms=10, coupling=0.1, mode_freq=1.0)
        op = build_effective_radiation_hamiltonian(p)
        vac = fock_state(0, op.dim - 1)
        assert expectation(op, vac) == pytest.approx(0.0, abs=1e-13)
        v_direct = variance(op, vac)
        _, v_oracle = dense_moment_oracle(op.matrix(), vac.amplitudes)
        assert v_direct == pytest.approx(1.0, abs=1e-12)
        assert v_oracle == pytest.approx(1.0, abs=1e-12)

    def test_fock_variance_formula(self):
        # (2n+1) N^2 g^2 = 3 for n=1, N=2, g=0.5
        p = DickeParams(n_atoms=2, coupling=0.5, mode_freq=1.0)
        op = build_effective_radiation_hamiltonian(p, n_state=1)
        st1 = fock_state(1, op.dim - 1)
        _, v_oracle = dense_moment_oracle(op.matrix(), st1.amplitudes)
        assert variance(op, st1) == pytest.approx(3.0, rel=1e-12)
        assert v_oracle == pytest.approx(3.0, rel=1e-12)

    def test_superposition_variance(self):
        # n N^2 g^2 + omega^2/4 = 0.61 for n=1, N=3, g=0.2, omega=1
        p = DickeParams(n_atoms=3, coupling=0.2, mode_freq=1.0)
        op = build_effective_radiation_hamiltonian(p, n_state=1)
        amps = np.zeros(op.dim, dtype=complex)
        amps[0] = amps[1] = 1 / math.sqrt(2)
        chi = QuantumState(amps, op.basis)
        _, v_oracle = dense_moment_oracle(op.matrix(), chi.amplitudes)
        assert variance(op, chi) == pytest.approx(0.61, rel=1e-12)
        assert v_oracle == pytest.approx(0.61, rel=1e-12)

    def test_truncation_rejected(self):
        with pytest.raises(ValidationError):
            DickeParams(n_atoms=1, coupling=0.1, mode_freq=1.0, n_max=0)

    def test_fock_cutoff_rule(self):
        p = DickeParams(n_atoms=10, coupling=0.1, mode_freq=1.0)
        assert fock_cutoff(p) == math.ceil(10 * 2.0 + 20)
        assert fock_cutoff(p, n_state=5) == 5 + math.ceil(10 * 2.0 + 20)
        with pytest.raises(ValidationError):
            fock_cutoff(DickeParams(1, 0.1, 1.0, n_max=3), n_state=7)


class TestFullDickeBuilder:
    def test_decoupled_spectrum(self):
        # g=0: levels are +-Delta/2 + m*omega
        p = DickeParams(n_atoms=1, coupling=0.0, mode_freq=1.0, level_split=1.0, n_max=6)
        op = build_full_dicke_hamiltonian(p)
        expected = sorted(s + m for s in (-0.5, 0.5) for m in range(7))
        got = sorted(np.linalg.eigvalsh(op.matrix()).real)
        assert np.allclose(got, expected, atol=1e-12)

    def test_displaced_oscillator_eigenvalues(self):
        # Delta=0, N=1: both spin-x sectors give omega*m - g^2/omega
        p = DickeParams(n_atoms=1, coupling=0.1, mode_freq=1.0, level_split=0.0)
        op = build_full_dicke_hamiltonian(p)
        n_levels = op.dim // 2
        expected = np.repeat(np.arange(n_levels) - 0.01, 2)
        got = np.sort(np.linalg.eigvalsh(op.matrix()).real)
        # truncation distorts only the top of the spectrum
        keep = n_levels
        assert np.allclose(got[:keep], expected[:keep], atol=1e-8)

    def test_hermitian_and_sector_reduction(self, rng):
        p = DickeParams(n_atoms=2, coupling=0.05, mode_freq=1.0, level_split=0.5)
        op = build_full_dicke_hamiltonian(p)
        assert hermiticity_defect(op, rng) < 1e-12

        # Delta -> 0: the x-polarized sector reproduces the frozen-sector builder
        p0 = DickeParams(n_atoms=2, coupling=0.05, mode_freq=1.0, level_split=0.0)
        full = build_full_dicke_hamiltonian(p0)
        eff = build_effective_radiation_hamiltonian(p0)
        fdim = eff.dim
        plus = np.full(4, 0.5)  # sigma_x = +1 eigenstate of both atoms
        block = np.zeros((fdim, fdim), dtype=complex)
        for k in range(fdim):
            vec = np.kron(plus, np.eye(fdim)[:, k]).astype(complex)
            out = full.apply(vec).reshape(4, fdim)
            block[:, k] = plus @ out
        assert np.allclose(block, eff.matrix(), atol=1e-12)

    def test_atom_capacity(self):
        with pytest.raises(CapacityError):
            build_full_dicke_hamiltonian(DickeParams(n_atoms=9, coupling=0.1, mode_freq=1.0))


class TestMomentOperations:
    def test_eigenstate_variance_zero(self):
        op = build_spin_hamiltonian(SpinChainSpec(n_sites=3, coupling_zz=1.0, field_z=0.4))
        # any basis state is an eigenstate of this diagonal Hamiltonian
        assert variance(op, basis_state(spin_basis(3), 5)) == pytest.approx(0.0, abs=1e-12)

    def test_tfi_all_up_variance_is_h_squared_n(self):
        for n in (4, 6, 8):
            op = build_spin_hamiltonian(SpinChainSpec(n_sites=n, coupling_zz=1.0, field_x=1.0))
            st = all_up_state(n)
            assert variance(op, st) == pytest.approx(float(n), rel=1e-12)
            _, v_oracle = dense_moment_oracle(op.matrix(), st.amplitudes)
            assert v_oracle == pytest.approx(float(n), rel=1e-10)

    def test_dimension_mismatch(self):
        op = build_spin_hamiltonian(SpinChainSpec(n_sites=3, coupling_zz=1.0))
        with pytest.raises(ValidationError):
            expectation(op, all_up_state(4))

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_variance_nonnegative_and_phase_invariant(self, seed):
        r = np.random.default_rng(seed)
        op = build_spin_hamiltonian(
            SpinChainSpec(
                n_sites=4,
                coupling_zz=r.normal(),
                coupling_xx=r.normal(),
                coupling_yy=r.normal(),
                field_x=r.normal(),
                field_z=r.normal(),
            )
        )
        v = r.normal(size=16) + 1j * r.normal(size=16)
        st_plain = QuantumState.normalized(v, spin_basis(4))
        st_phased = QuantumState.normalized(v * np.exp(1j * r.uniform(0, 2 * np.pi)), spin_basis(4))
        var_plain = variance(op, st_plain)
        assert var_plain >= 0.0
        assert variance(op, st_phased) == pytest.approx(var_plain, rel=1e-9, abs=1e-9)


class TestExtensivity:
    def test_uncoupled_sites_exactly_linear(self):
        site = bloch_site(1.1, 0.4)
        e1 = v1 = None
        for n in (2, 4, 8):
            op = build_spin_hamiltonian(SpinChainSpec(n_sites=n, field_x=0.9, field_z=0.5))
            st = product_state(site, n_sites=n)
            e, v = expectation(op, st), variance(op, st)
            if e1 is None:
                e1, v1 = e / n, v / n
            assert e == pytest.approx(n * e1, rel=1e-12)
            assert v == pytest.approx(n * v1, rel=1e-10, abs=1e-12)

    def test_tfi_variance_linear_fit_through_origin(self):
        ns = np.arange(4, 13)
        vs = []
        for n in ns:
            op = build_spin_hamiltonian(SpinChainSpec(n_sites=int(n), coupling_zz=1.0, field_x=1.0))
            vs.append(variance(op, all_up_state(int(n))))
        vs = np.asarray(vs)
        slope = float(np.sum(ns * vs) / np.sum(ns * ns))
        residual = float(np.max(np.abs(vs - slope * ns)) / np.max(vs))
        assert slope == pytest.approx(1.0, abs=1e-9)
        assert residual <= 1e-6
