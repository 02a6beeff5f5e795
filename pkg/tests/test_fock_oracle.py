"""Unit tests for the brute-force Fock-space oracle.

Everything here is checked against hand-countable matrix elements or exact
operator algebra on small spaces; the oracle must stand on its own feet
before it is allowed to referee the analytic modules.
"""

import math

import numpy as np
import pytest
from scipy.linalg import expm

from tfdyn import (
    BosonProtocol,
    Constant,
    FermionProtocol,
    OscillatorProtocol,
    TruncationError,
    equilibrium_occupation,
    theta,
)
from tfdyn.fock_oracle import (
    BasisDescriptor,
    DensityMatrix,
    OperatorMatrix,
    OracleConfig,
    StateVector,
    boson_doubled,
    boson_single,
    build_boson_hamiltonian,
    build_boson_ladder,
    build_fermion_hamiltonian,
    build_fermion_space,
    build_oscillator_hamiltonian,
    build_thermal_state_doubled,
    doubled_density,
    evolve_doubled_thermal,
    evolve_unitary,
    expectation,
    expectation_single_factor,
    fermion_doubled,
    fermion_single,
    frame_annihilation,
    invariant_operator_matrix,
    momentum_operator,
    oscillator_boson_coefficients,
    position_operator,
    thermal_density,
    thermal_state_condition_residual,
    tilde_swap,
    truncation_report,
)
from tfdyn.mode_solver import BosonModeVector

LN2 = math.log(2.0)


class TestBases:
    def test_dimensions(self):
        assert boson_single(5).dimension == 5
        assert boson_doubled(5).dimension == 25
        assert fermion_single().dimension == 4
        assert fermion_doubled().dimension == 16

    def test_too_few_levels_rejected(self):
        with pytest.raises(ValueError):
            boson_single(1)
        with pytest.raises(ValueError):
            boson_doubled(1)

    def test_doubled_levels_capped(self):
        with pytest.raises(ValueError, match="capped"):
            boson_doubled(257)


class TestContainers:
    def test_operator_shape_checked(self):
        with pytest.raises(ValueError):
            OperatorMatrix(np.eye(3), boson_single(4))

    def test_dag_and_hermiticity(self):
        a_op, ad_op = build_boson_ladder(4)
        assert np.allclose(a_op.dag.matrix, ad_op.matrix, atol=0)
        assert a_op.hermiticity_defect() > 1.0
        h = build_boson_hamiltonian(1.0, 0.3 + 0.4j, 6)
        assert h.hermiticity_defect() < 1e-15

    def test_density_matrix_validation(self):
        basis = boson_single(3)
        good = np.diag([0.5, 0.3, 0.2]).astype(complex)
        DensityMatrix(good, basis)
        with pytest.raises(ValueError, match="Hermitian"):
            DensityMatrix(good + 1e-6 * np.array([[0, 1j, 0], [0, 0, 0], [0, 0, 0]]), basis)
        with pytest.raises(ValueError, match="trace"):
            DensityMatrix(2 * good, basis)
        with pytest.raises(ValueError, match="eigenvalue"):
            DensityMatrix(np.diag([1.1, -0.1, 0.0]).astype(complex), basis)

    def test_state_vector_norm_checked(self):
        with pytest.raises(ValueError, match="norm"):
            StateVector(np.array([1.0, 1.0, 0.0]), boson_single(3))

    def test_c_matrix_boson_doubled_only(self):
        v = np.zeros(16, dtype=complex)
        v[0] = 1.0
        psi = StateVector(v, boson_doubled(4))
        assert psi.c_matrix().shape == (4, 4)
        with pytest.raises(ValueError):
            StateVector(v, fermion_doubled()).c_matrix()


class TestBosonOperators:
    def test_ladder_frozen_entries(self):
        a_op, ad_op = build_boson_ladder(3)
        expected = np.array([[0, 1, 0], [0, 0, math.sqrt(2.0)], [0, 0, 0]])
        assert np.allclose(a_op.matrix, expected, atol=0)
        number = ad_op.matrix @ a_op.matrix
        assert np.allclose(number, np.diag([0.0, 1.0, 2.0]), atol=0)

    def test_commutator_exact_below_corner(self):
        n = 12
        a_op, ad_op = build_boson_ladder(n)
        comm = a_op.matrix @ ad_op.matrix - ad_op.matrix @ a_op.matrix
        assert np.allclose(comm[: n - 1, : n - 1], np.eye(n - 1), atol=1e-14)
        assert comm[n - 1, n - 1] == pytest.approx(-(n - 1))  # truncation artefact

    def test_hamiltonian_frozen_entries(self):
        h = build_boson_hamiltonian(1.0, 1.0, 3).matrix
        root2 = math.sqrt(2.0)
        expected = np.array([
            [0.0, 0.0, root2 / 2],
            [0.0, 1.0, 0.0],
            [root2 / 2, 0.0, 2.0],
        ])
        assert np.allclose(h, expected, atol=1e-15)

    def test_hamiltonian_hbar_scale(self):
        h1 = build_boson_hamiltonian(1.0, 0.5, 4, hbar=1.0).matrix
        h2 = build_boson_hamiltonian(1.0, 0.5, 4, hbar=2.0).matrix
        assert np.allclose(h2, 2.0 * h1, atol=0)

    def test_canonical_commutator(self):
        n = 10
        q = position_operator(n, 1.3, 0.7).matrix
        p = momentum_operator(n, 1.3, 0.7).matrix
        comm = q @ p - p @ q
        assert np.allclose(comm[: n - 1, : n - 1], 1j * np.eye(n - 1), atol=1e-14)

    def test_oscillator_coefficients_in_own_frame(self):
        w0, wp = oscillator_boson_coefficients(1.5, 2.0, 1.5, 2.0)
        assert w0 == pytest.approx(2.0, rel=1e-15)
        assert wp == pytest.approx(0.0, abs=1e-15)

    def test_oscillator_coefficients_sudden_jump_frame(self):
        # Frame (m, w_i) looking at frequency w_f: w0 = (w_f^2 + w_i^2)/(2 w_i)
        # and w+ = (w_f^2 - w_i^2)/(2 w_i); for 1 -> 2 that is (2.5, 1.5).
        w0, wp = oscillator_boson_coefficients(1.0, 2.0, 1.0, 1.0)
        assert w0 == pytest.approx(2.5, rel=1e-15)
        assert wp == pytest.approx(1.5, rel=1e-15)

    def test_oscillator_hamiltonian_matches_ladder_form(self):
        """p^2/2m + m w^2 q^2/2 equals the (w0, w+) ladder Hamiltonian plus
        the zero-point shift hbar w0 / 2, except at the truncation corner."""
        n, m, w, m_ref, w_ref = 9, 1.7, 0.9, 1.2, 1.1
        h_osc = build_oscillator_hamiltonian(m, w, n, m_ref, w_ref).matrix
        w0, wp = oscillator_boson_coefficients(m, w, m_ref, w_ref)
        h_ladder = build_boson_hamiltonian(w0, wp, n).matrix + 0.5 * w0 * np.eye(n)
        diff = np.abs(h_osc - h_ladder)
        diff[n - 1, n - 1] = 0.0
        assert np.max(diff) < 1e-13

    def test_frame_annihilation_in_reference_frame_is_bare(self):
        a_f = frame_annihilation(1.2, 0.8, 7, 1.2, 0.8).matrix
        a_op, _ = build_boson_ladder(7)
        assert np.allclose(a_f, a_op.matrix, atol=1e-15)

    def test_frame_annihilation_canonical(self):
        n = 14
        a_f = frame_annihilation(2.0, 3.0, n, 1.0, 1.0).matrix
        comm = a_f @ a_f.conj().T - a_f.conj().T @ a_f
        assert np.allclose(comm[: n - 2, : n - 2], np.eye(n - 2), atol=1e-13)


class TestFermionOperators:
    def test_single_space_algebra(self):
        ops = build_fermion_space()
        a, b = ops["a"].matrix, ops["b"].matrix
        eye = np.eye(4)
        assert np.allclose(a @ a, 0.0, atol=0)
        assert np.allclose(a @ a.conj().T + a.conj().T @ a, eye, atol=0)
        assert np.allclose(b @ b.conj().T + b.conj().T @ b, eye, atol=0)
        # Mixed anticommutators vanish thanks to the parity strings.
        assert np.allclose(a @ b + b @ a, 0.0, atol=0)
        assert np.allclose(a @ b.conj().T + b.conj().T @ a, 0.0, atol=0)

    def test_doubled_space_algebra(self):
        ops = build_fermion_space(doubled=True)
        eye = np.eye(16)
        for name, op in ops.items():
            m = op.matrix
            assert np.allclose(m @ m, 0.0, atol=0), name
            assert np.allclose(m @ m.conj().T + m.conj().T @ m, eye, atol=0), name
        at = ops["a_tilde"].matrix
        a = ops["a"].matrix
        assert np.allclose(a @ at + at @ a, 0.0, atol=0)

    def test_diagonal_hamiltonian_spectrum(self):
        """w0 (a^dag a - b^dag b) has single-particle energies +-w0 and two
        zero modes (vacuum and the pair state)."""
        h = build_fermion_hamiltonian(1.0, 0.0, 0.0).matrix
        eigs = np.sort(np.linalg.eigvalsh(h))
        assert np.allclose(eigs, [-1.0, 0.0, 0.0, 1.0], atol=1e-14)

    def test_hermitian_for_complex_couplings(self):
        h = build_fermion_hamiltonian(1.0, 0.3 - 0.2j, 0.1 + 0.4j)
        assert h.hermiticity_defect() < 1e-15

    def test_doubled_triple_consistency(self):
        triple = build_fermion_hamiltonian(1.0, 0.3 - 0.2j, 0.1 + 0.4j, doubled=True)
        assert np.allclose(
            triple.h_hat.matrix, triple.h.matrix - triple.h_tilde.matrix, atol=0
        )
        # The two factors commute: they act on different mode pairs.
        c = triple.h.matrix @ triple.h_tilde.matrix - triple.h_tilde.matrix @ triple.h.matrix
        assert np.max(np.abs(c)) < 1e-14


class TestTildeConjugation:
    def test_swap_squares_to_identity(self):
        for basis in (boson_doubled(6), fermion_doubled()):
            s = tilde_swap(basis).matrix
            assert np.allclose(s @ s, np.eye(basis.dimension), atol=0)

    def test_boson_generator_antisymmetry(self):
        """S (H_hat)* S = -H_hat for H_hat = H x 1 - 1 x H*."""
        n = 6
        h = build_boson_hamiltonian(1.0, 0.3 - 0.2j, n).matrix
        h_hat = np.kron(h, np.eye(n)) - np.kron(np.eye(n), h.conj())
        s = tilde_swap(boson_doubled(n)).matrix
        assert np.max(np.abs(s @ h_hat.conj() @ s + h_hat)) < 1e-14

    def test_fermion_generator_antisymmetry(self):
        triple = build_fermion_hamiltonian(1.3, 0.4 + 0.1j, -0.2 + 0.3j, doubled=True)
        s = tilde_swap(fermion_doubled()).matrix
        h_hat = triple.h_hat.matrix
        assert np.max(np.abs(s @ h_hat.conj() @ s + h_hat)) < 1e-14

    def test_requires_doubled_basis(self):
        with pytest.raises(ValueError):
            tilde_swap(boson_single(4))


class TestThermalStates:
    def test_boson_gibbs_occupation(self):
        rho = thermal_density(1.0, 1.0, basis=boson_single(60))
        a_op, ad_op = build_boson_ladder(60)
        number = OperatorMatrix(ad_op.matrix @ a_op.matrix, rho.basis, "n")
        got = expectation(rho, number).real
        assert got == pytest.approx(equilibrium_occupation(1.0, 1.0), rel=1e-12)

    def test_fermion_gibbs_occupation(self):
        rho = thermal_density(LN2, 1.0, basis=fermion_single())
        ops = build_fermion_space()
        a = ops["a"].matrix
        number = OperatorMatrix(a.conj().T @ a, rho.basis, "n_a")
        got = expectation(rho, number).real
        assert got == pytest.approx(1.0 / 3.0, rel=1e-14)

    def test_doubled_density_structure(self):
        rho = thermal_density(1.0, 1.0, basis=boson_single(8))
        rho2 = doubled_density(rho)
        assert rho2.basis.kind == "boson_doubled"
        assert np.allclose(rho2.matrix, np.kron(rho.matrix, rho.matrix.conj()), atol=0)

    def test_doubled_density_size_capped(self):
        rho = DensityMatrix(
            np.diag([1.0] + [0.0] * 79).astype(complex), boson_single(80)
        )
        with pytest.raises(ValueError, match="capped"):
            doubled_density(rho)

    def test_thermal_vacuum_routes_agree_boson(self):
        series, squeezed = build_thermal_state_doubled(1.0, 1.0, basis=boson_doubled(60))
        assert np.linalg.norm(series.vector - squeezed.vector) < 1e-11

    def test_thermal_vacuum_routes_agree_fermion(self):
        series, squeezed = build_thermal_state_doubled(LN2, 1.0, basis=fermion_doubled())
        assert np.linalg.norm(series.vector - squeezed.vector) < 1e-14

    def test_thermal_vacuum_pair_amplitudes(self):
        """|0(beta)> carries amplitude x^{n/2} on |n, n~> and nothing off the
        pair diagonal (two-mode squeezed structure)."""
        beta = 1.0
        series, _ = build_thermal_state_doubled(beta, 1.0, basis=boson_doubled(30))
        c = series.c_matrix()
        x = math.exp(-beta)
        levels = np.arange(30)
        expected = x ** (0.5 * levels)
        expected /= np.linalg.norm(expected)
        assert np.allclose(np.diag(c), expected, atol=1e-15)
        off = c - np.diag(np.diag(c))
        assert np.max(np.abs(off)) == 0.0

    def test_thermal_vacuum_reproduces_occupation(self):
        beta = 1.0
        _, psi = build_thermal_state_doubled(beta, 1.0, basis=boson_doubled(60))
        a_op, ad_op = build_boson_ladder(60)
        number = OperatorMatrix(ad_op.matrix @ a_op.matrix, boson_single(60), "n")
        got = expectation_single_factor(psi, number).real
        assert got == pytest.approx(equilibrium_occupation(beta, 1.0), rel=1e-12)

    def test_fermion_thermal_vacuum_occupation(self):
        _, psi = build_thermal_state_doubled(LN2, 1.0, basis=fermion_doubled())
        ops = build_fermion_space(doubled=True)
        a = ops["a"].matrix
        n_a = OperatorMatrix(a.conj().T @ a, fermion_doubled(), "n_a")
        got = expectation(psi, n_a).real
        assert got == pytest.approx(1.0 / 3.0, rel=1e-14)

    def test_hot_state_refused(self):
        with pytest.raises(TruncationError, match="levels"):
            build_thermal_state_doubled(0.05, 1.0, basis=boson_doubled(60))


class TestExpectations:
    def test_single_factor_matches_explicit_kron(self):
        n = 10
        _, psi = build_thermal_state_doubled(2.0, 1.2, basis=boson_doubled(n))
        a_op, ad_op = build_boson_ladder(n)
        number = OperatorMatrix(ad_op.matrix @ a_op.matrix, boson_single(n), "n")
        embedded = OperatorMatrix(
            np.kron(number.matrix, np.eye(n)), boson_doubled(n), "n x 1"
        )
        lhs = expectation_single_factor(psi, number)
        rhs = expectation(psi, embedded)
        assert lhs == pytest.approx(rhs, rel=1e-13)

    def test_single_factor_tilde_matches_explicit_kron(self):
        n = 10
        _, psi = build_thermal_state_doubled(2.0, 1.2, basis=boson_doubled(n))
        a_op, ad_op = build_boson_ladder(n)
        number = OperatorMatrix(ad_op.matrix @ a_op.matrix, boson_single(n), "n")
        embedded = OperatorMatrix(
            np.kron(np.eye(n), number.matrix.conj()), boson_doubled(n), "1 x n~"
        )
        lhs = expectation_single_factor(psi, number, tilde=True)
        rhs = expectation(psi, embedded)
        assert lhs == pytest.approx(rhs, rel=1e-13)

    def test_tilde_occupation_mirrors_system(self):
        """The fictitious copy of a thermal vacuum is equally occupied."""
        n = 40
        _, psi = build_thermal_state_doubled(1.0, 1.0, basis=boson_doubled(n))
        a_op, ad_op = build_boson_ladder(n)
        number = OperatorMatrix(ad_op.matrix @ a_op.matrix, boson_single(n), "n")
        assert expectation_single_factor(psi, number).real == pytest.approx(
            expectation_single_factor(psi, number, tilde=True).real, rel=1e-12
        )

    def test_basis_mismatch_rejected(self):
        rho = thermal_density(1.0, 1.0, basis=boson_single(5))
        a_op, _ = build_boson_ladder(6)
        with pytest.raises(ValueError, match="basis"):
            expectation(rho, a_op)


class TestEvolveUnitary:
    def test_constant_hamiltonian_exact_at_any_substeps(self):
        h = build_boson_hamiltonian(1.0, 0.4, 12)
        exact = expm(-1j * h.matrix * 2.0)
        for substeps in (1, 7, 100):
            u = evolve_unitary(lambda t: h, 0.0, 2.0, substeps=substeps).matrix
            assert np.max(np.abs(u - exact)) < 1e-12

    def test_unitarity_for_time_dependent_generator(self):
        def h_of_t(t):
            return build_boson_hamiltonian(1.0, 0.3 * math.sin(t), 10)

        u = evolve_unitary(h_of_t, 0.0, 3.0, substeps=500).matrix
        assert np.max(np.abs(u @ u.conj().T - np.eye(10))) < 1e-12

    def test_hbar_slows_the_clock(self):
        h = build_boson_hamiltonian(1.0, 0.0, 6)
        u_half = evolve_unitary(lambda t: h, 0.0, 1.0, substeps=1, hbar=2.0).matrix
        u_full = evolve_unitary(lambda t: h, 0.0, 0.5, substeps=1, hbar=1.0).matrix
        assert np.max(np.abs(u_half - u_full)) < 1e-14

    def test_invalid_requests_rejected(self):
        h = build_boson_hamiltonian(1.0, 0.0, 4)
        with pytest.raises(ValueError):
            evolve_unitary(lambda t: h, 1.0, 0.0)
        with pytest.raises(ValueError):
            evolve_unitary(lambda t: h, 0.0, 1.0, substeps=0)
        bad = np.full((4, 4), np.nan)
        with pytest.raises(ValueError, match="finite"):
            evolve_unitary(lambda t: bad, 0.0, 1.0, substeps=1)


class TestInvariantOperatorsAndResiduals:
    def test_boson_embedding_shapes(self):
        coeffs = BosonModeVector(0.0, 1.0 + 0j, 0.0j)
        single = invariant_operator_matrix(coeffs, boson_single(5))
        assert single.matrix.shape == (5, 5)
        doubled = invariant_operator_matrix(coeffs, boson_doubled(5), tilde=True)
        assert doubled.matrix.shape == (25, 25)
        with pytest.raises(ValueError, match="tilde"):
            invariant_operator_matrix(coeffs, boson_single(5), tilde=True)

    def test_initial_invariant_is_bare_operator(self):
        coeffs = BosonModeVector(0.0, 1.0 + 0j, 0.0j)
        op = invariant_operator_matrix(coeffs, boson_single(6))
        a_op, _ = build_boson_ladder(6)
        assert np.allclose(op.matrix, a_op.matrix, atol=0)

    def test_static_thermal_state_satisfies_conditions_boson(self):
        beta = 1.0
        _, psi = build_thermal_state_doubled(beta, 1.0, basis=boson_doubled(60))
        coeffs = BosonModeVector(0.0, 1.0 + 0j, 0.0j)
        th = theta(beta, 1.0, 1.0, "boson")
        residual = thermal_state_condition_residual(psi, coeffs, th)
        assert residual["a"] < 1e-9
        assert residual["a_tilde"] < 1e-9

    def test_static_thermal_state_satisfies_conditions_fermion(self):
        from tfdyn.mode_solver import FermionModeState

        _, psi = build_thermal_state_doubled(LN2, 1.0, basis=fermion_doubled())
        coeffs = FermionModeState(0.0, 1, 0, 0, 0, 0, 0, 1, 0)
        th = theta(LN2, 1.0, 1.0, "fermion")
        residual = thermal_state_condition_residual(psi, coeffs, th)
        for key, value in residual.items():
            assert value < 1e-14, key

    def test_wrong_basis_rejected(self):
        coeffs = BosonModeVector(0.0, 1.0 + 0j, 0.0j)
        v = np.zeros(16, dtype=complex)
        v[0] = 1.0
        psi = StateVector(v, fermion_doubled())
        with pytest.raises(ValueError):
            thermal_state_condition_residual(psi, coeffs, 0.5)


class TestTruncationReport:
    def test_vacuum_has_no_tail(self):
        v = np.zeros(20, dtype=complex)
        v[0] = 1.0
        report = truncation_report(StateVector(v, boson_single(20)))
        assert report.tail_weight == 0.0
        # The defect block excludes the truncation corner; what remains is
        # sqrt(n)^2 round-off.
        assert report.commutator_defect < 1e-14

    def test_top_level_population_counts(self):
        v = np.zeros(20, dtype=complex)
        v[19] = 1.0
        report = truncation_report(StateVector(v, boson_single(20)))
        assert report.tail_weight == 1.0

    def test_fermion_states_never_truncate(self):
        v = np.zeros(16, dtype=complex)
        v[15] = 1.0
        report = truncation_report(StateVector(v, fermion_doubled()))
        assert report.tail_weight == 0.0


class TestDoubledEvolution:
    def test_fermion_constant_protocol_matches_expm(self):
        """Midpoint products for a constant generator are the exact
        exponential, so the doubled trajectory must match expm to round-off."""
        p = FermionProtocol(Constant(1.0), Constant(0.0), Constant(0.0), t_i=0.0, t_f=2.0)
        beta = LN2
        cfg = OracleConfig(substeps_per_unit=50.0, grid_points=5)
        traj = evolve_doubled_thermal(p, beta, cfg)
        triple = build_fermion_hamiltonian(1.0, 0.0, 0.0, doubled=True)
        _, psi0 = build_thermal_state_doubled(beta, 1.0, basis=fermion_doubled())
        for k, t in enumerate(traj.t):
            exact = expm(-1j * triple.h_hat.matrix * t) @ psi0.vector
            assert np.max(np.abs(traj.states[k].vector - exact)) < 1e-12

    def test_boson_constant_protocol_occupation_static(self):
        """A thermal vacuum is stationary under its own Hamiltonian."""
        p = BosonProtocol(Constant(1.0), Constant(0.0), t_i=0.0, t_f=1.0)
        cfg = OracleConfig(n_levels=40, substeps_per_unit=200.0, grid_points=5)
        traj = evolve_doubled_thermal(p, 1.0, cfg)
        a_op, ad_op = build_boson_ladder(40)
        number = OperatorMatrix(ad_op.matrix @ a_op.matrix, boson_single(40), "n")
        n_eq = equilibrium_occupation(1.0, 1.0)
        for psi in traj.states:
            got = expectation_single_factor(psi, number).real
            assert got == pytest.approx(n_eq, rel=1e-10)
        assert np.max(traj.norm_deviation) < 1e-12
        assert np.max(traj.tail_weight) < 1e-12

    def test_hot_initial_state_raises_truncation_error(self):
        p = BosonProtocol(Constant(1.0), Constant(0.0), t_i=0.0, t_f=1.0)
        with pytest.raises(TruncationError):
            evolve_doubled_thermal(p, 0.05, OracleConfig(n_levels=60))

    def test_oscillator_protocol_accepted(self):
        p = OscillatorProtocol(Constant(1.0), Constant(1.0), t_i=0.0, t_f=0.5)
        cfg = OracleConfig(n_levels=30, substeps_per_unit=100.0, grid_points=3)
        traj = evolve_doubled_thermal(p, 1.0, cfg)
        assert len(traj.states) == 3
        assert traj.basis.kind == "boson_doubled"
