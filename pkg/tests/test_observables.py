import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relwigner.grid import PhaseSpaceGrid
from relwigner.kinematics import PhysicalParams
from relwigner.observables import (
    AliasingError,
    check_ratio_relation,
    energy_ratio_residual,
    energy_rep_to_symbol,
    expectation,
    hermiticity_residuals,
    kernel_expectation,
    kernel_to_symbol,
    symbol_from_transform,
    symbol_to_energy_rep,
    symbol_to_kernel,
    symbol_transform,
)
from relwigner.states import gaussian_packet, superpose
from relwigner.wigner_free import build_components
from relwigner.wigner_magnetic import magnetic_setup

P = PhysicalParams()
G = PhaseSpaceGrid(128, 0.1)


def gaussian_symbol(grid, p0=0.2, q0=-0.5, wp=0.6, wq=1.5):
    Pm, Qm = grid.mesh()
    return np.exp(-((Pm - p0) ** 2) / (2 * wp**2) - (Qm - q0) ** 2 / (2 * wq**2))


def random_symbol(seed, grid=G):
    rng = np.random.default_rng(seed)
    A = np.zeros((grid.n_points,) * 2)
    for _ in range(3):
        A += rng.normal() * gaussian_symbol(grid, rng.uniform(-1, 1), rng.uniform(-2, 2), rng.uniform(0.4, 1), rng.uniform(1, 2))
    return A


class TestTransform:
    def test_round_trip(self):
        A = random_symbol(1)
        np.testing.assert_allclose(symbol_from_transform(symbol_transform(A, G), G), A, atol=1e-12)

    def test_q_independent_symbol_lives_on_zero_difference(self):
        Pm, _ = G.mesh()
        At = symbol_transform(np.cos(Pm), G)
        np.testing.assert_allclose(np.delete(At, 64, axis=1), 0.0, atol=1e-14)
        np.testing.assert_allclose(At[:, 64] * G.dp, np.cos(G.p), atol=1e-12)


class TestKernelRoundTrip:
    @pytest.mark.parametrize("path", ["full", "even"])
    def test_paths_recover_symbol(self, path):
        A = random_symbol(3)
        K = symbol_to_kernel(A, G, P)
        np.testing.assert_allclose(kernel_to_symbol(K, P, path), A, atol=1e-12)

    def test_odd_path_for_symbol_without_blind_content(self):
        # q-odd and vanishing at p = 0, so nothing sits where chi = 0
        Pm, Qm = G.mesh()
        A = Pm * Qm * np.exp(-(Pm**2) - Qm**2 / 2)
        K = symbol_to_kernel(A, G, P)
        np.testing.assert_allclose(kernel_to_symbol(K, P, "odd"), A, atol=1e-10)

    def test_odd_path_rejects_momentum_only_symbol(self):
        Pm, _ = G.mesh()
        K = symbol_to_kernel(np.exp(-(Pm**2)), G, P)
        assert np.max(np.abs(K.odd)) == 0.0
        with pytest.raises(ValueError, match="chi = 0"):
            kernel_to_symbol(K, P, "odd")

    def test_unknown_path(self):
        with pytest.raises(ValueError, match="path"):
            kernel_to_symbol(symbol_to_kernel(random_symbol(0), G, P), P, "diagonal")

    def test_charge_matrix_layout(self):
        K = symbol_to_kernel(random_symbol(5), G, P)
        M = K.matrix()
        np.testing.assert_array_equal(M[..., 0, 0], K.block(1, 1))
        np.testing.assert_array_equal(M[..., 1, 0], K.block(-1, 1))


class TestKernelStructure:
    @settings(max_examples=15, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31))
    def test_ratio_relation(self, seed):
        K = symbol_to_kernel(random_symbol(seed), G, P)
        assert check_ratio_relation(K, P).relative < 1e-13

    @settings(max_examples=10, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31))
    def test_real_symbol_gives_pseudo_hermitian_kernel(self, seed):
        K = symbol_to_kernel(random_symbol(seed), G, P)
        even, odd = hermiticity_residuals(K)
        assert even < 1e-12 and odd < 1e-12

    def test_complex_symbol_breaks_hermiticity(self):
        K = symbol_to_kernel(1j * gaussian_symbol(G), G, P)
        assert hermiticity_residuals(K)[0] > 1e-3

    def test_strict_mode_rejects_edge_content(self):
        _, Qm = G.mesh()
        ripple = np.cos(np.pi * Qm / G.dq) * gaussian_symbol(G)
        K = symbol_to_kernel(ripple, G, P)
        assert K.edge_fraction > 0.5
        with pytest.raises(AliasingError, match="edge"):
            symbol_to_kernel(ripple, G, P, strict=True)
        assert symbol_to_kernel(gaussian_symbol(G), G, P, strict=True).edge_fraction < 1e-10


class TestExpectation:
    def test_kernel_and_phase_space_averages_agree(self):
        g = PhaseSpaceGrid(256, 0.05)
        a = gaussian_packet(g, 0.4, -1.0, 0.4, +1)
        b = gaussian_packet(g, -0.3, 1.5, 0.5, -1)
        state = superpose([a, b], [1.0, 0.6j])
        A = gaussian_symbol(g, 0.1, 0.3, 0.8, 2.0)
        K = symbol_to_kernel(A, g, P)
        W = build_components(state, P)
        np.testing.assert_allclose(kernel_expectation(K, state).real, expectation(A, W), atol=1e-10)
        assert abs(kernel_expectation(K, state).imag) < 1e-12

    def test_unit_symbol_gives_norm(self):
        g = PhaseSpaceGrid(256, 0.05)
        W = build_components(gaussian_packet(g, 0.4, -1.0, 0.4), P)
        np.testing.assert_allclose(expectation(np.ones((256, 256)), W), 1.0, atol=1e-8)


@pytest.fixture(scope="module")
def osc():
    return magnetic_setup(P, n_max=24, n_points=256)


class TestEnergyRepresentation:
    def test_rotation_invariant_symbol_is_diagonal(self, osc):
        grid, basis, _ = osc
        Pm, Qm = grid.mesh()
        A = np.exp(-(Pm**2 + Qm**2) / 8)
        rep = symbol_to_energy_rep(A, basis, P)
        off = rep.base - np.diag(np.diag(rep.base))
        assert np.max(np.abs(off)) < 1e-10
        np.testing.assert_allclose(np.diag(rep.even), np.diag(rep.base))
        np.testing.assert_array_equal(np.diag(rep.odd), 0.0)

    @pytest.mark.parametrize("path", ["full", "even"])
    def test_round_trip_in_basis_span(self, osc, path):
        _, basis, Wb = osc
        rng = np.random.default_rng(6)
        a = np.zeros((24, 24), complex)
        a[:10, :10] = rng.normal(size=(10, 10)) + 1j * rng.normal(size=(10, 10))
        a = a + a.conj().T
        A = 2 * np.pi * P.hbar * Wb.combination(a.T)
        rep = symbol_to_energy_rep(A, basis, P)
        np.testing.assert_allclose(rep.base, a, atol=1e-10)
        np.testing.assert_allclose(energy_rep_to_symbol(rep, Wb, P, path), A, atol=1e-10)

    def test_odd_path_drops_diagonal(self, osc):
        _, basis, Wb = osc
        a = np.zeros((24, 24), complex)
        a[0, 2] = a[2, 0] = 1.0
        a[1, 1] = 0.5
        A = 2 * np.pi * P.hbar * Wb.combination(a.T)
        rep = symbol_to_energy_rep(A, basis, P)
        a_off = a.copy()
        a_off[1, 1] = 0
        expected = 2 * np.pi * P.hbar * Wb.combination(a_off.T)
        np.testing.assert_allclose(energy_rep_to_symbol(rep, Wb, P, "odd"), expected, atol=1e-10)

    def test_ratio_relation(self, osc):
        grid, basis, _ = osc
        rep = symbol_to_energy_rep(random_symbol(8, grid), basis, P)
        assert energy_ratio_residual(rep, P) < 1e-13
