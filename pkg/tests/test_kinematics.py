import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relwigner.kinematics import (
    IDENTITY,
    TAU1,
    TAU2,
    TAU3,
    PhysicalParams,
    energy_free,
    energy_rotator,
    epsilon_chi_free,
    fv_transform_matrix,
    kinematic_factors,
    r_matrix,
)

P = PhysicalParams()
energies = st.floats(min_value=1.0, max_value=1e3, allow_nan=False)


class TestParams:
    def test_defaults_are_natural_units(self):
        assert (P.m, P.c, P.hbar, P.omega) == (1.0, 1.0, 1.0, 1.0)
        assert P.rest_energy == 1.0

    @pytest.mark.parametrize("field", ["m", "c", "hbar", "omega"])
    @pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
    def test_rejects_non_positive(self, field, bad):
        with pytest.raises(ValueError, match=field):
            PhysicalParams(**{field: bad})

    def test_oscillator_scales(self):
        p = PhysicalParams(m=2.0, hbar=0.5, omega=3.0)
        np.testing.assert_allclose(p.p_osc * p.q_osc, p.hbar)
        np.testing.assert_allclose(p.p_osc, np.sqrt(3.0))


class TestEnergies:
    def test_free_energy_at_rest(self):
        np.testing.assert_allclose(energy_free(0.0, P), 1.0)

    def test_free_energy_large_momentum_is_linear(self):
        np.testing.assert_allclose(energy_free(1e6, P) / 1e6, 1.0, rtol=1e-12)

    def test_rotator_ground_level(self):
        np.testing.assert_allclose(energy_rotator(0, P), np.sqrt(2.0))

    def test_rotator_levels_increase(self):
        E = energy_rotator(np.arange(50), P)
        assert np.all(np.diff(E) > 0)

    @pytest.mark.parametrize("bad", [-1, 1.5])
    def test_rotator_rejects_bad_levels(self, bad):
        with pytest.raises(ValueError):
            energy_rotator(bad, P)


class TestFactors:
    def test_equal_energies(self):
        k = kinematic_factors(2.0, 2.0)
        assert k.epsilon == 1.0 and k.chi == 0.0

    def test_rejects_non_positive_energy(self):
        with pytest.raises(ValueError):
            kinematic_factors(0.0, 1.0)

    @given(energies, energies)
    def test_hyperbolic_identity(self, E1, E2):
        k = kinematic_factors(E1, E2)
        np.testing.assert_allclose(k.epsilon**2 - k.chi**2, 1.0, atol=1e-12)

    @given(energies, energies)
    def test_symmetry(self, E1, E2):
        a, b = kinematic_factors(E1, E2), kinematic_factors(E2, E1)
        assert a.epsilon == b.epsilon
        assert a.chi == -b.chi

    def test_free_factors_vectorised(self):
        p = np.linspace(-3, 3, 7)
        eps, chi = epsilon_chi_free(p[:, None], p[None, :], P)
        assert eps.shape == (7, 7)
        np.testing.assert_allclose(np.diag(chi), 0.0)
        np.testing.assert_allclose(eps, eps.T)


class TestChargeMatrices:
    def test_pauli_algebra(self):
        for t in (TAU1, TAU2, TAU3):
            np.testing.assert_allclose(t @ t, IDENTITY)
        np.testing.assert_allclose(TAU1 @ TAU2, 1j * TAU3)

    @settings(max_examples=50)
    @given(energies)
    def test_transform_inverse(self, E):
        U = fv_transform_matrix(E, P)
        Ui = fv_transform_matrix(E, P, inverse=True)
        np.testing.assert_allclose(U @ Ui, IDENTITY, atol=1e-12)

    def test_transform_is_identity_at_rest(self):
        np.testing.assert_allclose(fv_transform_matrix(1.0, P), IDENTITY)

    def test_transform_rejects_energy_below_rest(self):
        with pytest.raises(ValueError):
            fv_transform_matrix(0.5, P)

    def test_r_matrix_composition(self):
        E1, E2 = 1.3, 2.7
        U1 = fv_transform_matrix(E1, P)
        U2i = fv_transform_matrix(E2, P, inverse=True)
        np.testing.assert_allclose(r_matrix(E1, E2), U1 @ U2i, atol=1e-14)

    def test_r_matrix_inverse_swaps_arguments(self):
        np.testing.assert_allclose(r_matrix(1.5, 4.0) @ r_matrix(4.0, 1.5), IDENTITY, atol=1e-14)

    def test_r_matrix_diagonal_is_identity(self):
        E = np.linspace(1, 5, 11)
        np.testing.assert_allclose(r_matrix(E, E), np.broadcast_to(IDENTITY, (11, 2, 2)), atol=1e-15)

    def test_transform_diagonalises_free_hamiltonian(self):
        from relwigner.states import free_fv_hamiltonian

        for p in (0.0, 0.7, 3.0):
            E = float(energy_free(p, P))
            U = fv_transform_matrix(E, P)
            Ui = fv_transform_matrix(E, P, inverse=True)
            D = U @ free_fv_hamiltonian(p, P) @ Ui
            np.testing.assert_allclose(D, np.diag([E, -E]), atol=1e-12)
