"""Relativistic kinematics of a scalar charged particle.

Energies of the free particle and of the relativistic rotator, the
symmetric/antisymmetric energy factors ``epsilon``/``chi`` and the
Feshbach-Villars transform matrices acting on the two-dimensional
charge space.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

IDENTITY = np.eye(2, dtype=complex)
TAU1 = np.array([[0, 1], [1, 0]], dtype=complex)
TAU2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
TAU3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (TAU1, TAU2, TAU3)


@dataclass(frozen=True)
class PhysicalParams:
    """Mass, speed of light, reduced Planck constant and oscillator frequency."""

    m: float = 1.0
    c: float = 1.0
    hbar: float = 1.0
    omega: float = 1.0

    def __post_init__(self):
        for name in ("m", "c", "hbar", "omega"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")

    @property
    def rest_energy(self) -> float:
        return self.m * self.c**2

    @property
    def p_osc(self) -> float:
        """Momentum scale of the oscillator eigenfunctions, sqrt(m hbar omega)."""
        return float(np.sqrt(self.m * self.hbar * self.omega))

    @property
    def q_osc(self) -> float:
        """Length scale of the oscillator eigenfunctions, sqrt(hbar / (m omega))."""
        return float(np.sqrt(self.hbar / (self.m * self.omega)))


@dataclass(frozen=True)
class KinematicFactor:
    epsilon: np.ndarray | float
    chi: np.ndarray | float


def energy_free(p, params: PhysicalParams):
    """Free-particle energy sqrt(m^2 c^4 + c^2 p^2)."""
    p = np.asarray(p, dtype=float)
    return np.sqrt(params.rest_energy**2 + (params.c * p) ** 2)


def energy_rotator(n, params: PhysicalParams):
    """Relativistic rotator spectrum sqrt(m^2 c^4 + 2 m c^2 hbar omega (n + 1/2))."""
    n_arr = np.asarray(n)
    if not np.issubdtype(n_arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(n_arr, 1), 0)):
            raise ValueError("level index must be an integer")
    if np.any(n_arr < 0):
        raise ValueError(f"level index must be non-negative, got {n!r}")
    n_arr = n_arr.astype(float)
    return np.sqrt(
        params.rest_energy**2
        + 2.0 * params.rest_energy * params.hbar * params.omega * (n_arr + 0.5)
    )


def kinematic_factors(E1, E2) -> KinematicFactor:
    """Return epsilon = (E1+E2)/(2 sqrt(E1 E2)) and chi = (E1-E2)/(2 sqrt(E1 E2))."""
    E1 = np.asarray(E1, dtype=float)
    E2 = np.asarray(E2, dtype=float)
    if np.any(E1 <= 0) or np.any(E2 <= 0):
        raise ValueError("energies must be strictly positive")
    denom = 2.0 * np.sqrt(E1 * E2)
    eps = (E1 + E2) / denom
    chi = (E1 - E2) / denom
    if eps.ndim == 0:
        return KinematicFactor(float(eps), float(chi))
    return KinematicFactor(eps, chi)


def epsilon_chi_free(p1, p2, params: PhysicalParams) -> tuple[np.ndarray, np.ndarray]:
    """Convenience: epsilon and chi for two momentum arguments."""
    k = kinematic_factors(energy_free(p1, params), energy_free(p2, params))
    return np.asarray(k.epsilon), np.asarray(k.chi)


def _charge_matrix(diag, off):
    """Stack a*I + b*tau1 for broadcastable a, b into (..., 2, 2)."""
    diag = np.asarray(diag, dtype=complex)
    off = np.asarray(off, dtype=complex)
    diag, off = np.broadcast_arrays(diag, off)
    out = np.empty(diag.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = diag
    out[..., 1, 1] = diag
    out[..., 0, 1] = off
    out[..., 1, 0] = off
    return out


def fv_transform_matrix(E, params: PhysicalParams, inverse: bool = False) -> np.ndarray:
    """Feshbach-Villars transform U(E) (or its inverse) as a 2x2 charge matrix.

    Vectorised over ``E``: the result has shape ``E.shape + (2, 2)``.
    """
    E = np.asarray(E, dtype=float)
    mc2 = params.rest_energy
    if np.any(E < mc2 * (1 - 1e-14)):
        raise ValueError("energy below the rest energy")
    norm = 2.0 * np.sqrt(mc2 * E)
    sign = -1.0 if inverse else 1.0
    return _charge_matrix((E + mc2) / norm, sign * (E - mc2) / norm)


def r_matrix(E1, E2) -> np.ndarray:
    """R(s1, s2) = U(s1) U^{-1}(s2) = epsilon I + chi tau1."""
    k = kinematic_factors(E1, E2)
    return _charge_matrix(k.epsilon, k.chi)
