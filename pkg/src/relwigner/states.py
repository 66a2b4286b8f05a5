"""Two-component states in the energy (Feshbach-Villars) representation.

States are stored as half-step momentum samples of the particle (``alpha = +1``)
and antiparticle (``alpha = -1``) amplitudes. The ``(phi, chi)`` pair of the
Klein-Gordon change of variables only appears at the conversion boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import PhaseSpaceGrid
from .kinematics import PhysicalParams, energy_free, fv_transform_matrix

CHARGES = (+1, -1)


def _charge_slot(charge: int) -> int:
    if charge not in CHARGES:
        raise ValueError(f"charge must be +1 or -1, got {charge!r}")
    return 0 if charge == +1 else 1


@dataclass(frozen=True)
class TwoComponentMomentumState:
    grid: PhaseSpaceGrid
    psi_plus: np.ndarray
    psi_minus: np.ndarray

    def __post_init__(self):
        for name in ("psi_plus", "psi_minus"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            self.grid.check_fine(arr, name)
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def component(self, charge: int) -> np.ndarray:
        return (self.psi_plus, self.psi_minus)[_charge_slot(charge)]

    def charge_norms(self) -> tuple[float, float]:
        dp = self.grid.dp
        return (
            float(np.sum(np.abs(self.grid.coarse(self.psi_plus)) ** 2) * dp),
            float(np.sum(np.abs(self.grid.coarse(self.psi_minus)) ** 2) * dp),
        )

    def norm(self) -> float:
        return float(sum(self.charge_norms()))

    def normalized(self) -> "TwoComponentMomentumState":
        n = self.norm()
        if n <= 0:
            raise ValueError("cannot normalise a zero state")
        s = 1 / np.sqrt(n)
        return TwoComponentMomentumState(self.grid, self.psi_plus * s, self.psi_minus * s)

    def is_charge_definite(self, tol: float = 0.0) -> bool:
        plus, minus = self.charge_norms()
        return min(plus, minus) <= tol * max(plus, minus)

    def __add__(self, other: "TwoComponentMomentumState") -> "TwoComponentMomentumState":
        if other.grid != self.grid:
            raise ValueError("grid mismatch")
        return TwoComponentMomentumState(
            self.grid, self.psi_plus + other.psi_plus, self.psi_minus + other.psi_minus
        )

    def scaled(self, factor: complex) -> "TwoComponentMomentumState":
        return TwoComponentMomentumState(self.grid, self.psi_plus * factor, self.psi_minus * factor)


def superpose(states, amplitudes) -> TwoComponentMomentumState:
    """Normalised coherent superposition ``sum_k a_k |state_k>``."""
    states = list(states)
    amplitudes = list(amplitudes)
    if len(states) != len(amplitudes) or not states:
        raise ValueError("need one amplitude per state")
    total = states[0].scaled(amplitudes[0])
    for st, a in zip(states[1:], amplitudes[1:]):
        total = total + st.scaled(a)
    return total.normalized()


def gaussian_packet(
    grid: PhaseSpaceGrid,
    p0: float,
    q0: float,
    sigma_p: float,
    charge: int = +1,
    margin: float = 4.0,
) -> TwoComponentMomentumState:
    """Gaussian packet exp(-(p-p0)^2/(4 sigma_p^2) - i p q0/hbar) on one charge component.

    The packet must keep ``margin`` standard deviations clear of the grid
    edges in both momentum and position; otherwise periodic wrap-around
    would contaminate the transforms.
    """
    if not sigma_p > 0:
        raise ValueError(f"sigma_p must be positive, got {sigma_p!r}")
    slot = _charge_slot(charge)
    sigma_q = grid.hbar / (2 * sigma_p)
    p_room = min(p0 - grid.p_min, grid.p_max - p0) / sigma_p
    q_room = min(q0 + grid.q_max, grid.q_max - q0) / sigma_q
    if p_room < margin or q_room < margin:
        raise ValueError(
            f"packet support violates the {margin:g}-sigma margin: momentum room "
            f"{p_room:.2f} sigma_p, position room {q_room:.2f} sigma_q "
            f"(sigma_q = {sigma_q:.4g}, grid p in [{grid.p_min:.4g}, {grid.p_max:.4g}], "
            f"|q| <= {grid.q_max:.4g})"
        )
    p = grid.p_fine
    psi = np.exp(-((p - p0) ** 2) / (4 * sigma_p**2) - 1j * p * q0 / grid.hbar)
    psi = psi / np.sqrt(np.sum(np.abs(grid.coarse(psi)) ** 2) * grid.dp)
    zero = np.zeros_like(psi)
    comps = [zero, zero]
    comps[slot] = psi
    return TwoComponentMomentumState(grid, *comps)


@dataclass(frozen=True)
class ChargeMixture:
    """Convex combination of pure states."""

    weights: tuple[float, ...]
    states: tuple[TwoComponentMomentumState, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(w) != len(self.states) or len(w) == 0:
            raise ValueError("need one weight per state")
        if np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
            raise ValueError("mixture weights must be non-negative and sum to 1")
        grids = {s.grid for s in self.states}
        if len(grids) != 1:
            raise ValueError("all mixture members must share a grid")
        object.__setattr__(self, "weights", tuple(float(x) for x in w))
        object.__setattr__(self, "states", tuple(self.states))

    @property
    def grid(self) -> PhaseSpaceGrid:
        return self.states[0].grid


# Klein-Gordon <-> Feshbach-Villars


def klein_gordon_to_fv(psi, psi_dot, params: PhysicalParams):
    """Split ``(psi, d psi/dt)`` into the Feshbach-Villars pair ``(phi, chi)``.

    Inverts ``psi = (phi + chi)/sqrt2`` and ``i hbar psi_dot = m c^2 (phi - chi)/sqrt2``.
    """
    psi = np.asarray(psi, dtype=complex)
    psi_dot = np.asarray(psi_dot, dtype=complex)
    if psi.shape != psi_dot.shape:
        raise ValueError("psi and psi_dot must be sampled on the same grid")
    a = 1j * params.hbar / params.rest_energy
    phi = (psi + a * psi_dot) / math.sqrt(2)
    chi = (psi - a * psi_dot) / math.sqrt(2)
    return phi, chi


def fv_to_klein_gordon(phi, chi, params: PhysicalParams):
    phi = np.asarray(phi, dtype=complex)
    chi = np.asarray(chi, dtype=complex)
    psi = (phi + chi) / math.sqrt(2)
    psi_dot = params.rest_energy * (phi - chi) / (math.sqrt(2) * 1j * params.hbar)
    return psi, psi_dot


def free_fv_hamiltonian(p, params: PhysicalParams) -> np.ndarray:
    """Momentum symbol of the free FV Hamiltonian, ``(tau3 + i tau2) p^2/2m + tau3 m c^2``."""
    p = np.asarray(p, dtype=float)
    k = p**2 / (2 * params.m)
    mc2 = params.rest_energy
    out = np.empty(p.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = k + mc2
    out[..., 0, 1] = k
    out[..., 1, 0] = -k
    out[..., 1, 1] = -k - mc2
    return out


def to_energy_representation(
    phi, chi, grid: PhaseSpaceGrid, params: PhysicalParams
) -> TwoComponentMomentumState:
    """Apply ``U(p)`` pointwise to momentum-space FV data ``(phi, chi)``."""
    phi = grid.check_fine(np.asarray(phi, dtype=complex), "phi")
    chi = grid.check_fine(np.asarray(chi, dtype=complex), "chi")
    U = fv_transform_matrix(energy_free(grid.p_fine, params), params)
    plus = U[:, 0, 0] * phi + U[:, 0, 1] * chi
    minus = U[:, 1, 0] * phi + U[:, 1, 1] * chi
    return TwoComponentMomentumState(grid, plus, minus)


def from_energy_representation(state: TwoComponentMomentumState, params: PhysicalParams):
    Uinv = fv_transform_matrix(energy_free(state.grid.p_fine, params), params, inverse=True)
    phi = Uinv[:, 0, 0] * state.psi_plus + Uinv[:, 0, 1] * state.psi_minus
    chi = Uinv[:, 1, 0] * state.psi_plus + Uinv[:, 1, 1] * state.psi_minus
    return phi, chi


# oscillator basis


@dataclass(frozen=True)
class HermiteBasis:
    """Real orthonormal oscillator eigenfunctions sampled on the half-step grid."""

    grid: PhaseSpaceGrid
    params: PhysicalParams
    n_max: int
    fine: np.ndarray = field(repr=False)

    @property
    def coarse(self) -> np.ndarray:
        return self.fine[:, ::2]

    def gram(self) -> np.ndarray:
        c = self.coarse
        return c @ c.T * self.grid.dp

    def expand(self, psi_fine: np.ndarray) -> np.ndarray:
        """Coefficients ``<phi_n | psi>`` by quadrature on the half-step grid."""
        return self.fine @ np.asarray(psi_fine, dtype=complex) * (self.grid.dp / 2)


def hermite_functions(x: np.ndarray, n_max: int) -> np.ndarray:
    """Normalised Hermite functions h_n(x), n < n_max, via the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max,) + x.shape)
    out[0] = np.pi**-0.25 * np.exp(-(x**2) / 2)
    if n_max > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, n_max - 1):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * x * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def basis_resolution_room(grid: PhaseSpaceGrid, n_max: int, params: PhysicalParams, tail: float = 2.5):
    """Ratios (available / required) of momentum and position range for level ``n_max - 1``.

    The Wigner transforms of level ``n`` reach momentum differences (and the
    conjugate position range) of twice the classical radius ``sqrt(2n + 1)``
    plus an evanescent tail, in oscillator units.
    """
    radius = math.sqrt(2 * (n_max - 1) + 1) + tail
    p_need = 2 * radius * params.p_osc
    q_need = 2 * radius * params.q_osc
    p_have = grid.n_points * grid.dp / 2
    q_have = np.pi * grid.hbar / grid.dp
    return p_have / p_need, q_have / q_need


def hermite_basis(grid: PhaseSpaceGrid, n_max: int, params: PhysicalParams) -> HermiteBasis:
    """Momentum-space oscillator eigenfunctions ``phi_n(p)``, ``n < n_max``."""
    if not 1 <= n_max <= 128:
        raise ValueError(f"n_max must lie in [1, 128], got {n_max}")
    if abs(grid.hbar - params.hbar) > 1e-15 * params.hbar:
        raise ValueError("grid and params disagree on hbar")
    p_room, q_room = basis_resolution_room(grid, n_max, params)
    if p_room < 1 or q_room < 1:
        raise ValueError(
            f"grid does not resolve level {n_max - 1}: momentum room {p_room:.2f}, "
            f"position room {q_room:.2f} (need >= 1); increase n_points or adjust dp"
        )
    p0 = params.p_osc
    fine = hermite_functions(grid.p_fine / p0, n_max) / np.sqrt(p0)
    fine.setflags(write=False)
    return HermiteBasis(grid, params, n_max, fine)


def oscillator_grid(n_points: int, params: PhysicalParams) -> PhaseSpaceGrid:
    """Grid with equal momentum and position ranges in oscillator units."""
    return PhaseSpaceGrid(n_points, params.p_osc * math.sqrt(2 * math.pi / n_points), params.hbar)


@dataclass(frozen=True)
class EnergyBasisState:
    """Coefficients ``C[alpha_slot, n]`` over oscillator levels; slot 0 is ``alpha = +1``."""

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex)
        if c.ndim != 2 or c.shape[0] != 2:
            raise ValueError(f"coefficients must have shape (2, n_max), got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def n_max(self) -> int:
        return self.coefficients.shape[1]

    def norm(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2))

    def normalized(self) -> "EnergyBasisState":
        return EnergyBasisState(self.coefficients / np.sqrt(self.norm()))

    def populations(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    def charge(self, charge: int) -> np.ndarray:
        return self.coefficients[_charge_slot(charge)]

    def wavefunction(self, basis: HermiteBasis) -> TwoComponentMomentumState:
        if basis.n_max < self.n_max:
            raise ValueError("basis truncation smaller than the state")
        phi = basis.fine[: self.n_max]
        return TwoComponentMomentumState(
            basis.grid, self.coefficients[0] @ phi, self.coefficients[1] @ phi
        )

    @classmethod
    def from_levels(cls, n_max: int, levels: dict) -> "EnergyBasisState":
        """Build from ``{(charge, n): amplitude}`` and normalise."""
        c = np.zeros((2, n_max), dtype=complex)
        for (charge, n), amp in levels.items():
            c[_charge_slot(charge), n] = amp
        return cls(c).normalized()

    @classmethod
    def from_wavefunction(cls, state: TwoComponentMomentumState, basis: HermiteBasis) -> "EnergyBasisState":
        return cls(np.stack([basis.expand(state.psi_plus), basis.expand(state.psi_minus)]))
