"""Relativistic rotator (constant magnetic field): Wigner functions in the oscillator basis.

Phase-space objects are built from the real momentum-space oscillator
functions ``phi_n`` of :mod:`relwigner.states`. Pair matrices on the
half-step grid, ``M[i1, i2] = sum_mn f(m, n) a_m phi_m(p_i1) b_n phi_n(p_i2)``,
are the common currency: a single transform of ``M`` gives the corresponding
linear combination of ``W_nm`` without ever storing the full set.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from .grid import (
    PhaseSpaceGrid,
    correlation_from_wigner,
    cross_wigner,
    gather_from_fine,
    scatter_to_fine,
    star_product,
    wigner_from_pair_matrix,
)
from .kinematics import PhysicalParams, energy_rotator, kinematic_factors
from .states import EnergyBasisState, HermiteBasis, TwoComponentMomentumState, hermite_basis, oscillator_grid
from .wigner_free import COMPONENTS, LiouvilleReport, WignerComponents, dominant_frequency

KERNEL_KINDS = ("epsilon", "chi", "epsilon_inv", "chi_inv")


def level_energies(n_max: int, params: PhysicalParams) -> np.ndarray:
    return energy_rotator(np.arange(n_max), params)


def level_factors(n_max: int, params: PhysicalParams, kind: str) -> np.ndarray:
    """``f(m, n)`` for one of the four generalized kernels; ``chi_inv`` is zero on the diagonal."""
    if kind not in KERNEL_KINDS:
        raise ValueError(f"unknown kernel kind {kind!r}; expected one of {KERNEL_KINDS}")
    E = level_energies(n_max, params)
    k = kinematic_factors(E[:, None], E[None, :])
    if kind == "epsilon":
        return k.epsilon
    if kind == "chi":
        return k.chi
    if kind == "epsilon_inv":
        return 1 / k.epsilon
    out = np.zeros_like(k.chi)
    off = ~np.eye(n_max, dtype=bool)
    out[off] = 1 / k.chi[off]
    return out


def _pair_matrix(basis: HermiteBasis, weights: np.ndarray) -> np.ndarray:
    """``M[i1, i2] = sum_mn weights[m, n] phi_m(p_i1) phi_n(p_i2)`` on the half-step grid."""
    n = weights.shape[0]
    phi = basis.fine[:n]
    return phi.T @ weights @ phi


@dataclass
class WignerBasisMatrix:
    """Lazily evaluated ``W_nm = cross_wigner(phi_m, phi_n)`` with a small cache."""

    basis: HermiteBasis
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def grid(self) -> PhaseSpaceGrid:
        return self.basis.grid

    @property
    def n_max(self) -> int:
        return self.basis.n_max

    def __call__(self, n: int, m: int) -> np.ndarray:
        if not (0 <= n < self.n_max and 0 <= m < self.n_max):
            raise IndexError(f"level pair ({n}, {m}) outside truncation {self.n_max}")
        key = (n, m)
        if key not in self._cache:
            phi = self.basis.fine
            self._cache[key] = cross_wigner(phi[m], phi[n], self.grid)
        return self._cache[key]

    def combination(self, weights: np.ndarray) -> np.ndarray:
        """``sum_nm weights[n, m] W_nm`` via one pair-matrix transform."""
        weights = np.asarray(weights)
        # W_nm carries phi_m(p1) phi_n(p2), hence the transpose
        return wigner_from_pair_matrix(_pair_matrix(self.basis, weights.T), self.grid)


def wigner_basis(basis: HermiteBasis) -> WignerBasisMatrix:
    return WignerBasisMatrix(basis)


def _coefficient_weights(state: EnergyBasisState, params: PhysicalParams, n_max: int) -> dict:
    """``w[m, n]`` multiplying ``phi_m(p1) phi_n(p2)`` for each component."""
    if state.n_max > n_max:
        raise ValueError(f"state has {state.n_max} levels but the basis only {n_max}")
    C = np.zeros((2, n_max), dtype=complex)
    C[:, : state.n_max] = state.coefficients
    eps = level_factors(n_max, params, "epsilon")
    chi = level_factors(n_max, params, "chi")
    cp, cm = C
    return {
        "pp": eps * np.outer(np.conj(cp), cp),
        "mm": eps * np.outer(np.conj(cm), cm),
        "pm": chi * np.outer(np.conj(cp), cm),
        "mp": chi * np.outer(np.conj(cm), cp),
    }


def build_components_magnetic(
    state: EnergyBasisState,
    Wb: WignerBasisMatrix,
    params: PhysicalParams,
    max_explicit_terms: int = 64,
) -> WignerComponents:
    """Components as explicit sums of ``f(m, n) W_nm C_m^* C_n``.

    Sparse states are summed term by term over cached ``W_nm``; when more
    than ``max_explicit_terms`` terms are non-zero the identical linear
    combination is taken through one pair-matrix transform.
    """
    weights = _coefficient_weights(state, params, Wb.n_max)
    out = {}
    for name in COMPONENTS:
        w = weights[name]
        terms = np.argwhere(np.abs(w) > 0)
        if len(terms) <= max_explicit_terms:
            acc = np.zeros((Wb.grid.n_points,) * 2, dtype=complex)
            for m, n in terms:
                acc += w[m, n] * Wb(n, m)
            out[name] = acc
        else:
            out[name] = Wb.combination(w.T)
    return WignerComponents(Wb.grid, **out)


@dataclass(frozen=True)
class GeneralizedKernel:
    """Truncated four-point kernel ``sum_mn f(m, n) phi_m(p') phi_m(p1) phi_n(p'') phi_n(p2)``."""

    basis: HermiteBasis
    params: PhysicalParams
    kind: str
    factors: np.ndarray = field(repr=False)

    @property
    def n_max(self) -> int:
        return self.basis.n_max

    def __call__(self, p_prime_idx, p1_idx, p_dprime_idx, p2_idx) -> np.ndarray:
        """Kernel value at half-step grid indices (broadcast)."""
        phi = self.basis.fine
        a = phi[:, p_prime_idx] * phi[:, p1_idx]
        b = phi[:, p_dprime_idx] * phi[:, p2_idx]
        return np.einsum("m...,mn,n...->...", a, self.factors, b)

    def project(self, F: np.ndarray, lattice: bool = False) -> np.ndarray:
        """Level matrix ``X[m, n] = iint phi_m(p') phi_n(p'') F(p', p'') dp' dp''``.

        ``F`` is either a half-step pair matrix or, with ``lattice=True``, a
        correlation ``T[j, s]`` (quadrature weight ``dp^2`` per lattice point).
        """
        g = self.basis.grid
        phi = self.basis.fine
        if lattice:
            return phi @ scatter_to_fine(F, g) @ phi.T * g.dp**2
        return phi @ F @ phi.T * (g.dp / 2) ** 2

    def apply(self, F: np.ndarray, lattice: bool = False) -> np.ndarray:
        """``G(p1, p2) = iint K(p', p1, p'', p2) F(p', p'') dp' dp''`` on the same layout as ``F``."""
        G = _pair_matrix(self.basis, self.factors * self.project(F, lattice))
        return gather_from_fine(G, self.basis.grid) if lattice else G

    def apply_coefficients(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Kernel contracted with a separable ``F = outer(a-expansion, b-expansion)``."""
        return _pair_matrix(self.basis, self.factors * np.outer(a, b))


def generalized_kernels(basis: HermiteBasis, params: PhysicalParams, kind: str) -> GeneralizedKernel:
    return GeneralizedKernel(basis, params, kind, level_factors(basis.n_max, params, kind))


def build_components_kernel(
    psi: TwoComponentMomentumState,
    basis: HermiteBasis,
    params: PhysicalParams,
) -> WignerComponents:
    """Components from the momentum wavefunction and the epsilon / chi kernels.

    ``T_ab(p1, p2) = iint K_f(p', p1, p'', p2) psi_a^*(p') psi_b(p'') dp' dp''``
    with ``f = epsilon`` for ``a = b`` and ``chi`` otherwise.
    """
    g = basis.grid
    k_eps = generalized_kernels(basis, params, "epsilon")
    k_chi = generalized_kernels(basis, params, "chi")
    amps = {"p": psi.psi_plus, "m": psi.psi_minus}
    out = {}
    for name in COMPONENTS:
        kern = k_eps if name[0] == name[1] else k_chi
        F = np.outer(np.conj(amps[name[0]]), amps[name[1]])
        out[name] = wigner_from_pair_matrix(kern.apply(F), g)
    return WignerComponents(g, **out)


# evolution


def evolve_energy_basis(state: EnergyBasisState, t: float, params: PhysicalParams) -> EnergyBasisState:
    E = level_energies(state.n_max, params)
    phase = np.exp(-1j * E * t / params.hbar)
    return EnergyBasisState(np.stack([state.coefficients[0] * phase, state.coefficients[1] * np.conj(phase)]))


def liouville_rhs_magnetic(state: EnergyBasisState, Wb: WignerBasisMatrix, params: PhysicalParams) -> WignerComponents:
    """Basis-exact time derivative: ``i a (E(m) -/+ E(n)) / hbar`` weights on each ``W_nm`` term."""
    weights = _coefficient_weights(state, params, Wb.n_max)
    E = level_energies(Wb.n_max, params)
    diff = (E[:, None] - E[None, :]) / params.hbar
    summ = (E[:, None] + E[None, :]) / params.hbar
    rates = {"pp": 1j * diff, "mm": -1j * diff, "pm": 1j * summ, "mp": -1j * summ}
    return WignerComponents(Wb.grid, **{n: Wb.combination((rates[n] * weights[n]).T) for n in COMPONENTS})


def _components_at(state, t, Wb, params):
    return build_components_magnetic(evolve_energy_basis(state, t, params), Wb, params, max_explicit_terms=0)


def verify_liouville_magnetic(
    state: EnergyBasisState,
    Wb: WignerBasisMatrix,
    params: PhysicalParams,
    t: float,
    h: float,
) -> LiouvilleReport:
    """Centered differences at ``h`` and ``h/2`` against the basis-exact derivative."""
    rhs = liouville_rhs_magnetic(evolve_energy_basis(state, t, params), Wb, params)

    def residual(step):
        fwd = _components_at(state, t + step, Wb, params)
        bwd = _components_at(state, t - step, Wb, params)
        fd = fwd.combine(bwd, 1 / (2 * step), -1 / (2 * step))
        return fd.max_abs_difference(rhs)

    return LiouvilleReport(h, residual(h), residual(h / 2))


def coefficient_time_series(
    state: EnergyBasisState,
    Wb: WignerBasisMatrix,
    params: PhysicalParams,
    name: str,
    j: int,
    k: int,
    times,
) -> np.ndarray:
    """Component value at ``(p_j, q_k)`` over time from per-term phase bookkeeping."""
    weights = _coefficient_weights(state, params, Wb.n_max)[name]
    E = level_energies(Wb.n_max, params) / params.hbar
    a = 1 if name[0] == "p" else -1
    b = 1 if name[1] == "p" else -1
    terms = np.argwhere(np.abs(weights) > 0)
    values = np.array([weights[m, n] * Wb(n, m)[j, k] for m, n in terms])
    rates = np.array([a * E[m] - b * E[n] for m, n in terms])
    times = np.asarray(times, dtype=float)
    return np.exp(1j * np.outer(times, rates)) @ values


def beat_frequency(
    state: EnergyBasisState,
    Wb: WignerBasisMatrix,
    params: PhysicalParams,
    name: str = "pp",
    dt: float = 0.1,
    n_samples: int = 2048,
) -> tuple[float, float]:
    """Magnitude of the dominant oscillation frequency of one component and the bin width."""
    weights = _coefficient_weights(state, params, Wb.n_max)[name]
    off = weights.copy()
    if name in ("pp", "mm"):
        np.fill_diagonal(off, 0)
    terms = np.argwhere(np.abs(off) > 0)
    if len(terms) == 0:
        raise ValueError(f"component {name} has no oscillating terms")
    m, n = terms[0]
    field_ = np.abs(Wb(n, m))
    j, k = np.unravel_index(int(np.argmax(field_)), field_.shape)
    series = coefficient_time_series(state, Wb, params, name, j, k, np.arange(n_samples) * dt)
    freq, width = dominant_frequency(series, dt)
    return abs(freq), width


# effective Hamiltonian


@dataclass(frozen=True)
class EffectiveHamiltonianSymbol:
    grid: PhaseSpaceGrid
    values: np.ndarray
    n_max: int


def level_taper(n_max: int, center: float = 0.75, width: float = 0.1) -> np.ndarray:
    """Smooth cutoff ``erfc((n - center N) / (width N)) / 2`` over the truncated levels.

    The diagonal spectral sum alternates in sign at the origin, so a hard
    truncation leaves an O(N_max) artefact there; the taper sums it smoothly.
    """
    n = np.arange(n_max)
    return 0.5 * erfc((n - center * n_max) / (width * n_max))


def star_root_symbol(
    basis: HermiteBasis,
    params: PhysicalParams,
    taper: tuple[float, float] | None = (0.75, 0.1),
) -> EffectiveHamiltonianSymbol:
    """``E(p, q) = sum_n E(n) w(n) (2 pi hbar) W_nn(p, q)``; ``taper=None`` gives ``w = 1``."""
    g = basis.grid
    E = level_energies(basis.n_max, params)
    if taper is not None:
        E = E * level_taper(basis.n_max, *taper)
    M = _pair_matrix(basis, np.diag(E * 2 * np.pi * g.hbar))
    return EffectiveHamiltonianSymbol(g, wigner_from_pair_matrix(M, g), basis.n_max)


def quadratic_symbol(grid: PhaseSpaceGrid, params: PhysicalParams) -> np.ndarray:
    """``m^2 c^4 + 2 m c^2 (p^2 / 2m + m omega^2 q^2 / 2)``."""
    P, Q = grid.mesh()
    h_osc = P**2 / (2 * params.m) + params.m * params.omega**2 * Q**2 / 2
    return params.rest_energy**2 + 2 * params.rest_energy * h_osc


def trust_region(grid: PhaseSpaceGrid, params: PhysicalParams, n_max: int) -> np.ndarray:
    """Phase-space points whose oscillator energy lies below ``hbar omega n_max / 2``."""
    P, Q = grid.mesh()
    h_osc = P**2 / (2 * params.m) + params.m * params.omega**2 * Q**2 / 2
    return h_osc <= params.hbar * params.omega * n_max / 2


def star_root_residual(symbol: EffectiveHamiltonianSymbol, params: PhysicalParams) -> float:
    """Max relative deviation of ``E * E`` from the quadratic symbol on the trust region."""
    g = symbol.grid
    sq = star_product(symbol.values, symbol.values, g)
    target = quadratic_symbol(g, params)
    region = trust_region(g, params, symbol.n_max)
    return float(np.max(np.abs(sq[region] - target[region]) / np.abs(target[region])))


# moments


def oscillator_matrix(observable: str, n_max: int, params: PhysicalParams) -> np.ndarray:
    """Matrix elements ``<phi_m | x | phi_n>`` of q or p in the real momentum-space basis."""
    n = np.arange(n_max - 1)
    up = np.sqrt((n + 1) / 2)
    if observable == "p":
        return params.p_osc * (np.diag(up, 1) + np.diag(up, -1)).astype(complex)
    if observable == "q":
        # q = i hbar d/dp acting on h_n(p / p_osc)
        return 1j * params.q_osc * (np.diag(up, 1) - np.diag(up, -1))
    raise ValueError(f"observable must be 'q' or 'p', got {observable!r}")


def moments_magnetic(
    state: EnergyBasisState,
    params: PhysicalParams,
    observable: str,
    order: int,
    weighted: bool = True,
) -> float:
    """``sum_a sum_mn C_m^a* f(m, n) (x^s)_mn C_n^a`` with ``f = epsilon`` (or 1 if unweighted)."""
    if order not in (0, 1, 2):
        raise ValueError(f"unsupported moment order {order}; use 0, 1 or 2")
    n = state.n_max
    X = np.linalg.matrix_power(oscillator_matrix(observable, n + 2, params), order)[:n, :n]
    f = level_factors(n, params, "epsilon") if weighted else np.ones((n, n))
    total = 0.0
    for c in state.coefficients:
        total += np.conj(c) @ (f * X) @ c
    return float(np.real(total))


# constraints and purity


@dataclass
class MagneticConstraintReport:
    n_max: int
    lhs_max: float
    rhs_max: float
    residual: float
    truncation_error: float | None = None

    @property
    def relative(self) -> float:
        scale = max(self.lhs_max, self.rhs_max)
        return 0.0 if scale == 0 else self.residual / scale


def constraint_sides_magnetic(W: WignerComponents, basis: HermiteBasis, params: PhysicalParams):
    """Both sides of the magnetic product constraint on the pair lattice.

    ``[K_eps^-1 T_++][K_eps^-1 T_--]`` and ``[K_chi^-1 T_+-][K_chi^-1 T_-+]``.
    """
    k_e = generalized_kernels(basis, params, "epsilon_inv")
    k_c = generalized_kernels(basis, params, "chi_inv")
    T = {n: correlation_from_wigner(W.get(n), W.grid) for n in COMPONENTS}
    lhs = k_e.apply(T["pp"], lattice=True) * k_e.apply(T["mm"], lattice=True)
    rhs = k_c.apply(T["pm"], lattice=True) * k_c.apply(T["mp"], lattice=True)
    return lhs, rhs


def exact_constraint_product(psi: TwoComponentMomentumState) -> np.ndarray:
    """``psi_+^*(p1) psi_+(p2) psi_-^*(p1) psi_-(p2)`` on the pair lattice."""
    i1, i2 = psi.grid.pair_indices()
    a, b = psi.psi_plus, psi.psi_minus
    return np.conj(a[i1]) * a[i2] * np.conj(b[i1]) * b[i2]


def check_constraint_magnetic(
    W: WignerComponents,
    basis: HermiteBasis,
    params: PhysicalParams,
    reference: TwoComponentMomentumState | None = None,
) -> MagneticConstraintReport:
    """Residual of the product constraint; with ``reference`` also the truncation error.

    The truncation error is the larger max-deviation of either side from the
    exact product of the untruncated reference amplitudes, relative to the
    maximum of that product.
    """
    lhs, rhs = constraint_sides_magnetic(W, basis, params)
    report = MagneticConstraintReport(
        basis.n_max,
        float(np.max(np.abs(lhs))),
        float(np.max(np.abs(rhs))),
        float(np.max(np.abs(lhs - rhs))),
    )
    if reference is not None:
        exact = exact_constraint_product(reference)
        scale = float(np.max(np.abs(exact)))
        err = max(float(np.max(np.abs(lhs - exact))), float(np.max(np.abs(rhs - exact))))
        report.truncation_error = err / scale if scale else 0.0
    return report


@dataclass
class MagneticPurityReport:
    even_residual: float
    odd_residual: float | None
    trust_points: int

    @property
    def odd_status(self) -> str:
        return "not applicable" if self.odd_residual is None else "evaluated"


def fine_log_mixed_derivative(G: np.ndarray, h: float, floor: float = 1e-8):
    """Mixed log-derivative of a half-step pair matrix by the four-point ratio stencil.

    Returns values on the interior and the mask where all four stencil
    points exceed ``floor * max|G|``.
    """
    a = np.abs(G)
    ok = a > floor * a.max()
    pp, mm = G[2:, 2:], G[:-2, :-2]
    pm, mp = G[2:, :-2], G[:-2, 2:]
    good = ok[2:, 2:] & ok[:-2, :-2] & ok[2:, :-2] & ok[:-2, 2:]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        val = np.log((pp * mm) / (pm * mp)) / (4 * h**2)
    return np.where(good, val, 0.0), good


def purity_magnetic(
    W: WignerComponents,
    basis: HermiteBasis,
    params: PhysicalParams,
    floor: float = 1e-8,
    central_fraction: float = 0.5,
) -> MagneticPurityReport:
    """Mixed log-derivative of the kernel-filtered component transforms (zero for pure states)."""
    g = W.grid
    k_e = generalized_kernels(basis, params, "epsilon_inv")
    k_c = generalized_kernels(basis, params, "chi_inv")
    p = g.p_fine
    central = (np.abs(p) <= central_fraction * g.p_max)[1:-1]
    region = np.outer(central, central)

    def residual(name, kern):
        T = correlation_from_wigner(W.get(name), g)
        if not np.any(np.abs(T) > 0):
            return None, 0
        G = _pair_matrix(basis, kern.factors * kern.project(T, lattice=True))
        d, mask = fine_log_mixed_derivative(G, g.dp / 2, floor)
        mask &= region
        if not np.any(mask):
            raise ValueError(f"magnitude floor leaves no valid region for component {name}")
        return float(np.max(np.abs(d[mask]))), int(mask.sum())

    even = [residual(n, k_e) for n in ("pp", "mm")]
    even = [r for r in even if r[0] is not None]
    if not even:
        raise ValueError("no even component above the magnitude floor")
    odd, _ = residual("pm", k_c)
    return MagneticPurityReport(max(r[0] for r in even), odd, sum(r[1] for r in even))


def magnetic_setup(params: PhysicalParams, n_max: int = 64, n_points: int = 512):
    """Oscillator-adapted grid, basis and lazy Wigner basis for a truncation."""
    grid = oscillator_grid(n_points, params)
    basis = hermite_basis(grid, n_max, params)
    return grid, basis, wigner_basis(basis)
