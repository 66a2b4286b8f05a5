"""Free-particle Wigner components, their evolution and statistical properties.

Sign conventions (fixed against the wavefunction oracle):

* ``W_a^a``  carries the weight ``epsilon(p + P/2, p - P/2)``, ``W_a^-a`` the weight
  ``chi(p + P/2, p - P/2)``, both with the amplitude order ``psi_a^*(p+P/2) psi^b(p-P/2)``;
* under free evolution ``psi_a(p, t) = exp(-i a E(p) t / hbar) psi_a(p)`` the
  q-Fourier modes pick up ``exp(+i a t [E(p+P/2) -/+ E(p-P/2)] / hbar)``
  (minus for even, plus for odd components);
* because ``chi`` is antisymmetric, the odd components obey
  ``conj(W_+^-) = -W_-^+`` (charge-metric pseudo-Hermiticity).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import (
    PhaseSpaceGrid,
    correlation_from_wigner,
    cross_wigner,
    fourier_q,
    require_same_grid,
    wigner_from_correlation,
)
from .kinematics import PhysicalParams, energy_free, epsilon_chi_free, kinematic_factors
from .states import ChargeMixture, TwoComponentMomentumState

COMPONENTS = ("pp", "mm", "pm", "mp")


@dataclass(frozen=True)
class WignerComponents:
    """The four charge components of the Wigner function on one grid."""

    grid: PhaseSpaceGrid
    pp: np.ndarray
    mm: np.ndarray
    pm: np.ndarray
    mp: np.ndarray

    def __post_init__(self):
        for name in COMPONENTS:
            self.grid.check_field(getattr(self, name), name)

    @property
    def even(self) -> np.ndarray:
        return self.pp + self.mm

    @property
    def odd(self) -> np.ndarray:
        return self.pm + self.mp

    @property
    def total(self) -> np.ndarray:
        return self.even + self.odd

    def get(self, name: str) -> np.ndarray:
        if name not in COMPONENTS:
            raise KeyError(name)
        return getattr(self, name)

    def map(self, fn) -> "WignerComponents":
        return WignerComponents(self.grid, *(fn(getattr(self, n)) for n in COMPONENTS))

    def integral(self, name: str) -> complex:
        return complex(np.sum(self.get(name)) * self.grid.cell)

    def even_integral(self) -> float:
        return float(np.real(np.sum(self.even)) * self.grid.cell)

    def odd_integral(self) -> complex:
        return complex(np.sum(self.odd) * self.grid.cell)

    def max_abs_difference(self, other: "WignerComponents") -> float:
        require_same_grid(self.grid, other.grid)
        return max(float(np.max(np.abs(self.get(n) - other.get(n)))) for n in COMPONENTS)

    def combine(self, other: "WignerComponents", a: float = 1.0, b: float = 1.0) -> "WignerComponents":
        require_same_grid(self.grid, other.grid)
        return WignerComponents(
            self.grid, *(a * self.get(n) + b * other.get(n) for n in COMPONENTS)
        )


def _weights(params: PhysicalParams, relativistic: bool):
    if not relativistic:
        return (lambda p1, p2: np.ones_like(p1)), (lambda p1, p2: np.zeros_like(p1))

    def eps(p1, p2):
        return epsilon_chi_free(p1, p2, params)[0]

    def chi(p1, p2):
        return epsilon_chi_free(p1, p2, params)[1]

    return eps, chi


def build_components(
    state: TwoComponentMomentumState,
    params: PhysicalParams,
    relativistic: bool = True,
) -> WignerComponents:
    """Even components with the epsilon weight, odd components with the chi weight.

    ``relativistic=False`` forces ``(epsilon, chi) = (1, 0)``, i.e. the
    Newton-Wigner / non-relativistic construction.
    """
    eps, chi = _weights(params, relativistic)
    g = state.grid
    plus, minus = state.psi_plus, state.psi_minus
    return WignerComponents(
        g,
        cross_wigner(plus, plus, g, eps),
        cross_wigner(minus, minus, g, eps),
        cross_wigner(plus, minus, g, chi),
        cross_wigner(minus, plus, g, chi),
    )


def newton_wigner_components(state: TwoComponentMomentumState, params: PhysicalParams) -> WignerComponents:
    return build_components(state, params, relativistic=False)


def mixture_components(mixture: ChargeMixture, params: PhysicalParams, relativistic: bool = True) -> WignerComponents:
    total = None
    for w, st in zip(mixture.weights, mixture.states):
        comp = build_components(st, params, relativistic).map(lambda x, w=w: w * x)
        total = comp if total is None else total.combine(comp)
    return total


def build_matrix_wigner(
    state: TwoComponentMomentumState,
    params: PhysicalParams,
    relativistic: bool = True,
) -> np.ndarray:
    """Charge-matrix Wigner field ``M[j, k, a, b]`` from the full ``R(p1, p2)`` kernel.

    Built entry by entry from ``R = epsilon I + chi tau1`` on the pair
    lattice; ``M[..., 0, 0]`` is ``W_+^+``, ``M[..., 0, 1]`` is ``W_+^-``.
    """
    g = state.grid
    p1, p2 = g.pair_momenta()
    if relativistic:
        k = kinematic_factors(energy_free(p1, params), energy_free(p2, params))
        R = np.stack([[k.epsilon, k.chi], [k.chi, k.epsilon]])
    else:
        one = np.ones_like(p1)
        R = np.stack([[one, 0 * one], [0 * one, one]])
    i1, i2 = g.pair_indices()
    amps = (state.psi_plus, state.psi_minus)
    out = np.empty((g.n_points, g.n_points, 2, 2), dtype=complex)
    for a in range(2):
        for b in range(2):
            T = R[a, b] * np.conj(amps[a])[i1] * amps[b][i2]
            out[..., a, b] = wigner_from_correlation(T, g)
    return out


# evolution


def _pair_energies(grid: PhaseSpaceGrid, params: PhysicalParams):
    p1, p2 = grid.pair_momenta()
    return energy_free(p1, params), energy_free(p2, params)


def _mode_rates(grid: PhaseSpaceGrid, params: PhysicalParams) -> dict:
    """Angular frequencies of each q-Fourier mode per component."""
    E1, E2 = _pair_energies(grid, params)
    hb = params.hbar
    return {
        "pp": (E1 - E2) / hb,
        "mm": -(E1 - E2) / hb,
        "pm": (E1 + E2) / hb,
        "mp": -(E1 + E2) / hb,
    }


def evolve_spectral(W: WignerComponents, t: float, params: PhysicalParams) -> WignerComponents:
    """Exact free evolution of the components by phase multiplication of q-Fourier modes."""
    rates = _mode_rates(W.grid, params)
    out = {}
    for name in COMPONENTS:
        modes = fourier_q(W.get(name))
        out[name] = fourier_q(modes * np.exp(1j * rates[name] * t), inverse=True)
    return WignerComponents(W.grid, **out)


def liouville_rhs(W: WignerComponents, params: PhysicalParams) -> WignerComponents:
    """Right-hand sides of the free evolution equations, evaluated spectrally.

    Even: ``a (2/hbar) E(p) sin{-(hbar/2) <d_p d_q>} W`` which acts on a mode
    ``exp(-i P q / hbar)`` as ``i a [E(p+P/2) - E(p-P/2)] / hbar``; odd:
    ``i a (2/hbar) E(p) cos{(hbar/2) <d_p d_q>} W`` giving ``i a [E(p+P/2) + E(p-P/2)] / hbar``.
    """
    rates = _mode_rates(W.grid, params)
    return WignerComponents(
        W.grid,
        **{n: fourier_q(1j * rates[n] * fourier_q(W.get(n)), inverse=True) for n in COMPONENTS},
    )


@dataclass
class LiouvilleReport:
    """Finite-difference residuals at step ``h`` and ``h/2``; a ratio near 4 means O(h^2)."""

    h: float
    residual_h: float
    residual_half: float

    @property
    def ratio(self) -> float:
        return self.residual_h / self.residual_half


def verify_liouville(W: WignerComponents, params: PhysicalParams, t: float, h: float) -> LiouvilleReport:
    """Centered time differences of the propagated components against :func:`liouville_rhs`."""
    rhs = liouville_rhs(evolve_spectral(W, t, params), params)

    def residual(step):
        fwd = evolve_spectral(W, t + step, params)
        bwd = evolve_spectral(W, t - step, params)
        return fwd.combine(bwd, 1 / (2 * step), -1 / (2 * step)).max_abs_difference(rhs)

    return LiouvilleReport(h, residual(h), residual(h / 2))


def evolve_state(state: TwoComponentMomentumState, t: float, params: PhysicalParams) -> TwoComponentMomentumState:
    E = energy_free(state.grid.p_fine, params)
    phase = np.exp(-1j * E * t / params.hbar)
    return TwoComponentMomentumState(state.grid, state.psi_plus * phase, state.psi_minus * np.conj(phase))


def evolve_oracle(state: TwoComponentMomentumState, t: float, params: PhysicalParams) -> WignerComponents:
    """Ground truth: phase-evolve the amplitudes, then rebuild the components."""
    return build_components(evolve_state(state, t, params), params)


@dataclass
class EvolutionReport:
    times: list[float]
    deviations: list[float]
    even_integrals: list[float] = field(default_factory=list)
    odd_integrals: list[float] = field(default_factory=list)
    odd_frequency: float | None = None

    @property
    def max_deviation(self) -> float:
        return max(self.deviations) if self.deviations else 0.0


def evolution_report(
    state: TwoComponentMomentumState,
    times,
    params: PhysicalParams,
) -> tuple[list[WignerComponents], EvolutionReport]:
    W0 = build_components(state, params)
    series, devs, evens, odds = [], [], [], []
    for t in times:
        Wt = evolve_spectral(W0, t, params)
        devs.append(Wt.max_abs_difference(evolve_oracle(state, t, params)))
        evens.append(Wt.even_integral())
        odds.append(abs(Wt.odd_integral()))
        series.append(Wt)
    return series, EvolutionReport(list(map(float, times)), devs, evens, odds)


def component_time_series(
    W: WignerComponents,
    name: str,
    j: int,
    k: int,
    times,
    params: PhysicalParams,
) -> np.ndarray:
    """Evolved value of one component at grid point ``(p_j, q_k)`` for many times."""
    g = W.grid
    modes = fourier_q(W.get(name))[j]
    rate = _mode_rates(g, params)[name][j]
    n = g.n_points
    s = g.shifts
    # inverse of fourier_q at column k: N^{-1/2} sum_s modes[s] exp(-2 pi i s (k - N/2) / N)
    basis = np.exp(-2j * np.pi * s * (k - n // 2) / n) / np.sqrt(n)
    times = np.asarray(times, dtype=float)
    return (np.exp(1j * np.outer(times, rate)) * (modes * basis)[None, :]).sum(axis=1)


def dominant_frequency(series: np.ndarray, dt: float) -> tuple[float, float]:
    """Angular frequency of the strongest spectral line and the bin width.

    The sign follows ``exp(+i omega t)``.
    """
    series = np.asarray(series, dtype=complex)
    n = len(series)
    spec = np.fft.fft(series - series.mean())
    freqs = 2 * np.pi * np.fft.fftfreq(n, d=dt)
    return float(freqs[int(np.argmax(np.abs(spec)))]), 2 * np.pi / (n * dt)


def odd_oscillation_frequency(
    state: TwoComponentMomentumState,
    params: PhysicalParams,
    p0: float | None = None,
    dt: float = 0.1,
    n_samples: int = 1024,
    row_floor: float = 1e-3,
) -> tuple[float, float]:
    """Dominant temporal frequency of ``W_+^-`` on the momentum row nearest ``p0``.

    The position is the maximum of ``|W_+^-|`` along that row. Since ``chi``
    vanishes for ``p1 = -p2``, the row at ``p = 0`` is identically zero; rows
    below ``row_floor`` times the global maximum are skipped in favour of
    the nearest row that carries signal.
    """
    W = build_components(state, params)
    amp = np.abs(W.pm)
    peak = amp.max()
    if peak == 0:
        raise ValueError("state has no odd component")
    g = W.grid
    if p0 is None:
        j = int(np.argmax(amp.max(axis=1)))
    else:
        rows = np.flatnonzero(amp.max(axis=1) > row_floor * peak)
        j = int(rows[np.argmin(np.abs(g.p[rows] - p0))])
    k = int(np.argmax(amp[j]))
    series = component_time_series(W, "pm", j, k, np.arange(n_samples) * dt, params)
    return dominant_frequency(series, dt)


# marginals and moments


def marginal_p(W: WignerComponents, name: str | None = None) -> np.ndarray:
    """Momentum distribution: sum over q of the even part (or of one component)."""
    field_ = W.even if name is None else W.get(name)
    return np.real(np.sum(field_, axis=1) * W.grid.dq)


def marginal_q(W: WignerComponents, name: str | None = None) -> np.ndarray:
    field_ = W.even if name is None else W.get(name)
    return np.real(np.sum(field_, axis=0) * W.grid.dp)


def position_marginal_direct(
    state: TwoComponentMomentumState,
    params: PhysicalParams,
    relativistic: bool = True,
) -> np.ndarray:
    """Position distribution from the double momentum integral, summed over charges.

    ``(1/2 pi hbar) sum_{p1, p2} w(p1, p2) psi*(p1) psi(p2) exp(-i (p1 - p2) q / hbar) dp1 dp2``
    on the integer grid; independent of the Wigner transform.
    """
    g = state.grid
    p = g.p
    E = energy_free(p, params)
    if relativistic:
        k = kinematic_factors(E[:, None], E[None, :])
        w = np.asarray(k.epsilon)
    else:
        w = np.ones((len(p), len(p)))
    out = np.zeros(len(g.q))
    phase = np.exp(-1j * np.outer(p, g.q) / g.hbar)  # [p, q]
    for comp in (state.psi_plus, state.psi_minus):
        c = g.coarse(comp)
        if not np.any(c):
            continue
        u = np.conj(c)[:, None] * phase  # psi*(p1) e^{-i p1 q}
        v = c[:, None] * np.conj(phase)  # psi(p2) e^{i p2 q}
        out += np.real(np.einsum("aq,ab,bq->q", u, w, v)) * g.dp**2 / (2 * np.pi * g.hbar)
    return out


def _log_energy_derivatives(p, params: PhysicalParams, order: int) -> list[np.ndarray]:
    """Derivatives ``d^k/dp^k (1/2) ln E(p)`` for k = 1..order (order <= 3)."""
    a = params.rest_energy**2
    b = params.c**2
    D = a + b * p**2
    h1 = 2 * b * p / D
    h2 = 2 * b * (a - b * p**2) / D**2
    h3 = -4 * b**2 * p * (3 * a - b * p**2) / D**3
    return [h / 4 for h in (h1, h2, h3)][:order]


def epsilon_diagonal_derivatives(p, params: PhysicalParams, order: int) -> list[np.ndarray]:
    """``d^k/dp1^k epsilon(p1, p)`` at ``p1 = p`` for k = 0..order (order <= 4).

    ``epsilon = cosh(theta)`` with ``theta = (1/2) ln(E(p1)/E(p))`` vanishing
    on the diagonal, so Faa di Bruno keeps only even numbers of blocks.
    """
    if order > 4:
        raise ValueError("derivatives above fourth order are not supported")
    p = np.asarray(p, dtype=float)
    g1, g2, g3 = (_log_energy_derivatives(p, params, 3) + [None] * 3)[:3]
    out = [np.ones_like(p), np.zeros_like(p), g1**2, 3 * g1 * g2, g1**4 + 4 * g1 * g3 + 3 * g2**2]
    return out[: order + 1]


def _spectral_derivatives(f_fine: np.ndarray, grid: PhaseSpaceGrid, order: int) -> list[np.ndarray]:
    n = len(f_fine)
    k = 2 * np.pi * np.fft.fftfreq(n, d=grid.dp / 2)
    if n % 2 == 0:
        k[n // 2] = 0.0
    F = np.fft.fft(f_fine)
    return [np.fft.ifft(F * (1j * k) ** r) for r in range(order + 1)]


def moment_q(
    state: TwoComponentMomentumState,
    order: int,
    params: PhysicalParams,
    relativistic: bool = True,
) -> float:
    """``<q^n> = sum_a int psi_a*(p) [i hbar d/dp]^n (psi_a(p) epsilon(p, p'))|_{p'=p} dp``.

    The derivative acts on the product; the epsilon derivatives along the
    first argument are taken in closed form at the diagonal.
    """
    if order not in range(0, 5):
        raise ValueError(f"unsupported moment order {order}; use 0..4")
    g = state.grid
    eps_d = epsilon_diagonal_derivatives(g.p_fine, params, order)
    if not relativistic:
        eps_d = [np.ones_like(g.p_fine)] + [np.zeros_like(g.p_fine)] * order
    total = 0.0
    for comp in (state.psi_plus, state.psi_minus):
        if not np.any(comp):
            continue
        d = _spectral_derivatives(comp, g, order)
        acc = np.zeros_like(comp)
        for r in range(order + 1):
            acc = acc + math.comb(order, r) * d[order - r] * eps_d[r]
        integrand = np.conj(comp) * (1j * g.hbar) ** order * acc
        total += np.sum(integrand) * g.dp / 2
    return float(np.real(total))


def moment_from_marginal(W: WignerComponents, order: int) -> float:
    return float(np.sum(W.grid.q**order * marginal_q(W)) * W.grid.dq)


# constraints


@dataclass
class ConstraintReport:
    product_lhs_max: float
    product_rhs_max: float
    product_residual: float
    reality_residual: float
    conjugation_residual: float
    literal_conjugation_residual: float

    @property
    def product_relative(self) -> float:
        scale = max(self.product_lhs_max, self.product_rhs_max)
        return 0.0 if scale == 0 else self.product_residual / scale


def correlations(W: WignerComponents) -> dict:
    return {n: correlation_from_wigner(W.get(n), W.grid) for n in COMPONENTS}


def constraint_sides(W: WignerComponents, params: PhysicalParams):
    """Both sides of the even/odd product constraint on the pair lattice."""
    T = correlations(W)
    E1, E2 = _pair_energies(W.grid, params)
    lhs = (E1 - E2) ** 2 * T["pp"] * T["mm"]
    rhs = (E1 + E2) ** 2 * T["pm"] * T["mp"]
    return lhs, rhs


def constraint_sides_direct(state: TwoComponentMomentumState, params: PhysicalParams):
    """Oracle for :func:`constraint_sides` evaluated from the amplitudes."""
    g = state.grid
    i1, i2 = g.pair_indices()
    E1, E2 = _pair_energies(g, params)
    k = kinematic_factors(E1, E2)
    a, b = state.psi_plus, state.psi_minus
    lhs = (E1 - E2) ** 2 * k.epsilon**2 * np.conj(a[i1]) * a[i2] * np.conj(b[i1]) * b[i2]
    rhs = (E1 + E2) ** 2 * k.chi**2 * np.conj(a[i1]) * b[i2] * np.conj(b[i1]) * a[i2]
    # the amplitudes enter with the correlation normalisation (dp-independent)
    return lhs, rhs


def check_constraints(W: WignerComponents, params: PhysicalParams) -> ConstraintReport:
    lhs, rhs = constraint_sides(W, params)
    even_imag = max(float(np.max(np.abs(W.pp.imag))), float(np.max(np.abs(W.mm.imag))))
    return ConstraintReport(
        product_lhs_max=float(np.max(np.abs(lhs))),
        product_rhs_max=float(np.max(np.abs(rhs))),
        product_residual=float(np.max(np.abs(lhs - rhs))),
        reality_residual=even_imag,
        conjugation_residual=float(np.max(np.abs(np.conj(W.pm) + W.mp))),
        literal_conjugation_residual=float(np.max(np.abs(np.conj(W.pm) - W.mp))),
    )


# purity


@dataclass
class PurityReport:
    even_residual: float
    odd_residual: float | None
    trust_points: int
    overlap: float
    bound: float
    classification: str

    @property
    def overlap_ratio(self) -> float:
        return self.overlap / self.bound


def log_mixed_derivative(T: np.ndarray, grid: PhaseSpaceGrid, floor: float = 1e-8, step: int = 1):
    """``d^2/dp1 dp2 ln T`` on the pair lattice by a four-point log-ratio stencil.

    The stencil uses ``T`` at ``(p1 +- h, p2 +- h)`` with ``h = step dp``, i.e.
    lattice neighbours ``(j +- step, s)`` and ``(j, s +- 2 step)``. Returns the
    derivative and a mask of points whose four neighbours exceed
    ``floor * max|T|``.
    """
    n = grid.n_points
    a = np.abs(T)
    ok = a > floor * a.max()
    out = np.full(T.shape, np.nan, dtype=complex)
    mask = np.zeros(T.shape, dtype=bool)
    sl = slice(step, n - step)
    ss = slice(2 * step, n - 2 * step)
    jp, jm = T[2 * step:, ss], T[: n - 2 * step, ss]
    sp, sm = T[sl, 4 * step:], T[sl, : n - 4 * step]
    good = ok[2 * step:, ss] & ok[: n - 2 * step, ss] & ok[sl, 4 * step:] & ok[sl, : n - 4 * step]
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.log((jp * jm) / (sp * sm)) / (4 * (step * grid.dp) ** 2)
    out[sl, ss] = np.where(good, val, np.nan)
    mask[sl, ss] = good
    return out, mask


def _central_mask(grid: PhaseSpaceGrid, fraction: float = 0.5):
    p1, p2 = grid.pair_momenta()
    lim = fraction * grid.p_max
    return (np.abs(p1) <= lim) & (np.abs(p2) <= lim)


def pure_state_targets(grid: PhaseSpaceGrid, params: PhysicalParams):
    """Closed-form ``d^2/dp1 dp2 ln epsilon`` and ``ln chi`` on the pair lattice."""
    p1, p2 = grid.pair_momenta()
    E1, E2 = energy_free(p1, params), energy_free(p2, params)
    num = params.c**4 * p1 * p2 / (E1 * E2)
    with np.errstate(divide="ignore", invalid="ignore"):
        even = -num / (E1 + E2) ** 2
        odd = num / (E1 - E2) ** 2
    return even, odd


def weighted_overlap(W: WignerComponents, params: PhysicalParams, name: str | None = None) -> float:
    """``int W eps^{-2}(p + hbar/2i <d_q, p + hbar/2i d_q>) W dp dq`` for the even part.

    In the correlation picture this is
    ``(1/2 pi hbar) sum T(p1, p2) T(p2, p1) / eps(p1, p2)^2 dp1 dp2``.
    """
    g = W.grid
    fields = [W.get(name)] if name else [W.pp, W.mm]
    p1, p2 = g.pair_momenta()
    eps = epsilon_chi_free(p1, p2, params)[0]
    n = g.n_points
    total = 0.0
    for F in fields:
        T = correlation_from_wigner(F, g)
        # T(p2, p1) is the column s -> -s (periodic); column 0 maps onto itself
        T_rev = np.roll(T[:, ::-1], 1, axis=1)
        total += np.real(np.sum(T * T_rev / eps**2)) * g.dp**2
    return float(total / (2 * np.pi * g.hbar))


def purity_criteria(
    W: WignerComponents,
    params: PhysicalParams,
    floor: float = 1e-8,
    central_fraction: float = 0.5,
    equality_tol: float = 1e-4,
    min_separation: float = 2.0,
) -> PurityReport:
    """Pure-state tests on the correlation transforms and the weighted overlap.

    For a pure state ``T_ab = w(p1, p2) psi_a^*(p1) psi_b(p2)``, so the mixed
    log-derivative of ``T`` equals that of the weight ``w`` (``epsilon`` or
    ``chi``). Both sides go through the same four-point stencil, which
    annihilates separable factors exactly; the residual therefore measures
    factorisation rather than stencil truncation. The odd channel skips
    points within ``min_separation`` steps of ``|p1| = |p2|``, where
    ``chi`` vanishes and its logarithm is undefined.
    """
    g = W.grid
    p1, p2 = g.pair_momenta()
    eps, chi = epsilon_chi_free(p1, p2, params)
    central = _central_mask(g, central_fraction)

    def residual(F, weight, extra):
        T = correlation_from_wigner(F, g)
        d, m = log_mixed_derivative(T, g, floor)
        target, mt = log_mixed_derivative(weight.astype(complex), g, 1e-12)
        m = m & mt & central & extra
        if not np.any(m):
            return None, 0
        rel = np.abs(d[m] - target[m]) / np.maximum(np.abs(target[m]), 1.0)
        return float(np.max(rel)), int(m.sum())

    everywhere = np.ones(eps.shape, dtype=bool)
    residuals = []
    points = 0
    for name in ("pp", "mm"):
        F = W.get(name)
        if not np.any(np.abs(F) > 0):
            continue
        r, n = residual(F, eps, everywhere)
        if r is None:
            raise ValueError(f"magnitude floor leaves no valid region for component {name}")
        residuals.append(r)
        points += n
    if not residuals:
        raise ValueError("no even component above the magnitude floor")
    odd_res = None
    if np.any(np.abs(W.pm) > 0):
        away = np.abs(np.abs(p1) - np.abs(p2)) >= min_separation * g.dp
        odd_res, _ = residual(W.pm, chi, away)
    bound = 1 / (2 * np.pi * g.hbar)
    overlap = weighted_overlap(W, params)
    ratio = overlap / bound
    cls = "pure" if abs(ratio - 1) <= equality_tol else ("mixed" if ratio < 1 else "invalid")
    return PurityReport(max(residuals), odd_res, points, overlap, bound, cls)
