"""Charge-invariant observables: Weyl symbols, operator kernels and expectation values.

Free-particle kernels live on the correlation lattice of :mod:`relwigner.grid`:
``K[j, s]`` is the matrix element between momenta ``p1 = p_j + s dp/2`` and
``p2 = p_j - s dp/2``. The charge structure is ``K = K_even I + K_odd tau1``
with ``K_even = A~ epsilon`` and ``K_odd = A~ chi``, where
``A~(p, P) = (1 / 2 pi hbar) int A(p, q) exp(-i P q / hbar) dq``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import PhaseSpaceGrid, _centered_dft, scatter_to_fine
from .kinematics import PhysicalParams, energy_free, kinematic_factors
from .states import HermiteBasis, TwoComponentMomentumState
from .wigner_free import WignerComponents
from .wigner_magnetic import WignerBasisMatrix, level_energies, level_factors

PATHS = ("full", "even", "odd")


class AliasingError(ValueError):
    """Symbol content reaches the edge of the resolvable momentum-difference range."""


@dataclass(frozen=True)
class OperatorKernel:
    grid: PhaseSpaceGrid
    even: np.ndarray
    odd: np.ndarray
    edge_fraction: float = 0.0

    def block(self, a: int, b: int) -> np.ndarray:
        """Charge block ``K_ab`` for ``a, b`` in ``{+1, -1}``."""
        return self.even if a == b else self.odd

    def matrix(self) -> np.ndarray:
        """Full charge matrix ``K[j, s, a, b]``."""
        out = np.empty(self.even.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = out[..., 1, 1] = self.even
        out[..., 0, 1] = out[..., 1, 0] = self.odd
        return out


def _lattice_energies(grid: PhaseSpaceGrid, params: PhysicalParams):
    p1, p2 = grid.pair_momenta()
    return energy_free(p1, params), energy_free(p2, params)


def symbol_transform(A: np.ndarray, grid: PhaseSpaceGrid) -> np.ndarray:
    """``A~[j, s] = dq / (2 pi hbar) sum_k A[j, k] exp(-i s dp q_k / hbar)``."""
    A = grid.check_field(A, "symbol")
    return _centered_dft(np.asarray(A, dtype=complex), -1) / (grid.n_points * grid.dp)


def symbol_from_transform(At: np.ndarray, grid: PhaseSpaceGrid) -> np.ndarray:
    return _centered_dft(np.asarray(At, dtype=complex), +1) * grid.dp


def edge_fraction(At: np.ndarray, band: float = 1 / 16) -> float:
    """Share of ``|A~|^2`` in the outermost momentum-difference columns."""
    n = At.shape[1]
    width = max(1, int(round(band * n)))
    w = np.abs(At) ** 2
    total = w.sum()
    if total == 0:
        return 0.0
    edge = w[:, :width].sum() + w[:, n - width:].sum()
    return float(edge / total)


def symbol_to_kernel(
    A: np.ndarray,
    grid: PhaseSpaceGrid,
    params: PhysicalParams,
    strict: bool = False,
    alias_tol: float = 1e-10,
) -> OperatorKernel:
    """Kernel ``A~(p, P) R(p1, p2)`` of a charge-invariant symbol.

    The share of spectral weight near the edge of the ``P`` range is
    recorded; with ``strict=True`` it must stay below ``alias_tol``.
    """
    At = symbol_transform(A, grid)
    frac = edge_fraction(At)
    if strict and frac > alias_tol:
        raise AliasingError(
            f"symbol content at the momentum-difference edge: fraction {frac:.3g} > {alias_tol:.3g}"
        )
    k = kinematic_factors(*_lattice_energies(grid, params))
    return OperatorKernel(grid, At * k.epsilon, At * k.chi, frac)


def kernel_to_symbol(
    K: OperatorKernel,
    params: PhysicalParams,
    path: str = "full",
    zero_tol: float = 1e-12,
) -> np.ndarray:
    """Recover the symbol from the whole kernel, its even block or its odd block.

    ``full`` applies ``R^-1(p1, p2) = R(p2, p1)`` and reads the charge-diagonal
    entry; ``even`` divides by ``epsilon``; ``odd`` divides by ``chi`` where
    ``chi != 0``. On the ``chi = 0`` set (``|p1| = |p2|``) the odd block
    carries no information, so the odd path requires the even block to
    vanish there too and fills zeros.
    """
    if path not in PATHS:
        raise ValueError(f"path must be one of {PATHS}, got {path!r}")
    k = kinematic_factors(*_lattice_energies(K.grid, params))
    if path == "full":
        # [eps, chi; chi, eps] times [eps, -chi; -chi, eps], diagonal entry
        At = k.epsilon * K.even - k.chi * K.odd
    elif path == "even":
        At = K.even / k.epsilon
    else:
        blind = np.abs(k.chi) <= zero_tol
        scale = np.max(np.abs(K.even))
        lost = np.max(np.abs(K.even[blind])) if np.any(blind) else 0.0
        if scale > 0 and lost > zero_tol * max(scale, 1.0) * 1e4:
            raise ValueError(
                "odd-path reconstruction impossible: the kernel has content where chi = 0 "
                f"(max even-block entry there {lost:.3g}); e.g. symbols depending on p only"
            )
        At = np.zeros_like(K.odd)
        At[~blind] = K.odd[~blind] / k.chi[~blind]
    return symbol_from_transform(At, K.grid)


@dataclass
class RatioReport:
    residual: float
    scale: float

    @property
    def relative(self) -> float:
        return 0.0 if self.scale == 0 else self.residual / self.scale


def check_ratio_relation(K: OperatorKernel, params: PhysicalParams) -> RatioReport:
    """``K_odd = (E1 - E2)/(E1 + E2) K_even`` entrywise."""
    E1, E2 = _lattice_energies(K.grid, params)
    pred = (E1 - E2) / (E1 + E2) * K.even
    return RatioReport(float(np.max(np.abs(K.odd - pred))), float(np.max(np.abs(K.even))))


def _reversed_pairs(X: np.ndarray) -> np.ndarray:
    """``X(p2, p1)``: column ``s -> -s``; the unmatched column ``s = -N/2`` is dropped."""
    return X[:, :0:-1]


def hermiticity_residuals(K: OperatorKernel) -> tuple[float, float]:
    """Even block Hermitian and odd block anti-Hermitian under ``(p1, p2) -> (p2, p1)``.

    The odd sign reflects ``chi(p2, p1) = -chi(p1, p2)``; together they make
    the full kernel self-adjoint in the charge metric ``tau3``.
    """
    even = np.max(np.abs(K.even[:, 1:] - np.conj(_reversed_pairs(K.even))))
    odd = np.max(np.abs(K.odd[:, 1:] + np.conj(_reversed_pairs(K.odd))))
    return float(even), float(odd)


def kernel_expectation(
    K: OperatorKernel,
    state: TwoComponentMomentumState,
    include_odd: bool = False,
) -> complex:
    """``sum_ab iint psi_a^*(p1) K_ab(p1, p2) psi_b(p2) dp1 dp2`` on the pair lattice.

    By default only the charge-diagonal blocks enter, which is the
    superselected part matching :func:`expectation`.
    """
    g = K.grid
    i1, i2 = g.pair_indices()
    amps = (state.psi_plus, state.psi_minus)
    total = 0j
    for a in range(2):
        for b in range(2):
            if a != b and not include_odd:
                continue
            blk = K.even if a == b else K.odd
            total += np.sum(np.conj(amps[a])[i1] * blk * amps[b][i2]) * g.dp**2
    return complex(total)


def expectation(A: np.ndarray, W: WignerComponents) -> float:
    """``iint A (W_++ + W_--) dp dq``."""
    A = W.grid.check_field(A, "symbol")
    return float(np.real(np.sum(A * W.even)) * W.grid.cell)


# energy representation


@dataclass(frozen=True)
class EnergyRepresentation:
    """Level matrices ``a[n, m] = iint A W_nm``; even/odd parts weight it by ``epsilon``/``chi``."""

    base: np.ndarray
    even: np.ndarray
    odd: np.ndarray

    @property
    def n_max(self) -> int:
        return self.base.shape[0]


def symbol_to_energy_rep(A: np.ndarray, basis: HermiteBasis, params: PhysicalParams) -> EnergyRepresentation:
    g = basis.grid
    At = symbol_transform(A, g)
    phi = basis.fine
    # iint A W_nm = sum_lattice phi_m(p1) A~ phi_n(p2) dp^2, stored as base[n, m]
    a_mn = phi @ scatter_to_fine(At, g) @ phi.T * g.dp**2
    base = a_mn.T
    # factor R(m, n) is symmetric in its arguments for epsilon, antisymmetric for chi
    eps = level_factors(basis.n_max, params, "epsilon")
    chi = level_factors(basis.n_max, params, "chi")
    return EnergyRepresentation(base, eps.T * base, chi.T * base)


def energy_rep_to_symbol(
    rep: EnergyRepresentation,
    Wb: WignerBasisMatrix,
    params: PhysicalParams,
    path: str = "full",
) -> np.ndarray:
    """``A = 2 pi hbar sum_nm a[n, m] W_mn`` with ``a`` recovered along one path."""
    if path not in PATHS:
        raise ValueError(f"path must be one of {PATHS}, got {path!r}")
    n = rep.n_max
    if path == "full":
        a = level_factors(n, params, "epsilon").T * rep.even - level_factors(n, params, "chi").T * rep.odd
    elif path == "even":
        a = rep.even / level_factors(n, params, "epsilon").T
    else:
        diag = np.eye(n, dtype=bool)
        a = np.zeros_like(rep.odd)
        a[~diag] = rep.odd[~diag] * level_factors(n, params, "chi_inv").T[~diag]
    # sum_nm a[n, m] W_mn = sum_nm a[m, n] W_nm
    return 2 * np.pi * Wb.grid.hbar * Wb.combination(a.T)


def energy_ratio_residual(rep: EnergyRepresentation, params: PhysicalParams) -> float:
    """``odd[n, m] = (E(m) - E(n)) / (E(m) + E(n)) even[n, m]``, relative max deviation."""
    E = level_energies(rep.n_max, params)
    ratio = (E[None, :] - E[:, None]) / (E[None, :] + E[:, None])
    scale = np.max(np.abs(rep.even))
    return float(np.max(np.abs(rep.odd - ratio * rep.even)) / scale) if scale else 0.0
