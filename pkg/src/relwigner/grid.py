"""Discrete phase space, Wigner cross-transforms and the Moyal star product.

Layout conventions used throughout the package:

* phase-space fields are arrays ``W[j, k]`` with momentum index ``j`` and
  position index ``k``; ``p_j = (j - N/2) dp`` and ``q_k = (k - N/2) dq``
  with ``dq = 2 pi hbar / (N dp)``;
* states are sampled on the half-step grid ``p_fine[i] = p_min + i dp / 2``
  (``2N`` points), so that ``p_j = p_fine[2j]``;
* a momentum correlation ``T[j, s]`` lives on the lattice of pairs
  ``p1 = p_j + s dp / 2``, ``p2 = p_j - s dp / 2`` (fine indices
  ``2j + s`` and ``2j - s``, periodic), ``s = -N/2 .. N/2 - 1``, stored at
  column ``s + N/2``.

With these conventions

    W[j, k] = dp / (2 pi hbar) * sum_s T[j, s] exp(-i s dp q_k / hbar)

is the discrete form of the Wigner integral over the momentum difference.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


def _is_power_of_two(n: int) -> bool:
    return n >= 4 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Uniform periodic ``N x N`` phase-space grid, symmetric about the origin."""

    n_points: int = 256
    dp: float = 0.05
    hbar: float = 1.0
    p: np.ndarray = field(init=False, repr=False, compare=False)
    q: np.ndarray = field(init=False, repr=False, compare=False)
    p_fine: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.n_points, (int, np.integer)) or not _is_power_of_two(int(self.n_points)):
            raise ValueError(f"n_points must be a power of two >= 4, got {self.n_points!r}")
        if not self.dp > 0 or not self.hbar > 0:
            raise ValueError("dp and hbar must be positive")
        n = int(self.n_points)
        object.__setattr__(self, "n_points", n)
        idx = np.arange(n) - n // 2
        object.__setattr__(self, "p", idx * self.dp)
        object.__setattr__(self, "q", idx * self.dq)
        object.__setattr__(self, "p_fine", (np.arange(2 * n) - n) * (self.dp / 2))

    @property
    def dq(self) -> float:
        return 2 * np.pi * self.hbar / (self.n_points * self.dp)

    @property
    def p_min(self) -> float:
        return -(self.n_points // 2) * self.dp

    @property
    def p_max(self) -> float:
        return (self.n_points // 2 - 1) * self.dp

    @property
    def q_max(self) -> float:
        return (self.n_points // 2 - 1) * self.dq

    @property
    def cell(self) -> float:
        return self.dp * self.dq

    @property
    def shifts(self) -> np.ndarray:
        """Half-step offsets ``s`` of the correlation lattice columns."""
        return np.arange(self.n_points) - self.n_points // 2

    def pair_indices(self) -> tuple[np.ndarray, np.ndarray]:
        """Fine-grid indices ``(2j + s, 2j - s)`` of the correlation lattice."""
        return _pair_indices(self.n_points)

    def pair_momenta(self) -> tuple[np.ndarray, np.ndarray]:
        """Momenta ``(p1, p2)`` on the correlation lattice (periodically wrapped)."""
        i1, i2 = self.pair_indices()
        return self.p_fine[i1], self.p_fine[i2]

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """``(P, Q)`` coordinate arrays of shape ``(N, N)``."""
        return np.meshgrid(self.p, self.q, indexing="ij")

    def coarse(self, fine: np.ndarray) -> np.ndarray:
        """Restrict half-step samples to the integer grid."""
        return np.asarray(fine)[..., ::2]

    def check_field(self, arr: np.ndarray, name: str = "field") -> np.ndarray:
        arr = np.asarray(arr)
        if arr.shape != (self.n_points, self.n_points):
            raise ValueError(
                f"{name} has shape {arr.shape}, expected {(self.n_points, self.n_points)}"
            )
        return arr

    def check_fine(self, arr: np.ndarray, name: str = "samples") -> np.ndarray:
        arr = np.asarray(arr)
        if arr.shape[-1] != 2 * self.n_points:
            raise ValueError(
                f"{name} has {arr.shape[-1]} samples, expected {2 * self.n_points} half-step samples"
            )
        return arr


_PAIR_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _pair_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _PAIR_CACHE:
        j = np.arange(n)[:, None]
        s = (np.arange(n) - n // 2)[None, :]
        i1 = np.mod(2 * j + s, 2 * n)
        i2 = np.mod(2 * j - s, 2 * n)
        i1.setflags(write=False)
        i2.setflags(write=False)
        _PAIR_CACHE[n] = (i1, i2)
    return _PAIR_CACHE[n]


def require_same_grid(*grids: PhaseSpaceGrid) -> PhaseSpaceGrid:
    first = grids[0]
    for g in grids[1:]:
        if g != first:
            raise ValueError(f"grid mismatch: {first} vs {g}")
    return first


# centred DFT: sum_k x[k'] exp(sign 2 pi i s' k' / N), with s', k' = index - N/2
def _centered_dft(x: np.ndarray, sign: int, axis: int = -1) -> np.ndarray:
    x = np.fft.ifftshift(x, axes=axis)
    if sign < 0:
        y = np.fft.fft(x, axis=axis)
    else:
        y = np.fft.ifft(x, axis=axis) * x.shape[axis]
    return np.fft.fftshift(y, axes=axis)


def fourier_q(W: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Unitary DFT along the position axis.

    Forward: ``What[j, s] = N^{-1/2} sum_k W[j, k] exp(+i s dp q_k / hbar)``;
    the inverse undoes it exactly. The zero frequency sits at column ``N/2``.
    """
    W = np.asarray(W, dtype=complex)
    n = W.shape[-1]
    if inverse:
        return _centered_dft(W, -1) / np.sqrt(n)
    return _centered_dft(W, +1) / np.sqrt(n)


def wigner_from_correlation(T: np.ndarray, grid: PhaseSpaceGrid) -> np.ndarray:
    """Phase-space field from a correlation ``T[j, s]`` (see module docstring)."""
    T = grid.check_field(T, "correlation")
    return grid.dp / (2 * np.pi * grid.hbar) * _centered_dft(np.asarray(T, dtype=complex), -1)


def correlation_from_wigner(W: np.ndarray, grid: PhaseSpaceGrid) -> np.ndarray:
    """Inverse of :func:`wigner_from_correlation`.

    ``T[j, s]`` is the q-Fourier transform of ``W`` at mean momentum ``p_j``
    and momentum difference ``s dp``, i.e. the momentum-space correlation
    ``T(p1, p2) = int W((p1 + p2)/2, q) exp(i (p1 - p2) q / hbar) dq``.
    """
    W = grid.check_field(W, "field")
    return _centered_dft(np.asarray(W, dtype=complex), +1) * grid.dq


def scatter_to_fine(T: np.ndarray, grid: PhaseSpaceGrid) -> np.ndarray:
    """Place lattice values on the ``2N x 2N`` half-step pair matrix (zeros off-lattice)."""
    n = grid.n_points
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    i1, i2 = grid.pair_indices()
    out[i1, i2] = T
    return out


def gather_from_fine(M: np.ndarray, grid: PhaseSpaceGrid) -> np.ndarray:
    """Read a ``2N x 2N`` pair matrix on the correlation lattice."""
    i1, i2 = grid.pair_indices()
    return np.asarray(M)[i1, i2]


Weight = Callable[[np.ndarray, np.ndarray], np.ndarray]


def cross_wigner(
    f: np.ndarray,
    g: np.ndarray,
    grid: PhaseSpaceGrid,
    weight: Weight | None = None,
) -> np.ndarray:
    """Weighted Wigner cross-transform of two half-step sampled amplitudes.

    ``W(p, q) = 1/(2 pi hbar) sum_P w(p+P/2, p-P/2) f*(p+P/2) g(p-P/2) exp(-i P q / hbar) dP``.
    ``weight`` is called with the pair momenta ``(p1, p2)``; ``None`` means 1.
    """
    f = grid.check_fine(f, "f")
    g = grid.check_fine(g, "g")
    i1, i2 = grid.pair_indices()
    T = np.conj(f)[i1] * g[i2]
    if weight is not None:
        p1, p2 = grid.p_fine[i1], grid.p_fine[i2]
        T = T * weight(p1, p2)
    return wigner_from_correlation(T, grid)


def wigner_from_pair_matrix(M: np.ndarray, grid: PhaseSpaceGrid) -> np.ndarray:
    """Wigner transform of a general half-step pair matrix ``M[i1, i2]``.

    For ``M = outer(conj(f), g)`` this reproduces :func:`cross_wigner`.
    """
    return wigner_from_correlation(gather_from_fine(M, grid), grid)


def star_product(A: np.ndarray, B: np.ndarray, grid: PhaseSpaceGrid, hbar: float | None = None) -> np.ndarray:
    """Moyal product with star = exp[(i hbar/2)(<d_q d_p> - <d_p d_q>)], evaluated spectrally.

    Writing ``A = sum_l A_l(p) e^{i l q}`` and ``B = sum_l B_l(p) e^{i l q}``,
    the product is exactly

        (A * B)(p, q) = sum_{l1, l2} A_l1(p + hbar l2 / 2) B_l2(p - hbar l1 / 2) e^{i (l1 + l2) q},

    so each term needs only band-limited momentum shifts. Fields must be
    band-limited on the periodic grid; modes with ``|l1 + l2|`` beyond the
    Nyquist limit alias.
    """
    A = grid.check_field(A, "A").astype(complex)
    B = grid.check_field(B, "B").astype(complex)
    hbar = grid.hbar if hbar is None else hbar
    n = grid.n_points
    length_p = n * grid.dp
    # q-Fourier coefficients along axis 1, ordered by fftfreq
    Aq = np.fft.fft(A, axis=1) / n
    Bq = np.fft.fft(B, axis=1) / n
    kappa = 2 * np.pi * np.fft.fftfreq(n, d=grid.dq)
    # rows indexed by l: A_l(p), B_l(p)
    A_rows = Aq.T
    B_rows = Bq.T
    out_modes = np.zeros((n, n), dtype=complex)
    l_index = np.arange(n)
    # B_l2(p - hbar kappa_l1 / 2) for all l1 is one batch of shifts of a single row
    B_fft = np.fft.fft(B_rows, axis=-1)
    k_p = 2 * np.pi * np.fft.fftfreq(n, d=length_p / n)
    A_fft = np.fft.fft(A_rows, axis=-1)
    shift_phase_B = np.exp(1j * np.outer(-hbar * kappa / 2, k_p))  # [l1, k]
    for l2 in range(n):
        if not np.any(Bq[:, l2]):
            continue
        A_shifted = np.fft.ifft(A_fft * np.exp(1j * hbar * kappa[l2] / 2 * k_p)[None, :], axis=-1)
        B_shifted = np.fft.ifft(B_fft[l2][None, :] * shift_phase_B, axis=-1)
        prod = A_shifted * B_shifted  # [l1, p]
        # l -> l + l2 is a permutation, so plain fancy-index accumulation is safe
        out_modes[(l_index + l2) % n] += prod
    # the q-origin phase exp(-i kappa q[0]) is 1 on every alias, so it drops out
    return np.fft.ifft(out_modes.T * n, axis=1)
