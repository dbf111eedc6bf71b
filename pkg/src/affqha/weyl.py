"""Affine Weyl quantization and its inverse.

A symbol f(x, a) and the kernel of its operator are related through a
partial Fourier transform in x. Writing d = log(r / s) and
m = (r - s) / log(r / s),

    K_f(r, s) = int f(x, m) exp(2 pi i x d) dx,

and conversely the symbol of a kernel K is

    f(x, a) = int K(a lambda(u), a lambda(-u)) exp(-2 pi i x u) du,

because lambda(u) / lambda(-u) = e^u and lambda(u) - lambda(-u) = u.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .grid import AffFunction, AffGrid, LogGrid, Signal, cubic_stencil, interp_axis
from .hilbert import TWO_PI, OperatorRep, hs_norm
from .parallel import chunk_map
from .special import log_lambda
from .wigner import UGrid

__all__ = [
    "SymbolOperatorPair",
    "quantize",
    "dequantize",
    "coordinate_quantize",
    "coordinate_commutator",
    "log_mean_offset",
]


def log_mean_offset(d: np.ndarray) -> np.ndarray:
    """log((e^d - 1) / d), so that log m = log s + log_mean_offset(log(r / s))."""
    d = np.asarray(d, dtype=float)
    small = np.abs(d) < 1e-6
    safe = np.where(small, 1.0, d)
    # log((e^d - 1)/d) = d/2 + log(sinh(d/2) / (d/2)); the form never overflows
    half = 0.5 * np.abs(safe)
    log_shc = half + np.log(-np.expm1(-2.0 * half)) - np.log(2.0 * half)
    big = 0.5 * safe + log_shc
    return np.where(small, 0.5 * d + d**2 / 24.0, big)


def _inverse_fourier_x(f: AffFunction, d: np.ndarray) -> np.ndarray:
    """F[i, s] = sum_x f(x, s) exp(2 pi i x d_i) dx, zero beyond the x-Nyquist frequency."""
    g = f.grid
    E = np.exp(1j * TWO_PI * np.outer(d, g.x)) * g.dx
    F = E @ f.values
    F[np.abs(d) > g.nyquist] = 0.0
    return F


def quantize(f: AffFunction, lg: LogGrid, workers: int | None = None) -> OperatorRep:
    """The operator A_f on ``lg`` whose affine Weyl symbol is ``f``.

    Frequencies above the Nyquist limit of the x-axis are treated as absent,
    so kernel entries with |log(r/s)| > 1 / (2 dx) are zero.
    """
    n = lg.n
    lags = np.arange(-(n - 1), n)
    d = lags * lg.dt
    F = _inverse_fourier_x(f, d)  # (2n - 1, n_s)
    offset = log_mean_offset(d)
    g = f.grid
    t = lg.t

    def rows(idx: np.ndarray) -> np.ndarray:
        # K[j, k] = F(d = t_j - t_k, s = t_k + offset(d))
        lag = idx[:, None] - np.arange(n)[None, :]
        li = lag + (n - 1)
        pos = g.s_position(t[None, :] + offset[li])
        sidx, w = cubic_stencil(pos, g.n_s)
        vals = F[li[..., None], sidx]
        return (vals * w).sum(axis=-1)

    K = np.concatenate(chunk_map(rows, n, workers, chunk=64), axis=0)
    return OperatorRep(lg, K)


def _bicubic(K: np.ndarray, pr: np.ndarray, ps: np.ndarray) -> np.ndarray:
    n = K.shape[0]
    ir, wr = cubic_stencil(pr, n)
    js, ws = cubic_stencil(ps, n)
    out = np.zeros(pr.shape, dtype=complex)
    for p in range(4):
        for q in range(4):
            out += wr[..., p] * ws[..., q] * K[ir[..., p], js[..., q]]
    return out


def dequantize(A: OperatorRep, grid: AffGrid, ugrid: UGrid = UGrid(), workers: int | None = None) -> AffFunction:
    """The affine Weyl symbol of ``A`` sampled on ``grid``.

    The kernel is interpolated bicubically in (log r, log s) along the curve
    (a lambda(u), a lambda(-u)); the u-integral is an exact trigonometric sum.
    """
    lg = A.grid
    u = ugrid.u
    lp = log_lambda(u)
    lm = log_lambda(-u)
    E = np.exp(-1j * TWO_PI * np.outer(u, grid.x)) * ugrid.du

    def rows(idx: np.ndarray) -> np.ndarray:
        s = grid.s[idx][:, None]
        G = _bicubic(A.kernel, lg.position(s + lp[None, :]), lg.position(s + lm[None, :]))
        return G @ E

    vals = np.concatenate(chunk_map(rows, grid.n_s, workers), axis=0).T
    return AffFunction(grid, vals)


@dataclass(frozen=True)
class SymbolOperatorPair:
    """A symbol and its Weyl-quantized operator, kept together."""

    symbol: AffFunction
    operator: OperatorRep

    @classmethod
    def from_symbol(cls, f: AffFunction, lg: LogGrid) -> SymbolOperatorPair:
        return cls(f, quantize(f, lg))

    @classmethod
    def from_operator(cls, A: OperatorRep, grid: AffGrid) -> SymbolOperatorPair:
        return cls(dequantize(A, grid), A)

    def isometry_defect(self) -> float:
        """| ||A||_HS - ||f||_{L2_r} | / ||f||_{L2_r}."""
        fn = self.symbol.norm("right")
        return abs(hs_norm(self.operator) - fn) / fn if fn else hs_norm(self.operator)


def _dt_derivative(values: np.ndarray, dt: float) -> np.ndarray:
    """Spectral derivative along the uniform log coordinate."""
    n = values.shape[0]
    k = TWO_PI * np.fft.fftfreq(n, d=dt)
    if n % 2 == 0:
        k[n // 2] = 0.0  # the Nyquist mode has no well-defined derivative
    return np.fft.ifft(1j * k * np.fft.fft(values))


def coordinate_quantize(which: Literal["x", "a"], psi: Signal) -> Signal:
    """Quantization of a coordinate function applied to ``psi``.

    ``"a"`` multiplies by r. ``"x"`` is (1 / 2 pi i) r d/dr, which is the
    derivative in t = log r, taken spectrally.
    """
    if which == "a":
        return Signal(psi.grid, psi.grid.r * psi.values)
    if which == "x":
        return Signal(psi.grid, _dt_derivative(psi.values, psi.grid.dt) / (TWO_PI * 1j))
    raise ValueError(f"coordinate must be 'x' or 'a', got {which!r}")


def coordinate_commutator(psi: Signal) -> Signal:
    """[A_x, A_a] psi computed from the two coordinate operators."""
    ax_aa = coordinate_quantize("x", coordinate_quantize("a", psi))
    aa_ax = coordinate_quantize("a", coordinate_quantize("x", psi))
    return ax_aa - aa_ax
