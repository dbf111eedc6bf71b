"""Affine Wigner distribution, Grossmann-Royer operators and wavelet coefficients.

The cross-Wigner distribution is

    W(x, a) = int psi(a lambda(u)) conj(phi(a lambda(-u))) exp(-2 pi i x u) du,

evaluated per scale row on a symmetric uniform u-grid. The x-dependence is
an exact trigonometric sum at the requested x nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import AffFunction, AffGrid, LogGrid, Signal, fourier_weights, interp_axis
from .hilbert import TWO_PI, GroupElement, _dilate
from .parallel import chunk_map
from .special import lambda_inverse, log_lambda, parity_weight

U_EXTENT = 12.0
N_U = 1024


@dataclass(frozen=True)
class UGrid:
    """Symmetric uniform grid for the Wigner integration variable."""

    extent: float = U_EXTENT
    n: int = N_U

    @property
    def du(self) -> float:
        return 2.0 * self.extent / (self.n - 1)

    @property
    def u(self) -> np.ndarray:
        # centred construction keeps u[::-1] == -u exactly
        return (np.arange(self.n) - (self.n - 1) / 2.0) * self.du


@dataclass(frozen=True)
class WignerResult:
    """An affine Wigner distribution together with its quadrature diagnostics.

    ``edge_fraction`` is the share of the u-profile energy that sits in the
    outer 2% of the u-grid; values near zero mean the u-window was wide enough.
    """

    function: AffFunction
    ugrid: UGrid
    edge_fraction: float

    @property
    def values(self) -> np.ndarray:
        return self.function.values

    @property
    def grid(self) -> AffGrid:
        return self.function.grid


def _same_grid(psi: Signal, phi: Signal) -> LogGrid:
    if psi.grid != phi.grid:
        raise ValueError("signals live on different grids")
    return psi.grid


def _exp_matrix(x: np.ndarray, u: np.ndarray, sign: float) -> np.ndarray:
    return np.exp(sign * 1j * TWO_PI * np.outer(u, x))


def midpoint_profile(values: np.ndarray, grid: LogGrid, s: np.ndarray, log_lam: np.ndarray) -> np.ndarray:
    """Samples ``values`` (on the log grid) at a lambda(u), one row per s = log a."""
    pos = grid.position(s[:, None] + log_lam[None, :])
    return interp_axis(values, pos)


def affine_wigner(
    psi: Signal,
    phi: Signal,
    grid: AffGrid,
    ugrid: UGrid = UGrid(),
    workers: int | None = None,
) -> WignerResult:
    """Affine cross-Wigner distribution of ``psi`` and ``phi`` on ``grid``.

    Parameters
    ----------
    psi, phi : Signal
        Inputs on a common LogGrid.
    grid : AffGrid
        Nodes at which W is returned.
    ugrid : UGrid
        Integration grid for the midpoint variable.

    Returns
    -------
    WignerResult
    """
    lg = _same_grid(psi, phi)
    u = ugrid.u
    lp = log_lambda(u)
    lm = log_lambda(-u)
    E = _exp_matrix(grid.x, u, -1.0) * ugrid.du
    s = grid.s

    def rows(idx: np.ndarray) -> tuple[np.ndarray, float, float]:
        h = midpoint_profile(psi.values, lg, s[idx], lp) * midpoint_profile(phi.values, lg, s[idx], lm).conj()
        mag = np.abs(h) ** 2
        edge = max(1, ugrid.n // 50)
        return h @ E, float(mag[:, :edge].sum() + mag[:, -edge:].sum()), float(mag.sum())

    parts = chunk_map(rows, grid.n_s, workers)
    vals = np.concatenate([p[0] for p in parts], axis=0).T
    edge = sum(p[1] for p in parts)
    total = sum(p[2] for p in parts)
    return WignerResult(AffFunction(grid, vals), ugrid, edge / total if total > 0 else 0.0)


def grossmann_royer_eval(g: GroupElement, psi: Signal, r: np.ndarray | float) -> np.ndarray | complex:
    """(R(x, a) psi)(r) = exp(2 pi i x L) c(L) psi(r exp(-L)) with L = lambda^-1(r / a).

    ``c`` is :func:`~affqha.special.parity_weight`. Evaluates at arbitrary r > 0.
    """
    r_arr = np.asarray(r, dtype=float)
    L = np.asarray(lambda_inverse(r_arr / g.a))
    if np.any(r_arr <= 0) or not np.all(np.isfinite(r_arr)):
        raise ValueError("evaluation points must be finite and positive")
    # psi(r e^{-L}) through log coordinates; r e^{-L} underflows for r >> a
    moved = interp_axis(psi.values, psi.grid.position(np.log(r_arr) - L))
    vals = np.exp(1j * TWO_PI * g.x * L) * parity_weight(L) * moved
    return complex(vals) if np.ndim(vals) == 0 else vals


def grossmann_royer_apply(g: GroupElement, psi: Signal) -> Signal:
    """The Grossmann-Royer operator R(x, a) applied to ``psi`` on its grid."""
    return Signal(psi.grid, grossmann_royer_eval(g, psi, psi.grid.r))


def parity(psi: Signal) -> Signal:
    """The affine parity operator, R at the identity (0, 1)."""
    return grossmann_royer_apply(GroupElement(0.0, 1.0), psi)


def _fourier_rows(lg: LogGrid, x: np.ndarray, sign: float) -> np.ndarray:
    # W[j, k]: int g(rho) exp(sign 2 pi i x_j rho) d rho / rho = sum_k W[j, k] g(rho_k)
    return fourier_weights(lg, sign * TWO_PI * np.asarray(x, dtype=float))


def wavelet_coeff(psi: Signal, phi: Signal, grid: AffGrid, workers: int | None = None) -> AffFunction:
    """V(x, a) = <psi, U(-x, a)* phi> = int psi(a rho) conj(phi(rho)) exp(-2 pi i x rho) d rho / rho."""
    lg = _same_grid(psi, phi)
    Wt = _fourier_rows(lg, grid.x, -1.0).T  # (n, n_x)
    conj_phi = phi.values.conj()

    def rows(idx: np.ndarray) -> np.ndarray:
        dil = np.stack([_dilate(psi.values, lg, float(s), (0,)) for s in grid.s[idx]])
        return (dil * conj_phi[None, :]) @ Wt

    vals = np.concatenate(chunk_map(rows, grid.n_s, workers), axis=0).T
    return AffFunction(grid, vals)


def scalogram(psi: Signal, phi: Signal, grid: AffGrid, workers: int | None = None) -> AffFunction:
    """SCAL(x, a) = a |V_{phi, psi}(-x, a)|^2, the scalogram of spectrum ``psi`` with window ``phi``.

    The x-axis of an AffGrid is symmetric, so -x is a reversal of the axis.
    """
    v = wavelet_coeff(phi, psi, grid, workers).values[::-1, :]
    return AffFunction(grid, grid.a[None, :] * np.abs(v) ** 2)
