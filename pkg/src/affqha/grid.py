"""Discretizations of the half line and of the affine group.

The half line carries the measure dr/r. Writing r = exp(t) turns it into dt,
so a uniform grid in t gives every node the same weight ``dt``. The group
``(x, a)`` is sampled on a uniform x-axis times a uniform axis in s = log a.
In these coordinates the right Haar measure is dx ds and the left Haar
measure is exp(-s) dx ds.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Literal

import numpy as np

Measure = Literal["right", "left"]

# Fractional positions closer than this to an integer are treated as nodes,
# so dilations by exp(k * dt) become exact index shifts.
_NODE_SNAP = 1e-9


def cubic_stencil(pos: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Four-point Lagrange stencil at fractional index positions.

    Parameters
    ----------
    pos : array_like
        Positions measured in units of the grid spacing, 0 being the first node.
    n : int
        Number of nodes.

    Returns
    -------
    idx, w : np.ndarray
        Arrays of shape ``pos.shape + (4,)``. Nodes outside ``[0, n)`` get
        weight zero, and so does every position outside ``[0, n - 1]``.
        ``idx`` is clipped so it can be used for gathering directly.
    """
    pos = np.asarray(pos, dtype=float)
    near = np.rint(pos)
    pos = np.where(np.abs(pos - near) < _NODE_SNAP, near, pos)
    base = np.floor(pos)
    f = pos - base
    w = np.stack(
        [
            -f * (f - 1.0) * (f - 2.0) / 6.0,
            (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
            -(f + 1.0) * f * (f - 2.0) / 2.0,
            (f + 1.0) * f * (f - 1.0) / 6.0,
        ],
        axis=-1,
    )
    idx = base.astype(np.int64)[..., None] + np.arange(-1, 3)
    inside = (idx >= 0) & (idx < n)
    in_range = (pos >= 0.0) & (pos <= n - 1)
    w = np.where(inside & in_range[..., None], w, 0.0)
    return np.clip(idx, 0, n - 1), w


def interp_axis(values: np.ndarray, pos: np.ndarray, axis: int = 0) -> np.ndarray:
    """Cubic interpolation of ``values`` along ``axis`` at fractional positions.

    The interpolated axis is replaced by the shape of ``pos``; zero outside.
    """
    values = np.moveaxis(np.asarray(values), axis, 0)
    idx, w = cubic_stencil(pos, values.shape[0])
    gathered = values[idx]  # pos.shape + (4,) + rest
    w = w.reshape(w.shape + (1,) * (values.ndim - 1))
    out = (gathered * w).sum(axis=np.ndim(pos))
    return np.moveaxis(out, list(range(np.ndim(pos))), list(range(axis, axis + np.ndim(pos))))


def shift_axis(values: np.ndarray, shift: float, axis: int = 0) -> np.ndarray:
    """``interp_axis`` at positions ``k + shift`` for every node k, done as four slices.

    A constant fractional shift has the same stencil weights at every node,
    which makes this much cheaper than the general gather.
    """
    values = np.moveaxis(np.asarray(values), axis, 0)
    n = values.shape[0]
    near = np.rint(shift)
    snapped = abs(shift - near) < _NODE_SNAP
    base = int(near) if snapped else int(np.floor(shift))
    f = 0.0 if snapped else shift - base
    weights = (
        -f * (f - 1.0) * (f - 2.0) / 6.0,
        (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
        -(f + 1.0) * f * (f - 2.0) / 2.0,
        (f + 1.0) * f * (f - 1.0) / 6.0,
    )
    out = np.zeros(values.shape, dtype=np.result_type(values, float))
    # valid output nodes: position k + shift inside [0, n - 1]
    k_lo = max(0, int(np.ceil(-shift - _NODE_SNAP)))
    k_hi = min(n - 1, int(np.floor(n - 1 - shift + _NODE_SNAP)))
    for p, wp in enumerate(weights):
        if wp == 0.0:
            continue
        off = base + p - 1
        lo = max(k_lo, -off)
        hi = min(k_hi, n - 1 - off)
        if lo <= hi:
            out[lo : hi + 1] += wp * values[lo + off : hi + off + 1]
    return np.moveaxis(out, 0, axis)


def _check_finite(*values: float) -> None:
    if not all(np.isfinite(v) for v in values):
        raise ValueError("grid bounds must be finite")


@dataclass(frozen=True)
class LogGrid:
    """Uniform grid in t = log r on ``[t_min, t_max]`` with ``n`` nodes."""

    t_min: float
    t_max: float
    n: int

    def __post_init__(self) -> None:
        _check_finite(self.t_min, self.t_max)
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"LogGrid needs at least 2 nodes, got {self.n}")
        if not self.t_min < self.t_max:
            raise ValueError("LogGrid needs t_min < t_max")

    @property
    def dt(self) -> float:
        return (self.t_max - self.t_min) / (self.n - 1)

    @cached_property
    def t(self) -> np.ndarray:
        t = self.t_min + self.dt * np.arange(self.n)
        t.setflags(write=False)
        return t

    @cached_property
    def r(self) -> np.ndarray:
        r = np.exp(self.t)
        r.setflags(write=False)
        return r

    def position(self, t: np.ndarray) -> np.ndarray:
        """Fractional node index of log-coordinate ``t``."""
        return (np.asarray(t, dtype=float) - self.t_min) / self.dt

    def shift_steps(self, log_a: float) -> int | None:
        """Index shift equal to ``log_a`` when it is a multiple of ``dt``."""
        k = np.rint(log_a / self.dt)
        return int(k) if abs(log_a / self.dt - k) < _NODE_SNAP else None


@dataclass(frozen=True)
class AffGrid:
    """Product grid on the affine group.

    The x-axis is symmetric about zero with ``n_x`` nodes on
    ``[-x_extent, x_extent]``; the scale axis is uniform in s = log a.
    """

    x_extent: float
    n_x: int
    s_min: float
    s_max: float
    n_s: int

    def __post_init__(self) -> None:
        _check_finite(self.x_extent, self.s_min, self.s_max)
        for name in ("n_x", "n_s"):
            v = getattr(self, name)
            if int(v) != v or v < 2:
                raise ValueError(f"AffGrid needs {name} >= 2, got {v}")
        if not self.x_extent > 0:
            raise ValueError("AffGrid needs x_extent > 0")
        if not self.s_min < self.s_max:
            raise ValueError("AffGrid needs s_min < s_max")

    @property
    def dx(self) -> float:
        return 2.0 * self.x_extent / (self.n_x - 1)

    @property
    def ds(self) -> float:
        return (self.s_max - self.s_min) / (self.n_s - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_x, self.n_s)

    @cached_property
    def x(self) -> np.ndarray:
        # built from the centre so that x[::-1] == -x holds exactly
        x = (np.arange(self.n_x) - (self.n_x - 1) / 2.0) * self.dx
        x.setflags(write=False)
        return x

    @cached_property
    def s(self) -> np.ndarray:
        s = self.s_min + self.ds * np.arange(self.n_s)
        s.setflags(write=False)
        return s

    @cached_property
    def a(self) -> np.ndarray:
        a = np.exp(self.s)
        a.setflags(write=False)
        return a

    @property
    def nyquist(self) -> float:
        """Largest frequency resolved by the x-axis sampling."""
        return 0.5 / self.dx

    def weights(self, measure: Measure = "right") -> np.ndarray:
        """Node weights of shape ``(n_x, n_s)`` for the chosen Haar measure."""
        w = np.full(self.shape, self.dx * self.ds)
        if measure == "left":
            return w * np.exp(-self.s)[None, :]
        if measure != "right":
            raise ValueError(f"unknown measure {measure!r}")
        return w

    def x_position(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float) / self.dx + (self.n_x - 1) / 2.0

    def s_position(self, s: np.ndarray) -> np.ndarray:
        return (np.asarray(s, dtype=float) - self.s_min) / self.ds


def _frozen(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=complex)
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class Signal:
    """Samples of a function on the half line at the nodes of a LogGrid."""

    grid: LogGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = _frozen(self.values)
        if values.shape != (self.grid.n,):
            raise ValueError(f"signal has shape {values.shape}, grid needs ({self.grid.n},)")
        if not np.all(np.isfinite(values)):
            raise ValueError("signal values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: LogGrid, fn: Callable[[np.ndarray], np.ndarray]) -> Signal:
        return cls(grid, fn(grid.r))

    def _other(self, other: Signal) -> np.ndarray:
        if other.grid != self.grid:
            raise ValueError("signals live on different grids")
        return other.values

    def __add__(self, other: Signal) -> Signal:
        return Signal(self.grid, self.values + self._other(other))

    def __sub__(self, other: Signal) -> Signal:
        return Signal(self.grid, self.values - self._other(other))

    def __mul__(self, c: complex) -> Signal:
        return Signal(self.grid, self.values * c)

    __rmul__ = __mul__

    def __neg__(self) -> Signal:
        return Signal(self.grid, -self.values)

    def conj(self) -> Signal:
        return Signal(self.grid, self.values.conj())

    def norm(self) -> float:
        return float(np.sqrt(inner_product(self, self).real))

    def normalized(self) -> Signal:
        return self * (1.0 / self.norm())


@dataclass(frozen=True, eq=False)
class AffFunction:
    """Samples of a function on the affine group, indexed ``[x, s]``."""

    grid: AffGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = _frozen(self.values)
        if values.shape != self.grid.shape:
            raise ValueError(f"function has shape {values.shape}, grid needs {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("function values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: AffGrid, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> AffFunction:
        x, a = np.meshgrid(grid.x, grid.a, indexing="ij")
        return cls(grid, fn(x, a))

    def _other(self, other: AffFunction) -> np.ndarray:
        if other.grid != self.grid:
            raise ValueError("functions live on different grids")
        return other.values

    def __add__(self, other: AffFunction) -> AffFunction:
        return AffFunction(self.grid, self.values + self._other(other))

    def __sub__(self, other: AffFunction) -> AffFunction:
        return AffFunction(self.grid, self.values - self._other(other))

    def __mul__(self, c: complex) -> AffFunction:
        return AffFunction(self.grid, self.values * c)

    __rmul__ = __mul__

    def conj(self) -> AffFunction:
        return AffFunction(self.grid, self.values.conj())

    def norm(self, measure: Measure = "right", p: float = 2) -> float:
        """L^p norm with respect to a Haar measure (``p = inf`` gives the sup norm)."""
        mag = np.abs(self.values)
        if np.isinf(p):
            return float(mag.max())
        return float((mag**p * self.grid.weights(measure)).sum() ** (1.0 / p))


def make_grids(
    t_min: float = -10.0,
    t_max: float = 10.0,
    n: int = 512,
    x_extent: float = 8.0,
    n_x: int = 256,
    s_min: float = -6.0,
    s_max: float = 6.0,
    n_s: int = 192,
) -> tuple[LogGrid, AffGrid]:
    """Build the signal grid and the group grid (desk-scale defaults)."""
    return LogGrid(t_min, t_max, n), AffGrid(x_extent, n_x, s_min, s_max, n_s)


def inner_product(psi: Signal, phi: Signal) -> complex:
    """<psi, phi> in L2(R+, dr/r); linear in the first slot."""
    return complex(np.vdot(psi._other(phi), psi.values) * psi.grid.dt)


def integrate(f: AffFunction, measure: Measure = "right") -> complex:
    """Integral of ``f`` against the right or left Haar measure."""
    return complex((f.values * f.grid.weights(measure)).sum())


def interpolate(psi: Signal, r: np.ndarray | float) -> np.ndarray | complex:
    """Cubic interpolation of ``psi`` in log r; zero outside the grid."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0) or not np.all(np.isfinite(r_arr)):
        raise ValueError("interpolation points must be finite and positive")
    out = interp_axis(psi.values, psi.grid.position(np.log(r_arr)))
    return complex(out) if out.ndim == 0 else out


def _moments(theta: np.ndarray, m_max: int = 3) -> list[np.ndarray]:
    """M_m(theta) = int_0^1 tau^m exp(i theta tau) d tau for m = 0..m_max."""
    theta = np.asarray(theta, dtype=float)
    small = np.abs(theta) < 2.0
    th_s = np.where(small, theta, 0.0)
    th_b = np.where(small, 1.0, theta)
    e = np.exp(1j * th_b)
    out = []
    prev = None
    for m in range(m_max + 1):
        # upward recursion is stable once |theta| exceeds the degree
        big = (e - 1.0) / (1j * th_b) if m == 0 else (e - m * prev) / (1j * th_b)
        prev = big
        series = np.zeros_like(th_s, dtype=complex)
        term = np.ones_like(th_s, dtype=complex)
        for j in range(30):
            series = series + term / (m + j + 1)
            term = term * (1j * th_s) / (j + 1)
        out.append(np.where(small, series, big))
    return out


def _cell_basis(q: float) -> np.ndarray:
    # nodes of a log-grid cell [r_k, r_{k+1}] in the local coordinate
    # tau = (r - r_k) / (r_{k+1} - r_k); the same for every cell
    nodes = np.array([-1.0 / q, 0.0, 1.0, q + 1.0])
    vand = np.vander(nodes, 4, increasing=True)
    return np.linalg.inv(vand).T  # row b holds the coefficients of basis b


def fourier_weights(grid: LogGrid, omega: np.ndarray) -> np.ndarray:
    """Weights for oscillatory integrals against the Haar measure of the half line.

    Returns ``W`` of shape ``(len(omega), n)`` with

        sum_k W[j, k] g(r_k)  ~  int g(r) exp(i omega_j r) dr / r,

    integrating a cubic interpolant of g(r)/r in r exactly against the
    exponential on every cell. Unlike a plain sum over log-nodes this stays
    accurate when omega * r * dt is large.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    r = grid.r
    q = float(np.exp(grid.dt))
    coef = _cell_basis(q)
    h = r[:-1] * (q - 1.0)  # cell widths
    theta = omega[:, None] * h[None, :]
    mom = _moments(theta)
    lead = h[None, :] * np.exp(1j * omega[:, None] * r[None, :-1])
    n = grid.n
    W = np.zeros((omega.size, n), dtype=complex)
    cells = np.arange(n - 1)
    for b in range(4):
        node = cells + b - 1
        ok = (node >= 0) & (node < n)
        cell_int = lead * sum(coef[b, m] * mom[m] for m in range(4))
        contrib = cell_int[:, ok] / r[node[ok]][None, :]
        np.add.at(W, (slice(None), node[ok]), contrib)
    return W
