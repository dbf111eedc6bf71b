"""Fourier transforms attached to the affine group.

* ``fw_forward``: operator -> function, B |-> tr(B D U(x, a)).
* ``fw_inverse``: function -> operator, with kernel sqrt(r) (F1 f)(r, s / r).
* ``fko``: the Fourier-Kirillov transform of a function.
* ``positive_type_test``: Gram matrices of (x, a) |-> tr(A U(x, a)).

Here D is multiplication by sqrt(r), and F1 is the Fourier transform in the
first variable,
(F1 f)(rho, a) = int f(x, a) exp(-2 pi i x rho) dx.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import AffFunction, AffGrid, LogGrid, cubic_stencil, fourier_weights, interp_axis, shift_axis
from .hilbert import TWO_PI, GroupElement, OperatorRep, dilated_diagonal
from .parallel import chunk_map
from .special import lambda_eval
from .wigner import UGrid


def _x_transform(f: AffFunction, rho: np.ndarray) -> np.ndarray:
    """(F1 f)(rho_k, s_i) for all k, i by an exact sum; zero beyond the x-Nyquist frequency."""
    g = f.grid
    E = np.exp(-1j * TWO_PI * np.outer(rho, g.x)) * g.dx
    out = E @ f.values
    out[np.abs(rho) > g.nyquist] = 0.0
    return out


def fw_forward(B: OperatorRep, grid: AffGrid, workers: int | None = None) -> AffFunction:
    """F_W(B)(x, a) = tr(B D U(x, a)) = int B(a rho, rho) sqrt(rho) exp(2 pi i x rho) d rho / rho.

    The rho-integral uses oscillation-aware weights, so the trace form is
    accurate at every node and no kernel-inversion fallback is needed.
    """
    lg = B.grid
    Wt = fourier_weights(lg, TWO_PI * grid.x).T  # (n, n_x)
    root = np.sqrt(lg.r)

    def rows(idx: np.ndarray) -> np.ndarray:
        G = np.stack([dilated_diagonal(B, float(s)) for s in grid.s[idx]]) * root[None, :]
        return G @ Wt

    vals = np.concatenate(chunk_map(rows, grid.n_s, workers), axis=0).T
    return AffFunction(grid, vals)


def right_norm_profile(
    B: OperatorRep,
    s_max: np.ndarray,
    x_extent: float = 8.0,
    n_x: int = 256,
    n_s: int = 32,
) -> np.ndarray:
    """||F_W(B)||_{L2_r} restricted to |log a| <= s_max, for each entry of ``s_max``.

    The x-window at scale a is [-X max(1, a), X max(1, a)]: F_W(B)(., a)
    spreads over |x| ~ a at large a, and a fixed window would cut off exactly
    the mass that decides whether the norm stays finite. ``n_s`` nodes are
    used per unit of log a.
    """
    lg = B.grid
    root = np.sqrt(lg.r)
    top = float(np.max(s_max))
    n_tot = int(np.ceil(2 * top * n_s)) + 1
    s = np.linspace(-top, top, n_tot)
    ds = s[1] - s[0]
    unit = (np.arange(n_x) - (n_x - 1) / 2.0) * (2.0 * x_extent / (n_x - 1))
    W = fourier_weights(lg, TWO_PI * unit)
    row_mass = np.empty(n_tot)
    for i, si in enumerate(s):
        h = dilated_diagonal(B, float(si)) * root
        stretch = max(0.0, float(si))
        # x -> a x is the same as rho -> rho / a under the unit-window weights
        if stretch > 0:
            h = shift_axis(h, -stretch / lg.dt)
        vals = W @ h
        row_mass[i] = float(np.sum(np.abs(vals) ** 2)) * (unit[1] - unit[0]) * np.exp(stretch)
    return np.array([np.sqrt(row_mass[np.abs(s) <= m + 1e-12].sum() * ds) for m in np.atleast_1d(s_max)])


def positive_frequency_leakage(f: AffFunction, lg: LogGrid) -> float:
    """Share of the energy of F1 f at negative frequencies (on the rho-range of ``lg``).

    The inverse transform keeps only rho > 0; this is what it discards.
    """
    rho = lg.r
    pos = _x_transform(f, rho)
    neg = _x_transform(f, -rho)
    w = rho * lg.dt  # d rho on the log grid
    e_pos = float((np.abs(pos) ** 2 * w[:, None]).sum())
    e_neg = float((np.abs(neg) ** 2 * w[:, None]).sum())
    total = e_pos + e_neg
    return e_neg / total if total > 0 else 0.0


def fw_inverse(f: AffFunction, lg: LogGrid, workers: int | None = None) -> OperatorRep:
    """The operator with kernel K(s, r) = sqrt(r) (F1 f)(r, s / r) on ``lg``.

    Negative frequencies are dropped (see :func:`positive_frequency_leakage`),
    as are frequencies r above the x-Nyquist limit. The scale argument s / r
    is interpolated cubically on the s-axis of ``f``.
    """
    g = f.grid
    F = _x_transform(f, lg.r)  # (n, n_s): rows are r_k
    t = lg.t
    root = np.sqrt(lg.r)

    def cols(idx: np.ndarray) -> np.ndarray:
        # column k of the kernel: s runs over the grid, log(s / r_k) = t_j - t_k
        pos = g.s_position(t[:, None] - t[None, idx])  # (n, len(idx))
        sidx, w = cubic_stencil(pos, g.n_s)
        vals = F[idx[None, :, None], sidx]
        return (vals * w).sum(axis=-1) * root[None, idx]

    K = np.concatenate(chunk_map(cols, lg.n, workers, chunk=64), axis=1)
    return OperatorRep(lg, K)


def fko(f: AffFunction, ugrid: UGrid = UGrid(), workers: int | None = None) -> AffFunction:
    """Affine Fourier-Kirillov transform of ``f`` on its own grid.

    Integrating out v in the two-dimensional definition leaves

        F_KO f(x, a) = sqrt(a) int sqrt(lambda(-u)) (F1 f)(a lambda(-u), e^u) exp(-2 pi i x u) du,

    which is evaluated directly on the u-grid. F1 f is an exact sum over the
    x samples, and f is interpolated cubically in log a at a = e^u.
    """
    g = f.grid
    u = ugrid.u
    inside = (u >= g.s_min) & (u <= g.s_max)
    uu = u[inside]
    fu = interp_axis(f.values, g.s_position(uu), axis=1)  # f(x, e^u): (n_x, n_in)
    lam = lambda_eval(-uu)
    root_lam = np.sqrt(lam)
    Eu = np.exp(-1j * TWO_PI * np.outer(uu, g.x)) * ugrid.du  # (n_in, n_x)

    def rows(idx: np.ndarray) -> np.ndarray:
        out = np.empty((idx.size, g.n_x), dtype=complex)
        for j, i in enumerate(idx):
            rho = g.a[i] * lam
            E = np.exp(-1j * TWO_PI * rho[:, None] * g.x[None, :]) * g.dx
            F = (E * fu.T).sum(axis=1)
            F[rho > g.nyquist] = 0.0
            out[j] = (np.sqrt(g.a[i]) * root_lam * F) @ Eu
        return out

    vals = np.concatenate(chunk_map(rows, g.n_s, workers), axis=0).T
    return AffFunction(g, vals)


# ---------------------------------------------------------------- positive type


@dataclass(frozen=True)
class PositiveTypeReport:
    """Gram matrix of (x, a) |-> tr(A U(x, a)) over a finite point set."""

    points: tuple[GroupElement, ...]
    gram: np.ndarray
    eigenvalues: np.ndarray
    min_eigenvalue: float
    hermitian_defect: float

    def to_record(self) -> str:
        items = [
            ("n_points", str(len(self.points))),
            ("min_eigenvalue", repr(self.min_eigenvalue)),
            ("hermitian_defect", repr(self.hermitian_defect)),
        ]
        return "".join(f"{k}={v}\n" for k, v in items)


def _graded_nodes(lg: LogGrid, rho_max: float, spacing: float) -> tuple[np.ndarray, np.ndarray]:
    """Positive-weight quadrature for int g(rho) d rho / rho on [r_min, rho_max].

    rho = c log(1 + e^tau) with tau uniform: the nodes are geometric for
    rho << c and have spacing c dtau for rho >> c. A trapezoid rule in tau is
    spectrally accurate for integrands that vanish at both ends.
    """
    dtau = lg.dt / 2.0
    c = min(1.0, spacing / dtau)
    tau_lo = np.log(np.expm1(lg.r[0] / c))
    tau_hi = np.log(np.expm1(min(rho_max, lg.r[-1]) / c)) if rho_max / c < 700 else rho_max / c
    tau = np.arange(tau_lo, tau_hi + dtau, dtau)
    rho = c * np.logaddexp(0.0, tau)
    sig = 0.5 * (1.0 + np.tanh(0.5 * tau))  # logistic function
    w = c * sig / rho * dtau
    return rho, w


def _support_radius(A: OperatorRep, rel: float = 1e-16) -> float:
    mass = np.abs(A.kernel).max(axis=0) + np.abs(A.kernel).max(axis=1)
    keep = np.flatnonzero(mass > rel * mass.max()) if mass.max() > 0 else np.array([A.grid.n - 1])
    return float(A.grid.r[min(keep[-1] + 2, A.grid.n - 1)])


def _bicubic_kernel(K: np.ndarray, lg: LogGrid, r1: np.ndarray, r2: np.ndarray) -> np.ndarray:
    i1, w1 = cubic_stencil(lg.position(np.log(r1)), lg.n)
    i2, w2 = cubic_stencil(lg.position(np.log(r2)), lg.n)
    out = np.zeros(r1.shape, dtype=complex)
    for p in range(4):
        for q in range(4):
            out += w1[..., p] * w2[..., q] * K[i1[..., p], i2[..., q]]
    return out


def positive_type_gram(A: OperatorRep, points: list[GroupElement]) -> np.ndarray:
    """gram[i, j] = tr(A U(g_i^-1 g_j)) = int exp(2 pi i (x_j - x_i) r) K_A(a_j r, a_i r) dr / r.

    The r-integral uses positive weights and the kernel is interpolated with
    real stencils, so for positive A the result is exactly a Gram matrix.
    """
    if not points:
        raise ValueError("positive_type_test needs at least one point")
    lg = A.grid
    xs = np.array([p.x for p in points])
    as_ = np.array([p.a for p in points])
    span = float(xs.max() - xs.min())
    rho_max = _support_radius(A) / as_.min()
    spacing = 1.0 / (8.0 * span) if span > 0 else np.inf
    rho, w = _graded_nodes(lg, rho_max, spacing)
    m = len(points)
    G = np.empty((m, m), dtype=complex)
    for i in range(m):
        for j in range(m):
            K = _bicubic_kernel(A.kernel, lg, as_[j] * rho, as_[i] * rho)
            G[i, j] = np.sum(w * np.exp(1j * TWO_PI * (xs[j] - xs[i]) * rho) * K)
    return G


def positive_type_test(A: OperatorRep, points: list[GroupElement]) -> PositiveTypeReport:
    """Test (x, a) |-> tr(A U(x, a)) for positive definiteness on ``points``."""
    G = positive_type_gram(A, points)
    defect = float(np.abs(G - G.conj().T).max())
    ev = np.linalg.eigvalsh(0.5 * (G + G.conj().T))
    return PositiveTypeReport(tuple(points), G, ev, float(ev[0]), defect)


def random_points(rng: np.random.Generator, n: int, x_max: float = 2.0, a_range: tuple[float, float] = (0.25, 4.0)) -> list[GroupElement]:
    """``n`` group elements with x uniform in [-x_max, x_max] and log a uniform."""
    x = rng.uniform(-x_max, x_max, n)
    a = np.exp(rng.uniform(np.log(a_range[0]), np.log(a_range[1]), n))
    return [GroupElement(float(xi), float(ai)) for xi, ai in zip(x, a)]


def trace_of_U(A: OperatorRep, g: GroupElement) -> complex:
    """tr(A U(x, a)) by the same positive-weight rule as the Gram matrices."""
    return complex(positive_type_gram(A, [GroupElement(0.0, 1.0), g])[0, 1])


__all__ = [
    "fw_forward",
    "fw_inverse",
    "positive_frequency_leakage",
    "right_norm_profile",
    "fko",
    "PositiveTypeReport",
    "positive_type_gram",
    "positive_type_test",
    "random_points",
    "trace_of_U",
]
