"""Convolutions on the affine group, admissibility, and what is built from them.

Three products are implemented, all against the right Haar measure:

* ``fun_conv``:    (f * g)(x, a) = int f(y, b) g((x, a)(y, b)^-1) dy db / b
* ``fun_op_conv``: f * S = int f(x, a) U(-x, a)* S U(-x, a) dx da / a
* ``op_op_conv``:  (S * T)(x, a) = tr(S U(-x, a)* T U(-x, a))

Localization operators, covariant integral quantization and the Cohen class
are thin layers over these.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import AffFunction, AffGrid, LogGrid, Measure, Signal, fourier_weights, interp_axis, shift_axis
from .hilbert import TWO_PI, OperatorRep, _dilate, duflo_sandwich, op_norm, rank_one, trace
from .parallel import chunk_map, ordered_sum
from .wigner import wavelet_coeff

# spacing of the frequency grid used by fun_conv; the x-period 1/_XI_STEP = 64
# comfortably exceeds the support of products of bumps on the default x-window
_XI_STEP = 1.0 / 64.0


def _same_aff(f: AffFunction, g: AffFunction) -> AffGrid:
    if f.grid != g.grid:
        raise ValueError("functions live on different grids")
    return f.grid


def _same_log(S: OperatorRep, T: OperatorRep) -> LogGrid:
    if S.grid != T.grid:
        raise ValueError("operators live on different grids")
    return S.grid


# ---------------------------------------------------------------- functions


def fun_conv(f: AffFunction, g: AffFunction, workers: int | None = None) -> AffFunction:
    """Right-Haar convolution of two functions on the affine group.

    Uses the Fourier transform in x, under which the product becomes a
    one-dimensional convolution over scales:

        (f * g)^(xi, a) = int f^(c xi, a / c) g^(xi, c) dc / c.

    The x-transforms are exact trigonometric sums of the samples (zero beyond
    the Nyquist frequency), ``g^`` is interpolated cubically in log c, and the
    result is transformed back on the grid's x nodes.
    """
    grid = _same_aff(f, g)
    nyq = grid.nyquist
    m_max = int(np.floor(nyq / _XI_STEP))
    xi = np.arange(-m_max, m_max + 1) * _XI_STEP
    x = grid.x

    # g^(xi, s) on the s-grid, then at every scale lag c = a_i / b_l
    Eg = np.exp(-1j * TWO_PI * np.outer(xi, x)) * grid.dx
    g_hat = Eg @ g.values  # (n_xi, n_s)
    n_s = grid.n_s
    lags = np.arange(-(n_s - 1), n_s)
    g_lag = interp_axis(g_hat.T, grid.s_position(lags * grid.ds), axis=0)  # (n_lag, n_xi)

    rows = np.flatnonzero(np.any(f.values != 0, axis=0))
    if rows.size == 0:
        return AffFunction(grid, np.zeros(grid.shape))
    f_rows = f.values[:, rows]

    def lag_block(block: np.ndarray) -> np.ndarray:
        H = np.zeros((xi.size, n_s), dtype=complex)
        for li in block:
            m = int(lags[li])
            out = rows + m
            ok = (out >= 0) & (out < n_s)
            if not np.any(ok):
                continue
            freq = np.exp(m * grid.ds) * xi
            E = np.exp(-1j * TWO_PI * np.outer(freq, x)) * grid.dx
            E[np.abs(freq) > nyq] = 0.0
            f_hat = E @ f_rows[:, ok]  # f^(c xi, b_l)
            H[:, out[ok]] += f_hat * g_lag[li][:, None]
        return H

    H = ordered_sum(chunk_map(lag_block, lags.size, workers, chunk=32)) * grid.ds
    Ex = np.exp(1j * TWO_PI * np.outer(x, xi)) * _XI_STEP
    return AffFunction(grid, Ex @ H)


def right_translate(f: AffFunction, x: float, a: float) -> AffFunction:
    """(R_(x,a) f)(y, b) = f((y, b)(x, a)) = f(b x + y, a b), interpolated bicubically."""
    g = f.grid
    yy = g.x[:, None] + g.a[None, :] * x
    ss = np.broadcast_to(g.s[None, :] + np.log(a), g.shape)
    return AffFunction(g, _bicubic_aff(f, yy, ss))


def _bicubic_aff(f: AffFunction, xx: np.ndarray, ss: np.ndarray) -> np.ndarray:
    from .grid import cubic_stencil

    g = f.grid
    ix, wx = cubic_stencil(g.x_position(xx), g.n_x)
    js, ws = cubic_stencil(g.s_position(ss), g.n_s)
    out = np.zeros(xx.shape, dtype=complex)
    for p in range(4):
        for q in range(4):
            out += wx[..., p] * ws[..., q] * f.values[ix[..., p], js[..., q]]
    return out


def involution(f: AffFunction) -> AffFunction:
    """f-check(x, a) = f((x, a)^-1) = f(-x / a, 1 / a), interpolated bicubically."""
    g = f.grid
    xx = -g.x[:, None] / g.a[None, :]
    ss = np.broadcast_to(-g.s[None, :], g.shape)
    return AffFunction(g, _bicubic_aff(f, xx, ss))


# ---------------------------------------------------------------- function with operator


def _dilated_kernel(S: OperatorRep, log_a: float) -> np.ndarray:
    """K_S(a r, a s) on the grid nodes."""
    return _dilate(S.kernel, S.grid, log_a, (0, 1))


def fun_op_conv(f: AffFunction, S: OperatorRep, stride: int = 1, workers: int | None = None) -> OperatorRep:
    """f * S as a node sum of conjugated copies of S.

    Summing over x first, each scale row contributes the Schur product

        K_S(r / a, s / a) * sum_x f(x, a) w exp(2 pi i x (r - s) / a),

    and the second factor is E diag(f w) E* with E[r, x] = exp(2 pi i x r / a).
    For f >= 0 and positive S both factors are positive semi-definite, so the
    sum is too, up to rounding.

    Parameters
    ----------
    stride : int
        Use every ``stride``-th node in x and s with weights scaled to match;
        ``stride=2`` is a quarter of the work at the cost of a coarser quadrature.
    """
    if stride < 1:
        raise ValueError("stride must be a positive integer")
    lg = S.grid
    g = f.grid
    xs = np.arange(0, g.n_x, stride)
    srows = np.arange(0, g.n_s, stride)
    w = g.dx * g.ds * stride * stride
    active = srows[np.any(f.values[np.ix_(xs, srows)] != 0, axis=0)]
    if active.size == 0:
        return OperatorRep.zero(lg)
    x = g.x[xs]

    def rows(block: np.ndarray) -> np.ndarray:
        acc = np.zeros((lg.n, lg.n), dtype=complex)
        for i in active[block]:
            fi = f.values[xs, i] * w
            E = np.exp(1j * TWO_PI * np.outer(lg.r / g.a[i], x))
            phi = (E * fi[None, :]) @ E.conj().T
            acc += _dilated_kernel(S, -g.s[i]) * phi
        return acc

    K = ordered_sum(chunk_map(rows, active.size, workers, chunk=8))
    return OperatorRep(lg, K)


# ---------------------------------------------------------------- operator with operator


_RANK_CUT = 1e-13


def _low_rank(S: OperatorRep) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Truncated SVD K = U diag(sv) Vh keeping singular values above 1e-13 of the largest.

    What is dropped is rounding noise: at most n * 1e-13 of the trace norm.
    """
    U, sv, Vh = np.linalg.svd(S.kernel)
    if sv[0] == 0:
        return U[:, :1], np.zeros(1), Vh[:1]
    rank = int(np.count_nonzero(sv > _RANK_CUT * sv[0]))
    return U[:, :rank], sv[:rank], Vh[:rank]


def _pairing_rows_dense(
    S: OperatorRep, T: OperatorRep, Wm: np.ndarray, s_values: np.ndarray, workers: int | None
) -> np.ndarray:
    Wp = Wm.conj()
    kt = T.kernel.T  # K_T(s, r) at [r, s]

    def rows(block: np.ndarray) -> np.ndarray:
        out = np.empty((block.size, Wm.shape[0]), dtype=complex)
        for j, i in enumerate(block):
            B = _dilated_kernel(S, float(s_values[i])) * kt
            out[j] = ((Wm @ B) * Wp).sum(axis=1)
        return out

    return np.concatenate(chunk_map(rows, len(s_values), workers, chunk=8), axis=0)


def _pairing_rows_low_rank(
    S: OperatorRep, T: OperatorRep, Wm: np.ndarray, s_values: np.ndarray, workers: int | None
) -> np.ndarray:
    # K_S = sum_p sv_p u_p conj(v_p), K_T = sum_q tv_q y_q conj(z_q); the double
    # sum then factors into products of single sums against the x-weights
    lg = S.grid
    Us, sv, Vsh = _low_rank(S)
    Ut, tv, Vth = _low_rank(T)
    coef = (sv[:, None] * tv[None, :]).ravel()
    Wp = Wm.conj()

    def rows(block: np.ndarray) -> np.ndarray:
        out = np.empty((block.size, Wm.shape[0]), dtype=complex)
        for j, i in enumerate(block):
            shift = float(s_values[i]) / lg.dt
            u = shift_axis(Us, shift, axis=0)  # u_p(a r)
            vc = shift_axis(Vsh, shift, axis=1)  # conj v_p(a s)
            left = (u[:, :, None] * Vth.T[:, None, :]).reshape(lg.n, -1)  # u_p conj(z_q)
            right = (vc.T[:, :, None] * Ut[:, None, :]).reshape(lg.n, -1)  # conj(v_p) y_q
            out[j] = ((Wm @ left) * (Wp @ right)) @ coef
        return out

    return np.concatenate(chunk_map(rows, len(s_values), workers, chunk=8), axis=0)


def _pairing_rows(
    S: OperatorRep,
    T: OperatorRep,
    x: np.ndarray,
    s_values: np.ndarray,
    workers: int | None,
    method: str = "auto",
) -> np.ndarray:
    """tr(S U(-x,a)* T U(-x,a)) for all x and each log-scale in ``s_values``; shape (len(s), len(x))."""
    lg = _same_log(S, T)
    if method not in ("auto", "dense", "low-rank"):
        raise ValueError(f"unknown method {method!r}")
    Wm = fourier_weights(lg, -TWO_PI * np.asarray(x, dtype=float))  # exp(-2 pi i x r)
    s_values = np.asarray(s_values, dtype=float)
    if method == "auto":
        rank_s = _low_rank(S)[1].size
        rank_t = _low_rank(T)[1].size
        method = "low-rank" if rank_s * rank_t <= lg.n // 8 else "dense"
    if method == "low-rank":
        return _pairing_rows_low_rank(S, T, Wm, s_values, workers)
    return _pairing_rows_dense(S, T, Wm, s_values, workers)


def op_op_conv(
    S: OperatorRep, T: OperatorRep, grid: AffGrid, workers: int | None = None, method: str = "auto"
) -> AffFunction:
    """(S * T)(x, a) = tr(S U(-x, a)* T U(-x, a)) on the nodes of ``grid``.

    Evaluated in the cyclic form tr(U S U* T), where U S U* has kernel
    exp(-2 pi i x (r - s)) K_S(a r, a s). The phases then depend on x only, and
    the double integral uses oscillation-aware weights in both variables.

    Parameters
    ----------
    method : {"auto", "dense", "low-rank"}
        ``"dense"`` forms the full kernel product at every scale.
        ``"low-rank"`` factors both kernels by a truncated SVD, which is much
        faster when the product of their ranks is small. ``"auto"`` picks
        low-rank when that product is at most n / 8.
    """
    vals = _pairing_rows(S, T, grid.x, grid.s, workers, method)
    return AffFunction(grid, vals.T)


def op_op_conv_at(S: OperatorRep, T: OperatorRep, x: float, a: float, method: str = "auto") -> complex:
    """(S * T)(x, a) at a single point of the group."""
    return complex(_pairing_rows(S, T, np.array([x]), np.array([np.log(a)]), 1, method)[0, 0])


# ---------------------------------------------------------------- admissibility


@dataclass(frozen=True)
class AdmissibilityReport:
    """Numerical evidence on whether D^-1 S D^-1 is trace class.

    Attributes
    ----------
    is_admissible : bool
        Verdict: the trace norm is stable when the outer bands are removed
        and the tail mass is small. It is a diagnostic, not a proof.
    dsd_trace : complex
        tr(D^-1 S D^-1).
    dsd_trace_norm : float
        Sum of singular values of D^-1 S D^-1.
    tail_ratio : float
        Share of the squared kernel mass of D^-1 S D^-1 with a row or column
        index in the outer ``band`` of the grid at either end.
    stability : float
        Relative change of the trace norm when the outer bands are dropped.
    """

    is_admissible: bool
    dsd_trace: complex
    dsd_trace_norm: float
    tail_ratio: float
    stability: float
    inner_trace_norm: float
    asymmetry: float
    notes: tuple[str, ...] = field(default_factory=tuple)

    def to_record(self) -> str:
        """Flat ``key=value`` text, one entry per line."""
        items = [
            ("is_admissible", str(self.is_admissible).lower()),
            ("dsd_trace_re", repr(float(self.dsd_trace.real))),
            ("dsd_trace_im", repr(float(self.dsd_trace.imag))),
            ("dsd_trace_norm", repr(self.dsd_trace_norm)),
            ("inner_trace_norm", repr(self.inner_trace_norm)),
            ("stability", repr(self.stability)),
            ("tail_ratio", repr(self.tail_ratio)),
            ("asymmetry", repr(self.asymmetry)),
            ("notes", "; ".join(self.notes)),
        ]
        return "".join(f"{k}={v}\n" for k, v in items)


def dsd(S: OperatorRep) -> OperatorRep:
    """D^-1 S D^-1."""
    return duflo_sandwich(S, -1)


def dsd_trace(S: OperatorRep) -> complex:
    return trace(dsd(S))


def admissibility_check(
    S: OperatorRep,
    band: float = 0.1,
    stability_tol: float = 0.05,
    tail_tol: float = 0.05,
) -> AdmissibilityReport:
    """Assess admissibility of ``S`` from its samples.

    The trace norm of D^-1 S D^-1 is computed on the full grid and on the
    sub-grid without the outer ``band`` fraction at each end. An admissible
    operator has converged, so the two agree and little kernel mass sits
    in the bands.
    """
    M = dsd(S)
    mat = M.matrix
    n = mat.shape[0]
    k = max(1, int(round(band * n)))
    tn = float(np.linalg.svd(mat, compute_uv=False).sum())
    inner = float(np.linalg.svd(mat[k : n - k, k : n - k], compute_uv=False).sum())
    mass = np.abs(mat) ** 2
    total = float(mass.sum())
    core = float(mass[k : n - k, k : n - k].sum())
    tail = (total - core) / total if total > 0 else 0.0
    stability = abs(tn - inner) / tn if tn > 0 else 0.0
    notes = ["finite grid: trace class replaced by decay of D^-1 S D^-1"]
    asym = M.asymmetry()
    if asym > 1e-6:
        notes.append(f"kernel not self-adjoint (asymmetry {asym:.2e})")
    ok = total > 0 and stability < stability_tol and tail < tail_tol
    return AdmissibilityReport(ok, trace(M), tn, tail, stability, inner, asym, tuple(notes))


def integral_identity_check(
    T: OperatorRep, S: OperatorRep, grid: AffGrid, measure: Measure = "right", workers: int | None = None
) -> tuple[complex, complex]:
    """Both sides of the integral relation for T * S.

    Right measure: (int T*S dmu_r, tr(T) tr(D^-1 S D^-1)).
    Left measure:  (int T*S dmu_l, tr(S) tr(D^-1 T D^-1)).
    """
    conv = op_op_conv(T, S, grid, workers)
    lhs = complex((conv.values * grid.weights(measure)).sum())
    if measure == "right":
        return lhs, trace(T) * dsd_trace(S)
    return lhs, trace(S) * dsd_trace(T)


# ---------------------------------------------------------------- localization and quantization


def box_symbol(grid: AffGrid, x_range: tuple[float, float], a_range: tuple[float, float]) -> AffFunction:
    """Indicator of [x0, x1] x [a0, a1] with a linear ramp one grid cell wide at the edges."""

    def ramp(v: np.ndarray, lo: float, hi: float, h: float) -> np.ndarray:
        return np.clip((v - lo) / h + 0.5, 0.0, 1.0) * np.clip((hi - v) / h + 0.5, 0.0, 1.0)

    fx = ramp(grid.x, x_range[0], x_range[1], grid.dx)
    fs = ramp(grid.s, np.log(a_range[0]), np.log(a_range[1]), grid.ds)
    return AffFunction(grid, np.outer(fx, fs))


def windowed_constant(grid: AffGrid, x_flat: float = 5.0, s_flat: float = 4.0) -> AffFunction:
    """The constant 1 on |x| <= x_flat, |log a| <= s_flat, tapered to 0 at the grid edge by cos^2 ramps.

    Standing in for f = 1, it keeps the node sums of covariant quantization
    free of truncation ringing. Each flat part must lie inside the grid.
    """
    x_edge = max(abs(grid.x[0]), abs(grid.x[-1]))
    s_edge = min(abs(grid.s_min), abs(grid.s_max))
    if not (0 < x_flat < x_edge and 0 < s_flat < s_edge):
        raise ValueError("flat region must lie strictly inside the grid")

    def taper(v: np.ndarray, flat: float, edge: float) -> np.ndarray:
        u = np.clip((np.abs(v) - flat) / (edge - flat), 0.0, 1.0)
        return np.cos(0.5 * np.pi * u) ** 2

    fx = taper(grid.x, x_flat, x_edge)
    fs = taper(grid.s, s_flat, s_edge)
    return AffFunction(grid, np.outer(fx, fs))


@dataclass(frozen=True)
class LocalizationResult:
    """A localization operator with its spectral decomposition (descending)."""

    operator: OperatorRep
    eigenvalues: np.ndarray
    eigenvectors: list[Signal]
    asymmetry: float


def localization_operator(f: AffFunction, phi: Signal, stride: int = 1, workers: int | None = None) -> LocalizationResult:
    """f * (phi (x) phi), diagonalized through its Hermitian part."""
    from .hilbert import spectrum

    A = fun_op_conv(f, rank_one(phi, phi), stride, workers)
    vals, vecs = spectrum(A)
    return LocalizationResult(A, vals, vecs, A.asymmetry())


def localization_functional(psi: Signal, f: AffFunction, phi: Signal, workers: int | None = None) -> float:
    """int f(x, a) |<psi, U(-x, a)* phi>|^2 dmu_r."""
    V = wavelet_coeff(psi, phi, f.grid, workers)
    return float((f.values * np.abs(V.values) ** 2 * f.grid.weights("right")).sum().real)


def covariant_quantize(f: AffFunction, T: OperatorRep, stride: int = 1, workers: int | None = None) -> OperatorRep:
    """Covariant integral quantization f -> f * (D T D)."""
    return fun_op_conv(f, duflo_sandwich(T, +1), stride, workers)


# ---------------------------------------------------------------- Cohen class


@dataclass(frozen=True)
class CohenDistribution:
    """Q_S(psi, phi) on a grid, with the sup-norm bound ||S||_op ||psi|| ||phi||."""

    value: AffFunction
    operator_ref: OperatorRep
    bound: float

    def within_bound(self, slack: float = 1e-8) -> bool:
        return bool(np.abs(self.value.values).max() <= self.bound + slack)


def cohen_distribution(psi: Signal, phi: Signal, S: OperatorRep, grid: AffGrid, workers: int | None = None) -> CohenDistribution:
    """Q_S(psi, phi)(x, a) = <S U(-x, a) psi, U(-x, a) phi>, i.e. (psi (x) phi) * S."""
    value = op_op_conv(rank_one(psi, phi), S, grid, workers)
    return CohenDistribution(value, S, op_norm(S) * psi.norm() * phi.norm())


def affine_class_kernel(S: OperatorRep) -> np.ndarray:
    """Phi_S(s, t) = K_S(t, s) / sqrt(s t) on the grid, indexed ``[s, t]``."""
    r = S.grid.r
    return S.kernel.T / np.sqrt(np.outer(r, r))


def affine_class_eval(phi_table: np.ndarray, psi: Signal, y: float, a: float) -> complex:
    """(1/a) int int Phi(t/a, s/a) exp(2 pi i y (t - s)) psi(t) conj(psi(s)) dt ds.

    ``phi_table`` holds Phi on the signal grid (as from :func:`affine_class_kernel`);
    psi is extended by zero to the negative half line.
    """
    lg = psi.grid
    D = _dilate(phi_table, lg, -float(np.log(a)), (0, 1))  # Phi(t_j / a, t_k / a)
    w = fourier_weights(lg, np.array([TWO_PI * y]))[0]
    g = psi.values * lg.r  # dt = t d(log t): Lebesgue measure as Haar measure times t
    return complex((w * g) @ D @ (g.conj() * w.conj()) / a)
