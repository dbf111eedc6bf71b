"""Verification suites: numerical identities checked at fixed tolerances.

Each suite returns a list of :class:`Check` records. Reference values come
from closed forms evaluated here (not from the code under test), from an
identity whose two sides are computed by different routes, or from exact
structural facts. Fixtures are fixed and random draws are seeded, so a run
is reproducible bit for bit.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .convolve import (
    admissibility_check,
    box_symbol,
    cohen_distribution,
    dsd_trace,
    fun_conv,
    fun_op_conv,
    integral_identity_check,
    localization_functional,
    localization_operator,
    op_op_conv,
    op_op_conv_at,
)
from .fourier import fko, fw_forward, positive_type_test, random_points
from .grid import AffFunction, AffGrid, LogGrid, Signal, inner_product, integrate
from .hilbert import (
    GroupElement,
    OperatorRep,
    apply_U,
    dilate,
    duflo_apply,
    duflo_norm_sq,
    hs_norm,
    rank_one,
    trace,
)
from .signals import laguerre, log_gaussian
from .special import (
    WBranch,
    lambda_eval,
    lambda_inverse,
    lambert_w,
    laguerre_fn,
    sigma_eval,
)
from .weyl import coordinate_commutator, coordinate_quantize, dequantize, quantize
from .wigner import affine_wigner, grossmann_royer_eval, scalogram, wavelet_coeff

__all__ = ["Check", "Context", "SUITES", "run_suites", "format_report"]


@dataclass(frozen=True)
class Check:
    """One measured quantity compared against its tolerance."""

    suite: str
    name: str
    value: float
    tolerance: float
    passed: bool
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.suite}/{self.name}: measured={self.value:.6e} tolerance={self.tolerance:.1e}"
        return f"{text} ({self.note})" if self.note else text


@dataclass(frozen=True)
class Context:
    lg: LogGrid
    ag: AffGrid
    workers: int | None = None


def _err(suite: str, name: str, value: float, tol: float, note: str = "") -> Check:
    value = float(value)
    return Check(suite, name, value, tol, bool(np.isfinite(value) and value <= tol), note)


def _below(suite: str, name: str, value: float, bound: float, note: str = "") -> Check:
    """Pass when ``value`` lies strictly below ``bound``."""
    value = float(value)
    return Check(suite, name, value, bound, bool(np.isfinite(value) and value < bound), note)


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / abs(b)


def _rel_sup(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.abs(a - b).max() / np.abs(b).max())


def _bump(ag: AffGrid, x0: float, s0: float, wx: float, ws: float) -> AffFunction:
    x, s = np.meshgrid(ag.x, ag.s, indexing="ij")
    return AffFunction(ag, np.exp(-((x - x0) ** 2) / (2 * wx**2) - (s - s0) ** 2 / (2 * ws**2)))


def _mixture(lg: LogGrid, weights: tuple[float, ...], alpha: float) -> OperatorRep:
    out = OperatorRep.zero(lg)
    for n, w in enumerate(weights):
        L = laguerre(lg, n, alpha)
        out = out + w * rank_one(L, L)
    return out


def _random_laguerre_combo(lg: LogGrid, rng: np.random.Generator, alpha: float = 1.0, terms: int = 6) -> Signal:
    c = rng.normal(size=terms) + 1j * rng.normal(size=terms)
    vals = sum(ci * laguerre(lg, n, alpha).values for n, ci in enumerate(c))
    return Signal(lg, vals).normalized()


# ---------------------------------------------------------------- 1. special functions


def suite_special(ctx: Context) -> list[Check]:
    S = "special"
    out = [
        _err(S, "lambda(0)=1", abs(lambda_eval(0.0) - 1.0), 1e-15),
        _err(S, "lambda(1)=e/(e-1)", abs(lambda_eval(1.0) - math.e / (math.e - 1.0)), 1e-12),
    ]
    r = np.logspace(-6, 6, 100)
    out.append(_err(S, "lambda(lambda^-1(r))=r", np.max(np.abs(lambda_eval(lambda_inverse(r)) / r - 1.0)), 1e-11))
    x = np.concatenate([-np.logspace(-3, np.log10(30.0), 60), [-1.0]])
    out.append(_err(S, "sigma(sigma(x))=x", np.max(np.abs(sigma_eval(sigma_eval(x)) - x)), 1e-12))
    y0 = np.concatenate([np.linspace(-1.0 / math.e, 0.0, 50), np.logspace(-3, 6, 50)])
    w0 = lambert_w(WBranch.PRINCIPAL, y0)
    y1 = np.linspace(-1.0 / math.e, -1e-6, 100)
    w1 = lambert_w(WBranch.LOWER, y1)
    res0 = np.abs(w0 * np.exp(w0) - y0) / np.maximum(1.0, np.abs(y0))
    res1 = np.abs(w1 * np.exp(w1) - y1)
    out.append(_err(S, "lambert_w_residual", max(res0.max(), res1.max()), 1e-13))
    return out


# ---------------------------------------------------------------- 2. admissibility constant


def suite_laguerre(ctx: Context) -> list[Check]:
    worst = 0.0
    for alpha in (0.5, 1.0, 2.0):
        for n in range(6):
            worst = max(worst, abs(duflo_norm_sq(laguerre(ctx.lg, n, alpha)) - 1.0 / alpha))
    return [_err("laguerre", "||D^-1 L_n^alpha||^2=1/alpha", worst, 1e-5, "alpha in {0.5,1,2}, n<=5")]


# ---------------------------------------------------------------- 3. parity operator


def suite_parity(ctx: Context) -> list[Check]:
    lg = ctx.lg
    cases = [
        (laguerre(lg, 0, 1.0), laguerre_fn(0, 1.0, 1.0)),
        (laguerre(lg, 1, 1.0), laguerre_fn(1, 1.0, 1.0)),
        (laguerre(lg, 2, 2.0), laguerre_fn(2, 2.0, 1.0)),
        (laguerre(lg, 0, 0.5), laguerre_fn(0, 0.5, 1.0)),
        (log_gaussian(lg, 0.2, 0.8), (math.pi * 0.64) ** -0.25 * math.exp(-0.04 / 1.28)),
    ]
    worst = max(abs(grossmann_royer_eval(GroupElement(0.0, 1.0), psi, 1.0) - 2.0 * exact) for psi, exact in cases)
    return [_err("parity", "P(psi)(1)=2psi(1)", worst, 1e-6, "5 signals")]


# ---------------------------------------------------------------- 4. Wigner


def suite_wigner(ctx: Context) -> list[Check]:
    lg, ag = ctx.lg, ctx.ag
    a, b, c = laguerre(lg, 0, 1.0), laguerre(lg, 1, 1.0), laguerre(lg, 0, 2.0)
    pairs = [(a, a), (a, b), (b, a), (c, a)]
    W = [affine_wigner(p, q, ag, workers=ctx.workers).values for p, q in pairs]
    w = ag.weights("right")
    lhs = np.array([[np.sum(Wi * Wj.conj() * w) for Wj in W] for Wi in W])
    rhs = np.array([[inner_product(p1, q1) * inner_product(p2, q2).conjugate() for q1, q2 in pairs] for p1, p2 in pairs])
    out = [_err("wigner", "orthogonality_4x4", np.abs(lhs - rhs).max() / np.abs(rhs).max(), 2e-2)]
    Wa = affine_wigner(a, a, ag, workers=ctx.workers).values
    idx = np.unique(np.linspace(ag.n_s // 4, 3 * ag.n_s // 4, 10).astype(int))
    marg = (Wa[:, idx] * ag.dx).sum(axis=0)
    exact = laguerre_fn(0, 1.0, ag.a[idx]) ** 2
    out.append(_err("wigner", "marginal", np.max(np.abs(marg - exact) / exact), 2e-2, f"{idx.size} interior a"))
    return out


# ---------------------------------------------------------------- 5. quantization


def suite_quantization(ctx: Context) -> list[Check]:
    lg, ag = ctx.lg, ctx.ag
    f = _bump(ag, 0.0, 0.0, 0.5, 0.5)
    A = quantize(f, lg, ctx.workers)
    fn = f.norm("right")
    out = [_err("quantization", "isometry", abs(hs_norm(A) - fn) / fn, 2e-2)]
    back = dequantize(A, ag, workers=ctx.workers)
    out.append(_err("quantization", "round_trip", (back - f).norm("right") / fn, 3e-2))
    psi, phi = laguerre(lg, 0, 1.0), laguerre(lg, 1, 1.0)
    sym = dequantize(rank_one(psi, phi), ag, workers=ctx.workers)
    W = affine_wigner(psi, phi, ag, workers=ctx.workers).function
    out.append(_err("quantization", "symbol_of_rank_one=wigner", (sym - W).norm("right") / W.norm("right"), 2e-2))
    return out


# ---------------------------------------------------------------- 6. coordinate commutator


def suite_commutator(ctx: Context) -> list[Check]:
    worst = 0.0
    for mu, sigma, freq in [(0.0, 1.0, 0.0), (0.5, 0.7, 0.0), (-1.0, 1.2, 0.0), (0.0, 0.8, 2.0), (1.0, 0.5, -1.0)]:
        psi = log_gaussian(ctx.lg, mu, sigma, freq)
        aa = coordinate_quantize("a", psi)
        diff = coordinate_commutator(psi) - aa * (1.0 / (2j * math.pi))
        worst = max(worst, diff.norm() / aa.norm())
    return [_err("commutator", "[A_x,A_a]=(1/2pi i)A_a", worst, 1e-6, "5 log-Gaussians")]


# ---------------------------------------------------------------- 7. compatibility


def suite_compatibility(ctx: Context) -> list[Check]:
    lg, ag, w = ctx.lg, ctx.ag, ctx.workers
    f = _bump(ag, 0.3, 0.2, 0.5, 0.4)
    g = _bump(ag, -0.2, -0.1, 0.6, 0.5)
    psi, eta = log_gaussian(lg, 0.0, 0.8), laguerre(lg, 0, 2.0)
    S, T = rank_one(psi, psi), rank_one(eta, eta)
    lhs1 = op_op_conv(fun_op_conv(f, S, workers=w), T, ag, w)
    rhs1 = fun_conv(f, op_op_conv(S, T, ag, w), w)
    lhs2 = fun_op_conv(f, fun_op_conv(g, S, workers=w), workers=w)
    rhs2 = fun_op_conv(fun_conv(f, g, w), S, workers=w)
    return [
        _err("compatibility", "(f*S)*T=f*(S*T)", _rel_sup(lhs1.values, rhs1.values), 3e-2),
        _err("compatibility", "f*(g*S)=(f*g)*S", _rel_sup(lhs2.kernel, rhs2.kernel), 3e-2),
    ]


# ---------------------------------------------------------------- 8. admissibility integral relation


def suite_admissibility(ctx: Context) -> list[Check]:
    lg, ag, w = ctx.lg, ctx.ag, ctx.workers
    L01 = laguerre(lg, 0, 1.0)
    mix = _mixture(lg, (0.5, 0.3, 0.2), 2.0)
    out = []
    pairs = [
        ("LG(0,1.5) / L_0^(1)", log_gaussian(lg, 0.0, 1.5), rank_one(L01, L01)),
        ("L_1^(1) / L_0^(2)", laguerre(lg, 1, 1.0), rank_one(laguerre(lg, 0, 2.0), laguerre(lg, 0, 2.0))),
        ("LG(0.5,0.4) / mixture", log_gaussian(lg, 0.5, 0.4), mix),
    ]
    for label, psi, S in pairs:
        lhs, rhs = integral_identity_check(rank_one(psi, psi), S, ag, "right", w)
        out.append(_err("admissibility", f"right[{label}]", _rel(lhs, rhs), 2e-2))
    T = rank_one(log_gaussian(lg, 0.5, 0.4), log_gaussian(lg, 0.5, 0.4))
    lhs, rhs = integral_identity_check(T, mix, ag, "left", w)
    out.append(_err("admissibility", "left[LG(0.5,0.4) / mixture]", _rel(lhs, rhs), 2e-2))
    out.append(_err("admissibility", "mixture_trace=(1/alpha)sum s_n", abs(dsd_trace(mix) - 0.5), 1e-3))
    rep = admissibility_check(mix)
    out.append(_err("admissibility", "mixture_verdict", 0.0 if rep.is_admissible else 1.0, 0.5, "1 = inadmissible"))
    return out


# ---------------------------------------------------------------- 9. trace of quantization


def suite_symbol_trace(ctx: Context) -> list[Check]:
    lg, ag, w = ctx.lg, ctx.ag, ctx.workers
    L01 = laguerre(lg, 0, 1.0)
    G = log_gaussian(lg, 0.0, 0.7)
    fixtures = [
        ("L_0^(1)", rank_one(L01, L01)),
        ("LG(0,0.7)", rank_one(G, G)),
        ("mixture", 0.5 * rank_one(laguerre(lg, 0, 2.0), laguerre(lg, 0, 2.0)) + 0.3 * rank_one(laguerre(lg, 1, 2.0), laguerre(lg, 1, 2.0))),
    ]
    worst_r = 0.0
    worst_l = 0.0
    for _, T in fixtures:
        f = dequantize(T, ag, workers=w)
        worst_r = max(worst_r, _rel(integrate(f, "right"), trace(T)))
        worst_l = max(worst_l, _rel(integrate(f, "left"), dsd_trace(T)))
    return [
        _err("symbol-trace", "int f_T dmu_r=tr(T)", worst_r, 2e-2, "3 fixtures"),
        _err("symbol-trace", "int f_S dmu_l=tr(D^-1 S D^-1)", worst_l, 3e-2, "3 fixtures"),
    ]


# ---------------------------------------------------------------- 10. scalogram chain


def suite_scalogram(ctx: Context) -> list[Check]:
    lg, ag, w = ctx.lg, ctx.ag, ctx.workers
    phi = laguerre(lg, 0, 1.0)  # window
    psi = log_gaussian(lg, 0.3, 0.8)  # signal spectrum
    fw = np.abs(fw_forward(rank_one(phi, duflo_apply(psi, -1)), ag, w).values) ** 2
    conv = op_op_conv(rank_one(phi, phi), rank_one(psi, psi), ag, w).values[::-1, :].real
    scal = scalogram(psi, phi, ag, w).values.real / ag.a[None, :]
    return [
        _err("scalogram", "|F_W|^2=(phi x phi)*(psi x psi)(-x,a)", _rel_sup(fw, conv), 2e-2),
        _err("scalogram", "(phi x phi)*(psi x psi)(-x,a)=SCAL/a", _rel_sup(conv, scal), 2e-2),
    ]


# ---------------------------------------------------------------- 11. Fourier diagram


def suite_fourier_diagram(ctx: Context) -> list[Check]:
    lg, ag, w = ctx.lg, ctx.ag, ctx.workers
    fixtures = [
        (laguerre(lg, 0, 1.0), dilate(laguerre(lg, 0, 2.0), 3.0)),
        (laguerre(lg, 0, 2.0), dilate(laguerre(lg, 0, 2.0), 4.0)),
        (laguerre(lg, 1, 2.0), dilate(laguerre(lg, 0, 2.0), 3.0)),
    ]
    out = []
    for k, (psi, phi) in enumerate(fixtures):
        A = rank_one(psi, phi)
        Q = quantize(fko(fw_forward(A, ag, w), workers=w), lg, w)
        out.append(_err("fourier-diagram", f"fixture_{k}", hs_norm(Q - A) / hs_norm(A), 5e-2))
    return out


# ---------------------------------------------------------------- 12. quantum Bochner


def suite_bochner(ctx: Context) -> list[Check]:
    lg = ctx.lg
    L0, L1 = laguerre(lg, 0, 1.0), laguerre(lg, 1, 1.0)
    rng = np.random.default_rng(20240611)
    worst = math.inf
    for A in (rank_one(L0, L0), _mixture(lg, (0.5, 0.3, 0.2), 2.0)):
        for _ in range(10):
            worst = min(worst, positive_type_test(A, random_points(rng, 8)).min_eigenvalue)
    out = [Check("bochner", "positive_min_eigenvalue", worst, -1e-6, bool(worst >= -1e-6), "20 random 8-point sets")]
    witness = rank_one(L1, L1) - 2.0 * rank_one(L0, L0)
    rng = np.random.default_rng(7)
    found = math.inf
    for _ in range(20):
        found = min(found, positive_type_test(witness, random_points(rng, 8)).min_eigenvalue)
        if found < -0.1:
            break
    out.append(_below("bochner", "indefinite_witness", found, -0.1))
    return out


# ---------------------------------------------------------------- 13. localization


def suite_localization(ctx: Context) -> list[Check]:
    lg, ag, w = ctx.lg, ctx.ag, ctx.workers
    phi = laguerre(lg, 0, 1.0)
    f = box_symbol(ag, (-0.5, 0.5), (math.exp(-0.5), math.exp(0.5)))
    loc = localization_operator(f, phi, workers=w)
    top = float(loc.eigenvalues[0])
    at_top = localization_functional(loc.eigenvectors[0].normalized(), f, phi, w)
    rng = np.random.default_rng(5)
    rand = max(localization_functional(_random_laguerre_combo(lg, rng), f, phi, w) for _ in range(20))
    return [
        _err("localization", "functional(top eigenvector)=top eigenvalue", abs(at_top - top) / top, 2e-2),
        _err("localization", "random vectors <= top eigenvalue", max(0.0, rand - top), 2e-2, "20 random unit vectors"),
    ]


# ---------------------------------------------------------------- 14. Cohen class


def suite_cohen(ctx: Context) -> list[Check]:
    lg, ag, w = ctx.lg, ctx.ag, ctx.workers
    psi, phi = log_gaussian(lg, 0.0, 1.5), log_gaussian(lg, 0.3, 1.0)
    mix = _mixture(lg, (0.5, 0.3, 0.2), 2.0)
    C = cohen_distribution(psi, phi, mix, ag, w)
    out = [
        _err("cohen", "sup_bound_excess", max(0.0, np.abs(C.value.values).max() - C.bound), 1e-8),
        _err("cohen", "int Q_S dmu_r=<psi,phi> tr(D^-1 S D^-1)", _rel(integrate(C.value, "right"), inner_product(psi, phi) * dsd_trace(mix)), 2e-2),
    ]
    # S = phi x phi gives |<psi, U(-x,a)* phi>|^2, the squared wavelet coefficient
    window = laguerre(lg, 0, 1.0)
    Q1 = cohen_distribution(psi, psi, rank_one(window, window), ag, w).value.values
    V2 = np.abs(wavelet_coeff(psi, window, ag, w).values) ** 2
    out.append(_err("cohen", "S=phi x phi gives squared wavelet coefficient", _rel_sup(Q1, V2), 1e-6))
    # covariance: Q_S(U(-y,b) psi, U(-y,b) phi)(x, a) = Q_S(psi, phi)(x + a y, a b)
    y, b = 0.25, math.exp(2 * ag.ds)
    g = GroupElement(-y, b)
    moved = cohen_distribution(apply_U(g, psi), apply_U(g, phi), mix, ag, w).value.values
    worst = 0.0
    scale = np.abs(C.value.values).max()
    for j, i in [(ag.n_x // 2, ag.n_s // 2), (ag.n_x // 2 + 5, ag.n_s // 2 - 7), (ag.n_x // 2 - 9, ag.n_s // 2 + 3)]:
        x, a = ag.x[j], ag.a[i]
        ref = op_op_conv_at(rank_one(psi, phi), mix, x + a * y, a * b)
        worst = max(worst, abs(moved[j, i] - ref) / scale)
    out.append(_err("cohen", "covariance", worst, 1e-3, "3 nodes, shift (-0.25, e^(2 ds))"))
    coarse = AffGrid(4.0, 64, -3.0, 3.0, 48)
    rng = np.random.default_rng(11)
    pos = 0.6 * rank_one(laguerre(lg, 0, 1.0), laguerre(lg, 0, 1.0)) + 0.4 * rank_one(laguerre(lg, 1, 1.0), laguerre(lg, 1, 1.0))
    neg = rank_one(laguerre(lg, 0, 1.0), laguerre(lg, 0, 1.0)) - 0.5 * rank_one(laguerre(lg, 1, 1.0), laguerre(lg, 1, 1.0))
    min_pos = min(cohen_distribution(p, p, pos, coarse, w).value.values.real.min() for p in (_random_laguerre_combo(lg, rng) for _ in range(10)))
    min_neg = min(cohen_distribution(p, p, neg, coarse, w).value.values.real.min() for p in (_random_laguerre_combo(lg, rng) for _ in range(10)))
    out.append(Check("cohen", "positive S gives Q_S(psi,psi)>=0", min_pos, -1e-8, bool(min_pos >= -1e-8), "10 random psi"))
    out.append(_below("cohen", "indefinite S gives a negative value", min_neg, -1e-8, "10 random psi"))
    return out


SUITES: dict[str, Callable[[Context], list[Check]]] = {
    "special": suite_special,
    "laguerre": suite_laguerre,
    "parity": suite_parity,
    "wigner": suite_wigner,
    "quantization": suite_quantization,
    "commutator": suite_commutator,
    "compatibility": suite_compatibility,
    "admissibility": suite_admissibility,
    "symbol-trace": suite_symbol_trace,
    "scalogram": suite_scalogram,
    "fourier-diagram": suite_fourier_diagram,
    "bochner": suite_bochner,
    "localization": suite_localization,
    "cohen": suite_cohen,
}


def resolve_suites(names: list[str]) -> list[str]:
    """Expand ``all`` and reject unknown names (``KeyError`` with the offending name)."""
    out: list[str] = []
    for name in names:
        chosen = list(SUITES) if name == "all" else [name]
        for s in chosen:
            if s not in SUITES:
                raise KeyError(s)
            if s not in out:
                out.append(s)
    return out


def run_suites(names: list[str], ctx: Context, log: Callable[[str], None] | None = None) -> list[Check]:
    """Run the named suites in order; an exception inside a suite becomes a failed check."""
    checks: list[Check] = []
    for name in resolve_suites(names):
        t0 = time.perf_counter()
        try:
            got = SUITES[name](ctx)
        except Exception as exc:  # a crash is a failed verification, reported like any other
            got = [Check(name, "error", math.nan, math.nan, False, f"{type(exc).__name__}: {exc}")]
        checks.extend(got)
        if log is not None:
            status = "ok" if all(c.passed for c in got) else "FAILED"
            log(f"{name}: {status} ({time.perf_counter() - t0:.1f} s)")
    return checks


def format_report(checks: list[Check]) -> str:
    """The report file body: one line per check and a closing summary line."""
    lines = [c.line() for c in checks]
    n_fail = sum(not c.passed for c in checks)
    lines.append(f"summary: {len(checks) - n_fail} passed, {n_fail} failed")
    return "\n".join(lines) + "\n"
