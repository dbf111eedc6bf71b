"""Convolutions on the group, admissibility, localization, covariant quantization, Cohen class."""

from __future__ import annotations

import numpy as np
import pytest

from affqha import AffFunction, AffGrid, GroupElement, Signal, inner_product, integrate, rank_one
from affqha.convolve import (
    admissibility_check,
    affine_class_eval,
    affine_class_kernel,
    box_symbol,
    cohen_distribution,
    covariant_quantize,
    dsd,
    dsd_trace,
    fun_conv,
    fun_op_conv,
    integral_identity_check,
    involution,
    localization_functional,
    localization_operator,
    op_op_conv,
    op_op_conv_at,
    right_translate,
    windowed_constant,
)
from affqha.hilbert import (
    apply_U_adjoint,
    conjugate_by_U,
    duflo_apply,
    duflo_norm_sq,
    duflo_sandwich,
    hs_norm,
    op_norm,
    spectrum,
    trace,
    trace_norm,
)
from affqha.signals import laguerre, log_gaussian
from affqha.weyl import dequantize, quantize
from affqha.wigner import wavelet_coeff


def _bump(ag: AffGrid, x0: float, s0: float, wx: float, ws: float) -> AffFunction:
    x, s = np.meshgrid(ag.x, ag.s, indexing="ij")
    return AffFunction(ag, np.exp(-((x - x0) ** 2) / (2 * wx**2) - (s - s0) ** 2 / (2 * ws**2)))


def _rel_sup(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.abs(a - b).max() / np.abs(b).max())


@pytest.fixture(scope="module")
def coarse_ag():
    """x-window and scale range wide enough for products of unit bumps, at a quarter of the cost."""
    return AffGrid(8.0, 128, -4.0, 4.0, 96)


# ---------------------------------------------------------------- fun_conv


def test_fun_conv_of_zero(coarse_ag):
    zero = AffFunction(coarse_ag, np.zeros(coarse_ag.shape))
    out = fun_conv(zero, _bump(coarse_ag, 0, 0, 0.5, 0.5))
    assert np.all(out.values == 0)


def test_fun_conv_l1_bound(coarse_ag):
    rng = np.random.default_rng(8)
    for _ in range(3):
        c = rng.uniform(-0.5, 0.5, size=4)
        f = _bump(coarse_ag, c[0], c[1], 0.5, 0.5) - 0.5 * _bump(coarse_ag, c[2], c[3], 0.4, 0.6)
        g = _bump(coarse_ag, c[3], c[0], 0.6, 0.4)
        lhs = fun_conv(f, g).norm("right", p=1)
        assert lhs <= f.norm("right", p=1) * g.norm("right", p=1) + 1e-8


def test_fun_conv_right_translation_equivariance(coarse_ag):
    g0 = coarse_ag
    f, g = _bump(g0, 0.2, 0.1, 0.5, 0.5), _bump(g0, -0.1, -0.2, 0.6, 0.4)
    x, a = 3 * g0.dx, float(np.exp(2 * g0.ds))
    lhs = right_translate(fun_conv(f, g), x, a)
    rhs = fun_conv(right_translate(f, x, a), g)
    assert _rel_sup(lhs.values, rhs.values) <= 3e-2


def test_involution_is_an_involution(coarse_ag):
    f = _bump(coarse_ag, 0.3, 0.2, 0.6, 0.5)
    back = involution(involution(f))
    # two bicubic passes at dx = 0.126
    assert _rel_sup(back.values, f.values) <= 5e-3


# ---------------------------------------------------------------- fun_op_conv


def test_fun_op_conv_of_zero(lg, ag, L01):
    out = fun_op_conv(AffFunction(ag, np.zeros(ag.shape)), rank_one(L01, L01))
    assert np.all(out.kernel == 0)


def test_fun_op_conv_stride_validation(lg, ag, L01):
    with pytest.raises(ValueError):
        fun_op_conv(_bump(ag, 0, 0, 1, 1), rank_one(L01, L01), stride=0)


def test_fun_op_conv_positivity(lg, coarse_ag, gauss):
    f = _bump(coarse_ag, 0.2, -0.3, 0.5, 0.7)
    A = fun_op_conv(f, rank_one(gauss, gauss), stride=2)
    vals, _ = spectrum(A)
    assert vals[-1] >= -1e-8


def test_fun_op_conv_symbol_law(lg, ag):
    f, g = _bump(ag, 0.2, 0.1, 0.5, 0.45), _bump(ag, -0.2, -0.1, 0.55, 0.5)
    lhs = dequantize(fun_op_conv(g, quantize(f, lg)), ag)
    rhs = fun_conv(g, f)
    assert _rel_sup(lhs.values, rhs.values) <= 3e-2


# ---------------------------------------------------------------- op_op_conv


@pytest.mark.parametrize("method", ["dense", "low-rank", "auto"])
def test_op_op_conv_rank_one_lemma(lg, ag, L01, L11, gauss, method):
    psi, phi, eta, xi = gauss, L01, L11, log_gaussian(lg, -0.4, 0.7)
    S, T = rank_one(psi, phi), rank_one(eta, xi)
    for x, a in [(0.25, 1.4), (-0.6, 0.8), (1.1, 2.3)]:
        h = GroupElement(-x, a)
        expected = inner_product(psi, apply_U_adjoint(h, xi)) * np.conj(inner_product(phi, apply_U_adjoint(h, eta)))
        got = op_op_conv_at(S, T, x, a, method=method)
        assert abs(got - expected) <= 1e-4


def test_op_op_conv_methods_agree_on_grid(lg, small_grids):
    slg, sag = small_grids
    L = [laguerre(slg, n, 1.0) for n in range(2)]
    S = rank_one(L[0], L[1]) + 0.3 * rank_one(L[1], L[1])
    T = rank_one(log_gaussian(slg, 0.1, 0.8), L[0])
    dense = op_op_conv(S, T, sag, method="dense").values
    low = op_op_conv(S, T, sag, method="low-rank").values
    assert np.abs(dense - low).max() <= 1e-12 * np.abs(dense).max()
    with pytest.raises(ValueError):
        op_op_conv(S, T, sag, method="fast")


def test_op_op_conv_inversion_symmetry(lg, ag, L01, L11, gauss):
    S = rank_one(gauss, L01) + 0.4 * rank_one(L11, L11)
    T = rank_one(L01, L01) + 0.2 * rank_one(gauss, L11)
    for i, j in [(140, 100), (110, 90), (128, 120)]:
        g = GroupElement(ag.x[i], ag.a[j])
        gi = g.inverse()
        assert abs(op_op_conv_at(S, T, g.x, g.a) - op_op_conv_at(T, S, gi.x, gi.a)) <= 1e-4


def test_op_op_conv_weyl_symbol_law(lg, ag):
    f, g = _bump(ag, 0.3, 0.2, 0.5, 0.4), _bump(ag, -0.2, -0.1, 0.6, 0.5)
    lhs = op_op_conv(quantize(f, lg), quantize(g, lg), ag)
    rhs = fun_conv(f, involution(g))
    assert _rel_sup(lhs.values, rhs.values) <= 3e-2


def test_op_op_conv_sup_bound(lg, small_grids):
    slg, sag = small_grids
    S = rank_one(laguerre(slg, 0, 1.0), log_gaussian(slg, 0.2, 0.7))
    T = rank_one(laguerre(slg, 1, 1.0), laguerre(slg, 1, 1.0)) - 0.5 * rank_one(laguerre(slg, 0, 2.0), laguerre(slg, 0, 2.0))
    conv = op_op_conv(S, T, sag)
    assert conv.norm(p=np.inf) <= trace_norm(S) * op_norm(T) + 1e-8


# ---------------------------------------------------------------- admissibility


def test_admissible_rank_one(lg, L01):
    rep = admissibility_check(rank_one(L01, L01))
    assert rep.is_admissible
    assert abs(rep.dsd_trace - 1.0) <= 1e-4
    assert rep.dsd_trace_norm >= abs(rep.dsd_trace) - 1e-12
    assert 0.0 <= rep.tail_ratio <= 1.0


def test_laguerre_mixture_trace(lg):
    L = [laguerre(lg, n, 2.0) for n in range(3)]
    S = 0.5 * rank_one(L[0], L[0]) + 0.3 * rank_one(L[1], L[1]) + 0.2 * rank_one(L[2], L[2])
    rep = admissibility_check(S)
    assert rep.is_admissible and abs(rep.dsd_trace - 0.5) <= 1e-3


def test_spectral_characterization(lg):
    xs = [laguerre(lg, 0, 1.5), log_gaussian(lg, 0.4, 0.6), laguerre(lg, 2, 1.0)]
    s = [0.6, 0.25, 0.15]
    S = sum((c * rank_one(v, v) for c, v in zip(s[1:], xs[1:])), s[0] * rank_one(xs[0], xs[0]))
    expected = sum(c * duflo_norm_sq(v) for c, v in zip(s, xs))
    assert abs(dsd_trace(S) - expected) <= 1e-3


def test_inadmissible_rank_one(lg):
    # |psi|^2 / r = r^(-1/2) below r = 1, so ||D^-1 psi|| diverges at the small-r end
    t = lg.t
    psi = Signal(lg, np.exp(t / 4) * np.exp(-np.maximum(t, 0.0) ** 2 / 2)).normalized()
    rep = admissibility_check(rank_one(psi, psi))
    assert not rep.is_admissible
    assert "is_admissible=false" in rep.to_record()


def test_integral_identity_right_left_and_scaling(lg, ag, L01):
    psi = log_gaussian(lg, 0.0, 1.5)
    T, S = rank_one(psi, psi), rank_one(L01, L01)
    lhs, rhs = integral_identity_check(T, S, ag)
    assert abs(lhs - rhs) <= 2e-2 * abs(rhs)
    lhs_l, rhs_l = integral_identity_check(T, S, ag, measure="left")
    assert abs(lhs_l - rhs_l) <= 2e-2 * abs(rhs_l)
    lhs3, rhs3 = integral_identity_check(T, 3.0 * S, ag)
    assert lhs3 == pytest.approx(3.0 * lhs, rel=1e-12) and rhs3 == pytest.approx(3.0 * rhs, rel=1e-12)


def test_admissible_l1_bound(lg, ag, L01, gauss):
    T, S = rank_one(gauss, gauss), rank_one(L01, L01)
    conv = op_op_conv(T, S, ag)
    assert conv.norm("right", p=1) <= trace_norm(dsd(S)) * trace_norm(T) + 1e-8


# ---------------------------------------------------------------- localization


@pytest.fixture(scope="module")
def localization(ag, L01):
    f = box_symbol(ag, (-0.5, 0.5), (np.exp(-0.5), np.exp(0.5)))
    return f, localization_operator(f, L01)


def test_localization_top_eigenvector_maximizes(lg, L01, localization):
    f, loc = localization
    top = loc.eigenvalues[0]
    assert abs(localization_functional(loc.eigenvectors[0], f, L01) - top) <= 2e-2 * top
    rng = np.random.default_rng(5)
    for _ in range(20):
        v = Signal(lg, rng.normal(size=lg.n) * np.exp(-lg.t**2 / 8)).normalized()
        assert localization_functional(v, f, L01) <= top + 2e-2


def test_localization_is_positive_and_trace_bounded(L01, localization):
    f, loc = localization
    assert loc.eigenvalues[-1] >= -1e-8
    assert trace_norm(loc.operator) <= f.norm("right", p=1) * L01.norm() ** 2 + 1e-8
    assert loc.asymmetry < 1e-6


# ---------------------------------------------------------------- covariant quantization


@pytest.fixture(scope="module")
def window(lg):
    # narrow enough that its conjugates stay inside the flat part of the windowed constant
    return log_gaussian(lg, 0.0, 0.5)


def test_covariant_constant_symbol_is_identity(lg, ag, window):
    G = covariant_quantize(windowed_constant(ag), rank_one(window, window))
    for mu in (-0.5, 0.0, 0.6):
        xi = log_gaussian(lg, mu, 0.8)
        assert (G.apply(xi) - xi).norm() <= 3e-2 * xi.norm()


@pytest.fixture(scope="module")
def covariant_pair(lg, ag, window):
    T = rank_one(window, window)
    f = _bump(ag, 0.2, 0.1, 0.6, 0.5)
    return f, T, covariant_quantize(f, T)


def test_covariant_covariance(ag, covariant_pair):
    f, T, G = covariant_pair
    g = GroupElement(4 * ag.dx, float(np.exp(3 * ag.ds)))
    gi = g.inverse()
    lhs = conjugate_by_U(G, g)
    rhs = covariant_quantize(right_translate(f, gi.x, gi.a), T)
    assert hs_norm(lhs - rhs) <= 3e-2 * hs_norm(rhs)


def test_windowed_constant_shape(ag):
    w = windowed_constant(ag)
    assert w.values[128, 96] == 1.0 and np.all(w.values.real >= 0) and np.all(w.values.real <= 1)
    assert abs(w.values[0, 96]) < 1e-3
    with pytest.raises(ValueError):
        windowed_constant(ag, x_flat=9.0)


def test_covariant_positivity(covariant_pair):
    _, _, G = covariant_pair
    assert spectrum(G)[0][-1] >= -1e-8


def test_admissibility_propagates_through_convolution(covariant_pair):
    # D T D is admissible with D^-1 (D T D) D^-1 = T
    f, T, G = covariant_pair
    expected = integrate(f, "left") * trace(T)
    assert abs(dsd_trace(G) - expected) <= 3e-2 * abs(expected)


def test_convolution_norm_bounds(covariant_pair):
    f, T, G = covariant_pair
    S = duflo_sandwich(T, 1)
    assert trace_norm(G) <= f.norm("right", p=1) * trace_norm(S) + 1e-8
    hs_bound = np.sqrt(trace_norm(S) * trace_norm(dsd(S))) * f.norm("right", p=2)
    assert hs_norm(G) <= hs_bound + 1e-8


# ---------------------------------------------------------------- Cohen class


def test_cohen_with_rank_one_window_is_squared_coefficient(lg, small_grids):
    slg, sag = small_grids
    psi, phi = log_gaussian(slg, 0.0, 1.0), laguerre(slg, 0, 1.0)
    C = cohen_distribution(psi, psi, rank_one(phi, phi), sag)
    V = wavelet_coeff(psi, phi, sag)
    assert np.abs(C.value.values - np.abs(V.values) ** 2).max() <= 1e-6
    assert C.within_bound()


def test_cohen_integral(lg, ag, L01):
    psi, phi = log_gaussian(lg, 0.0, 1.5), log_gaussian(lg, 0.3, 1.0)
    L = [laguerre(lg, n, 2.0) for n in range(3)]
    S = 0.5 * rank_one(L[0], L[0]) + 0.3 * rank_one(L[1], L[1]) + 0.2 * rank_one(L[2], L[2])
    C = cohen_distribution(psi, phi, S, ag)
    expected = inner_product(psi, phi) * dsd_trace(S)
    assert abs(integrate(C.value, "right") - expected) <= 2e-2 * abs(expected)
    assert C.within_bound()


def test_cohen_positivity_detects_indefinite_operator(small_grids):
    slg, sag = small_grids
    a, b = laguerre(slg, 0, 1.0), laguerre(slg, 1, 1.0)
    pos = rank_one(a, a) + 0.5 * rank_one(b, b)
    neg = rank_one(a, a) - 2.0 * rank_one(b, b)
    rng = np.random.default_rng(12)
    worst_pos, worst_neg = np.inf, np.inf
    for _ in range(10):
        psi = Signal(slg, (rng.normal(size=slg.n) + 1j * rng.normal(size=slg.n)) * np.exp(-slg.t**2 / 8)).normalized()
        worst_pos = min(worst_pos, cohen_distribution(psi, psi, pos, sag).value.values.real.min())
        worst_neg = min(worst_neg, cohen_distribution(psi, psi, neg, sag).value.values.real.min())
    assert worst_pos >= -1e-8
    assert worst_neg < -1e-8


# ---------------------------------------------------------------- affine class


def test_affine_class_kernel_of_rank_one_and_zero(lg, gauss, L11):
    Phi = affine_class_kernel(rank_one(gauss, L11))
    r = lg.r
    expected = gauss.values[None, :] * L11.values.conj()[:, None] / np.sqrt(np.outer(r, r))
    assert np.allclose(Phi, expected, rtol=1e-14, atol=0)
    assert np.all(affine_class_kernel(0.0 * rank_one(gauss, L11)) == 0)


def test_affine_class_identity(lg, ag, L01, L11):
    psi = log_gaussian(lg, -0.3, 0.8)
    S = 0.5 * rank_one(L01, L01) + 0.3 * rank_one(L11, laguerre(lg, 2, 1.0)) + 0.2 * rank_one(log_gaussian(lg, 0.2, 0.6), L11)
    Phi = affine_class_kernel(S)
    Dpsi = duflo_apply(psi, 1)
    rng = np.random.default_rng(4)
    for _ in range(5):
        i = int(rng.integers(129, 150))  # 0 < x < 1.5
        j = int(rng.integers(80, 112))  # 0.5 < a < 2
        x, a = float(ag.x[i]), float(ag.a[j])
        q = op_op_conv_at(rank_one(Dpsi, Dpsi), S, x, a)
        e = affine_class_eval(Phi, psi, -x / a, a)
        assert abs(q - e) <= 3e-2 * abs(q)
