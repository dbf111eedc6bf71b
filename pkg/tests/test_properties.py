"""Property-based checks of the structural invariants."""

import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from affqha import AffFunction, AffGrid, LogGrid, Signal, integrate, interpolate, rank_one
from affqha.hilbert import GroupElement, apply_U, apply_U_adjoint, compose, hs_inner, trace
from affqha.io import read_aff_function, read_signal, write_aff_function, write_signal
from affqha.special import (
    WBranch,
    lambda_eval,
    lambda_inverse,
    lambert_w,
    log_lambda,
    parity_weight,
    sigma_eval,
)

finite = st.floats(allow_nan=False, allow_infinity=False)
LG = LogGrid(-6.0, 6.0, 97)
AG = AffGrid(3.0, 17, -2.0, 2.0, 13)


def _complex_array(n):
    return arrays(np.complex128, n, elements=st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False))


group_elements = st.builds(
    GroupElement,
    st.floats(-5.0, 5.0),
    st.floats(-3.0, 3.0).map(math.exp),
)


# ---------------------------------------------------------------- scalar functions


@given(st.floats(-600.0, 600.0))
def test_lambda_difference_is_identity(u):
    # lambda(u) - lambda(-u) = u for every real u
    assert math.isclose(lambda_eval(u) - lambda_eval(-u), u, rel_tol=1e-12, abs_tol=1e-14)


@given(st.floats(-600.0, 600.0))
def test_log_lambda_matches_lambda(u):
    lam = lambda_eval(u)
    assume(lam > 1e-300)
    assert math.isclose(log_lambda(u), math.log(lam), rel_tol=1e-12, abs_tol=1e-13)


@given(st.floats(-700.0, 700.0))
def test_log_lambda_reflection(u):
    # lambda(-u) = lambda(u) e^{-u}
    assert math.isclose(log_lambda(-u), log_lambda(u) - u, rel_tol=1e-12, abs_tol=1e-12)


@given(st.floats(-50.0, 50.0))
def test_parity_weight_is_log_derivative_ratio(u):
    # parity_weight = lambda / lambda'; check against a central difference of log lambda
    h = 1e-5
    dlog = (log_lambda(u + h) - log_lambda(u - h)) / (2 * h)
    assert math.isclose(1.0 / parity_weight(u), dlog, rel_tol=1e-7, abs_tol=1e-9)


@given(st.floats(1e-6, 1e6))
def test_lambda_inverse_round_trip(r):
    assert math.isclose(lambda_eval(lambda_inverse(r)), r, rel_tol=1e-11)


@given(st.one_of(st.floats(-40.0, -1.05), st.floats(-0.95, -1e-6)))
def test_sigma_is_an_involution_that_swaps_sides(x):
    y = sigma_eval(x)
    assert (y - -1.0) * (x - -1.0) < 0
    assert math.isclose(sigma_eval(y), x, rel_tol=1e-11, abs_tol=1e-12)
    # both solve w e^w = x e^x
    assert math.isclose(y * math.exp(y), x * math.exp(x), rel_tol=1e-12, abs_tol=1e-300)


@given(st.floats(-1.0 / math.e, 1e8))
def test_lambert_principal_residual(y):
    w = lambert_w(WBranch.PRINCIPAL, y)
    assert w >= -1.0
    assert abs(w * math.exp(w) - y) <= 1e-13 * max(1.0, abs(y))


@given(st.floats(-1.0 / math.e, -1e-300))
def test_lambert_lower_residual(y):
    w = lambert_w(WBranch.LOWER, y)
    assert w <= -1.0
    assert abs(w * math.exp(w) - y) <= 1e-13 * max(1e-300, abs(y)) + 1e-300


# ---------------------------------------------------------------- group and representation


@given(group_elements, group_elements, group_elements)
def test_group_law_is_associative(g, h, k):
    lhs, rhs = (g * h) * k, g * (h * k)
    assert math.isclose(lhs.x, rhs.x, rel_tol=1e-12, abs_tol=1e-12)
    assert math.isclose(lhs.a, rhs.a, rel_tol=1e-12)


@given(group_elements)
def test_group_inverse(g):
    e = g * g.inverse()
    assert abs(e.x) < 1e-12 and math.isclose(e.a, 1.0, rel_tol=1e-14)


@given(group_elements, _complex_array(LG.n))
@settings(max_examples=30)
def test_U_adjoint_undoes_U_at_grid_scales(g, v):
    # exact when a is a whole number k of grid steps, on the nodes that stay on the grid
    k = round(math.log(g.a) / LG.dt)
    g = GroupElement(g.x, math.exp(k * LG.dt))
    back = apply_U_adjoint(g, apply_U(g, Signal(LG, v))).values
    keep = slice(abs(k), LG.n - abs(k))
    assert np.allclose(back[keep], v[keep], rtol=1e-10, atol=1e-10 * max(1.0, np.abs(v).max()))


# ---------------------------------------------------------------- grid algebra


@given(_complex_array(LG.n), _complex_array(LG.n), finite.filter(lambda c: abs(c) < 1e3), st.floats(-5.5, 5.5).map(math.exp))
def test_interpolation_is_linear(u, v, c, r):
    f, g = Signal(LG, u), Signal(LG, v)
    lhs = interpolate(Signal(LG, u + c * v), r)
    rhs = interpolate(f, r) + c * interpolate(g, r)
    scale = max(1.0, np.abs(u).max() + abs(c) * np.abs(v).max())
    assert abs(lhs - rhs) <= 1e-9 * scale


@given(_complex_array(AG.shape))
def test_left_measure_is_right_measure_over_a(v):
    f = AffFunction(AG, v)
    left = integrate(f, "left")
    right = integrate(AffFunction(AG, v / AG.a[None, :]), "right")
    assert abs(left - right) <= 1e-12 * max(1.0, np.abs(v).sum())


@given(_complex_array(LG.n), _complex_array(LG.n))
@settings(max_examples=25)
def test_rank_one_trace_and_hs_pairing(u, v):
    psi, phi = Signal(LG, u), Signal(LG, v)
    A = rank_one(psi, phi)
    ip = complex(np.sum(u * np.conj(v)) * LG.dt)
    assert abs(trace(A) - ip) <= 1e-9 * max(1.0, abs(ip), float(np.linalg.norm(u) * np.linalg.norm(v) * LG.dt))
    # <A, A>_HS = ||psi||^2 ||phi||^2
    assert math.isclose(hs_inner(A, A).real, psi.norm() ** 2 * phi.norm() ** 2, rel_tol=1e-9, abs_tol=1e-300)
    # A A = <phi, psi> A
    B = compose(A, A)
    ref = complex(np.sum(v.conj() * u) * LG.dt)
    assert np.allclose(B.kernel, ref * A.kernel, rtol=1e-8, atol=1e-8 * max(1e-300, np.abs(B.kernel).max()))


# ---------------------------------------------------------------- file formats


@given(_complex_array(LG.n))
@settings(max_examples=25, deadline=None)
def test_signal_file_round_trip(tmp_path_factory, v):
    path = tmp_path_factory.mktemp("sig") / "s.csv"
    write_signal(path, Signal(LG, v))
    assert np.array_equal(read_signal(path, LG).values, v)


@given(_complex_array(AG.shape))
@settings(max_examples=25, deadline=None)
def test_aff_function_file_round_trip(tmp_path_factory, v):
    path = tmp_path_factory.mktemp("aff") / "f.csv"
    write_aff_function(path, AffFunction(AG, v))
    assert np.array_equal(read_aff_function(path, AG).values, v)
