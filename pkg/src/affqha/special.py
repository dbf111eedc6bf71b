"""Scalar special functions on the affine group.

``lambda_eval`` is u e^u / (e^u - 1), the map that turns exponential
coordinates into the midpoint parametrization used by the Wigner
distribution. Its inverse runs through the Lambert W function and the
branch-swapping involution ``sigma_eval``. The module also evaluates the
normalized Laguerre functions that serve as admissible windows.
"""

from __future__ import annotations

import enum
import math

import numpy as np

_INV_E = math.exp(-1.0)

# Lanczos approximation, g = 7, nine terms.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


class WBranch(enum.Enum):
    PRINCIPAL = "principal"  # W_0, values >= -1
    LOWER = "lower"  # W_{-1}, values <= -1


def lambda_eval(u):
    """lambda(u) = u e^u / (e^u - 1), with lambda(0) = 1."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1e-4
    safe = np.where(small, 1.0, u)
    # u / (1 - e^{-u}) avoids overflow for large positive u
    big = safe / -np.expm1(-safe)
    series = 1.0 + u / 2.0 + u**2 / 12.0 - u**4 / 720.0
    out = np.where(small, series, big)
    return float(out) if out.ndim == 0 else out


def log_lambda(u):
    """log lambda(u), accurate where lambda underflows or overflows."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1e-4
    safe = np.where(small, 1.0, u)
    # u > 0: log(u / (1 - e^{-u})); u < 0: log|u| + u - log(1 - e^u), no overflow either way
    pos = np.log(np.abs(safe)) - np.log(-np.expm1(-np.abs(safe)))
    big = np.where(safe > 0, pos, pos + safe)
    series = u / 2.0 - u**2 / 24.0 + u**4 / 2880.0
    out = np.where(small, series, big)
    return float(out) if out.ndim == 0 else out


def _halley(w: np.ndarray, y: np.ndarray, iters: int = 40) -> np.ndarray:
    for _ in range(iters):
        ew = np.exp(w)
        f = w * ew - y
        wp1 = w + 1.0
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * np.where(wp1 == 0, 1e-300, wp1))
        step = np.where(denom == 0, 0.0, f / np.where(denom == 0, 1.0, denom))
        w_new = w - step
        done = np.abs(step) <= 1e-16 * np.maximum(1.0, np.abs(w_new))
        w = w_new
        if np.all(done):
            break
    return w


def lambert_w(branch: WBranch, y):
    """Real Lambert W: the solution w of w e^w = y on the requested branch."""
    y = np.asarray(y, dtype=float)
    if np.any(~np.isfinite(y)) or np.any(y < -_INV_E - 1e-15):
        raise ValueError("Lambert W needs y >= -1/e")
    if branch is WBranch.LOWER and np.any(y >= 0):
        raise ValueError("the lower branch needs -1/e <= y < 0")
    y = np.maximum(y, -_INV_E)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        w0 = _initial_guess(branch, y)
    w = _halley(w0, y)
    if branch is WBranch.PRINCIPAL:
        w = np.maximum(np.where(y == 0, 0.0, w), -1.0)
    else:
        w = np.minimum(w, -1.0)
    return float(w) if w.ndim == 0 else w


def _initial_guess(branch: WBranch, y: np.ndarray) -> np.ndarray:
    # expansion about the branch point -1/e, shared by both branches
    p = np.sqrt(np.maximum(2.0 * (math.e * y + 1.0), 0.0))
    if branch is WBranch.PRINCIPAL:
        near = -1.0 + p - p**2 / 3.0 + 11.0 / 72.0 * p**3
        mid = np.log1p(np.maximum(y, -0.3))
        ly = np.log(np.maximum(y, 3.0))
        far = ly - np.log(ly)
        return np.where(y < -0.25, near, np.where(y < 3.0, mid, far))
    else:
        near = -1.0 - p - p**2 / 3.0 - 11.0 / 72.0 * p**3
        l1 = np.log(-np.minimum(y, -1e-300))
        far = l1 - np.log(-l1)
        return np.where(y < -0.25, near, far)


def sigma_eval(x):
    """The involution of (-inf, 0) swapping the two solutions of w e^w = x e^x."""
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x >= 0):
        raise ValueError("sigma is defined for x < 0")
    y = x * np.exp(x)
    out = np.empty_like(x)
    below = x < -1.0
    above = x > -1.0
    if np.any(below):
        out[below] = lambert_w(WBranch.PRINCIPAL, y[below])
    if np.any(above):
        out[above] = lambert_w(WBranch.LOWER, y[above])
    out[x == -1.0] = -1.0
    return float(out) if out.ndim == 0 else out


def lambda_inverse(r):
    """Inverse of ``lambda_eval`` on (0, inf): sigma(-r) + r."""
    r = np.asarray(r, dtype=float)
    if np.any(~np.isfinite(r)) or np.any(r <= 0):
        raise ValueError("lambda inverse needs r > 0")
    u = sigma_eval(-r) + r
    # one Newton step on lambda(u) = r repairs the loss of precision of W
    # near its branch point, where sigma(-r) and r nearly cancel
    lam = lambda_eval(u)
    dlog = 1.0 / parity_weight(u)  # d log(lambda) / du
    u = u - (lam - r) / (lam * dlog)
    return float(u) if np.ndim(u) == 0 else u


def lambda_inverse_log(r):
    """The same inverse through log(-r / sigma(-r)); used as a cross-check."""
    r = np.asarray(r, dtype=float)
    out = np.log(r) - np.log(-sigma_eval(-r))
    return float(out) if out.ndim == 0 else out


def parity_weight(u):
    """u (e^u - 1) / (e^u - 1 - u), the Jacobian factor of the point reflection.

    Equals lambda(u) / lambda'(u) and tends to 2 as u -> 0.
    """
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1e-3
    safe = np.where(small, 1.0, u)
    # for u > 0 divide through by e^u so nothing overflows
    pos = np.maximum(safe, 0.0)
    ma = -np.expm1(-pos)
    big_pos = pos * ma / np.where(pos > 0, ma - pos * np.exp(-pos), 1.0)
    neg = np.minimum(safe, 0.0)
    em1 = np.expm1(neg)
    big_neg = neg * em1 / np.where(neg < 0, em1 - neg, 1.0)
    big = np.where(safe > 0, big_pos, big_neg)
    # series of u (e^u - 1) / (e^u - 1 - u)
    series = 2.0 + u / 3.0 + u**2 / 18.0 + u**3 / 270.0 - u**4 / 3240.0
    out = np.where(small, series, big)
    return float(out) if out.ndim == 0 else out


def log_gamma(x):
    """log Gamma(x) for x > 0 by the Lanczos approximation."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("log_gamma is implemented for x > 0")
    small = x < 0.5
    # reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x)
    z = np.where(small, 1.0 - x, x) - 1.0
    acc = np.full_like(z, _LANCZOS_COEF[0])
    for k, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc = acc + c / (z + k)
    tt = z + _LANCZOS_G + 0.5
    lg = 0.5 * math.log(2.0 * math.pi) + (z + 0.5) * np.log(tt) - tt + np.log(acc)
    out = np.where(small, np.log(math.pi / np.abs(np.sin(math.pi * x))) - lg, lg)
    return float(out) if out.ndim == 0 else out


def laguerre_poly(n: int, alpha: float, r):
    """Generalized Laguerre polynomial L_n^(alpha)(r) by the three-term recurrence."""
    if n < 0:
        raise ValueError("Laguerre degree must be non-negative")
    r = np.asarray(r, dtype=float)
    prev = np.ones_like(r)
    if n == 0:
        return prev
    cur = 1.0 + alpha - r
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - r) * cur - (k + alpha) * prev) / (k + 1)
    return cur


def laguerre_fn(n: int, alpha: float, r):
    """Laguerre function sqrt(n!/Gamma(n+alpha+1)) r^((alpha+1)/2) e^(-r/2) L_n^(alpha)(r).

    The family n = 0, 1, ... is orthonormal in L2(R+, dr/r) for each alpha > 0.
    """
    if n < 0:
        raise ValueError("Laguerre degree must be non-negative")
    if not alpha > 0:
        raise ValueError("Laguerre functions need alpha > 0")
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("Laguerre functions are evaluated at r > 0")
    log_norm = 0.5 * (log_gamma(n + 1.0) - log_gamma(n + alpha + 1.0))
    envelope = np.exp(log_norm + 0.5 * (alpha + 1.0) * np.log(r) - 0.5 * r)
    out = envelope * laguerre_poly(n, alpha, r)
    return float(out) if out.ndim == 0 else out
