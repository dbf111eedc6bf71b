"""Named test signals on a LogGrid."""

from __future__ import annotations

import numpy as np

from .grid import LogGrid, Signal
from .special import laguerre_fn


def laguerre(grid: LogGrid, n: int, alpha: float) -> Signal:
    """The normalized Laguerre function of degree ``n`` and order ``alpha``."""
    return Signal(grid, laguerre_fn(n, alpha, grid.r))


def log_gaussian(grid: LogGrid, mu: float = 0.0, sigma: float = 1.0, freq: float = 0.0) -> Signal:
    """exp(-(log r - mu)^2 / (2 sigma^2) + i freq log r), unit norm in L2(dr/r)."""
    t = grid.t
    amp = (np.pi * sigma**2) ** -0.25
    return Signal(grid, amp * np.exp(-((t - mu) ** 2) / (2 * sigma**2) + 1j * freq * t))


def log_gaussian_exact(r: np.ndarray, mu: float = 0.0, sigma: float = 1.0, freq: float = 0.0) -> np.ndarray:
    """Closed form of :func:`log_gaussian` at arbitrary r > 0."""
    t = np.log(r)
    amp = (np.pi * sigma**2) ** -0.25
    return amp * np.exp(-((t - mu) ** 2) / (2 * sigma**2) + 1j * freq * t)
