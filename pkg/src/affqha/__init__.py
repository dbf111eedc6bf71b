"""Quantum harmonic analysis on the affine group, on discretized L2(R+, dr/r)."""

from .grid import AffFunction, AffGrid, LogGrid, Signal, inner_product, integrate, interpolate, make_grids
from .hilbert import GroupElement, OperatorRep, rank_one

__version__ = "0.1.0"

__all__ = [
    "AffFunction",
    "AffGrid",
    "GroupElement",
    "LogGrid",
    "OperatorRep",
    "Signal",
    "inner_product",
    "integrate",
    "interpolate",
    "make_grids",
    "rank_one",
]
