"""Plain-text file formats.

All numbers are written with 17 significant digits, which round-trips every
float64 exactly. Row orders:

* Signal: ``r,re,im``, one row per node.
* AffFunction: ``x,a,re,im``, x-major (all scales of x_0, then x_1, ...).
* Operator: ``r,s,re,im``, r-major; the values are kernel entries K(r, s).

Reports are ``key=value`` lines.
"""

from __future__ import annotations

import csv
from collections.abc import Mapping
from pathlib import Path

import numpy as np

from .grid import AffFunction, AffGrid, LogGrid, Signal
from .hilbert import OperatorRep

__all__ = [
    "ParseError",
    "fmt",
    "write_signal",
    "read_signal",
    "write_aff_function",
    "read_aff_function",
    "write_operator",
    "read_operator",
    "write_record",
    "read_record",
    "write_eigenvalues",
]

_GRID_RTOL = 1e-12


class ParseError(ValueError):
    """A data file could not be read or does not match the expected layout."""


def fmt(v: float) -> str:
    return f"{float(v):.17g}"


def _write_rows(path: Path | str, header: list[str], columns: list[np.ndarray]) -> None:
    lines = [",".join(header)]
    for row in zip(*(np.ravel(c) for c in columns)):
        lines.append(",".join(fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def _read_rows(path: Path | str, header: list[str]) -> np.ndarray:
    try:
        with open(path, newline="", encoding="ascii") as fh:
            rows = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if not rows or [h.strip() for h in rows[0]] != header:
        raise ParseError(f"{path}: expected header {','.join(header)}")
    body = [r for r in rows[1:] if r]
    try:
        data = np.array([[float(v) for v in r] for r in body], dtype=float)
    except ValueError as exc:
        raise ParseError(f"{path}: non-numeric entry ({exc})") from exc
    if data.ndim != 2 or data.shape[1] != len(header) or data.shape[0] == 0:
        raise ParseError(f"{path}: expected rows of {len(header)} numbers")
    if not np.all(np.isfinite(data)):
        raise ParseError(f"{path}: non-finite entry")
    return data


def _log_grid_from_nodes(r: np.ndarray, path: Path | str) -> LogGrid:
    if r.size < 2 or np.any(r <= 0):
        raise ParseError(f"{path}: nodes must be positive and at least two")
    grid = LogGrid(float(np.log(r[0])), float(np.log(r[-1])), int(r.size))
    if not np.allclose(grid.r, r, rtol=_GRID_RTOL, atol=0.0):
        raise ParseError(f"{path}: nodes are not a uniform grid in log r")
    return grid


def _check_nodes(expected: np.ndarray, found: np.ndarray, path: Path | str, what: str) -> None:
    if expected.shape != found.shape or not np.allclose(expected, found, rtol=_GRID_RTOL, atol=1e-15):
        raise ParseError(f"{path}: {what} nodes do not match the configured grid")


# ---------------------------------------------------------------- signals


def write_signal(path: Path | str, psi: Signal) -> None:
    v = psi.values
    _write_rows(path, ["r", "re", "im"], [psi.grid.r, v.real, v.imag])


def read_signal(path: Path | str, grid: LogGrid | None = None) -> Signal:
    """Read a ``r,re,im`` file. With ``grid`` given, the nodes must match it."""
    data = _read_rows(path, ["r", "re", "im"])
    r = data[:, 0]
    if grid is None:
        grid = _log_grid_from_nodes(r, path)
    else:
        _check_nodes(grid.r, r, path, "r")
    return Signal(grid, data[:, 1] + 1j * data[:, 2])


# ---------------------------------------------------------------- functions on the group


def write_aff_function(path: Path | str, f: AffFunction) -> None:
    g = f.grid
    x, a = np.meshgrid(g.x, g.a, indexing="ij")
    _write_rows(path, ["x", "a", "re", "im"], [x, a, f.values.real, f.values.imag])


def read_aff_function(path: Path | str, grid: AffGrid | None = None) -> AffFunction:
    """Read an ``x,a,re,im`` file in x-major order."""
    data = _read_rows(path, ["x", "a", "re", "im"])
    a_axis = np.unique(data[:, 1])
    n_s = a_axis.size
    if data.shape[0] % n_s:
        raise ParseError(f"{path}: rows do not form a product grid")
    n_x = data.shape[0] // n_s
    x = data[:, 0].reshape(n_x, n_s)
    a = data[:, 1].reshape(n_x, n_s)
    if grid is None:
        if n_x < 2 or n_s < 2 or np.any(a <= 0):
            raise ParseError(f"{path}: need at least a 2 x 2 grid with a > 0")
        s = np.log(a[0])
        grid = AffGrid(float(x[-1, 0]), n_x, float(s[0]), float(s[-1]), n_s)
    elif grid.shape != (n_x, n_s):
        raise ParseError(f"{path}: grid shape {(n_x, n_s)} does not match {grid.shape}")
    _check_nodes(np.broadcast_to(grid.x[:, None], grid.shape), x, path, "x")
    _check_nodes(np.broadcast_to(grid.a[None, :], grid.shape), a, path, "a")
    return AffFunction(grid, (data[:, 2] + 1j * data[:, 3]).reshape(n_x, n_s))


# ---------------------------------------------------------------- operators


def write_operator(path: Path | str, A: OperatorRep) -> None:
    r, s = np.meshgrid(A.grid.r, A.grid.r, indexing="ij")
    _write_rows(path, ["r", "s", "re", "im"], [r, s, A.kernel.real, A.kernel.imag])


def read_operator(path: Path | str, grid: LogGrid | None = None) -> OperatorRep:
    """Read an ``r,s,re,im`` kernel file in r-major order."""
    data = _read_rows(path, ["r", "s", "re", "im"])
    n = int(round(np.sqrt(data.shape[0])))
    if n * n != data.shape[0]:
        raise ParseError(f"{path}: kernel rows do not form a square grid")
    r = data[:, 0].reshape(n, n)
    s = data[:, 1].reshape(n, n)
    if grid is None:
        grid = _log_grid_from_nodes(r[:, 0], path)
    _check_nodes(np.broadcast_to(grid.r[:, None], (n, n)), r, path, "r")
    _check_nodes(np.broadcast_to(grid.r[None, :], (n, n)), s, path, "s")
    return OperatorRep(grid, (data[:, 2] + 1j * data[:, 3]).reshape(n, n))


# ---------------------------------------------------------------- reports


def _record_value(v: object) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt(v)
    if isinstance(v, (complex, np.complexfloating)):
        return f"{fmt(v.real)}{'+' if v.imag >= 0 else '-'}{fmt(abs(v.imag))}j"
    return str(v)


def write_record(path: Path | str, items: Mapping[str, object] | str) -> None:
    """Write ``key=value`` lines; a string is taken as an already formatted record."""
    text = items if isinstance(items, str) else "".join(f"{k}={_record_value(v)}\n" for k, v in items.items())
    Path(path).write_text(text, encoding="ascii")


def read_record(path: Path | str) -> dict[str, str]:
    out: dict[str, str] = {}
    try:
        lines = Path(path).read_text(encoding="ascii").splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    for ln, line in enumerate(lines, 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParseError(f"{path}:{ln}: expected key=value")
        out[key.strip()] = value.strip()
    return out


def write_eigenvalues(path: Path | str, eigenvalues: np.ndarray) -> None:
    ev = np.asarray(eigenvalues, dtype=float)
    _write_rows(path, ["index", "value"], [np.arange(ev.size), ev])
