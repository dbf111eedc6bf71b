"""Command-line entry point.

Usage: ``affqha COMMAND [options]``. Every command reads its inputs from
preset specs or files, writes plot-ready CSV or key=value files into
``--out`` and exits with

* 0 on success,
* 1 when a result is not finite (or a verification check fails),
* 2 on a configuration error,
* 3 when an input file cannot be parsed.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import io
from .convolve import (
    admissibility_check,
    box_symbol,
    cohen_distribution,
    fun_op_conv,
    localization_operator,
    op_op_conv,
)
from .fourier import fko, fw_forward, positive_frequency_leakage, positive_type_test, random_points
from .grid import AffFunction, AffGrid, LogGrid, Signal, make_grids
from .hilbert import OperatorRep, rank_one
from .signals import laguerre, log_gaussian
from .verify import Context, format_report, resolve_suites, run_suites
from .weyl import dequantize, quantize
from .wigner import affine_wigner, scalogram

COMMANDS = (
    "wigner",
    "scalogram",
    "quantize",
    "dequantize",
    "convolve",
    "cohen",
    "fourier-wigner",
    "kirillov",
    "admissibility",
    "localize",
    "bochner",
    "verify",
)

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG, EXIT_PARSE = 0, 1, 2, 3


class ConfigError(ValueError):
    """Invalid configuration: bad key, bad value or missing input."""


class NumericalError(RuntimeError):
    """A computed result is not finite."""


# ---------------------------------------------------------------- configuration


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs. Grid fields mirror :func:`make_grids`."""

    t_min: float = -10.0
    t_max: float = 10.0
    n: int = 512
    x_extent: float = 8.0
    n_x: int = 256
    s_min: float = -6.0
    s_max: float = 6.0
    n_s: int = 192
    signal: str = "laguerre:0,1"
    window: str = "laguerre:0,1"
    operator: str = "rank-one:laguerre:0,1"
    operator2: str = ""
    symbol: str = ""
    out: str = "."
    suite: tuple[str, ...] = ("all",)
    workers: int | None = None
    points: int = 8
    seed: int = 0

    def grids(self) -> tuple[LogGrid, AffGrid]:
        try:
            return make_grids(self.t_min, self.t_max, self.n, self.x_extent, self.n_x, self.s_min, self.s_max, self.n_s)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"invalid grid: {exc}") from exc


_INT_KEYS = {"n", "n_x", "n_s", "points", "seed"}
_FLOAT_KEYS = {"t_min", "t_max", "x_extent", "s_min", "s_max"}
_KEYS = {f.name for f in fields(RunConfig)}


def _coerce(key: str, value: str) -> object:
    if key not in _KEYS:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            v = float(value)
            if not math.isfinite(v):
                raise ValueError("not finite")
            return v
        if key == "workers":
            w = int(value)
            if w < 1:
                raise ValueError("must be positive")
            return w
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from exc
    if key == "suite":
        return tuple(s.strip() for s in value.split(",") if s.strip())
    return value


def load_config(path: str | None, overrides: dict[str, str]) -> RunConfig:
    """Defaults, then the key=value file, then AFFQHA_WORKERS, then command-line overrides."""
    values: dict[str, object] = {}
    if path is not None:
        try:
            record = io.read_record(path)
        except io.ParseError as exc:
            raise ConfigError(str(exc)) from exc
        for k, v in record.items():
            values[k] = _coerce(k, v)
    env = os.environ.get("AFFQHA_WORKERS")
    if env:
        values["workers"] = _coerce("workers", env)
    for k, v in overrides.items():
        values[k] = _coerce(k, v)
    cfg = replace(RunConfig(), **values)
    cfg.grids()  # validate now so every command fails the same way
    if cfg.points < 1:
        raise ConfigError("points must be at least 1")
    return cfg


# ---------------------------------------------------------------- input specs


def _numbers(text: str, count: int | None, what: str) -> list[float]:
    try:
        nums = [float(v) for v in text.split(",")] if text else []
    except ValueError as exc:
        raise ConfigError(f"{what}: expected numbers, got {text!r}") from exc
    if count is not None and len(nums) != count:
        raise ConfigError(f"{what}: expected {count} numbers, got {len(nums)}")
    return nums


def parse_signal(spec: str, lg: LogGrid) -> Signal:
    """``laguerre:n,alpha``, ``log-gaussian:mu,sigma[,freq]`` or ``file:PATH``."""
    kind, _, arg = spec.partition(":")
    if kind == "laguerre":
        n, alpha = _numbers(arg, 2, "laguerre signal")
        if n != int(n) or n < 0 or alpha <= 0:
            raise ConfigError("laguerre signal needs an integer n >= 0 and alpha > 0")
        return laguerre(lg, int(n), alpha)
    if kind == "log-gaussian":
        nums = _numbers(arg, None, "log-gaussian signal")
        if len(nums) not in (2, 3) or nums[1] <= 0:
            raise ConfigError("log-gaussian signal needs mu,sigma[,freq] with sigma > 0")
        return log_gaussian(lg, *nums)
    if kind == "file":
        return io.read_signal(arg, lg)
    raise ConfigError(f"unknown signal spec {spec!r}")


def parse_operator(spec: str, lg: LogGrid) -> OperatorRep:
    """``rank-one:SIGNAL``, ``laguerre-mix:s0,s1,...@alpha=A`` or ``file:PATH``."""
    kind, _, arg = spec.partition(":")
    if kind == "rank-one":
        psi = parse_signal(arg, lg)
        return rank_one(psi, psi)
    if kind == "laguerre-mix":
        weights, _, opt = arg.partition("@")
        alpha = 1.0
        if opt:
            key, _, val = opt.partition("=")
            if key != "alpha":
                raise ConfigError(f"laguerre-mix: unknown option {key!r}")
            alpha = _numbers(val, 1, "laguerre-mix alpha")[0]
        if alpha <= 0:
            raise ConfigError("laguerre-mix needs alpha > 0")
        out = OperatorRep.zero(lg)
        for n, w in enumerate(_numbers(weights, None, "laguerre-mix weights")):
            L = laguerre(lg, n, alpha)
            out = out + w * rank_one(L, L)
        return out
    if kind == "file":
        return io.read_operator(arg, lg)
    raise ConfigError(f"unknown operator spec {spec!r}")


def parse_symbol(spec: str, ag: AffGrid) -> AffFunction:
    """``bump:x0,s0,wx,ws`` (Gaussian in x and log a), ``box:x0,x1,a0,a1`` or ``file:PATH``."""
    kind, _, arg = spec.partition(":")
    if kind == "bump":
        x0, s0, wx, ws = _numbers(arg, 4, "bump symbol")
        if wx <= 0 or ws <= 0:
            raise ConfigError("bump widths must be positive")
        x, s = np.meshgrid(ag.x, ag.s, indexing="ij")
        return AffFunction(ag, np.exp(-((x - x0) ** 2) / (2 * wx**2) - (s - s0) ** 2 / (2 * ws**2)))
    if kind == "box":
        x0, x1, a0, a1 = _numbers(arg, 4, "box symbol")
        if not (x0 < x1 and 0 < a0 < a1):
            raise ConfigError("box needs x0 < x1 and 0 < a0 < a1")
        return box_symbol(ag, (x0, x1), (a0, a1))
    if kind == "file":
        return io.read_aff_function(arg, ag)
    raise ConfigError(f"unknown symbol spec {spec!r}")


def _require(value: str, name: str) -> str:
    if not value:
        raise ConfigError(f"this command needs --{name}")
    return value


def _finite(*arrays: np.ndarray) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NumericalError("result contains non-finite values")


# ---------------------------------------------------------------- commands


def run_compute(cmd: str, cfg: RunConfig) -> list[Path]:
    """Run one compute command and return the files written."""
    lg, ag = cfg.grids()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    w = cfg.workers
    written: list[Path] = []

    def aff(name: str, f: AffFunction) -> None:
        _finite(f.values)
        io.write_aff_function(out / name, f)
        written.append(out / name)

    def op(name: str, A: OperatorRep) -> None:
        _finite(A.kernel)
        io.write_operator(out / name, A)
        written.append(out / name)

    def record(name: str, text: str | dict) -> None:
        io.write_record(out / name, text)
        written.append(out / name)

    try:
        if cmd == "wigner":
            psi = parse_signal(cfg.signal, lg)
            aff("wigner.csv", affine_wigner(psi, psi, ag, workers=w).function)
        elif cmd == "scalogram":
            psi, phi = parse_signal(cfg.signal, lg), parse_signal(cfg.window, lg)
            aff("scalogram.csv", scalogram(psi, phi, ag, w))
        elif cmd == "quantize":
            op("quantized.csv", quantize(parse_symbol(_require(cfg.symbol, "symbol"), ag), lg, w))
        elif cmd == "dequantize":
            aff("symbol.csv", dequantize(parse_operator(cfg.operator, lg), ag, workers=w))
        elif cmd == "convolve":
            S = parse_operator(cfg.operator, lg)
            if cfg.symbol:
                op("convolution_operator.csv", fun_op_conv(parse_symbol(cfg.symbol, ag), S, workers=w))
            else:
                T = parse_operator(_require(cfg.operator2, "operator2"), lg)
                aff("convolution.csv", op_op_conv(S, T, ag, w))
        elif cmd == "cohen":
            psi = parse_signal(cfg.signal, lg)
            C = cohen_distribution(psi, psi, parse_operator(cfg.operator, lg), ag, w)
            aff("cohen.csv", C.value)
            record("cohen.txt", {"sup": float(np.abs(C.value.values).max()), "bound": C.bound, "within_bound": C.within_bound()})
        elif cmd == "fourier-wigner":
            f = fw_forward(parse_operator(cfg.operator, lg), ag, w)
            aff("fourier_wigner.csv", f)
            record("fourier_wigner.txt", {"negative_frequency_share": positive_frequency_leakage(f, lg)})
        elif cmd == "kirillov":
            aff("kirillov.csv", fko(parse_symbol(_require(cfg.symbol, "symbol"), ag), workers=w))
        elif cmd == "admissibility":
            rep = admissibility_check(parse_operator(cfg.operator, lg))
            record("admissibility.txt", rep.to_record())
        elif cmd == "localize":
            f = parse_symbol(_require(cfg.symbol, "symbol"), ag)
            loc = localization_operator(f, parse_signal(cfg.window, lg), workers=w)
            _finite(loc.eigenvalues)
            io.write_eigenvalues(out / "localization_eigenvalues.csv", loc.eigenvalues)
            written.append(out / "localization_eigenvalues.csv")
            io.write_signal(out / "localization_top.csv", loc.eigenvectors[0])
            written.append(out / "localization_top.csv")
            record("localization.txt", {"top_eigenvalue": float(loc.eigenvalues[0]), "asymmetry": loc.asymmetry})
        elif cmd == "bochner":
            A = parse_operator(cfg.operator, lg)
            rng = np.random.default_rng(cfg.seed)
            rep = positive_type_test(A, random_points(rng, cfg.points))
            _finite(rep.gram)
            record("bochner.txt", rep.to_record())
            io.write_eigenvalues(out / "bochner_eigenvalues.csv", rep.eigenvalues)
            written.append(out / "bochner_eigenvalues.csv")
        else:
            raise ConfigError(f"unknown command {cmd!r}")
    except (io.ParseError, ConfigError, NumericalError):
        raise
    except ValueError as exc:
        # configuration has been validated; a ValueError here means the numbers went bad
        raise NumericalError(str(exc)) from exc
    return written


def run_verify(cfg: RunConfig, log=None) -> tuple[int, Path]:
    """Run the selected suites and write ``verify_report.txt``; exit 0 iff all checks pass."""
    try:
        names = resolve_suites(list(cfg.suite))
    except KeyError as exc:
        raise ConfigError(f"unknown suite {exc.args[0]!r}") from exc
    lg, ag = cfg.grids()
    checks = run_suites(names, Context(lg, ag, cfg.workers), log)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "verify_report.txt"
    path.write_text(format_report(checks), encoding="ascii")
    return (EXIT_OK if all(c.passed for c in checks) else EXIT_NUMERIC), path


# ---------------------------------------------------------------- argument parsing


_GRID_FLAGS = {
    "--grid-t-min": "t_min",
    "--grid-t-max": "t_max",
    "--grid-n": "n",
    "--grid-x-extent": "x_extent",
    "--grid-n-x": "n_x",
    "--grid-s-min": "s_min",
    "--grid-s-max": "s_max",
    "--grid-n-s": "n_s",
}
_INPUT_FLAGS = {
    "--signal": "signal",
    "--window": "window",
    "--operator": "operator",
    "--operator2": "operator2",
    "--symbol": "symbol",
    "--out": "out",
    "--workers": "workers",
    "--points": "points",
    "--seed": "seed",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse exits with 2 too; keep the message format ours
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags override its entries")
    for flag, key in {**_GRID_FLAGS, **_INPUT_FLAGS}.items():
        common.add_argument(flag, dest=key, default=None)
    parser = _Parser(prog="affqha", description="Quantum harmonic analysis on the affine group.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for cmd in COMMANDS:
        p = sub.add_parser(cmd, parents=[common])
        if cmd == "verify":
            p.add_argument("--suite", action="append", dest="suite", default=None, help="suite name or 'all'; repeatable, or comma separated")
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        overrides = {
            key: str(getattr(args, key))
            for key in list(_GRID_FLAGS.values()) + list(_INPUT_FLAGS.values())
            if getattr(args, key) is not None
        }
        if getattr(args, "suite", None):
            overrides["suite"] = ",".join(args.suite)
        cfg = load_config(args.config, overrides)
        if args.command == "verify":
            code, path = run_verify(cfg, log=lambda m: print(m, file=sys.stderr))
            sys.stdout.write(path.read_text(encoding="ascii"))
            return code
        for path in run_compute(args.command, cfg):
            print(path)
        return EXIT_OK
    except ConfigError as exc:
        print(f"affqha: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except io.ParseError as exc:
        print(f"affqha: input error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NumericalError as exc:
        print(f"affqha: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
