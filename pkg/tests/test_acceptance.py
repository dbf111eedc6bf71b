"""Acceptance gate: the fifteen published criteria at their stated tolerances.

The full verification run is executed twice through the command line. Each
report line is re-judged here against the tolerance table below, which is
kept independent of the tolerances the suites print, so a suite that
loosened its own bound would still fail. Criteria 1 and 2 are also timed
in-process, and criterion 15 compares the two report files byte for byte.
One PASS/FAIL line per criterion is printed to the terminal.
"""

from __future__ import annotations

import operator
import re
import subprocess
import sys
import time

import pytest

from affqha.grid import make_grids
from affqha.verify import SUITES, Context

LE, GE, LT = operator.le, operator.ge, operator.lt

# criterion -> (title, suite, [(check-name prefix, relation, bound)], expected number of checks)
CRITERIA: dict[int, tuple[str, str, list[tuple[str, object, float]], int]] = {
    1: ("special functions", "special", [
        ("lambda(0)=1", LE, 1e-15),
        ("lambda(1)=e/(e-1)", LE, 1e-12),
        ("lambda(lambda^-1(r))=r", LE, 1e-11),
        ("sigma(sigma(x))=x", LE, 1e-12),
        ("lambert_w_residual", LE, 1e-13),
    ], 5),
    2: ("Laguerre admissibility constant", "laguerre", [("||D^-1 L_n^alpha||^2=1/alpha", LE, 1e-5)], 1),
    3: ("parity operator at r = 1", "parity", [("P(psi)(1)=2psi(1)", LE, 1e-6)], 1),
    4: ("Wigner orthogonality and marginal", "wigner", [("orthogonality_4x4", LE, 2e-2), ("marginal", LE, 2e-2)], 2),
    5: ("quantization isometry", "quantization", [
        ("isometry", LE, 2e-2),
        ("round_trip", LE, 3e-2),
        ("symbol_of_rank_one=wigner", LE, 2e-2),
    ], 3),
    6: ("coordinate commutator", "commutator", [("[A_x,A_a]=(1/2pi i)A_a", LE, 1e-6)], 1),
    7: ("convolution compatibility", "compatibility", [("(f*S)*T=f*(S*T)", LE, 3e-2), ("f*(g*S)=(f*g)*S", LE, 3e-2)], 2),
    8: ("admissibility integral relation", "admissibility", [
        ("right[", LE, 2e-2),
        ("left[", LE, 2e-2),
        ("mixture_trace=(1/alpha)sum s_n", LE, 1e-3),
        ("mixture_verdict", LE, 0.5),  # 0 = judged admissible, as it must be
    ], 6),
    9: ("trace of quantization", "symbol-trace", [
        ("int f_T dmu_r=tr(T)", LE, 2e-2),
        ("int f_S dmu_l=tr(D^-1 S D^-1)", LE, 3e-2),
    ], 2),
    10: ("scalogram identity chain", "scalogram", [("|F_W|^2", LE, 2e-2), ("(phi x phi)*(psi x psi)(-x,a)=SCAL/a", LE, 2e-2)], 2),
    11: ("Fourier diagram", "fourier-diagram", [("fixture_", LE, 5e-2)], 3),
    12: ("quantum Bochner", "bochner", [("positive_min_eigenvalue", GE, -1e-6), ("indefinite_witness", LT, -0.1)], 2),
    13: ("localization minimax", "localization", [
        ("functional(top eigenvector)=top eigenvalue", LE, 2e-2),
        ("random vectors <= top eigenvalue", LE, 2e-2),
    ], 2),
    14: ("Cohen class", "cohen", [
        ("sup_bound_excess", LE, 1e-8),
        ("int Q_S dmu_r", LE, 2e-2),
        ("S=phi x phi gives squared wavelet coefficient", LE, 1e-6),
        ("covariance", LE, 1e-3),
        ("positive S gives", GE, -1e-8),
        ("indefinite S gives", LT, -1e-8),
    ], 6),
}

LINE = re.compile(r"^(PASS|FAIL) ([\w-]+)/(.+?): measured=(\S+) tolerance=(\S+)(?: \(.*\))?$")
RUNTIME_LIMIT = {1: 1.0, 2: 5.0}


def _verify_all(out_dir) -> tuple[int, str]:
    proc = subprocess.run(
        [sys.executable, "-m", "affqha.cli", "verify", "--suite", "all", "--out", str(out_dir)],
        capture_output=True,
        text=True,
        check=False,
    )
    return proc.returncode, (out_dir / "verify_report.txt").read_text(encoding="ascii")


@pytest.fixture(scope="module")
def reports(tmp_path_factory):
    return [_verify_all(tmp_path_factory.mktemp(f"verify_{k}")) for k in range(2)]


@pytest.fixture(scope="module")
def parsed(reports):
    code, text = reports[0]
    lines = text.splitlines()
    checks = []
    for line in lines[:-1]:
        m = LINE.match(line)
        assert m, f"unparseable report line: {line!r}"
        checks.append((m.group(2), m.group(3), float(m.group(4)), m.group(1) == "PASS"))
    return code, checks


def _say(capsys, k: int, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\n[acceptance] criterion {k:2d} {'PASS' if ok else 'FAIL'}: {CRITERIA[k][0] if k in CRITERIA else 'determinism'} ({detail})")


def _judge(k: int, checks) -> tuple[bool, str]:
    title, suite, table, count = CRITERIA[k]
    mine = [c for c in checks if c[0] == suite]
    problems = []
    if len(mine) != count:
        problems.append(f"expected {count} checks, found {len(mine)}")
    worst = []
    for _, name, value, reported in mine:
        rule = next(((rel, bound) for prefix, rel, bound in table if name.startswith(prefix)), None)
        if rule is None:
            problems.append(f"no tolerance for {name!r}")
            continue
        rel, bound = rule
        ok = bool(rel(value, bound))
        if ok != reported:
            problems.append(f"{name}: report says {'PASS' if reported else 'FAIL'}, re-judged {'PASS' if ok else 'FAIL'}")
        if not ok:
            problems.append(f"{name}: {value:.3e} vs {bound:.1e}")
        worst.append(f"{name}={value:.2e}")
    return not problems, "; ".join(problems) if problems else ", ".join(worst)


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k, parsed, capsys):
    _, checks = parsed
    ok, detail = _judge(k, checks)
    if k in RUNTIME_LIMIT:
        lg, ag = make_grids()
        ctx = Context(lg, ag, None)
        t0 = time.perf_counter()
        SUITES[CRITERIA[k][1]](ctx)
        elapsed = time.perf_counter() - t0
        in_time = elapsed < RUNTIME_LIMIT[k]
        ok = ok and in_time
        detail += f"; runtime {elapsed:.3f} s (limit {RUNTIME_LIMIT[k]:.0f} s)"
    _say(capsys, k, ok, detail)
    assert ok, detail


def test_criterion_15_determinism(reports, capsys):
    (code_a, text_a), (code_b, text_b) = reports
    same = text_a.encode("ascii") == text_b.encode("ascii")
    ok = same and code_a == code_b == 0
    _say(capsys, 15, ok, f"byte-identical reports: {same}, exit codes {code_a}/{code_b}")
    assert ok
