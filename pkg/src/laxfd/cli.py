"""Command-line front end.

Subcommands write a CSV or JSON artifact (stdout by default) and exit 0 only
when every check in the pipeline passes. Exit codes:

    0  all checks passed
    1  a check failed (failure record on stderr as JSON)
    2  unknown problem selection (also argparse usage errors)
    3  N < 3
    4  output path not writable
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from typing import Callable

import numpy as np

from . import spectral, tridiag
from .grid_problem import GridNorm, UnknownProblemError, parse_problem
from .laxcheck import SolverFailure, dumps_json, format_float, refinement_study
from .taylor_consistency import (
    consistency_bound,
    remainder_backward,
    remainder_forward,
    remainder_roundoff,
    stencil_roundoff,
    truncation_order_fit,
)

EXIT_OK, EXIT_CHECK, EXIT_PROBLEM, EXIT_SMALL_N, EXIT_OUTPUT = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def parse_n_list(text: str, style: str = "double") -> list[int]:
    """Parse ``a,b,c`` or range sugar ``a..b``.

    ``style="double"`` expands ``a..b`` to ``a, 2a, 4a, ... <= b``;
    ``style="halving"`` expands to ``a, 2(a+1)-1, 4(a+1)-1, ... <= b``, the
    sizes on which ``h`` halves exactly (``7..63`` is ``7, 15, 31, 63``).
    """
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo_s, hi_s = part.split("..", 1)
            lo, hi = int(lo_s), int(hi_s)
            if lo < 1 or hi < lo:
                raise argparse.ArgumentTypeError(f"bad range {part!r}")
            if style == "halving":
                k = lo + 1
                while k - 1 <= hi:
                    out.append(k - 1)
                    k *= 2
            else:
                k = lo
                while k <= hi:
                    out.append(k)
                    k *= 2
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty N list")
    return out


def _require_n(values) -> None:
    small = [n for n in values if n < 3]
    if small:
        raise CliError(EXIT_SMALL_N, f"N must be at least 3, got {small}")


def _problem(selection: str, L: float):
    try:
        return parse_problem(selection, L)
    except UnknownProblemError as exc:
        raise CliError(EXIT_PROBLEM, str(exc)) from exc


def _table(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return dumps_json(rows)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(rows[0]))
    for row in rows:
        writer.writerow([_cell(v) for v in row.values()])
    return buf.getvalue()


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    return str(v)


# -- pipelines: each returns (artifact text, list of failure descriptions) --------


def run_eigen(args) -> tuple[str, list[str]]:
    _require_n([args.n])
    A = tridiag.TridiagonalOperator(args.n, args.a, args.b, args.c)
    rows, failures = [], []
    for m in range(1, A.N + 1):
        pair = spectral.analytic_eigenpair(A, m)
        res = spectral.verify_eigenpair(A, pair)
        rows.append({"m": m, "lambda": pair.eigenvalue, "residual": res.value,
                     "tolerance": res.tolerance, "verified": res.ok})
        if not res.ok:
            failures.append(f"eigenpair m={m}: residual {res.value:.3e} > {res.tolerance:.3e}")
    return _table(rows, args.format), failures


def run_stability(args) -> tuple[str, list[str]]:
    _require_n(args.n_list)
    rows, failures = [], []
    for N in args.n_list:
        summary = spectral.stability_summary(N, args.L)
        rows.append(summary.to_dict())
        if not summary.satisfied:
            failures.append(f"N={N}: inv_norm {summary.inv_norm!r} exceeds bound {summary.bound!r}")
    return _table(rows, args.format), failures


def run_consistency(args) -> tuple[str, list[str]]:
    p = _problem(args.problem, args.L)
    x = args.L / 2 if args.x is None else args.x
    fit = truncation_order_fit(p, x, args.dx_list)
    bound = consistency_bound(p, x)
    failures, rows = [], []
    for dx, tau in zip(fit.dx_list, fit.tau_list):
        F, G = remainder_forward(p, x, dx), remainder_backward(p, x, dx)
        noise = remainder_roundoff(p, x, dx)
        ok = (abs(F) <= bound.forward.constant * dx**4 + noise
              and abs(G) <= bound.backward.constant * dx**4 + noise
              and abs(tau) <= bound.Gamma * dx**2 + stencil_roundoff(p, x, dx))
        rows.append({"dx": dx, "tau": tau, "F": F, "G": G, "ok": ok})
        if not ok:
            failures.append(f"remainder bound violated at dx={dx!r}")
    if args.format == "json":
        record = fit.to_dict()
        record["problem"] = p.name
        record["checks"] = rows
        return dumps_json(record), failures
    return _table(rows, "csv"), failures


def run_converge(args) -> tuple[str, list[str]]:
    _require_n(args.n_list)
    p = _problem(args.problem, args.L)
    try:
        report = refinement_study(p, args.n_list, args.norm)
    except SolverFailure as exc:
        return "", [str(exc)]
    failures = [f"N={r.N}: global error exceeds K * local error"
                for r in report.rows if r.chain_ok is False]
    text = report.to_json() if args.format == "json" else report.to_csv()
    return text, failures


def run_identities(args) -> tuple[str, list[str]]:
    n_max = args.n_max
    _require_n([n_max])
    rows: list[dict] = []

    def record(check, N, value, tol):
        rows.append({"check": check, "N": N, "residual": float(value), "tolerance": float(tol),
                     "ok": bool(value <= tol)})

    seq = tridiag.determinant_recurrence(-2, 40)
    record("determinant_closed_form", 40,
           max(abs(m - (-1) ** k * (k + 1)) for k, m in enumerate(seq)), 0)
    for N in range(3, n_max + 1):
        A = tridiag.TridiagonalOperator(N, 1.0, -2.0, 1.0)
        r = spectral.orthonormality_check(A)
        record("orthonormality", N, r.value, r.tolerance)
        r = spectral.diagonalization_check(A)
        record("diagonalization", N, r.value, r.tolerance)
        inv = tridiag.inverse_matrix(A)
        chk = tridiag.inverse_check(A, inv)
        record("inverse_check", N, max(chk.left, chk.right), chk.tolerance)
        r = spectral.normality_check(inv)
        record("inverse_normality", N, r.value, r.tolerance)
        sq = max(abs(spectral.sine_square_sum(i, N) - 1) for i in range(1, N + 1))
        record("sine_square_sum", N, sq, 1e-11)
        cross = max(abs(spectral.cross_orthogonality_sum(i, j, N))
                    for i in range(1, N + 1) for j in range(1, N + 1) if i != j)
        record("cross_orthogonality_sum", N, cross, 1e-11)
    parity_bad = sum(not spectral.parity_agrees(i, j) for i in range(101) for j in range(101))
    record("parity", 100, parity_bad, 0)
    xs = np.linspace(0, math.pi / 2, 100_001)[1:]
    record("concavity", len(xs), float(np.count_nonzero(~spectral.concavity_bound(xs))), 0)

    failures = [f"{r['check']} N={r['N']}: {r['residual']!r} > {r['tolerance']!r}"
                for r in rows if not r["ok"]]
    return _table(rows, args.format), failures


PIPELINES: dict[str, Callable] = {
    "eigen": run_eigen,
    "stability": run_stability,
    "consistency": run_consistency,
    "converge": run_converge,
    "identities": run_identities,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="laxfd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, fmt="json"):
        p.add_argument("--format", choices=("csv", "json"), default=fmt)
        p.add_argument("--output", "-o", default=None, help="artifact path (default: stdout)")

    p = sub.add_parser("eigen", help="analytic eigenpairs of A(a, b, c) and their residuals")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=-2.0)
    p.add_argument("--c", type=float, default=1.0)
    common(p)

    p = sub.add_parser("stability", help="1/|lambda_min| of the scheme against L^2/4")
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--n-list", type=lambda s: parse_n_list(s, "double"), default=[4, 8, 16, 32])
    common(p)

    p = sub.add_parser("consistency", help="Taylor remainder bounds and truncation order at a point")
    p.add_argument("--problem", default="sine:k=1")
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--x", type=float, default=None, help="evaluation point (default: L/2)")
    p.add_argument("--dx-list", type=lambda s: [float(v) for v in s.split(",")], default=None)
    common(p)

    p = sub.add_parser("converge", help="refinement study with the Lax chain check")
    p.add_argument("--problem", default="sine:k=1")
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--n-list", type=lambda s: parse_n_list(s, "halving"), default=[7, 15, 31, 63])
    p.add_argument("--norm", type=GridNorm.parse, default=GridNorm.L2_H_WEIGHTED)
    common(p, fmt="csv")

    p = sub.add_parser("identities", help="determinant, orthonormality and trigonometric identities")
    p.add_argument("--n-max", type=int, default=32)
    common(p)
    return parser


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(EXIT_OUTPUT, f"cannot write {path}: {exc}") from exc


def _fail(code: int, subcommand: str | None, messages: list[str]) -> int:
    sys.stderr.write(dumps_json({"status": "fail", "exit_code": code,
                                 "subcommand": subcommand, "errors": messages}))
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text, failures = PIPELINES[args.subcommand](args)
        if failures:
            return _fail(EXIT_CHECK, args.subcommand, failures)
        _write(text, args.output)
    except CliError as exc:
        return _fail(exc.code, args.subcommand, [str(exc)])
    except ValueError as exc:
        return _fail(EXIT_CHECK, args.subcommand, [str(exc)])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
