"""Consistency, stability and convergence of the scheme over a refinement ladder.

For each grid the global error ``r_h u - E_h s_h f`` equals
``E_h (A_h r_h u - s_h f)``, so in any 2-norm it is bounded by
``||E_h||_2`` times the local error. The report checks that inequality row by
row and fits observed orders for both errors.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .grid_problem import (
    BVProblem,
    Grid,
    GridFunction,
    GridNorm,
    grid_norm,
    restrict_data,
    restrict_solution,
)
from .spectral import stability_summary
from .taylor_consistency import fit_log_slope
from .tridiag import SingularOperatorError, TridiagonalOperator, build_scheme_operator, matvec, solve

__all__ = [
    "MethodInstance",
    "ChainCheck",
    "ConvergenceRow",
    "ConvergenceReport",
    "UnsupportedNormError",
    "SolverFailure",
    "assemble",
    "local_error",
    "global_error",
    "lax_chain_check",
    "fit_order",
    "roundoff_floors",
    "refinement_study",
    "format_float",
    "dumps_json",
]

CHAIN_RTOL = 1e-9
ROUNDOFF_ULPS = 64
CHAIN_NORMS = (GridNorm.L2, GridNorm.L2_H_WEIGHTED)


class UnsupportedNormError(ValueError):
    """The stability constant is a 2-norm bound and has no counterpart in this norm."""


class SolverFailure(RuntimeError):
    def __init__(self, N: int, cause: Exception):
        super().__init__(f"solver failed at refinement level N={N}: {cause}")
        self.N = N


@dataclass(frozen=True, eq=False)
class MethodInstance:
    problem: BVProblem
    grid: Grid
    A_h: TridiagonalOperator
    r_h_u: GridFunction
    s_h_f: GridFunction
    u_h: GridFunction


def assemble(p: BVProblem, N: int) -> MethodInstance:
    """Build the scheme on ``N`` interior points and solve it."""
    g = Grid(N, p.L)
    A = build_scheme_operator(g)
    s_h_f = restrict_data(p, g)
    u_h = GridFunction(solve(A, s_h_f), g)
    return MethodInstance(p, g, A, restrict_solution(p, g), s_h_f, u_h)


def local_error(m: MethodInstance, norm="l2_h_weighted") -> float:
    """``||A_h r_h u - s_h f||``."""
    residual = matvec(m.A_h, m.r_h_u) - m.s_h_f.values
    return grid_norm(residual, norm, h=m.grid.h)


def global_error(m: MethodInstance, norm="l2_h_weighted") -> float:
    """``||r_h u - u_h||``."""
    return grid_norm(m.r_h_u.values - m.u_h.values, norm, h=m.grid.h)


def roundoff_floors(m: MethodInstance, norm="l2_h_weighted") -> tuple[float, float]:
    """Rough size of rounding noise in the local and global errors.

    The local floor scales with the magnitudes summed by the stencil; the
    global error is the local residual mapped through ``E_h``, so its floor is
    the local floor times the stability constant.
    """
    A, u = m.A_h, np.abs(m.r_h_u.values)
    terms = abs(A.b) * u + np.abs(m.s_h_f.values)
    terms[1:] += abs(A.a) * u[:-1]
    terms[:-1] += abs(A.c) * u[1:]
    local = ROUNDOFF_ULPS * np.finfo(float).eps * grid_norm(terms, norm, h=m.grid.h)
    return local, stability_summary(m.grid).inv_norm * local


@dataclass(frozen=True)
class ChainCheck:
    global_error: float
    local_error: float
    K: float
    ok: bool


def lax_chain_check(m: MethodInstance, norm="l2_h_weighted") -> ChainCheck:
    norm = GridNorm.parse(norm)
    if norm not in CHAIN_NORMS:
        raise UnsupportedNormError(f"no stability constant available in the {norm.value} norm")
    K = stability_summary(m.grid).inv_norm
    glob, loc = global_error(m, norm), local_error(m, norm)
    # The inequality is exact in real arithmetic; the solve itself leaves
    # rounding noise in the global error that no multiple of a zero local error covers.
    _, noise = roundoff_floors(m, norm)
    return ChainCheck(glob, loc, K, glob <= K * loc * (1 + CHAIN_RTOL) + noise)


def fit_order(h: Sequence[float], errors: Sequence[float],
              floors: Sequence[float] | None = None) -> float | None:
    """Log-log slope of error against ``h``; ``None`` when the errors vanish.

    Errors at or below their roundoff ``floors`` count as zero. If any pairwise
    observed order leaves ``[1.8, 2.2]`` the coarse levels are treated as
    pre-asymptotic and only the finest half of the ladder is fitted.
    """
    h = np.asarray(h, dtype=float)
    e = np.abs(np.asarray(errors, dtype=float))
    if floors is not None:
        e = np.where(e <= np.asarray(floors, dtype=float), 0.0, e)
    if np.count_nonzero(e >= 1e-14) < 3:
        return None
    with np.errstate(divide="ignore", invalid="ignore"):
        pairwise = np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:])
    if np.any(~np.isfinite(pairwise) | (pairwise < 1.8) | (pairwise > 2.2)):
        half = math.ceil(len(h) / 2)
        if np.count_nonzero(e[-half:] >= 1e-14) >= 3:
            h, e = h[-half:], e[-half:]
    return fit_log_slope(h, e)


@dataclass(frozen=True)
class ConvergenceRow:
    N: int
    h: float
    local_error: float
    global_error: float
    K_bound: float | None
    chain_ok: bool | None


@dataclass
class ConvergenceReport:
    problem: str
    L: float
    norm_kind: GridNorm
    rows: list[ConvergenceRow] = field(default_factory=list)
    local_order: float | None = None
    global_order: float | None = None

    @property
    def chain_ok(self) -> bool:
        """False only if some row measurably breaks the chain inequality."""
        return all(r.chain_ok is not False for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["N", "h", "local", "global", "K", "chain_ok"])
        for r in self.rows:
            writer.writerow([
                r.N,
                format_float(r.h),
                format_float(r.local_error),
                format_float(r.global_error),
                "" if r.K_bound is None else format_float(r.K_bound),
                "" if r.chain_ok is None else str(r.chain_ok).lower(),
            ])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "L": self.L,
            "norm": self.norm_kind.value,
            "local_order": "exact" if self.local_order is None else self.local_order,
            "global_order": "exact" if self.global_order is None else self.global_order,
            "rows": [
                {
                    "N": r.N,
                    "h": r.h,
                    "local": r.local_error,
                    "global": r.global_error,
                    "K": r.K_bound,
                    "chain_ok": r.chain_ok,
                }
                for r in self.rows
            ],
        }

    def to_json(self) -> str:
        return dumps_json(self.to_dict())


def refinement_study(p: BVProblem, N_list: Sequence[int], norm="l2_h_weighted") -> ConvergenceReport:
    norm = GridNorm.parse(norm)
    N_list = [int(n) for n in N_list]
    if len(N_list) < 3:
        raise ValueError("a refinement study needs at least three levels")
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError(f"N_list must be strictly increasing, got {N_list}")

    report = ConvergenceReport(p.name, p.L, norm)
    floors = []
    for N in N_list:
        try:
            m = assemble(p, N)
        except SingularOperatorError as exc:
            raise SolverFailure(N, exc) from exc
        if norm in CHAIN_NORMS:
            chk = lax_chain_check(m, norm)
            row = ConvergenceRow(N, m.grid.h, chk.local_error, chk.global_error, chk.K, chk.ok)
        else:
            row = ConvergenceRow(N, m.grid.h, local_error(m, norm), global_error(m, norm), None, None)
        report.rows.append(row)
        floors.append(roundoff_floors(m, norm))

    h = [r.h for r in report.rows]
    local_floor, global_floor = zip(*floors)
    report.local_order = fit_order(h, [r.local_error for r in report.rows], local_floor)
    report.global_order = fit_order(h, [r.global_error for r in report.rows], global_floor)
    return report


# -- serialization ------------------------------------------------------------------


def format_float(x: float) -> str:
    """17 significant digits, so every value round-trips exactly."""
    return format(float(x), ".17g")


def dumps_json(obj) -> str:
    """Deterministic JSON with every float written at 17 significant digits."""
    return _encode(obj, 0) + "\n"


def _encode(obj, depth: int) -> str:
    pad = "  " * (depth + 1)
    end = "  " * depth
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(str(obj))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, depth + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [pad + _encode(v, depth + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")

