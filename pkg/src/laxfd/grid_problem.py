"""Continuous two-point problems, uniform grids, restriction operators and grid norms.

A problem ``u'' = f`` on ``(0, L)`` with ``u(0) = u(L) = 0`` is carried by its exact
solution and the first four derivatives, so every error in the package can be
measured against the truth rather than estimated.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as P

__all__ = [
    "BVProblem",
    "Grid",
    "GridFunction",
    "GridNorm",
    "UnknownProblemError",
    "constant_rhs",
    "sine",
    "poly",
    "zero",
    "parse_problem",
    "validate_problem",
    "restrict_solution",
    "restrict_data",
    "grid_norm",
]

Evaluator = Callable[[np.ndarray], np.ndarray]


class UnknownProblemError(ValueError):
    """Raised when a problem selection string does not name a registered problem."""


@dataclass(frozen=True)
class BVProblem:
    """Dirichlet problem ``u'' = f`` on ``(0, L)`` with a known exact solution.

    ``u_derivs[k]`` evaluates the k-th derivative of the exact solution for
    ``k = 0..4``; ``f`` evaluates the right-hand side. All evaluators accept
    scalars or arrays.
    """

    name: str
    L: float
    u_derivs: tuple[Evaluator, ...]
    f: Evaluator

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"domain length must be positive, got {self.L}")
        if len(self.u_derivs) != 5:
            raise ValueError("u_derivs must hold evaluators for derivatives 0..4")

    def u(self, x):
        return self.deriv(0, x)

    def deriv(self, k: int, x):
        return self.u_derivs[k](np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Grid:
    """Uniform grid of ``N`` interior points ``x_i = i*h`` with ``h = L/(N+1)``."""

    N: int
    L: float = 1.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        if not self.L > 0:
            raise ValueError(f"domain length must be positive, got {self.L}")

    @property
    def h(self) -> float:
        return self.L / (self.N + 1)

    @property
    def points(self) -> np.ndarray:
        return np.arange(1, self.N + 1) * self.h


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Vector of values on the interior points of a grid."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.N,):
            raise ValueError(
                f"expected {self.grid.N} values for the grid, got shape {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self):
        return self.grid.N


class GridNorm(str, Enum):
    MAX = "max"
    L1 = "l1"
    L2 = "l2"
    L2_H_WEIGHTED = "l2_h_weighted"

    @classmethod
    def parse(cls, kind: "str | GridNorm") -> "GridNorm":
        if isinstance(kind, GridNorm):
            return kind
        aliases = {"l2h": cls.L2_H_WEIGHTED, "inf": cls.MAX, "linf": cls.MAX}
        key = kind.strip().lower()
        if key in aliases:
            return aliases[key]
        return cls(key)


# -- registry -----------------------------------------------------------------


def _from_polynomial(name: str, L: float, u: Polynomial) -> BVProblem:
    # polyval on raw coefficients skips the domain mapping Polynomial.__call__ does
    coefs = [u.deriv(k).coef if k else u.coef for k in range(5)]
    derivs = tuple(partial(_polyval, c=c) for c in coefs)
    return BVProblem(name, L, derivs, derivs[2])


def _polyval(x, c):
    return P.polyval(x, c)


def constant_rhs(L: float = 1.0) -> BVProblem:
    """``u'' = 1`` with exact solution ``u = x (x - L) / 2``."""
    u = Polynomial([0.0, -L / 2, 0.5])
    return _from_polynomial("constant_rhs", L, u)


def poly(coeffs: Sequence[float], L: float = 1.0) -> BVProblem:
    """Manufactured solution ``u = x (x - L) q(x)`` with ``q = c0 + c1 x + ... + c5 x^5``.

    The ``x (x - L)`` factor pins both boundary values to zero for any ``q``;
    ``poly([0.5])`` reproduces :func:`constant_rhs`.
    """
    coeffs = [float(c) for c in coeffs]
    if not 1 <= len(coeffs) <= 6:
        raise ValueError("poly takes between 1 and 6 coefficients (c0..c5)")
    u = Polynomial([0.0, -L, 1.0]) * Polynomial(coeffs)
    label = ",".join(f"{c:g}" for c in coeffs)
    return _from_polynomial(f"poly:{label}", L, u)


def sine(k: int = 1, L: float = 1.0) -> BVProblem:
    """``u = sin(k pi x / L)``, so ``f = -(k pi / L)^2 u``."""
    if int(k) != k or k < 1:
        raise ValueError(f"sine mode k must be a positive integer, got {k}")
    w = k * np.pi / L

    def make(order):
        # d^n/dx^n sin(wx) = w^n sin(wx + n pi/2)
        return lambda x: w**order * np.sin(w * x + order * np.pi / 2)

    derivs = tuple(make(n) for n in range(5))
    return BVProblem(f"sine:k={k}", L, derivs, derivs[2])


def zero(L: float = 1.0) -> BVProblem:
    z = lambda x: np.zeros_like(np.asarray(x, dtype=float))
    return BVProblem("zero", L, (z,) * 5, z)


def parse_problem(selection: str, L: float = 1.0) -> BVProblem:
    """Build a registered problem from ``constant_rhs``, ``zero``, ``sine:k=<int>`` or ``poly:c0,..,c5``."""
    text = selection.strip()
    head, _, tail = text.partition(":")
    try:
        if head == "constant_rhs" and not tail:
            return constant_rhs(L)
        if head == "zero" and not tail:
            return zero(L)
        if head == "sine":
            if not tail:
                return sine(1, L)
            key, _, value = tail.partition("=")
            if key.strip() != "k":
                raise ValueError(f"sine takes k=<int>, got {tail!r}")
            return sine(int(value), L)
        if head == "poly" and tail:
            return poly([float(c) for c in tail.split(",")], L)
    except ValueError as exc:
        raise UnknownProblemError(f"bad problem selection {selection!r}: {exc}") from exc
    raise UnknownProblemError(f"unknown problem {selection!r}")


def validate_problem(p: BVProblem, samples: int = 257, atol_bc: float = 1e-12,
                     atol_ode: float = 1e-10) -> None:
    """Raise ``ValueError`` unless ``p`` satisfies its boundary data and ``u'' = f``."""
    ends = p.u(np.array([0.0, p.L]))
    if np.max(np.abs(ends)) > atol_bc:
        raise ValueError(f"{p.name}: boundary values {ends} are not zero")
    x = np.linspace(0.0, p.L, samples)[1:-1]
    gap = np.max(np.abs(p.deriv(2, x) - p.f(x)))
    if gap > atol_ode * max(1.0, np.max(np.abs(p.f(x)))):
        raise ValueError(f"{p.name}: registered u'' differs from f by {gap:.3e}")


# -- restriction and norms --------------------------------------------------------


def restrict_solution(p: BVProblem, g: Grid) -> GridFunction:
    """Sample the exact solution at the interior grid points (``r_h u``)."""
    _check_domain(p, g)
    return GridFunction(p.u(g.points), g)


def restrict_data(p: BVProblem, g: Grid) -> GridFunction:
    """Sample the right-hand side at the interior grid points (``s_h f``).

    Boundary rows are eliminated, so only interior entries appear.
    """
    _check_domain(p, g)
    return GridFunction(p.f(g.points), g)


def _check_domain(p: BVProblem, g: Grid) -> None:
    if not np.isclose(p.L, g.L, rtol=1e-14, atol=0.0):
        raise ValueError(f"grid length {g.L} does not match problem domain {p.L}")


def grid_norm(v, kind: "str | GridNorm" = GridNorm.L2_H_WEIGHTED, h: float | None = None) -> float:
    """Discrete norm of a grid vector.

    ``l2_h_weighted`` needs the spacing ``h``; it is taken from ``v.grid`` when
    ``v`` is a :class:`GridFunction`.
    """
    kind = GridNorm.parse(kind)
    if h is None and isinstance(v, GridFunction):
        h = v.grid.h
    x = np.asarray(v, dtype=float)
    if x.size == 0:
        return 0.0
    if kind is GridNorm.MAX:
        return float(np.max(np.abs(x)))
    if kind is GridNorm.L1:
        return float(np.sum(np.abs(x)))
    if kind is GridNorm.L2:
        return _scaled_l2(x)
    if h is None:
        raise ValueError("l2_h_weighted norm needs the grid spacing h")
    return float(np.sqrt(h) * _scaled_l2(x))


def _scaled_l2(x: np.ndarray) -> float:
    # Scale by the largest entry so tiny or huge vectors do not under/overflow when squared.
    big = np.max(np.abs(x))
    if big == 0 or not np.isfinite(big):
        return float(big)
    return float(big * np.linalg.norm(x / big))
