"""Taylor remainders and truncation error of the central second difference.

``F`` and ``G`` are the degree-3 Taylor remainders of ``u(x + dx)`` and
``u(x - dx)`` about ``x``. Their sum is the stencil numerator minus
``dx^2 u''(x)``, which turns fourth-order remainder bounds into a
second-order bound on the truncation error.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .grid_problem import BVProblem

__all__ = [
    "Side",
    "RemainderBound",
    "ConsistencyBound",
    "OrderFit",
    "remainder_forward",
    "remainder_backward",
    "remainder_bound",
    "consistency_bound",
    "remainder_roundoff",
    "stencil_roundoff",
    "central_diff_second",
    "truncation_error",
    "default_dx_ladder",
    "fit_log_slope",
    "truncation_order_fit",
]

SAMPLES = 4096
INFLATION = 1.01
UNDERFLOW = 1e-14
ROUNDOFF_ULPS = 16


class Side(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


def _check_interior(p: BVProblem, x: float) -> None:
    if not 0.0 < x < p.L:
        raise ValueError(f"x={x} is not inside (0, {p.L})")


def remainder_forward(p: BVProblem, x: float, dx: float) -> float:
    """``u(x+dx) - u(x) - dx u' - dx^2/2 u'' - dx^3/6 u'''`` at ``x``."""
    _check_interior(p, x)
    if not (dx > 0 and x + dx < p.L):
        raise ValueError(f"x + dx = {x + dx} must lie in (0, {p.L}) with dx > 0")
    d = [float(p.deriv(k, x)) for k in range(4)]
    return float(p.u(x + dx)) - d[0] - dx * d[1] - dx**2 / 2 * d[2] - dx**3 / 6 * d[3]


def remainder_backward(p: BVProblem, x: float, dx: float) -> float:
    """``u(x-dx) - u(x) + dx u' - dx^2/2 u'' + dx^3/6 u'''`` at ``x``."""
    _check_interior(p, x)
    if not (dx > 0 and x - dx > 0):
        raise ValueError(f"x - dx = {x - dx} must lie in (0, {p.L}) with dx > 0")
    d = [float(p.deriv(k, x)) for k in range(4)]
    return float(p.u(x - dx)) - d[0] + dx * d[1] - dx**2 / 2 * d[2] + dx**3 / 6 * d[3]


def remainder_roundoff(p: BVProblem, x: float, dx: float) -> float:
    """Rounding noise to allow on ``F`` or ``G``: a few ulps of the largest summed term.

    The remainder bounds hold in real arithmetic. When the fourth derivative
    vanishes the bound is zero and only this allowance absorbs floating point.
    """
    d = [abs(float(p.deriv(k, x))) for k in range(4)]
    ends = [abs(float(p.u(t))) for t in (x - dx, x + dx) if 0.0 <= t <= p.L]
    scale = max(ends, default=0.0) + d[0] + dx * d[1] + dx**2 / 2 * d[2] + dx**3 / 6 * d[3]
    return ROUNDOFF_ULPS * np.finfo(float).eps * scale


def stencil_roundoff(p: BVProblem, x: float, dx: float) -> float:
    """Rounding noise in the central second difference, which divides by ``dx^2``."""
    u = np.abs(p.u(np.array([x - dx, x, x + dx])))
    scale = (u[0] + 2 * u[1] + u[2]) / dx**2 + abs(float(p.deriv(2, x)))
    return ROUNDOFF_ULPS * np.finfo(float).eps * scale


def _max_abs_fourth(p: BVProblem, lo: float, hi: float) -> float:
    """Max of ``|u''''|`` on ``[lo, hi]``: dense sampling, then a bounded 1-D refinement."""
    xs = np.linspace(lo, hi, SAMPLES)
    vals = np.abs(p.deriv(4, xs))
    k = int(np.argmax(vals))
    best = float(vals[k])
    if np.ptp(vals) == 0.0:
        return best  # flat, e.g. u'''' constant: nothing to refine
    left, right = xs[max(k - 1, 0)], xs[min(k + 1, SAMPLES - 1)]
    if right > left:
        res = minimize_scalar(lambda t: -abs(float(p.deriv(4, t))),
                              bounds=(left, right), method="bounded",
                              options={"xatol": 1e-8 * p.L})
        best = max(best, -float(res.fun))
    return best


@dataclass(frozen=True)
class RemainderBound:
    """``|remainder| <= constant * dx^4`` for ``0 < dx < radius``.

    ``peak`` is the estimated max of ``|u''''|`` on the one-sided interval;
    ``constant`` is that estimate inflated by 1% to cover sampling error.
    """

    side: Side
    x: float
    radius: float
    peak: float
    constant: float


def remainder_bound(p: BVProblem, x: float, side: Side | str) -> RemainderBound:
    _check_interior(p, x)
    side = Side(side)
    if side is Side.FORWARD:
        lo, hi, radius = x, p.L, p.L - x
    else:
        lo, hi, radius = 0.0, x, x
    peak = _max_abs_fourth(p, lo, hi)
    return RemainderBound(side, x, radius, peak, INFLATION * peak)


@dataclass(frozen=True)
class ConsistencyBound:
    """``|stencil - u''(x)| <= Gamma dx^2`` for ``0 < dx < gamma_radius``.

    ``Gamma`` is the sum of the two remainder constants; ``Gamma_tight`` is the
    classical ``max|u''''| / 12``.
    """

    x: float
    gamma_radius: float
    Gamma: float
    Gamma_tight: float
    forward: RemainderBound
    backward: RemainderBound


def consistency_bound(p: BVProblem, x: float) -> ConsistencyBound:
    fwd = remainder_bound(p, x, Side.FORWARD)
    bwd = remainder_bound(p, x, Side.BACKWARD)
    return ConsistencyBound(
        x=x,
        gamma_radius=min(fwd.radius, bwd.radius),
        Gamma=fwd.constant + bwd.constant,
        Gamma_tight=max(fwd.constant, bwd.constant) / 12.0,
        forward=fwd,
        backward=bwd,
    )


def central_diff_second(p: BVProblem, x: float, dx: float) -> float:
    """``(u(x+dx) - 2u(x) + u(x-dx)) / dx^2``; the three samples must lie in ``[0, L]``."""
    if not dx > 0:
        raise ValueError(f"dx must be positive, got {dx}")
    if x - dx < 0 or x + dx > p.L:
        raise ValueError(f"stencil [{x - dx}, {x + dx}] leaves [0, {p.L}]")
    u = p.u(np.array([x - dx, x, x + dx]))
    return float((u[0] - 2.0 * u[1] + u[2]) / dx**2)


def truncation_error(p: BVProblem, x: float, dx: float) -> float:
    """Signed ``u''(x) - stencil``."""
    return float(p.deriv(2, x)) - central_diff_second(p, x, dx)


def default_dx_ladder(p: BVProblem, x: float, levels: int = 6) -> list[float]:
    """Halving ladder from ``min(gamma/2, L/10)``."""
    gamma = min(x, p.L - x)
    start = min(gamma / 2.0, p.L / 10.0)
    return [start * 0.5**k for k in range(levels)]


def fit_log_slope(steps: Sequence[float], errors: Sequence[float],
                  floors: Sequence[float] | None = None) -> float | None:
    """Least-squares slope of ``log|error|`` against ``log step``.

    Points with ``|error| < 1e-14``, or at or below their roundoff ``floors``,
    are dropped; returns ``None`` ("exact to machine precision") when fewer
    than three remain.
    """
    s = np.asarray(steps, dtype=float)
    e = np.abs(np.asarray(errors, dtype=float))
    keep = e >= UNDERFLOW
    if floors is not None:
        keep &= e > np.asarray(floors, dtype=float)
    if np.count_nonzero(keep) < 3:
        return None
    slope, _ = np.polyfit(np.log(s[keep]), np.log(e[keep]), 1)
    return float(slope)


@dataclass(frozen=True)
class OrderFit:
    x: float
    dx_list: list
    tau_list: list
    slope: float | None
    Gamma: float
    Gamma_tight: float
    gamma_radius: float

    @property
    def exact(self) -> bool:
        return self.slope is None

    def to_dict(self) -> dict:
        return asdict(self)


def truncation_order_fit(p: BVProblem, x: float,
                         dx_list: Sequence[float] | None = None) -> OrderFit:
    """Observed order of the central stencil at ``x`` over a geometric ``dx`` ladder."""
    bound = consistency_bound(p, x)
    if dx_list is None:
        dx_list = default_dx_ladder(p, x)
    dx_list = [float(d) for d in dx_list]
    if len(dx_list) < 3:
        raise ValueError("need at least three dx values")
    if any(d >= bound.gamma_radius or d <= 0 for d in dx_list):
        raise ValueError(f"every dx must lie in (0, {bound.gamma_radius})")
    tau = [truncation_error(p, x, d) for d in dx_list]
    return OrderFit(
        x=x,
        dx_list=dx_list,
        tau_list=tau,
        slope=fit_log_slope(dx_list, tau, [stencil_roundoff(p, x, d) for d in dx_list]),
        Gamma=bound.Gamma,
        Gamma_tight=bound.Gamma_tight,
        gamma_radius=bound.gamma_radius,
    )
