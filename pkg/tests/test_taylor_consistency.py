import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import Polynomial

from laxfd.grid_problem import BVProblem, constant_rhs, poly, sine
from laxfd.taylor_consistency import (
    Side,
    central_diff_second,
    consistency_bound,
    default_dx_ladder,
    fit_log_slope,
    remainder_backward,
    remainder_bound,
    remainder_forward,
    remainder_roundoff,
    stencil_roundoff,
    truncation_error,
    truncation_order_fit,
)

PI4 = math.pi**4
REGISTRY = [constant_rhs(), sine(1), sine(3), sine(2, 2.5), poly([1.0, 2.0, 3.0]), poly([0.1, 0, 1, -2], 3.0)]


def cubic(L=2.0):
    u = Polynomial([0, 0, 0, 1])
    return BVProblem("cubic", L, tuple(u.deriv(k) if k else u for k in range(5)), u.deriv(2))


def test_forward_remainder_examples():
    assert remainder_forward(constant_rhs(), 0.3, 0.2) == pytest.approx(0.0, abs=1e-16)
    F = remainder_forward(sine(1), 0.5, 0.1)
    s, c, pi = math.sin, math.cos, math.pi
    hand = s(0.6 * pi) - (s(0.5 * pi) + 0.1 * pi * c(0.5 * pi) - 0.005 * pi**2 * s(0.5 * pi)
                         - 0.001 / 6 * pi**3 * c(0.5 * pi))
    assert F == pytest.approx(hand, rel=1e-12)
    assert F == pytest.approx(PI4 * 1e-4 / 24, rel=0.01)


def test_backward_mirrors_forward_for_sine():
    assert remainder_backward(constant_rhs(), 0.3, 0.2) == pytest.approx(0.0, abs=1e-16)
    assert remainder_backward(sine(1), 0.5, 0.1) == pytest.approx(remainder_forward(sine(1), 0.5, 0.1), rel=1e-12)


@pytest.mark.parametrize("rem", [remainder_forward, remainder_backward])
def test_remainder_ratio_stays_bounded(rem):
    p = sine(1)
    ratios = [abs(rem(p, 0.4, dx)) / dx**4 for dx in np.geomspace(1e-1, 1e-3, 9)]
    # |u''''| <= pi^4 so the ratio can never pass pi^4/24
    assert max(ratios) <= PI4 / 24 * 1.001
    assert min(ratios) > 0.5


@pytest.mark.parametrize("x, dx", [(0.0, 0.1), (0.95, 0.1), (0.5, 0.0), (0.5, -0.1)])
def test_remainder_domain(x, dx):
    with pytest.raises(ValueError):
        remainder_forward(sine(1), x, dx)
    with pytest.raises(ValueError):
        remainder_backward(sine(1), 1 - x if x else 0.0, dx)


def test_remainder_bound_examples():
    fwd = remainder_bound(sine(1), 0.5, Side.FORWARD)
    assert fwd.radius == 0.5
    assert fwd.peak == pytest.approx(PI4, rel=1e-12)
    assert fwd.constant == pytest.approx(1.01 * PI4, rel=1e-12)
    assert remainder_bound(constant_rhs(), 0.5, "backward").constant == 0.0
    bwd = remainder_bound(sine(1), 0.25, "backward")
    assert bwd.radius == 0.25
    assert bwd.peak == pytest.approx(PI4 * math.sin(math.pi / 4), rel=1e-12)


def test_remainder_bound_refines_interior_peak():
    # peak of |u''''| for sin(3 pi x) at x = 1/2, away from any sample of the 4096-point grid on [0.1, 1]
    b = remainder_bound(sine(3), 0.1, "forward")
    assert b.peak == pytest.approx((3 * math.pi) ** 4, rel=1e-12)


def test_remainder_bound_rejects_boundary():
    for x in (0.0, 1.0):
        with pytest.raises(ValueError):
            remainder_bound(sine(1), x, "forward")
        with pytest.raises(ValueError):
            consistency_bound(sine(1), x)


def test_consistency_bound_examples():
    cb = consistency_bound(sine(1), 0.5)
    assert cb.Gamma == pytest.approx(2 * 1.01 * PI4, rel=1e-12)
    assert cb.gamma_radius == 0.5
    assert cb.Gamma_tight == pytest.approx(1.01 * PI4 / 12, rel=1e-12)
    assert consistency_bound(constant_rhs(), 0.4).Gamma == 0.0
    tau = truncation_error(sine(1), 0.5, 0.01)
    assert abs(tau) == pytest.approx(PI4 / 12 * 1e-4, rel=1e-3)
    assert abs(tau) <= cb.Gamma_tight * 1e-4 <= cb.Gamma * 1e-4


def test_central_diff_examples():
    for x, dx in [(0.5, 0.5), (0.1, 0.05), (0.77, 0.2)]:
        assert central_diff_second(constant_rhs(), x, dx) == pytest.approx(1.0, abs=1e-12)
    assert central_diff_second(cubic(), 1.0, 0.5) == 6.0
    with pytest.raises(ValueError):
        central_diff_second(sine(1), 0.9, 0.2)
    with pytest.raises(ValueError):
        central_diff_second(sine(1), 0.5, 0.0)


def test_order_fit_examples():
    fit = truncation_order_fit(sine(1), 0.5, [0.1, 0.05, 0.025, 0.0125])
    assert 1.98 <= fit.slope <= 2.02
    assert not fit.exact
    assert truncation_order_fit(constant_rhs(), 0.5).exact
    # u'''' = 72 - 240 x vanishes at 0.3 and u has degree 5, so the stencil is exact there
    assert truncation_order_fit(poly([0.1, 0, 1, -2]), 0.3).exact


def test_order_fit_never_exceeds_two_point_one():
    for p in REGISTRY[1:]:
        for x in np.linspace(0.1, 0.9, 9) * p.L:
            fit = truncation_order_fit(p, x)
            assert fit.exact or fit.slope <= 2.1


def test_order_fit_preconditions():
    with pytest.raises(ValueError):
        truncation_order_fit(sine(1), 0.5, [0.1, 0.05])
    with pytest.raises(ValueError):
        truncation_order_fit(sine(1), 0.2, [0.3, 0.1, 0.05])


def test_order_fit_serializes():
    d = truncation_order_fit(sine(1), 0.5).to_dict()
    assert set(d) == {"x", "dx_list", "tau_list", "slope", "Gamma", "Gamma_tight", "gamma_radius"}


def test_default_ladder():
    assert default_dx_ladder(sine(1), 0.5) == [0.1 * 0.5**k for k in range(6)]
    assert default_dx_ladder(sine(1), 0.1)[0] == 0.05


def test_fit_log_slope_drops_underflow():
    assert fit_log_slope([1, 0.5, 0.25], [0, 1e-15, 1e-16]) is None
    assert fit_log_slope([1, 0.5, 0.25, 0.125], [1, 0.25, 0.0625, 0]) == pytest.approx(2.0)


def _sample(draw_x, draw_dx, p):
    x = p.L * (0.05 + 0.9 * draw_x)
    gamma = min(x, p.L - x)
    # dx bounded away from 0 so the fourth-power bounds stay above roundoff
    return x, gamma * (0.05 + 0.949 * draw_dx)


@settings(max_examples=200)
@given(st.sampled_from(REGISTRY), st.floats(0, 1), st.floats(0, 1))
def test_remainder_bounds_hold(p, ux, ud):
    x, dx = _sample(ux, ud, p)
    cb = consistency_bound(p, x)
    F, G = remainder_forward(p, x, dx), remainder_backward(p, x, dx)
    noise = remainder_roundoff(p, x, dx)
    assert abs(F) <= cb.forward.constant * dx**4 + noise
    assert abs(G) <= cb.backward.constant * dx**4 + noise
    assert abs(F + G) <= abs(F) + abs(G) <= cb.Gamma * dx**4 + 2 * noise
    assert abs(truncation_error(p, x, dx)) <= cb.Gamma * dx**2 + stencil_roundoff(p, x, dx)


@settings(max_examples=200)
@given(st.sampled_from(REGISTRY), st.floats(0, 1), st.floats(0, 1))
def test_remainder_sum_identity(p, ux, ud):
    x, dx = _sample(ux, ud, p)
    F, G = remainder_forward(p, x, dx), remainder_backward(p, x, dx)
    um, u0, up, u2 = float(p.u(x - dx)), float(p.u(x)), float(p.u(x + dx)), float(p.deriv(2, x))
    rhs = up - 2 * u0 + um - dx**2 * u2
    scale = abs(up) + 2 * abs(u0) + abs(um) + dx**2 * abs(u2)
    assert abs((F + G) - rhs) <= 1e-12 * scale


@pytest.mark.parametrize("p", REGISTRY, ids=lambda p: p.name)
def test_registered_derivatives_match_finite_differences(p):
    xs = np.linspace(0.1, 0.9, 17) * p.L
    step = 1e-4 * p.L
    for k in range(1, 5):
        fd = (p.deriv(k - 1, xs + step) - p.deriv(k - 1, xs - step)) / (2 * step)
        exact = p.deriv(k, xs)
        assert np.all(np.abs(fd - exact) <= 1e-6 * np.maximum(1.0, np.abs(exact).max()))
