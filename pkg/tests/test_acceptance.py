"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from laxfd.grid_problem import Grid, constant_rhs, poly, sine, zero
from laxfd.laxcheck import assemble, global_error, local_error, refinement_study
from laxfd.spectral import (
    analytic_eigenpair,
    analytic_eigenvalues,
    concavity_bound,
    cross_orthogonality_sum,
    normality_check,
    orthonormality_check,
    sine_square_sum,
    stability_summary,
    verify_eigenpair,
)
from laxfd.taylor_consistency import (
    consistency_bound,
    remainder_backward,
    remainder_forward,
    remainder_roundoff,
    stencil_roundoff,
    truncation_error,
)
from laxfd.tridiag import TridiagonalOperator, build_scheme_operator, determinant_recurrence, inverse_matrix, solve
from oracles import gauss_solve, jacobi_eigh, naive_cross_sum, naive_sine_square_sum

REGISTRY = [constant_rhs(), zero(), sine(1), sine(3), poly([1.0, 2.0, 3.0])]


@pytest.fixture
def report(capsys):
    def emit(n, ok, elapsed, budget, detail):
        ok = bool(ok) and elapsed < budget
        with capsys.disabled():
            print(f"\n[criterion {n:2d}] {'PASS' if ok else 'FAIL'} ({elapsed:.3g}s / {budget:g}s) {detail}")
        assert ok, detail
    return emit


def test_c01_determinant_closed_form(report):
    elapsed = math.inf
    for _ in range(5):  # best of five to keep the sub-millisecond budget meaningful
        t = time.perf_counter()
        seq = determinant_recurrence(-2, 40)
        elapsed = min(elapsed, time.perf_counter() - t)
    exact = all(type(m) is int and m == (-1) ** k * (k + 1) for k, m in enumerate(seq))
    report(1, exact and seq[3] == -4, elapsed, 1e-3, f"M_3={seq[3]}, M_40={seq[40]}, integer closed form {exact}")


def test_c02_eigenpair_residuals(report):
    t = time.perf_counter()
    worst, bad = 0.0, 0
    for N in range(3, 257):
        A = build_scheme_operator(Grid(N, 1.0))
        for m in range(1, N + 1):
            r = verify_eigenpair(A, analytic_eigenpair(A, m))
            worst = max(worst, r.value / r.tolerance)
            bad += not r.ok
    report(2, bad == 0, time.perf_counter() - t, 5, f"worst residual/tolerance {worst:.3g}, failures {bad}")


def test_c03_stability_bound(report):
    t = time.perf_counter()
    Ns = [4 * 2**k for k in range(11)]
    bounded, increasing, limit = True, True, True
    for L in (1.0, 2.5, 10.0):
        vals = [stability_summary(N, L).inv_norm for N in Ns]
        bounded &= all(v <= L**2 / 4 for v in vals)
        increasing &= all(b > a for a, b in zip(vals, vals[1:]))
        limit &= abs(vals[-1] - L**2 / math.pi**2) <= 1e-3 * L**2 / math.pi**2
    detail = f"bound {bounded}, limit within 0.1% {limit}, increasing in N {increasing}"
    report(3, bounded and increasing and limit, time.perf_counter() - t, 1, detail)


def test_c04_concavity(report):
    t = time.perf_counter()
    xs = np.linspace(0, math.pi / 2, 100_001)[1:]
    ok = concavity_bound(xs).all()
    gap = abs((math.pi / 2) ** 2 / math.sin(math.pi / 2) ** 2 - math.pi**2 / 4)
    report(4, ok and gap <= 1e-12, time.perf_counter() - t, 1, f"{xs.size} samples, gap at pi/2 {gap:.3g}")


def test_c05_orthonormality_and_trig(report):
    t = time.perf_counter()
    ortho = max(orthonormality_check(TridiagonalOperator(N, 1.0, -2.0, 1.0)).value for N in range(1, 129))
    sq = cross = 0.0
    for N in range(1, 65):
        for i in range(1, N + 1):
            sq = max(sq, abs(sine_square_sum(i, N) - 1), abs(sine_square_sum(i, N) - naive_sine_square_sum(i, N)))
            for j in range(1, N + 1):
                if i != j:
                    got = cross_orthogonality_sum(i, j, N)
                    cross = max(cross, abs(got), abs(got - naive_cross_sum(i, j, N)))
    ok = ortho <= 1e-10 and sq <= 1e-11 and cross <= 1e-11
    report(5, ok, time.perf_counter() - t, 10, f"orthonormality {ortho:.3g}, sine squares {sq:.3g}, cross {cross:.3g}")


def test_c06_inverse_spectrum_normality(report):
    t = time.perf_counter()
    eig_err, normal_ok = 0.0, True
    for N in range(3, 33):
        A = build_scheme_operator(Grid(N, 1.0))
        inv = inverse_matrix(A)
        w, _ = jacobi_eigh(inv)
        eig_err = max(eig_err, np.max(np.abs(w - np.sort(1 / analytic_eigenvalues(A)))))
        normal_ok &= normality_check(inv).ok
    report(6, eig_err <= 1e-8 and normal_ok, time.perf_counter() - t, 5,
           f"reciprocal eigenvalue error {eig_err:.3g}, normality {normal_ok}")


def test_c07_taylor_bounds(report):
    rng = np.random.default_rng(7)
    t = time.perf_counter()
    bad = 0
    worst_identity = 0.0
    for p in REGISTRY:
        for _ in range(200):
            x = rng.uniform(0.01, 0.99) * p.L
            dx = rng.uniform(0.0, 1.0) * min(x, p.L - x)
            if dx == 0.0:
                continue
            cb = consistency_bound(p, x)
            F, G = remainder_forward(p, x, dx), remainder_backward(p, x, dx)
            noise = remainder_roundoff(p, x, dx)
            bad += abs(F) > cb.forward.constant * dx**4 + noise
            bad += abs(G) > cb.backward.constant * dx**4 + noise
            bad += abs(truncation_error(p, x, dx)) > cb.Gamma * dx**2 + stencil_roundoff(p, x, dx)
            um, u0, up, u2 = (float(v) for v in (p.u(x - dx), p.u(x), p.u(x + dx), p.deriv(2, x)))
            scale = abs(up) + 2 * abs(u0) + abs(um) + dx**2 * abs(u2)
            if scale:
                worst_identity = max(worst_identity, abs(F + G - (up - 2 * u0 + um - dx**2 * u2)) / scale)
    ok = bad == 0 and worst_identity <= 1e-12
    report(7, ok, time.perf_counter() - t, 1,
           f"{len(REGISTRY)} problems x 200 samples, violations {bad}, identity rel {worst_identity:.3g}")


def test_c08_convergence_orders(report):
    t = time.perf_counter()
    r = refinement_study(sine(1), [7, 15, 31, 63, 127], "l2_h_weighted")
    k_ok = all(row.K_bound <= 0.25 for row in r.rows)
    ok = 1.9 <= r.local_order <= 2.1 and 1.9 <= r.global_order <= 2.1 and r.chain_ok and k_ok
    report(8, ok, time.perf_counter() - t, 1,
           f"local order {r.local_order:.4f}, global order {r.global_order:.4f}, chain {r.chain_ok}, K<=1/4 {k_ok}")


def test_c09_exactness_sentinel(report):
    p = constant_rhs()
    t = time.perf_counter()
    worst = 0.0
    for N in range(3, 1024):
        m = assemble(p, N)
        worst = max(worst, local_error(m, "max"), global_error(m, "max"))
    report(9, worst <= 1e-9, time.perf_counter() - t, 1, f"largest error over N=3..1023: {worst:.3g}")


def test_c10_solver_oracle(report):
    rng = np.random.default_rng(10)
    cases = []
    for _ in range(100):
        N = int(rng.integers(1, 13))
        a, c = rng.uniform(-2, 2, size=2)
        b = rng.choice([-1, 1]) * (abs(a) + abs(c) + rng.uniform(0.5, 3))  # diagonally dominant
        cases.append((TridiagonalOperator(N, a, b, c), rng.standard_normal(N)))
    t = time.perf_counter()
    worst = 0.0
    for A, f in cases:
        ref, _ = gauss_solve(A.to_dense(), f)
        worst = max(worst, np.max(np.abs(solve(A, f) - ref)) / np.max(np.abs(ref)))
    report(10, worst <= 1e-9, time.perf_counter() - t, 1, f"100 instances, worst relative difference {worst:.3g}")
