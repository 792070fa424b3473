"""Closed-form eigen system of ``A(a, b, c)`` and the stability bound of the scheme.

For ``ac >= 0`` the operator has eigenvalues
``lambda_m = b + 2 sqrt(ac) cos(m pi / (N+1))`` (the root takes the sign of ``a``) and eigenvectors whose j-th
component is ``(a/c)^(j/2) sqrt(2/(N+1)) sin(j m pi / (N+1))``, with 1-based
``m, j``. In the symmetric case the eigenvectors form an orthonormal matrix
``S`` and ``A = S Lambda S^T``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .grid_problem import Grid
from .tridiag import (
    SingularOperatorError,
    TridiagonalOperator,
    matvec,
)

__all__ = [
    "EigenPair",
    "Residual",
    "SpectralSummary",
    "analytic_eigenpair",
    "analytic_eigenvalues",
    "eigenvector_matrix",
    "verify_eigenpair",
    "orthonormality_check",
    "cosine_sum",
    "sine_square_sum",
    "cross_orthogonality_sum",
    "parity_agrees",
    "inverse_spectrum",
    "normality_check",
    "stability_summary",
    "concavity_bound",
    "diagonalization_check",
]


@dataclass(frozen=True, eq=False)
class EigenPair:
    m: int
    eigenvalue: float
    vector: np.ndarray


@dataclass(frozen=True)
class Residual:
    """A measured residual together with the tolerance it is judged against."""

    value: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.value <= self.tolerance

    def __float__(self):
        return self.value


def _check_real_spectrum(A: TridiagonalOperator) -> None:
    if A.a * A.c < 0:
        raise ValueError("a*c < 0 gives a complex spectrum")
    if A.a * A.c == 0 and A.a != A.c:
        raise ValueError("exactly one zero off-diagonal: operator is not diagonalizable")


def _root(A: TridiagonalOperator) -> float:
    # sqrt(ac) carrying the sign of a; with a, c < 0 the pairing with s_m flips
    return math.copysign(math.sqrt(A.a * A.c), A.a)


def _check_symmetric(A: TridiagonalOperator) -> None:
    if not A.is_symmetric:
        raise ValueError(f"operator is not symmetric (a={A.a}, c={A.c})")


def analytic_eigenvalues(A: TridiagonalOperator) -> np.ndarray:
    """All ``lambda_m`` for ``m = 1..N``, in index order."""
    _check_real_spectrum(A)
    m = np.arange(1, A.N + 1)
    return A.b + 2.0 * _root(A) * np.cos(m * np.pi / (A.N + 1))


def _eigenvector(A: TridiagonalOperator, m) -> np.ndarray:
    n = A.N
    j = np.arange(1, n + 1)
    v = math.sqrt(2.0 / (n + 1)) * np.sin(np.outer(j, np.atleast_1d(m)) * np.pi / (n + 1))
    if A.a != A.c:
        v *= (A.a / A.c) ** (j / 2.0)[:, None]
    return v


def analytic_eigenpair(A: TridiagonalOperator, m: int) -> EigenPair:
    """The closed-form pair for 1-based index ``m``; the residual is not checked here."""
    _check_real_spectrum(A)
    if not 1 <= m <= A.N:
        raise ValueError(f"eigen index m={m} outside 1..{A.N}")
    lam = A.b + 2.0 * _root(A) * math.cos(m * math.pi / (A.N + 1))
    return EigenPair(m, lam, _eigenvector(A, m)[:, 0])


def eigenvector_matrix(A: TridiagonalOperator) -> np.ndarray:
    """``S`` with the analytic eigenvector ``s_m`` in column ``m - 1``."""
    _check_real_spectrum(A)
    return _eigenvector(A, np.arange(1, A.N + 1))


def verify_eigenpair(A: TridiagonalOperator, p: EigenPair) -> Residual:
    """``max |A s - lambda s|`` against ``1e-10 (|lambda| + max row sum)``."""
    v = np.asarray(p.vector, dtype=float)
    if v.shape != (A.N,):
        raise ValueError(f"eigenvector of shape {v.shape} does not match operator size {A.N}")
    r = float(np.max(np.abs(matvec(A, v) - p.eigenvalue * v)))
    return Residual(r, 1e-10 * (abs(p.eigenvalue) + A.max_row_sum))


def orthonormality_check(A: TridiagonalOperator) -> Residual:
    """Largest entry of ``|S^T S - I|`` and ``|S S^T - I|``."""
    _check_symmetric(A)
    S = eigenvector_matrix(A)
    eye = np.eye(A.N)
    r = max(np.max(np.abs(S.T @ S - eye)), np.max(np.abs(S @ S.T - eye)))
    return Residual(float(r), 1e-10)


def diagonalization_check(A: TridiagonalOperator) -> Residual:
    """Largest entry of ``|S Lambda S^T - A|`` against ``1e-9`` times the row-sum norm."""
    _check_symmetric(A)
    S = eigenvector_matrix(A)
    recon = (S * analytic_eigenvalues(A)) @ S.T
    r = float(np.max(np.abs(recon - A.to_dense())))
    return Residual(r, 1e-9 * A.max_row_sum)


# -- trigonometric sums ---------------------------------------------------------


def cosine_sum(a0: float, d: float, n: int) -> float:
    """Closed form of ``sum_{k=0}^{n-1} cos(a0 + k d)``.

    Undefined when ``d`` is a multiple of ``2 pi``; the sum is then ``n cos(a0)``
    and callers must branch on it themselves.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    half = math.sin(d / 2.0)
    if abs(half) <= 1e-12:
        raise ZeroDivisionError("d is a multiple of 2*pi; use n*cos(a0)")
    return math.sin(n * d / 2.0) / half * math.cos(a0 + (n - 1) * d / 2.0)


def sine_square_sum(i: int, N: int) -> float:
    """``sum_{m=1}^{N} 2/(N+1) sin^2(i m pi / (N+1))``, which equals 1."""
    if not 1 <= i <= N:
        raise ValueError(f"index i={i} outside 1..{N}")
    # sin^2 t = (1 - cos 2t) / 2
    d = 2.0 * i * math.pi / (N + 1)
    return (N - cosine_sum(d, d, N)) / (N + 1)


def cross_orthogonality_sum(i: int, j: int, N: int) -> float:
    """``2/(N+1) sum_{k=1}^{N} sin(k i pi/(N+1)) sin(k j pi/(N+1))`` for ``i != j`` (1-based).

    Evaluated through the product-to-sum form
    ``1/(N+1) [sum cos(k p pi/(N+1)) - sum cos(k q pi/(N+1))]`` with
    ``p = i - j`` and ``q = i + j``; in 0-based indices ``q`` reads ``i + j + 2``.
    """
    if i == j:
        raise ValueError("i == j: use sine_square_sum")
    for idx in (i, j):
        if not 1 <= idx <= N:
            raise ValueError(f"index {idx} outside 1..{N}")
    step = math.pi / (N + 1)
    diff = (i - j) * step
    plus = (i + j) * step
    return (cosine_sum(diff, diff, N) - cosine_sum(plus, plus, N)) / (N + 1)


def parity_agrees(i: int, j: int) -> bool:
    """Whether ``i - j`` and ``i + j + 2`` are both even or both odd (0-based indices)."""
    return (i - j) % 2 == (i + j + 2) % 2


# -- inverse ----------------------------------------------------------------------


def inverse_spectrum(A: TridiagonalOperator) -> list[EigenPair]:
    """Pairs ``(1/lambda_m, s_m)`` of ``A^{-1}``; eigenvectors are shared with ``A``."""
    lam = analytic_eigenvalues(A)
    scale = max(A.max_row_sum, np.finfo(float).tiny)
    if np.min(np.abs(lam)) <= 1e-12 * scale:
        raise SingularOperatorError("operator has a zero eigenvalue")
    S = eigenvector_matrix(A)
    return [EigenPair(m, 1.0 / lam[m - 1], S[:, m - 1]) for m in range(1, A.N + 1)]


def normality_check(M) -> Residual:
    """Largest entry of ``|M M^T - M^T M|`` against ``1e-9 ||M||_inf^2``."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    r = float(np.max(np.abs(M @ M.T - M.T @ M)))
    row = float(np.max(np.sum(np.abs(M), axis=1)))
    return Residual(r, 1e-9 * row**2)


# -- stability bound --------------------------------------------------------------


@dataclass(frozen=True)
class SpectralSummary:
    """Uniform bound on ``||A_h^{-1}||_2`` for the scheme operator on one grid."""

    N: int
    h: float
    lambda_min: float
    inv_norm: float
    bound: float
    satisfied: bool

    @property
    def lambda_min_abs(self) -> float:
        return abs(self.lambda_min)

    @property
    def spectral_norm_inverse(self) -> float:
        return self.inv_norm

    def to_dict(self) -> dict:
        return asdict(self)


def stability_summary(g: Grid | int, L: float | None = None) -> SpectralSummary:
    """Spectral norm of the inverse scheme operator and its bound ``L^2/4``.

    ``lambda_min`` is the eigenvalue of smallest magnitude (``m = 1``),
    ``(2/h^2)(cos(pi/(N+1)) - 1) = -(4/h^2) sin^2(pi/(2(N+1)))``; the sine form
    avoids cancellation at large ``N``. ``satisfied`` requires both
    ``1/|lambda_m| <= 1/|lambda_min|`` for every ``m`` and ``1/|lambda_min| <= L^2/4``.
    """
    if isinstance(g, Grid):
        if L is not None and not math.isclose(L, g.L, rel_tol=1e-14):
            raise ValueError(f"L={L} does not match grid length {g.L}")
    else:
        g = Grid(int(g), 1.0 if L is None else L)
    if g.N < 3:
        raise ValueError(f"stability analysis needs N >= 3, got N={g.N}")
    N, h = g.N, g.h
    s = math.sin(math.pi / (2 * (N + 1)))
    lambda_min = -4.0 * s * s / (h * h)
    inv_norm = h * h / (4.0 * s * s)
    bound = g.L**2 / 4.0

    # Same spectrum as analytic_eigenvalues(build_scheme_operator(g)), written
    # without the cancellation in b + 2a cos(.) that costs ~N^2 ulps.
    m = np.arange(1, N + 1)
    lam = -4.0 / (h * h) * np.sin(m * np.pi / (2 * (N + 1))) ** 2
    spread_ok = bool(np.all(1.0 / np.abs(lam) <= inv_norm * (1 + 1e-12)))
    spread_ok = spread_ok and int(np.argmin(np.abs(lam))) == 0
    return SpectralSummary(N, h, lambda_min, inv_norm, bound, spread_ok and inv_norm <= bound)


def concavity_bound(x):
    """Whether ``x^2 / sin^2 x <= pi^2/4 + 1e-12`` on ``(0, pi/2]``; accepts scalars or arrays."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0) or np.any(arr > math.pi / 2):
        raise ValueError("concavity bound only holds on (0, pi/2]")
    ok = arr**2 / np.sin(arr) ** 2 <= math.pi**2 / 4 + 1e-12
    return bool(ok) if ok.ndim == 0 else ok
