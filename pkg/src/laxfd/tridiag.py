"""Constant-coefficient tridiagonal operators ``A(a, b, c)``.

``a`` sits on the sub-diagonal, ``b`` on the diagonal and ``c`` on the
super-diagonal; every other entry is zero. The finite-difference scheme for
``u''`` on a grid with spacing ``h`` is ``A(1/h^2, -2/h^2, 1/h^2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid_problem import Grid

__all__ = [
    "TridiagonalOperator",
    "DeterminantSequence",
    "InverseCheck",
    "SingularOperatorError",
    "build_scheme_operator",
    "matvec",
    "solve",
    "inverse_matrix",
    "determinant_recurrence",
    "determinant_sequence",
    "determinant_nonzero",
    "inverse_check",
]

PIVOT_RTOL = 1e-14
INVERSE_TOL = 1e-9


class SingularOperatorError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class TridiagonalOperator:
    N: int
    a: float
    b: float
    c: float

    def __post_init__(self):
        # the scheme itself needs N >= 3; smaller sizes are allowed for hand checks
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")

    @property
    def is_symmetric(self) -> bool:
        return self.a == self.c

    @property
    def max_row_sum(self) -> float:
        """Infinity norm of the matrix."""
        if self.N == 1:
            return abs(self.b)
        if self.N == 2:
            return abs(self.b) + max(abs(self.a), abs(self.c))
        return abs(self.a) + abs(self.b) + abs(self.c)

    def entry(self, i: int, j: int) -> float:
        if not (0 <= i < self.N and 0 <= j < self.N):
            raise IndexError(f"entry ({i}, {j}) outside a {self.N}x{self.N} operator")
        if i == j:
            return self.b
        if i == j + 1:
            return self.a
        if j == i + 1:
            return self.c
        return 0.0

    def to_dense(self) -> np.ndarray:
        n = self.N
        out = np.zeros((n, n))
        idx = np.arange(n)
        out[idx, idx] = self.b
        out[idx[1:], idx[:-1]] = self.a
        out[idx[:-1], idx[1:]] = self.c
        return out


def build_scheme_operator(g: Grid) -> TridiagonalOperator:
    """Central second-difference operator on the interior points of ``g``."""
    if g.N < 3:
        raise ValueError(f"the scheme operator needs N >= 3, got N={g.N}")
    inv_h2 = 1.0 / g.h**2
    return TridiagonalOperator(g.N, inv_h2, -2.0 * inv_h2, inv_h2)


def _as_vector(A: TridiagonalOperator, v) -> np.ndarray:
    x = np.asarray(v, dtype=float)
    if x.shape != (A.N,):
        raise ValueError(f"vector of shape {x.shape} does not match operator size {A.N}")
    return x


def matvec(A: TridiagonalOperator, v) -> np.ndarray:
    """``(Av)_i = a v_{i-1} + b v_i + c v_{i+1}``; out-of-range neighbours are dropped."""
    x = _as_vector(A, v)
    out = A.b * x
    out[1:] += A.a * x[:-1]
    out[:-1] += A.c * x[1:]
    return out


def solve(A: TridiagonalOperator, f) -> np.ndarray:
    """Solve ``A u = f`` by forward elimination and back substitution (Thomas sweep).

    Raises :class:`SingularOperatorError` when a pivot falls below
    ``1e-14`` relative to the largest coefficient.
    """
    rhs = _as_vector(A, f)
    n = A.N
    scale = max(abs(A.a), abs(A.b), abs(A.c))
    if scale == 0.0:
        raise SingularOperatorError("zero operator")
    tol = PIVOT_RTOL * scale

    # plain floats: element access on ndarrays dominates the cost of this loop
    a, b, c = float(A.a), float(A.b), float(A.c)
    r = rhs.tolist()
    cp = [0.0] * n
    dp = [0.0] * n
    pivot = b
    if abs(pivot) <= tol:
        raise SingularOperatorError("zero pivot in row 0")
    cp[0] = c / pivot
    dp[0] = r[0] / pivot
    for i in range(1, n):
        pivot = b - a * cp[i - 1]
        if abs(pivot) <= tol:
            raise SingularOperatorError(f"zero pivot in row {i}")
        cp[i] = c / pivot
        dp[i] = (r[i] - a * dp[i - 1]) / pivot

    u = dp
    for i in range(n - 2, -1, -1):
        u[i] -= cp[i] * u[i + 1]
    return np.array(u)


def inverse_matrix(A: TridiagonalOperator) -> np.ndarray:
    """Dense inverse assembled column by column from :func:`solve`."""
    eye = np.eye(A.N)
    return np.column_stack([solve(A, eye[:, k]) for k in range(A.N)])


@dataclass(frozen=True)
class DeterminantSequence:
    """Normalized leading minors ``M_k = det(A_k) / a^k`` for ``k = 0..len-1``.

    ``D = b/a`` and ``r = c/a``; for the symmetric operators ``r = 1``.
    """

    D: float
    values: tuple
    r: float = 1

    def __getitem__(self, k):
        return self.values[k]

    def __len__(self):
        return len(self.values)


def determinant_recurrence(D, k: int, r=1) -> list:
    """``M_0 = 1, M_1 = D, M_j = D M_{j-1} - r M_{j-2}``.

    With ``r = c/a = 1`` this is the symmetric recurrence
    ``M_j = D M_{j-1} - M_{j-2}``. Integer or ``Fraction`` inputs stay exact;
    floats run in floating point.
    """
    if int(k) != k or k < 0:
        raise ValueError(f"k must be a non-negative integer, got {k}")
    one = 1.0 if isinstance(D, float) else D ** 0
    seq = [one]
    if k >= 1:
        seq.append(D)
    for _ in range(2, k + 1):
        seq.append(D * seq[-1] - r * seq[-2])
    return seq


def _snap(x):
    # Ratios such as (-2/h^2)/(1/h^2) land within rounding of an integer; keep them exact.
    nearest = round(x)
    if abs(x - nearest) <= 4 * np.finfo(float).eps * max(1.0, abs(x)):
        return int(nearest)
    return x


def determinant_sequence(A: TridiagonalOperator, k: int | None = None) -> DeterminantSequence:
    """Normalized determinants ``M_0..M_k`` of the leading blocks of ``A`` (default ``k = N``).

    ``det(A restricted to size k) = a^k * M_k``. Working with ``M_k`` avoids the
    overflow of ``a^k = h^(-2k)``.
    """
    if A.a == 0:
        raise ZeroDivisionError("determinant recurrence needs a nonzero sub-diagonal")
    D, r = _snap(A.b / A.a), _snap(A.c / A.a)
    return DeterminantSequence(D, tuple(determinant_recurrence(D, A.N if k is None else k, r)), r)


def determinant_nonzero(A: TridiagonalOperator) -> bool:
    if A.a == 0:
        return A.b != 0
    seq = determinant_sequence(A)
    running = max(1.0, max(abs(float(m)) for m in seq.values))
    return abs(float(seq.values[-1])) > 1e-12 * running


@dataclass(frozen=True)
class InverseCheck:
    left: float
    right: float
    tolerance: float = INVERSE_TOL

    @property
    def verified(self) -> bool:
        return self.left <= self.tolerance and self.right <= self.tolerance


def inverse_check(A: TridiagonalOperator, Ainv) -> InverseCheck:
    """Max-entry residuals of ``A Ainv - I`` (``left``) and ``Ainv A - I`` (``right``)."""
    inv = np.asarray(Ainv, dtype=float)
    if inv.shape != (A.N, A.N):
        raise ValueError(f"expected a {A.N}x{A.N} inverse, got shape {inv.shape}")
    eye = np.eye(A.N)
    dense = A.to_dense()
    left = float(np.max(np.abs(dense @ inv - eye)))
    right = float(np.max(np.abs(inv @ dense - eye)))
    return InverseCheck(left, right)
