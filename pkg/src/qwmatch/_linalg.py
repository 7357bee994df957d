"""Dense linear solves: exact rational elimination and float fallbacks."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

ITERATIVE_THRESHOLD = 5000
ITERATION_TOL = 1e-10
ITERATION_CAP = 1_000_000


class SingularSystemError(ArithmeticError):
    pass


def solve_fraction(a: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> list[Fraction]:
    """Solve ``a x = b`` exactly by Gaussian elimination with partial pivoting.

    The pivot is the entry of largest magnitude in the column, lowest row on
    ties, which keeps the elimination order deterministic.
    """
    n = len(a)
    rows = [[Fraction(v) for v in row] + [Fraction(rhs)] for row, rhs in zip(a, b)]
    if any(len(r) != n + 1 for r in rows) or len(rows) != n:
        raise ValueError("solve_fraction needs a square system")
    for col in range(n):
        piv = max(range(col, n), key=lambda r: (abs(rows[r][col]), -r))
        if rows[piv][col] == 0:
            raise SingularSystemError(f"matrix is singular at column {col}")
        rows[col], rows[piv] = rows[piv], rows[col]
        prow = rows[col]
        inv = 1 / prow[col]
        for r in range(col + 1, n):
            f = rows[r][col]
            if f:
                f *= inv
                row = rows[r]
                for c in range(col, n + 1):
                    if prow[c]:
                        row[c] -= f * prow[c]
    x = [Fraction(0)] * n
    for r in range(n - 1, -1, -1):
        row = rows[r]
        acc = row[n]
        for c in range(r + 1, n):
            if row[c]:
                acc -= row[c] * x[c]
        x[r] = acc / row[r]
    return x


def solve_float(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """LU with partial pivoting (LAPACK gesv)."""
    try:
        return np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from None


def fixed_point(apply, x0: np.ndarray, tol: float = ITERATION_TOL, cap: int = ITERATION_CAP) -> np.ndarray:
    """Iterate ``x <- apply(x)`` until the sup-norm step is at most ``tol``."""
    x = x0
    for _ in range(cap):
        nxt = apply(x)
        if np.max(np.abs(nxt - x), initial=0.0) <= tol:
            return nxt
        x = nxt
    raise ArithmeticError(f"fixed-point iteration did not converge in {cap} steps")
