"""Thomas algorithm for tridiagonal systems, with a reusable factorization."""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import LinearSolveFailure


@njit(cache=True)
def _factor(lower, diag, upper):
    n = diag.shape[0]
    cp = np.empty(n)
    denom = np.empty(n)
    denom[0] = diag[0]
    cp[0] = upper[0] / denom[0] if n > 1 else 0.0
    for i in range(1, n):
        denom[i] = diag[i] - lower[i] * cp[i - 1]
        cp[i] = upper[i] / denom[i] if i < n - 1 else 0.0
    return cp, denom


@njit(cache=True)
def _substitute(lower, cp, denom, rhs):
    n = rhs.shape[0]
    x = np.empty(n)
    x[0] = rhs[0] / denom[0]
    for i in range(1, n):
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / denom[i]
    for i in range(n - 2, -1, -1):
        x[i] -= cp[i] * x[i + 1]
    return x


class Tridiagonal:
    """LU-factored tridiagonal matrix.

    ``lower[i]`` multiplies ``x[i-1]`` and ``upper[i]`` multiplies ``x[i+1]``
    in row ``i``; ``lower[0]`` and ``upper[-1]`` are ignored.  No pivoting,
    so the matrix should be diagonally dominant.
    """

    def __init__(self, lower, diag, upper):
        self.lower = np.ascontiguousarray(lower, dtype=float)
        diag = np.ascontiguousarray(diag, dtype=float)
        upper = np.ascontiguousarray(upper, dtype=float)
        self.cp, self.denom = _factor(self.lower, diag, upper)
        if not np.all(np.isfinite(self.denom)) or np.any(self.denom == 0.0):
            raise LinearSolveFailure("zero pivot in tridiagonal factorization")

    def solve(self, rhs) -> np.ndarray:
        return _substitute(self.lower, self.cp, self.denom, np.ascontiguousarray(rhs, dtype=float))


def solve_tridiagonal(lower, diag, upper, rhs) -> np.ndarray:
    return Tridiagonal(lower, diag, upper).solve(rhs)
