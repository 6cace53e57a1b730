"""Small dense symmetric-positive-definite kernel: Cholesky factorization,
solves, log-determinants and inverse quadratic forms.

Everything refactors from scratch on each call; matrices here are d x d with
d at most a few dozen, so clarity wins over rank-1 update tricks.
"""

from __future__ import annotations

import math

import numpy as np


class NotPositiveDefiniteError(ValueError):
    """Cholesky hit a non-positive pivot: the matrix is not SPD."""


_SYM_TOL = 1e-12
_PIVOT_TOL = 1e-14


def cholesky(a: np.ndarray) -> np.ndarray:
    """Lower-triangular L with a = L L^T.

    Raises NotPositiveDefiniteError when a pivot falls at or below
    1e-14 * trace(a), and ValueError if the input is visibly asymmetric.
    """
    a = np.asarray(a, dtype=float)
    d = a.shape[0]
    if a.shape != (d, d):
        raise ValueError("matrix must be square")
    scale = np.abs(a).max()
    if scale > 0 and np.abs(a - a.T).max() > _SYM_TOL * scale:
        raise ValueError("matrix is not symmetric")
    thresh = _PIVOT_TOL * float(np.trace(a))
    lower = np.zeros((d, d))
    for j in range(d):
        pivot = a[j, j] - lower[j, :j] @ lower[j, :j]
        if pivot <= thresh:
            raise NotPositiveDefiniteError(f"pivot {pivot:.3e} at column {j}")
        ljj = math.sqrt(pivot)
        lower[j, j] = ljj
        if j + 1 < d:
            lower[j + 1 :, j] = (a[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]) / ljj
    return lower


def forward_sub(lower: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve L z = b for lower-triangular L."""
    d = lower.shape[0]
    z = np.empty(d)
    for i in range(d):
        z[i] = (b[i] - lower[i, :i] @ z[:i]) / lower[i, i]
    return z


def back_sub(lower: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Solve L^T x = z for lower-triangular L."""
    d = lower.shape[0]
    x = np.empty(d)
    for i in range(d - 1, -1, -1):
        x[i] = (z[i] - lower[i + 1 :, i] @ x[i + 1 :]) / lower[i, i]
    return x


def solve_factored(lower: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve A x = b given the Cholesky factor of A."""
    return back_sub(lower, forward_sub(lower, np.asarray(b, dtype=float)))


def solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve the SPD system A x = b."""
    return solve_factored(cholesky(a), b)


def logdet(a: np.ndarray) -> float:
    """log det(A) as 2 * sum(log L_ii)."""
    lower = cholesky(a)
    return 2.0 * float(np.sum(np.log(np.diag(lower))))


def logdet_factored(lower: np.ndarray) -> float:
    return 2.0 * float(np.sum(np.log(np.diag(lower))))


def quad_form_inv(a: np.ndarray, y: np.ndarray) -> float:
    """y^T A^{-1} y, computed as |L^{-1} y|^2 so the result is nonnegative."""
    return quad_form_inv_factored(cholesky(a), y)


def quad_form_inv_factored(lower: np.ndarray, y: np.ndarray) -> float:
    z = forward_sub(lower, np.asarray(y, dtype=float))
    return float(z @ z)
