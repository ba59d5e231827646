"""Gaussian elimination with partial pivoting for small complex systems.

Works on a single system ``a x = b`` or on a stack of them with leading batch
dimensions. Only elementwise array operations are used, so each system's
result is independent of what else is in the batch.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularMatrixError

DEFAULT_RANK_TOL = 1e-13


def solve_pivoted(a, b, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Solve ``a x = b`` by row-pivoted elimination and back substitution.

    a : (..., n, n) complex array
    b : (..., n) complex array

    The pivot in each column is the entry of largest modulus on or below the
    diagonal (first one wins on ties). A pivot smaller than
    ``rank_tol * max|a|`` raises SingularMatrixError.
    """
    a = np.array(a, dtype=complex)
    x = np.array(b, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {a.shape}")
    if x.shape != a.shape[:-1]:
        raise ValueError(f"rhs shape {x.shape} does not match matrix shape {a.shape}")
    n = a.shape[-1]
    batch = a.shape[:-2]
    a = a.reshape(-1, n, n)
    x = x.reshape(-1, n)
    rows = np.arange(a.shape[0])
    scale = np.max(np.abs(a), axis=(1, 2))
    thresh = rank_tol * np.where(scale > 0, scale, 1.0)

    for k in range(n):
        p = k + np.argmax(np.abs(a[:, k:, k]), axis=1)
        pivot_mag = np.abs(a[rows, p, k])
        bad = pivot_mag <= thresh
        if np.any(bad):
            idx = int(np.flatnonzero(bad)[0])
            raise SingularMatrixError(
                f"pivot {pivot_mag[idx]:.3e} in column {k + 1} below tolerance "
                f"{thresh[idx]:.3e} (system {idx})"
            )
        swap = p != k
        if np.any(swap):
            r = rows[swap]
            pk = p[swap]
            row_k = a[r, k, :].copy()
            a[r, k, :] = a[r, pk, :]
            a[r, pk, :] = row_k
            xk = x[r, k].copy()
            x[r, k] = x[r, pk]
            x[r, pk] = xk
        if k + 1 < n:
            factors = a[:, k + 1 :, k] / a[:, k, k][:, None]
            a[:, k + 1 :, k:] -= factors[:, :, None] * a[:, k, k:][:, None, :]
            x[:, k + 1 :] -= factors * x[:, k][:, None]

    for k in range(n - 1, -1, -1):
        acc = x[:, k] - np.sum(a[:, k, k + 1 :] * x[:, k + 1 :], axis=1)
        x[:, k] = acc / a[:, k, k]
    return x.reshape(*batch, n)


def condition_estimate(a) -> np.ndarray:
    """1-norm condition number; inf for exactly singular matrices."""
    a = np.asarray(a, dtype=complex)
    with np.errstate(all="ignore"):
        try:
            return np.abs(np.linalg.cond(a, 1))
        except np.linalg.LinAlgError:
            return np.full(a.shape[:-2], np.inf)
