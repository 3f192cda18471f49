"""Input validation helpers for matrices, weights, and parameters."""

from __future__ import annotations

import numpy as np

from .errors import InputError


def check_square_distance_matrix(matrix, name="matrix") -> np.ndarray:
    """Validate and return a square, symmetric, zero-diagonal, nonnegative
    float64 matrix.  Diagnostics name the offending entry."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"{name}: expected a square matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        i, j = (int(x) for x in np.argwhere(~np.isfinite(m))[0])
        raise InputError(f"{name}[{i}][{j}]: non-finite entry {m[i, j]}")
    diag = np.diagonal(m)
    if np.any(diag != 0):
        i = int(np.nonzero(diag)[0][0])
        raise InputError(f"{name}[{i}][{i}]: diagonal entry {float(m[i, i])!r} != 0")
    asym = np.argwhere(m != m.T)
    if asym.size:
        i, j = (int(x) for x in asym[0])
        raise InputError(
            f"{name}[{i}][{j}]: asymmetric ({float(m[i, j])!r} != "
            f"{float(m[j, i])!r} at [{j}][{i}])")
    neg = np.argwhere(m < 0)
    if neg.size:
        i, j = (int(x) for x in neg[0])
        raise InputError(f"{name}[{i}][{j}]: negative distance {float(m[i, j])!r}")
    return m


def check_weights(weights, n, name="weights") -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (n,):
        raise InputError(f"{name}: expected {n} entries, got shape {w.shape}")
    if not np.isfinite(w).all():
        raise InputError(f"{name}: non-finite entry")
    if np.any(w < 0):
        i = int(np.argwhere(w < 0)[0][0])
        raise InputError(f"{name}[{i}]: negative weight {w[i]!r}")
    return w


def check_k(k, n) -> int:
    k = int(k)
    if not 1 <= k <= n:
        raise InputError(f"k={k} out of range [1, {n}]")
    return k


def check_positive_int(value, name) -> int:
    v = int(value)
    if v < 1:
        raise InputError(f"{name} must be a positive integer, got {value}")
    return v
