"""Small input-checking helpers shared by the modules."""

import numpy as np

ORTHO_TOL = 1e-10


def as_vector(value, size, name):
    """Broadcast ``value`` to a float vector of length ``size``."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(size, float(arr))
    arr = arr.reshape(-1)
    if arr.shape != (size,):
        raise ValueError(f"{name} must have length {size}, got shape {np.shape(value)}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def check_orthogonal(D, tol=ORTHO_TOL):
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError(f"D must be a square matrix, got shape {D.shape}")
    err = np.max(np.abs(D.T @ D - np.eye(D.shape[0])))
    if not err <= tol:
        raise ValueError(f"D is not orthogonal (max |D^T D - I| = {err:.3g})")
    return D


def as_points(y, dim):
    """Return ``(array of shape (n, dim), was_single_point)``."""
    y = np.asarray(y, dtype=float)
    single = y.ndim == 0 or (y.ndim == 1 and dim > 1)
    if y.ndim == 0:
        y = y.reshape(1, 1)
    elif y.ndim == 1:
        y = y.reshape(-1, 1) if dim == 1 else y.reshape(1, -1)
    if y.ndim != 2 or y.shape[-1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got shape {y.shape}")
    return y, single
