"""Input validation for state vectors and batches of state pairs."""

from __future__ import annotations

import numpy as np

from .qlin import NORM_TOL, DimensionError


def check_state(state, *, renormalize: bool = False, tol: float = NORM_TOL) -> np.ndarray:
    """Return ``state`` as a 1-d complex array of power-of-two length and unit norm."""
    arr = np.asarray(state, dtype=np.complex128)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d state vector, got shape {arr.shape}")
    dim = arr.size
    if dim < 1 or dim & (dim - 1):
        raise DimensionError(f"state length {dim} is not a power of two")
    if not np.all(np.isfinite(arr)):
        raise ValueError("state contains NaN or inf")
    norm = np.linalg.norm(arr)
    if renormalize:
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return arr / norm
    if abs(norm - 1.0) > tol:
        raise ValueError(f"state norm {norm!r} deviates from 1 by more than {tol}")
    return arr


def check_pairs(X, *, renormalize: bool = False) -> np.ndarray:
    """Validate a batch of state pairs shaped (n_pairs, 2, dim).

    A single pair of shape (2, dim) is promoted to a batch of one.
    """
    arr = np.asarray(X, dtype=np.complex128)
    if arr.ndim == 2 and arr.shape[0] == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1] != 2:
        raise ValueError(f"expected shape (n_pairs, 2, dim), got {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError("no pairs given")
    out = np.empty_like(arr)
    for i in range(arr.shape[0]):
        for j in range(2):
            out[i, j] = check_state(arr[i, j], renormalize=renormalize)
    return out


def check_eps(eps) -> float:
    eps = float(eps)
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return eps
