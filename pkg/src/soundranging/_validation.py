"""Input validation helpers shared by the public functions."""

from __future__ import annotations

import numpy as np

from .exceptions import InvalidInputError


def check_point(x, dim: int | None = None, name: str = "x") -> np.ndarray:
    """Return `x` as a finite 1-D float64 array, optionally of length `dim`."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInputError(f"{name} must be a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    if dim is not None and arr.size != dim:
        raise InvalidInputError(f"{name} has dimension {arr.size}, expected {dim}")
    return arr


def check_points(X, dim: int | None = None, name: str = "X") -> np.ndarray:
    """Return `X` as a finite (k, m) float64 array.

    A 1-D input is read as k points of dimension 1 when `dim == 1`, and as a
    single point otherwise.
    """
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1) if dim == 1 else arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] == 0:
        raise InvalidInputError(f"{name} must be a 2-D array of points, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    if dim is not None and arr.shape[1] != dim:
        raise InvalidInputError(f"{name} has points of dimension {arr.shape[1]}, expected {dim}")
    return arr


def frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr
