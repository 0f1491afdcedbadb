"""Input validation helpers shared by the estimators and the bank kernels."""

from __future__ import annotations

import numpy as np

from .errors import DataError, EmptyInputError, SchemaError


def as_matrix(X, name: str = "X", dtype=np.float64,
              allow_empty: bool = False) -> np.ndarray:
    """Coerce to a finite 2-D float array of shape (n_samples, n_features)."""
    arr = np.asarray(X, dtype=dtype)
    if arr.ndim == 1:
        # a single list of vectors came in as object/ragged -> reject
        arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 0)
    if arr.ndim != 2:
        raise SchemaError(f"{name} must be 2-D, got shape {arr.shape}")
    if not allow_empty and arr.shape[0] == 0:
        raise EmptyInputError(f"{name} contains no rows")
    if arr.size and not np.isfinite(arr).all():
        raise DataError(f"{name} contains NaN or Inf")
    return arr


def as_vector(x, name: str = "x", dtype=np.float64) -> np.ndarray:
    """Coerce to a finite 1-D float vector."""
    arr = np.asarray(x, dtype=dtype)
    if arr.ndim != 1:
        raise SchemaError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size and not np.isfinite(arr).all():
        raise DataError(f"{name} contains NaN or Inf")
    return arr


def check_dim(actual: int, expected: int, name: str = "input") -> None:
    if actual != expected:
        raise SchemaError(f"{name} has dimension {actual}, expected {expected}")
