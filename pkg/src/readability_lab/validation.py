"""Input validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np


def check_matrix(X, name: str = "X", min_rows: int = 1) -> np.ndarray:
    """Coerce to a finite 2-D float array."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {X.shape}")
    if X.shape[0] < min_rows:
        raise ValueError(f"{name} needs at least {min_rows} rows, got {X.shape[0]}")
    if not np.isfinite(X).all():
        raise ValueError(f"{name} contains non-finite values")
    return X


def check_labels(y, name: str = "y") -> np.ndarray:
    """Coerce to a 1-D array of non-negative integer class indices."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {y.shape}")
    if y.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.issubdtype(y.dtype, np.integer):
        rounded = np.asarray(y, dtype=float)
        if not np.allclose(rounded, np.round(rounded)):
            raise ValueError(f"{name} must hold integer class indices")
        y = np.round(rounded).astype(int)
    y = y.astype(int)
    if (y < 0).any():
        raise ValueError(f"{name} must hold non-negative class indices")
    return y


def check_X_y(X, y, min_rows: int = 1) -> tuple[np.ndarray, np.ndarray]:
    X = check_matrix(X, min_rows=min_rows)
    y = check_labels(y)
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
    return X, y


def check_fitted(estimator, attribute: str) -> None:
    if not hasattr(estimator, attribute):
        raise RuntimeError(
            f"{type(estimator).__name__} is not fitted; call fit() first"
        )


def check_n_features(expected: int, X: np.ndarray, name: str = "X") -> None:
    if X.shape[1] != expected:
        raise ValueError(
            f"{name} has {X.shape[1]} features but the model was fitted with {expected}"
        )
