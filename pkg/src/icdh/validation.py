"""Input validation helpers shared by the estimators and the service layer."""
from __future__ import annotations

import numpy as np


def check_point_matrix(X, n_features: int | None = None) -> np.ndarray:
    """Coerce to a 2-D float64 array of points and reject empty or non-finite input."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D array of points, got shape {X.shape}")
    if X.shape[0] == 0:
        raise ValueError("expected at least one point")
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(f"expected {n_features} features per point, got {X.shape[1]}")
    if not np.all(np.isfinite(X)):
        raise ValueError("input contains non-finite values")
    return X


def check_labels(y, n_classes: int, n_samples: int | None = None) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"expected a 1-D label array, got shape {y.shape}")
    y = y.astype(np.int64)
    if n_samples is not None and y.shape[0] != n_samples:
        raise ValueError(f"expected {n_samples} labels, got {y.shape[0]}")
    if y.size and (y.min() < 0 or y.max() >= n_classes):
        raise ValueError(f"labels must lie in [0, {n_classes})")
    return y


def check_image(img) -> np.ndarray:
    """Validate an (H, W, 3) uint8 RGB image array."""
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) RGB image, got shape {img.shape}")
    if img.dtype != np.uint8:
        raise ValueError(f"expected uint8 pixels, got {img.dtype}")
    return img


def check_fraction(value: float, name: str, *, closed_top: bool = True) -> float:
    value = float(value)
    top_ok = value <= 1.0 if closed_top else value < 1.0
    if not (0.0 <= value and top_ok):
        bracket = "[0, 1]" if closed_top else "[0, 1)"
        raise ValueError(f"{name}={value} outside {bracket}")
    return value
