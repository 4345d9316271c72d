"""Input validation helpers shared by the estimator surfaces.

Point-cloud data comes in two shapes: a single (N, 3) cloud, or a batch of
clouds as an (n, N, 3) array / list of (N_i, 3) arrays (defenses produce
ragged lists). These helpers normalize those inputs the way sklearn's
check_array does for flat feature matrices.
"""

import numpy as np


def check_cloud(points, min_points=1, dtype=np.float32, name="points"):
    """Validate a single (N, 3) cloud and return it as a contiguous array."""
    pts = np.asarray(points, dtype=dtype)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"{name} must have shape (N, 3), got {pts.shape}")
    if pts.shape[0] < min_points:
        raise ValueError(f"{name} needs at least {min_points} points, got {pts.shape[0]}")
    if not np.isfinite(pts).all():
        raise ValueError(f"{name} contains non-finite coordinates")
    return np.ascontiguousarray(pts)


def check_cloud_batch(X, min_points=1, dtype=np.float32):
    """Validate a batch of clouds.

    Accepts an (n, N, 3) array or a sequence of (N_i, 3) arrays and returns
    a list of validated clouds (point counts may differ across clouds).
    """
    arr = np.asarray(X, dtype=object) if isinstance(X, (list, tuple)) else np.asarray(X, dtype=dtype)
    if isinstance(X, (list, tuple)):
        return [check_cloud(c, min_points=min_points, dtype=dtype, name=f"X[{i}]") for i, c in enumerate(X)]
    if arr.ndim == 2:
        return [check_cloud(arr, min_points=min_points, dtype=dtype)]
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"X must have shape (n_clouds, N, 3), got {arr.shape}")
    if arr.shape[1] < min_points:
        raise ValueError(f"clouds need at least {min_points} points, got {arr.shape[1]}")
    if not np.isfinite(arr).all():
        raise ValueError("X contains non-finite coordinates")
    return [np.ascontiguousarray(c) for c in arr]


def check_labels(y, n, n_classes=None):
    """Validate integer class labels of length n; returns int64 array."""
    labels = np.asarray(y)
    if labels.shape != (n,):
        raise ValueError(f"y must have shape ({n},), got {labels.shape}")
    if not np.issubdtype(labels.dtype, np.integer):
        rounded = labels.astype(np.int64)
        if not np.array_equal(rounded, labels):
            raise ValueError("y must contain integer class labels")
        labels = rounded
    labels = labels.astype(np.int64)
    if labels.min() < 0:
        raise ValueError("labels must be non-negative")
    if n_classes is not None and labels.max() >= n_classes:
        raise ValueError(f"label {labels.max()} out of range for {n_classes} classes")
    return labels


def check_target(target, n_classes):
    """Validate a single target class index."""
    t = int(target)
    if not 0 <= t < n_classes:
        raise ValueError(f"target {t} out of range [0, {n_classes})")
    return t


def check_fitted(estimator, attribute):
    if not hasattr(estimator, attribute):
        raise RuntimeError(
            f"{type(estimator).__name__} is not fitted yet; call fit() or load a checkpoint"
        )
