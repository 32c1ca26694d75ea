"""Input validation helpers shared by the estimators."""

import numpy as np


def check_tensor_stack(X, dims=None, min_samples=1):
    """Coerce ``X`` to a float64 sample stack of shape ``(n_samples, D_1, ..., D_K)``.

    Parameters
    ----------
    X : array-like
        Stack of K-way sample tensors, sample axis first.
    dims : tuple of int, optional
        Expected per-sample dimensions. A mismatch raises ``ValueError``.
    min_samples : int
        Minimum number of samples required.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim < 2:
        raise ValueError(
            "expected a stack of tensors with shape (n_samples, D_1, ..., D_K); "
            f"got array of shape {X.shape}"
        )
    if any(d < 1 for d in X.shape[1:]):
        raise ValueError(f"every tensor dimension must be >= 1; got {X.shape[1:]}")
    if X.shape[0] < min_samples:
        raise ValueError(f"need at least {min_samples} samples; got {X.shape[0]}")
    if dims is not None and tuple(X.shape[1:]) != tuple(dims):
        raise ValueError(f"sample dimensions {X.shape[1:]} do not match fitted dimensions {tuple(dims)}")
    if not np.isfinite(X).all():
        raise ValueError("input contains NaN or infinite values")
    return X


def check_labels(y, n_samples, min_classes=1):
    """Coerce labels to a 1-D integer-compatible array aligned with the samples."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"labels must be 1-D; got shape {y.shape}")
    if y.shape[0] != n_samples:
        raise ValueError(f"got {y.shape[0]} labels for {n_samples} samples")
    classes = np.unique(y)
    if classes.shape[0] < min_classes:
        raise ValueError(f"need at least {min_classes} classes; got {classes.shape[0]}")
    return y, classes


def check_feature_matrix(F, n_features=None, min_samples=1):
    """Coerce ``F`` to a 2-D float64 feature matrix ``(n_samples, n_features)``."""
    F = np.asarray(F, dtype=np.float64)
    if F.ndim == 1:
        F = F[:, None]
    if F.ndim != 2:
        raise ValueError(f"expected a 2-D feature matrix; got shape {F.shape}")
    if F.shape[0] < min_samples:
        raise ValueError(f"need at least {min_samples} samples; got {F.shape[0]}")
    if n_features is not None and F.shape[1] != n_features:
        raise ValueError(f"feature width {F.shape[1]} does not match fitted width {n_features}")
    return F
