"""Class statistics, scatter matrices, shrinkage, and the symmetric eigensolver."""

from dataclasses import dataclass

import numpy as np

from ._batch import stack_unfold
from ._validation import check_labels, check_tensor_stack

__all__ = [
    "ClassStats",
    "EigenResult",
    "class_statistics",
    "partial_scatters",
    "total_scatter",
    "ledoit_wolf_shrinkage",
    "shrink_scatter",
    "leading_eigenvectors",
]

# Inputs within this relative max-norm asymmetry are symmetrized, beyond it rejected.
SYMMETRY_RTOL = 1e-9


@dataclass(frozen=True)
class ClassStats:
    """Per-class sample counts and mean tensors.

    ``grand_mean`` is the unweighted mean of the class means, so unbalanced
    classes do not pull it toward the larger class.
    """

    classes: np.ndarray
    counts: np.ndarray
    class_means: np.ndarray  # (n_classes, D_1, ..., D_K)
    grand_mean: np.ndarray  # (D_1, ..., D_K)

    @property
    def n_classes(self):
        return self.classes.shape[0]

    def mean_for(self, labels):
        """Class-mean stack aligned with ``labels``."""
        idx = np.searchsorted(self.classes, labels)
        return self.class_means[idx]


@dataclass(frozen=True)
class EigenResult:
    """Eigenpairs of a symmetric matrix, ordered by descending magnitude."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns


def class_statistics(X, y):
    """Per-class means and the unweighted grand mean of a labeled tensor stack."""
    X = check_tensor_stack(X, min_samples=2)
    y, classes = check_labels(y, X.shape[0], min_classes=1)
    counts = np.empty(classes.shape[0], dtype=np.int64)
    class_means = np.empty((classes.shape[0],) + X.shape[1:])
    for i, label in enumerate(classes):
        members = X[y == label]
        if members.shape[0] == 0:
            raise ValueError(f"class {label!r} has no samples")
        counts[i] = members.shape[0]
        class_means[i] = members.mean(axis=0)
    grand_mean = class_means.mean(axis=0)
    return ClassStats(classes, counts, class_means, grand_mean)


def partial_scatters(partials, y, stats, mode):
    """Within- and between-class scatter of a stack, unfolded along ``mode``.

    Returns ``(S_w, S_b)`` where ``S_w`` sums the outer products of the
    class-mean-centered mode unfoldings over samples and ``S_b`` sums the
    grand-mean-centered class-mean unfoldings weighted by class counts.
    """
    partials = check_tensor_stack(partials)
    y, _ = check_labels(y, partials.shape[0])
    centered = partials - stats.mean_for(y)
    within_cols = stack_unfold(centered, mode)
    within = within_cols @ within_cols.T

    mean_diffs = stats.class_means - stats.grand_mean
    weighted = mean_diffs * np.sqrt(stats.counts.astype(np.float64)).reshape(
        (-1,) + (1,) * (partials.ndim - 1)
    )
    between_cols = stack_unfold(weighted, mode)
    between = between_cols @ between_cols.T
    return _symmetrize(within), _symmetrize(between)


def total_scatter(X, mode):
    """Uncentered scatter of the mode unfoldings summed over samples."""
    X = check_tensor_stack(X)
    cols = stack_unfold(X, mode)
    return _symmetrize(cols @ cols.T)


def ledoit_wolf_shrinkage(centered):
    """Ledoit-Wolf shrinkage intensity for already-centered observations.

    Parameters
    ----------
    centered : ndarray of shape (n_obs, n_features)
        Rows are centered observations.

    Returns
    -------
    float in [0, 1]
    """
    centered = np.asarray(centered, dtype=np.float64)
    n_obs, n_feat = centered.shape
    if n_feat == 1:
        return 0.0
    emp_cov = centered.T @ centered / n_obs
    mu = np.trace(emp_cov) / n_feat
    delta = np.sum(np.square(emp_cov - mu * np.eye(n_feat))) / n_feat
    if delta <= 0.0:
        return 0.0
    sq = np.square(centered)
    beta_bar = np.sum(sq.T @ sq / n_obs - np.square(emp_cov)) / (n_feat * n_obs)
    beta = min(beta_bar, delta)
    return float(max(beta, 0.0) / delta)


def shrink_scatter(S, alpha, fibers=None):
    """Convex combination of ``S`` with a trace-matched identity.

    ``alpha`` may be a float in [0, 1] or ``"auto"``, in which case the
    Ledoit-Wolf intensity is estimated from ``fibers`` (centered observations
    as rows, one column per dimension of ``S``).
    """
    S = _symmetrize_checked(S)
    if isinstance(alpha, str):
        if alpha != "auto":
            raise ValueError(f"unknown shrinkage mode {alpha!r}")
        if fibers is None:
            raise ValueError("alpha='auto' requires the centered fibers")
        alpha = ledoit_wolf_shrinkage(fibers)
    else:
        alpha = float(alpha)
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"shrinkage alpha must lie in [0, 1]; got {alpha}")
    target = (np.trace(S) / S.shape[0]) * np.eye(S.shape[0])
    return (1.0 - alpha) * S + alpha * target


def leading_eigenvectors(S, count, order="magnitude"):
    """Leading eigenpairs of a symmetric matrix.

    Parameters
    ----------
    S : ndarray (n, n)
        Symmetric within ``SYMMETRY_RTOL`` of its transpose.
    count : int
        Number of eigenpairs, ``1 <= count <= n``.
    order : {"magnitude", "algebraic"}
        Ranking of eigenvalues; ties broken by descending signed value, then
        original index.

    Returns
    -------
    EigenResult
        Columns are orthonormal; each column is flipped so its
        largest-magnitude entry is positive.
    """
    S = _symmetrize_checked(S)
    if not 1 <= count <= S.shape[0]:
        raise ValueError(f"count {count} out of range for a {S.shape[0]}x{S.shape[0]} matrix")
    values, vectors = np.linalg.eigh(S)
    if order == "magnitude":
        keys = np.lexsort((np.arange(values.size), -values, -np.abs(values)))
    elif order == "algebraic":
        keys = np.lexsort((np.arange(values.size), -values))
    else:
        raise ValueError(f"unknown eigenvalue order {order!r}")
    keys = keys[:count]
    return EigenResult(values[keys].copy(), _fix_signs(vectors[:, keys]))


def _fix_signs(vectors):
    """Flip each column so its largest-magnitude entry (first on ties) is positive."""
    vectors = np.array(vectors, copy=True)
    for j in range(vectors.shape[1]):
        pivot = np.argmax(np.abs(vectors[:, j]))
        if vectors[pivot, j] < 0:
            vectors[:, j] = -vectors[:, j]
    return vectors


def _symmetrize(S):
    return 0.5 * (S + S.T)


def _symmetrize_checked(S):
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix; got shape {S.shape}")
    scale = np.max(np.abs(S)) if S.size else 0.0
    if scale > 0 and np.max(np.abs(S - S.T)) > SYMMETRY_RTOL * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    return _symmetrize(S)
