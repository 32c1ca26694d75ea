"""Vectorized helpers applying per-mode matrices across a sample stack.

A stack has shape ``(n_samples, D_1, ..., D_K)``; tensor mode ``k`` lives on
stack axis ``k + 1``.
"""

import numpy as np

from .tensor_ops import mode_product


def stack_mode_product(stack, matrix, mode):
    """Apply ``matrix`` to tensor mode ``mode`` of every sample at once."""
    return mode_product(stack, matrix, mode + 1)


def project_stack(stack, matrices, skip=None, transpose=True):
    """Apply one matrix per tensor mode to every sample.

    With ``transpose=True`` (backward projection) each ``matrices[k]`` of shape
    ``(D_k, R_k)`` contracts the data axis; with ``transpose=False`` (forward
    expansion) it contracts the rank axis.
    """
    result = np.asarray(stack, dtype=np.float64)
    for mode, matrix in enumerate(matrices):
        if mode == skip:
            continue
        applied = matrix.T if transpose else matrix
        result = stack_mode_product(result, applied, mode)
    return result


def stack_unfold(stack, mode):
    """Unfold every sample along ``mode`` and concatenate columns.

    Returns a ``(D_mode, n_samples * prod(other dims))`` matrix. Column order
    interleaves samples with the remaining modes but is immaterial for the
    scatter products this feeds.
    """
    stack = np.asarray(stack, dtype=np.float64)
    return np.reshape(
        np.moveaxis(stack, mode + 1, 0), (stack.shape[mode + 1], -1), order="F"
    )


def stack_sq_norms(stack):
    """Per-sample squared Frobenius norms."""
    stack = np.asarray(stack, dtype=np.float64)
    return np.sum(np.square(stack.reshape(stack.shape[0], -1)), axis=1)
