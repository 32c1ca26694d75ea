"""Dense multilinear primitives on plain numpy arrays.

A K-way tensor is an ``np.ndarray`` of ``float64`` with ``ndim == K``; a matrix
is a 2-D array. Modes are 0-based. The flat linearization used by
:func:`vectorize` and the file format puts the first mode fastest (Fortran
order), and :func:`unfold` orders columns by the remaining modes ascending with
the lowest remaining mode varying fastest.
"""

import numpy as np

__all__ = [
    "unfold",
    "fold",
    "mode_product",
    "multi_mode_product",
    "frobenius_norm",
    "vectorize",
    "devectorize",
]


def _check_mode(ndim, mode):
    if not 0 <= mode < ndim:
        raise ValueError(f"mode {mode} out of range for a {ndim}-way tensor")


def unfold(tensor, mode):
    """Unfold ``tensor`` along ``mode`` into a ``(D_mode, prod(other dims))`` matrix."""
    tensor = np.asarray(tensor, dtype=np.float64)
    _check_mode(tensor.ndim, mode)
    return np.reshape(
        np.moveaxis(tensor, mode, 0), (tensor.shape[mode], -1), order="F"
    )


def fold(matrix, mode, dims):
    """Inverse of :func:`unfold`: rebuild a tensor of shape ``dims`` from a mode unfolding."""
    matrix = np.asarray(matrix, dtype=np.float64)
    dims = tuple(int(d) for d in dims)
    _check_mode(len(dims), mode)
    rest = dims[:mode] + dims[mode + 1 :]
    expected = (dims[mode], int(np.prod(rest, dtype=np.int64)) if rest else 1)
    if matrix.shape != expected:
        raise ValueError(f"matrix shape {matrix.shape} inconsistent with dims {dims} at mode {mode}")
    moved = np.reshape(matrix, (dims[mode],) + rest, order="F")
    return np.moveaxis(moved, 0, mode)


def mode_product(tensor, matrix, mode):
    """Contract ``matrix`` against one tensor mode.

    ``matrix`` must have ``matrix.shape[1] == tensor.shape[mode]``; the result
    replaces that dimension with ``matrix.shape[0]``.
    """
    tensor = np.asarray(tensor, dtype=np.float64)
    matrix = np.asarray(matrix, dtype=np.float64)
    _check_mode(tensor.ndim, mode)
    if matrix.ndim != 2 or matrix.shape[1] != tensor.shape[mode]:
        raise ValueError(
            f"matrix of shape {matrix.shape} cannot contract mode {mode} "
            f"of size {tensor.shape[mode]}"
        )
    new_dims = tensor.shape[:mode] + (matrix.shape[0],) + tensor.shape[mode + 1 :]
    return fold(matrix @ unfold(tensor, mode), mode, new_dims)


def multi_mode_product(tensor, matrices, skip=None):
    """Apply one matrix per mode in ascending mode order, optionally omitting ``skip``."""
    tensor = np.asarray(tensor, dtype=np.float64)
    if len(matrices) != tensor.ndim:
        raise ValueError(f"expected {tensor.ndim} matrices, got {len(matrices)}")
    if skip is not None:
        _check_mode(tensor.ndim, skip)
    result = tensor
    for mode, matrix in enumerate(matrices):
        if mode == skip:
            continue
        result = mode_product(result, matrix, mode)
    return result


def frobenius_norm(tensor):
    """Square root of the sum of squared entries."""
    return float(np.sqrt(np.sum(np.square(np.asarray(tensor, dtype=np.float64)))))


def vectorize(tensor):
    """Flatten with the first mode varying fastest."""
    return np.reshape(np.asarray(tensor, dtype=np.float64), -1, order="F")


def devectorize(vector, dims):
    """Inverse of :func:`vectorize` for a tensor of shape ``dims``."""
    vector = np.asarray(vector, dtype=np.float64)
    dims = tuple(int(d) for d in dims)
    if vector.size != int(np.prod(dims, dtype=np.int64)):
        raise ValueError(f"vector of length {vector.size} cannot fill dims {dims}")
    return np.reshape(vector, dims, order="F")
