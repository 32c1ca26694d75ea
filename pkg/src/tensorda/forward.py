"""Least-squares forward model mapping latent tensors back to data space.

Given latent tensors and the originals they were extracted from, fits one
activation-pattern matrix per mode by alternating least squares so that the
multilinear expansion of the latents reconstructs the originals with minimal
summed squared error.
"""

from dataclasses import dataclass, field

import numpy as np

from ._batch import project_stack
from ._batch import stack_unfold
from ._validation import check_tensor_stack

__all__ = ["ActivationPatterns", "fit_activation_patterns", "reconstruct"]

# Gram condition number beyond which the per-mode solve falls back to ridge.
_RIDGE_CONDITION = 1e12
_RIDGE_SCALE = 1e-10


@dataclass
class ActivationPatterns:
    """Per-mode ``(D_k, R_k)`` expansion matrices with fit diagnostics."""

    patterns: list
    n_iter: int = 0
    converged: bool = False
    update_norms: np.ndarray = field(default_factory=lambda: np.empty(0))
    normal_residuals: np.ndarray = field(default_factory=lambda: np.empty(0))
    sse_path: np.ndarray = field(default_factory=lambda: np.empty(0))


def reconstruct(latents, patterns):
    """Expand each latent tensor through the activation patterns."""
    latents = check_tensor_stack(latents)
    if len(patterns) != latents.ndim - 1:
        raise ValueError(f"expected {latents.ndim - 1} patterns, got {len(patterns)}")
    for k, pattern in enumerate(patterns):
        if pattern.shape[1] != latents.shape[k + 1]:
            raise ValueError(
                f"pattern {k} of shape {pattern.shape} cannot expand rank "
                f"{latents.shape[k + 1]}"
            )
    return project_stack(latents, patterns, transpose=False)


def fit_activation_patterns(latents, originals, init, max_iter=128, tol=1e-6):
    """Alternating least squares for the per-mode activation patterns.

    Parameters
    ----------
    latents : ndarray (n_samples, R_1, ..., R_K)
    originals : ndarray (n_samples, D_1, ..., D_K)
    init : list of ndarray
        Starting ``(D_k, R_k)`` matrices, normally the backward projections
        that produced the latents.
    max_iter, tol : int, float
        Sweep budget and threshold on the raw per-mode update norm
        ``||A_k - A_k_prev||_F`` (signs are pinned by the least squares, so no
        projector trick is needed here).

    Notes
    -----
    Each sweep fixes all patterns but one and solves the mode's ordinary least
    squares via its normal equations. A rank-deficient Gram matrix (condition
    above 1e12) triggers a trace-scaled ridge fallback instead of failing.
    """
    latents = check_tensor_stack(latents)
    originals = check_tensor_stack(originals)
    if latents.shape[0] != originals.shape[0]:
        raise ValueError("latents and originals must be aligned")
    n_modes = originals.ndim - 1
    if latents.ndim - 1 != n_modes or len(init) != n_modes:
        raise ValueError("latents, originals, and init disagree on mode count")

    patterns = [np.array(a, dtype=np.float64, copy=True) for a in init]
    sse_path = [_sse(originals, reconstruct(latents, patterns))]
    updates = np.full(n_modes, np.inf)
    n_iter = 0
    converged = False
    for n_iter in range(1, max_iter + 1):
        for k in range(n_modes):
            gram, cross = _normal_equations(latents, originals, patterns, k)
            updated = _solve_patterns(gram, cross)
            updates[k] = float(np.linalg.norm(updated - patterns[k]))
            patterns[k] = updated
        sse_path.append(_sse(originals, reconstruct(latents, patterns)))
        if np.all(updates < tol):
            converged = True
            break

    residuals = np.empty(n_modes)
    for k in range(n_modes):
        gram, cross = _normal_equations(latents, originals, patterns, k)
        gap = np.linalg.norm(cross - patterns[k] @ gram)
        residuals[k] = gap / max(np.linalg.norm(cross), np.finfo(float).tiny)
    return ActivationPatterns(
        patterns=patterns,
        n_iter=n_iter,
        converged=converged,
        update_norms=updates.copy(),
        normal_residuals=residuals,
        sse_path=np.asarray(sse_path),
    )


def _normal_equations(latents, originals, patterns, mode):
    expanded = project_stack(latents, patterns, skip=mode, transpose=False)
    regressors = stack_unfold(expanded, mode)
    targets = stack_unfold(originals, mode)
    return regressors @ regressors.T, targets @ regressors.T


def _solve_patterns(gram, cross):
    trace = float(np.trace(gram))
    if trace <= 0.0:
        # Zero regressors: the minimum-norm solution is the zero pattern.
        return np.zeros_like(cross)
    condition = np.linalg.cond(gram)
    if not np.isfinite(condition) or condition > _RIDGE_CONDITION:
        ridge = _RIDGE_SCALE * trace / gram.shape[0]
        gram = gram + ridge * np.eye(gram.shape[0])
    return np.linalg.solve(gram, cross.T).T


def _sse(originals, reconstructions):
    return float(np.sum(np.square(originals - reconstructions)))
