"""Higher-order discriminant analysis (HODA).

Fits one orthonormal projection matrix per tensor mode so that the projected
latent tensors maximize the Fisher ratio of between- to within-class scatter,
alternating a discriminant eigenproblem per mode with a re-orthogonalization
against the per-mode total scatter.
"""

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._batch import project_stack, stack_sq_norms, stack_unfold
from ._validation import check_labels, check_tensor_stack
from .scatter import (
    class_statistics,
    leading_eigenvectors,
    ledoit_wolf_shrinkage,
    partial_scatters,
    shrink_scatter,
    total_scatter,
    _fix_signs,
)
from .streams import generator

__all__ = ["HODA", "SingularFitError", "fisher_ratio", "init_projections"]


class SingularFitError(ValueError):
    """Raised when the within-class scatter is degenerate and shrinkage is off."""


def fisher_ratio(latents, y):
    """Between- over within-class scatter of a labeled tensor stack.

    Returns ``math.inf`` when the within-class deviations vanish but the class
    means differ; raises ``ValueError`` on the undefined all-identical case.
    """
    latents = check_tensor_stack(latents, min_samples=2)
    y, classes = check_labels(y, latents.shape[0], min_classes=2)
    stats = class_statistics(latents, y)
    between = float(
        np.sum(stats.counts * stack_sq_norms(stats.class_means - stats.grand_mean))
    )
    within = float(np.sum(stack_sq_norms(latents - stats.mean_for(y))))
    if within > 0.0:
        return between / within
    if between > 0.0:
        return math.inf
    raise ValueError("Fisher ratio undefined: all samples are identical")


def init_projections(X, ranks, strategy="hosvd", random_state=None):
    """Orthonormal-column ``(D_k, R_k)`` starting matrices, one per mode.

    ``strategy="hosvd"`` takes the leading eigenvectors of each per-mode total
    scatter; ``strategy="random"`` draws seeded random orthonormal columns.
    """
    X = check_tensor_stack(X)
    dims = X.shape[1:]
    ranks = _check_ranks(ranks, dims)
    if strategy == "hosvd":
        return [
            leading_eigenvectors(total_scatter(X, k), ranks[k]).eigenvectors
            for k in range(len(dims))
        ]
    if strategy == "random":
        rng = generator(random_state)
        out = []
        for k, dim in enumerate(dims):
            q, r = np.linalg.qr(rng.standard_normal((dim, ranks[k])))
            signs = np.sign(np.diag(r))
            signs[signs == 0] = 1.0
            out.append(_fix_signs(q * signs))
        return out
    raise ValueError(f"unknown init strategy {strategy!r}")


def _check_ranks(ranks, dims):
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != len(dims):
        raise ValueError(f"got {len(ranks)} ranks for {len(dims)} modes")
    for k, (r, d) in enumerate(zip(ranks, dims)):
        if not 1 <= r <= d:
            raise ValueError(f"rank {r} out of range [1, {d}] in mode {k}")
    return ranks


class HODA(BaseEstimator, TransformerMixin):
    """Discriminant multilinear projection onto a reduced core tensor.

    Parameters
    ----------
    ranks : tuple of int or None
        Target core dimensions ``(R_1, ..., R_K)``; ``None`` keeps every mode
        at full dimension.
    max_iter : int
        Maximum number of alternating sweeps over the modes.
    tol : float
        Convergence threshold on the per-mode projector update
        ``||U U^T - U_prev U_prev^T||_F``, which is immune to eigenvector sign
        and rotation ambiguity.
    shrinkage : None, float in [0, 1], or "auto"
        Within-class scatter shrinkage toward a trace-matched identity;
        ``"auto"`` estimates the intensity per mode and sweep by Ledoit-Wolf
        on the class-mean-centered mode fibers.
    init : {"hosvd", "random"}
        Initialization strategy for the projections.
    eig_order : {"algebraic", "magnitude"}
        Ranking used when extracting discriminant eigenvectors of the scatter
        difference. "algebraic" keeps the iteration on the trace-ratio fixed
        point; "magnitude" ranks by absolute value, which can latch onto
        strongly negative eigenvalues and is kept for reference.
    random_state : int, SeedSequence, or None
        Seed for the random initialization.

    Attributes
    ----------
    projections_ : list of ndarray
        Fitted orthonormal-column ``(D_k, R_k)`` matrices.
    ranks_ : tuple of int
    dims_ : tuple of int
    classes_ : ndarray
    n_iter_ : int
    converged_ : bool
    update_norms_ : ndarray
        Final per-mode projector update norms.
    fisher_ratio_path_ : ndarray
        Fisher ratio of the full latent tensors after initialization and each
        sweep; ``fisher_ratio_initial_`` / ``fisher_ratio_final_`` are its ends.
    """

    def __init__(
        self,
        ranks=None,
        max_iter=128,
        tol=1e-6,
        shrinkage=None,
        init="hosvd",
        eig_order="algebraic",
        random_state=None,
    ):
        self.ranks = ranks
        self.max_iter = max_iter
        self.tol = tol
        self.shrinkage = shrinkage
        self.init = init
        self.eig_order = eig_order
        self.random_state = random_state

    def fit(self, X, y):
        X = check_tensor_stack(X, min_samples=2)
        y, classes = check_labels(y, X.shape[0], min_classes=2)
        if X.shape[0] < classes.shape[0]:
            raise ValueError("need at least as many samples as classes")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        dims = X.shape[1:]
        n_modes = len(dims)
        ranks = _check_ranks(self.ranks if self.ranks is not None else dims, dims)

        totals = [total_scatter(X, k) for k in range(n_modes)]
        projections = init_projections(X, ranks, self.init, self.random_state)
        projectors = [u @ u.T for u in projections]
        ratio_path = [fisher_ratio(project_stack(X, projections), y)]

        updates = np.full(n_modes, np.inf)
        n_iter = 0
        converged = False
        for n_iter in range(1, self.max_iter + 1):
            for k in range(n_modes):
                partial = project_stack(X, projections, skip=k)
                stats = class_statistics(partial, y)
                within, between = partial_scatters(partial, y, stats, mode=k)
                within_eff = self._shrink_within(within, partial, y, stats, k)
                ratio_k = self._mode_ratio(projections[k], between, within_eff)
                discriminant = between - ratio_k * within_eff
                basis = leading_eigenvectors(
                    discriminant, ranks[k], order=self.eig_order
                ).eigenvectors
                # Total-scatter re-orthogonalization, solved inside span(basis):
                # eigenvectors of basis basis^T S_t basis basis^T are basis @ Q
                # for Q the eigenvectors of the projected scatter.
                projected = basis.T @ totals[k] @ basis
                rotation = leading_eigenvectors(projected, ranks[k]).eigenvectors
                updated = _fix_signs(basis @ rotation)
                projector = updated @ updated.T
                updates[k] = float(np.linalg.norm(projector - projectors[k]))
                projections[k] = updated
                projectors[k] = projector
            ratio_path.append(fisher_ratio(project_stack(X, projections), y))
            if np.all(updates < self.tol):
                converged = True
                break

        self.projections_ = projections
        self.ranks_ = ranks
        self.dims_ = tuple(dims)
        self.classes_ = classes
        self.n_iter_ = n_iter
        self.converged_ = converged
        self.update_norms_ = updates.copy()
        self.fisher_ratio_path_ = np.asarray(ratio_path)
        self.fisher_ratio_initial_ = float(ratio_path[0])
        self.fisher_ratio_final_ = float(ratio_path[-1])
        return self

    def transform(self, X):
        """Project a stack of tensors onto the fitted core dimensions."""
        check_is_fitted(self, "projections_")
        X = check_tensor_stack(X, dims=self.dims_)
        return project_stack(X, self.projections_)

    def _shrink_within(self, within, partial, y, stats, mode):
        if self.shrinkage is None:
            return within
        if isinstance(self.shrinkage, str) and self.shrinkage == "auto":
            fibers = stack_unfold(partial - stats.mean_for(y), mode).T
            alpha = ledoit_wolf_shrinkage(fibers)
            return shrink_scatter(within, alpha)
        return shrink_scatter(within, self.shrinkage)

    def _mode_ratio(self, projection, between, within):
        numerator = float(np.trace(projection.T @ between @ projection))
        denominator = float(np.trace(projection.T @ within @ projection))
        if denominator <= 0.0:
            raise SingularFitError(
                "within-class scatter has zero trace along the current "
                "projection; enable shrinkage or reduce the ranks"
            )
        return numerator / denominator
