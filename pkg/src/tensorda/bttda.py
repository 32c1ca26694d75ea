"""Block-term tensor discriminant analysis by deflation.

Repeatedly fits a HODA block on the residual left by the previous blocks,
reconstructs the modeled part through a forward model, and subtracts it. The
concatenated vectorized block latents form one feature vector per sample.
``theta`` maps the eigenvalue-energy fraction of each residual's per-mode
total scatter to the block ranks: 0 gives all-rank-1 blocks (the PARAFAC
special case), 1 gives a single full-rank block.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._batch import project_stack, stack_sq_norms
from ._validation import check_labels, check_tensor_stack
from .forward import fit_activation_patterns, reconstruct
from .hoda import HODA
from .scatter import class_statistics, total_scatter
from .streams import seed_sequence

__all__ = ["Block", "BTTDA", "PARAFACDA", "select_block_ranks", "nmse"]

# Mode energy below this, relative to the sample count, is treated as zero
# when applying the theta rank rule.
_DEGENERATE_TRACE = 1e-12


def nmse(originals, reconstructions):
    """Normalized mean squared reconstruction error.

    ``sum ||X - Xhat||_F^2 / sum ||X||_F^2`` over the sample stacks; raises
    ``ValueError`` when the originals are identically zero.
    """
    originals = check_tensor_stack(originals)
    reconstructions = check_tensor_stack(reconstructions)
    if originals.shape != reconstructions.shape:
        raise ValueError("originals and reconstructions must have equal shapes")
    denom = float(np.sum(stack_sq_norms(originals)))
    if denom <= 0.0:
        raise ValueError("NMSE undefined for all-zero originals")
    return float(np.sum(stack_sq_norms(originals - reconstructions))) / denom


def select_block_ranks(residuals, theta):
    """Per-mode ranks from the eigenvalue-energy fraction rule.

    ``theta=0`` gives rank 1 everywhere, ``theta=1`` full dimensions;
    otherwise each mode keeps the smallest rank whose cumulative eigenvalue
    fraction of the residual total scatter strictly exceeds ``theta``. Modes
    with numerically zero energy fall back to rank 1.
    """
    residuals = check_tensor_stack(residuals)
    theta = float(theta)
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1]; got {theta}")
    dims = residuals.shape[1:]
    if theta == 0.0:
        return tuple(1 for _ in dims)
    if theta == 1.0:
        return tuple(dims)
    n_samples = residuals.shape[0]
    ranks = []
    for k, dim in enumerate(dims):
        scatter = total_scatter(residuals, k)
        trace = float(np.trace(scatter))
        if trace < _DEGENERATE_TRACE * n_samples:
            ranks.append(1)
            continue
        values = np.clip(np.linalg.eigvalsh(scatter)[::-1], 0.0, None)
        fractions = np.cumsum(values) / values.sum()
        ranks.append(int(np.argmax(fractions > theta)) + 1)
    return tuple(ranks)


@dataclass
class Block:
    """One deflation block: backward model, forward patterns, bookkeeping."""

    backward: HODA
    patterns: list
    ranks: tuple
    train_nmse: float
    latent_class_means: np.ndarray  # (n_classes, R_1, ..., R_K)
    forward_n_iter: int = 0
    forward_residuals: np.ndarray = None


class BTTDA(BaseEstimator, TransformerMixin):
    """Deflation of discriminant blocks into a concatenated feature vector.

    Parameters
    ----------
    n_blocks : int
        Number of blocks to extract. With ``theta=1`` the first block already
        explains the data, so the fit truncates to a single block and sets
        ``truncated_``.
    theta : float in [0, 1]
        Eigenvalue-energy fraction controlling the per-mode block ranks.
    shrinkage, init, eig_order, max_iter, tol, random_state
        Passed to the per-block backward solver; ``max_iter`` / ``tol`` also
        bound the forward alternating least squares. Random initialization
        draws a separate sub-stream per block index, so a longer fit is an
        exact extension of a shorter one.

    Attributes
    ----------
    blocks_ : list of Block
    n_blocks_ : int
        Number of blocks actually fitted.
    truncated_ : bool
    train_nmse_ : ndarray
        Training reconstruction NMSE after each block.
    dims_, classes_ : fitted input dimensions and class labels.
    """

    def __init__(
        self,
        n_blocks=1,
        theta=0.0,
        shrinkage=None,
        init="hosvd",
        eig_order="algebraic",
        max_iter=128,
        tol=1e-6,
        random_state=None,
    ):
        self.n_blocks = n_blocks
        self.theta = theta
        self.shrinkage = shrinkage
        self.init = init
        self.eig_order = eig_order
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y):
        X = check_tensor_stack(X, min_samples=2)
        y, classes = check_labels(y, X.shape[0], min_classes=2)
        if self.n_blocks < 1:
            raise ValueError("n_blocks must be >= 1")
        theta = float(self.theta)
        if not 0.0 <= theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1]; got {theta}")

        n_blocks = self.n_blocks
        truncated = False
        if theta == 1.0 and n_blocks > 1:
            warnings.warn(
                "theta=1 explains the data with the first full-rank block; "
                "truncating to a single block",
                UserWarning,
                stacklevel=2,
            )
            n_blocks = 1
            truncated = True

        base_energy = float(np.sum(stack_sq_norms(X)))
        if base_energy <= 0.0:
            raise ValueError("cannot fit on an all-zero dataset")

        residual = X.copy()
        blocks = []
        for b in range(n_blocks):
            ranks = select_block_ranks(residual, theta)
            backward = HODA(
                ranks=ranks,
                max_iter=self.max_iter,
                tol=self.tol,
                shrinkage=self.shrinkage,
                init=self.init,
                eig_order=self.eig_order,
                random_state=self._block_seed(b),
            ).fit(residual, y)
            latents = backward.transform(residual)
            forward = fit_activation_patterns(
                latents, residual, backward.projections_, self.max_iter, self.tol
            )
            residual = residual - reconstruct(latents, forward.patterns)
            stats = class_statistics(latents, y)
            blocks.append(
                Block(
                    backward=backward,
                    patterns=forward.patterns,
                    ranks=ranks,
                    train_nmse=float(np.sum(stack_sq_norms(residual))) / base_energy,
                    latent_class_means=stats.class_means,
                    forward_n_iter=forward.n_iter,
                    forward_residuals=forward.normal_residuals,
                )
            )

        self.blocks_ = blocks
        self.n_blocks_ = len(blocks)
        self.truncated_ = truncated
        self.train_nmse_ = np.asarray([block.train_nmse for block in blocks])
        self.dims_ = tuple(X.shape[1:])
        self.classes_ = classes
        return self

    def transform(self, X):
        """Concatenated vectorized block latents, one row per sample."""
        check_is_fitted(self, "blocks_")
        return self.transform_blocks(X, self.n_blocks_)

    def transform_blocks(self, X, n_blocks):
        """Features from the first ``n_blocks`` blocks only.

        Replays the deflation sample-wise: project with a block's backward
        model, reconstruct through its patterns, subtract, continue.
        """
        check_is_fitted(self, "blocks_")
        if not 1 <= n_blocks <= self.n_blocks_:
            raise ValueError(f"n_blocks must lie in [1, {self.n_blocks_}]")
        X = check_tensor_stack(X, dims=self.dims_)
        n_samples = X.shape[0]
        residual = X.copy()
        pieces = []
        for block in self.blocks_[:n_blocks]:
            latents = project_stack(residual, block.backward.projections_)
            # Fortran-order flattening keeps the first mode fastest, matching
            # the scalar vectorize().
            pieces.append(_vectorize_stack(latents))
            residual = residual - reconstruct(latents, block.patterns)
        return np.concatenate(pieces, axis=1) if pieces else np.empty((n_samples, 0))

    def feature_length(self, n_blocks=None):
        check_is_fitted(self, "blocks_")
        n_blocks = self.n_blocks_ if n_blocks is None else n_blocks
        return int(
            sum(np.prod(block.ranks) for block in self.blocks_[:n_blocks])
        )

    def _block_seed(self, index):
        if self.random_state is None:
            return None
        return seed_sequence(self.random_state, index)


class PARAFACDA(BTTDA):
    """All-rank-1 special case: every block is a single rank-1 term."""

    def __init__(
        self,
        n_blocks=1,
        shrinkage=None,
        init="hosvd",
        eig_order="algebraic",
        max_iter=128,
        tol=1e-6,
        random_state=None,
    ):
        super().__init__(
            n_blocks=n_blocks,
            theta=0.0,
            shrinkage=shrinkage,
            init=init,
            eig_order=eig_order,
            max_iter=max_iter,
            tol=tol,
            random_state=random_state,
        )


def _vectorize_stack(stack):
    n_samples = stack.shape[0]
    n_modes = stack.ndim - 1
    reversed_axes = (0,) + tuple(range(n_modes, 0, -1))
    return stack.transpose(reversed_axes).reshape(n_samples, -1)
