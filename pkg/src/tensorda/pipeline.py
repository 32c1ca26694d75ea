"""Post-projection feature processing and the decision classifier.

The extracted block features are decorrelated by a whitening PCA (all
components kept, degenerate ones zeroed), screened by a univariate Fisher
score, and classified with a pooled-covariance LDA regularized by shrinkage.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_feature_matrix, check_labels
from .bttda import BTTDA
from .forward import reconstruct
from .scatter import ledoit_wolf_shrinkage, _fix_signs

__all__ = [
    "WhiteningPCA",
    "FisherScoreSelector",
    "ShrinkageLDA",
    "BTTDAClassifier",
    "fisher_scores",
    "select_discriminant",
    "class_contrast",
    "fit_feature_pipeline",
]

# Component variances below this fraction of the largest are zeroed rather
# than amplified by the whitening scale.
_VARIANCE_FLOOR = 1e-12


class WhiteningPCA(BaseEstimator, TransformerMixin):
    """Center, rotate to principal axes, and scale to unit variance.

    All principal components are retained; components whose variance falls
    below ``1e-12`` times the largest are scaled by zero so they cannot blow
    up downstream.

    Attributes
    ----------
    mean_ : ndarray (n_features,)
    components_ : ndarray (n_features, n_features)
        Principal axes as columns, ordered by decreasing variance.
    variances_ : ndarray (n_features,)
        Sample variances (ddof=1) along the axes.
    scales_ : ndarray (n_features,)
        ``1/sqrt(variance)`` on retained components, 0 on degenerate ones.
    retained_ : ndarray of bool
    """

    def fit(self, X, y=None):
        X = check_feature_matrix(X, min_samples=2)
        self.mean_ = X.mean(axis=0)
        centered = X - self.mean_
        covariance = centered.T @ centered / (X.shape[0] - 1)
        values, vectors = np.linalg.eigh(covariance)
        order = np.argsort(values)[::-1]
        values = np.clip(values[order], 0.0, None)
        vectors = _fix_signs(vectors[:, order])
        top = values[0] if values.size else 0.0
        retained = values > _VARIANCE_FLOOR * top if top > 0 else np.zeros_like(values, dtype=bool)
        scales = np.zeros_like(values)
        scales[retained] = 1.0 / np.sqrt(values[retained])
        self.components_ = vectors
        self.variances_ = values
        self.scales_ = scales
        self.retained_ = retained
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = check_feature_matrix(X, n_features=self.n_features_in_)
        return (X - self.mean_) @ self.components_ * self.scales_


def fisher_scores(F, y):
    """Univariate Fisher score per feature column.

    Between-class sum of squares (class counts times squared deviation of the
    class mean from the unweighted mean of class means) over the within-class
    sum of squares. A zero denominator yields ``inf`` when the numerator is
    positive and 0 when the score is the undefined 0/0.
    """
    F = check_feature_matrix(F)
    y, classes = check_labels(y, F.shape[0], min_classes=2)
    counts = np.array([(y == c).sum() for c in classes], dtype=np.float64)
    class_means = np.stack([F[y == c].mean(axis=0) for c in classes])
    grand = class_means.mean(axis=0)
    between = (counts[:, None] * np.square(class_means - grand)).sum(axis=0)
    idx = np.searchsorted(classes, y)
    within = np.square(F - class_means[idx]).sum(axis=0)
    scores = np.zeros(F.shape[1])
    positive = within > 0.0
    scores[positive] = between[positive] / within[positive]
    scores[(~positive) & (between > 0.0)] = np.inf
    return scores


def select_discriminant(scores, eligible=None):
    """Boolean keep-mask over feature scores.

    Keeps every score strictly above 1; when none qualifies, keeps exactly the
    highest-scoring eligible feature (ties resolve to the lowest index). The
    mask is never empty.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise ValueError("cannot select from empty scores")
    if eligible is None:
        eligible = np.ones(scores.shape, dtype=bool)
    mask = scores > 1.0
    if not mask.any():
        mask = np.zeros(scores.shape, dtype=bool)
        if eligible.any():
            candidates = np.where(eligible, scores, -np.inf)
        else:
            candidates = scores
        mask[int(np.argmax(candidates))] = True
    return mask


class FisherScoreSelector(BaseEstimator, TransformerMixin):
    """Keep features whose between-class variance exceeds the within-class one.

    Constant (zero-variance) columns carry no information after whitening and
    are excluded from the fallback arg-max.
    """

    def fit(self, X, y):
        X = check_feature_matrix(X)
        self.scores_ = fisher_scores(X, y)
        eligible = X.var(axis=0) > 0.0
        self.mask_ = select_discriminant(self.scores_, eligible)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "mask_")
        X = check_feature_matrix(X, n_features=self.n_features_in_)
        return X[:, self.mask_]


class ShrinkageLDA(BaseEstimator, ClassifierMixin):
    """Pooled-covariance linear discriminant classifier.

    Parameters
    ----------
    shrinkage : "auto", float in [0, 1], or None
        Convex combination of the pooled covariance with its trace-matched
        identity; ``"auto"`` uses the Ledoit-Wolf intensity estimated from the
        class-mean-centered samples.

    Attributes
    ----------
    classes_, priors_, means_ : fitted class labels, priors, and means.
    covariance_ : shrinkage-regularized pooled covariance.
    coef_, intercept_ : linear discriminant parameters; the score of class c
        for a row x is ``x @ coef_[:, c] + intercept_[c]``.
    """

    def __init__(self, shrinkage="auto"):
        self.shrinkage = shrinkage

    def fit(self, X, y):
        X = check_feature_matrix(X, min_samples=2)
        y, classes = check_labels(y, X.shape[0], min_classes=2)
        counts = np.array([(y == c).sum() for c in classes], dtype=np.float64)
        means = np.stack([X[y == c].mean(axis=0) for c in classes])
        centered = X - means[np.searchsorted(classes, y)]
        pooled = centered.T @ centered / X.shape[0]

        if isinstance(self.shrinkage, str) and self.shrinkage == "auto":
            alpha = ledoit_wolf_shrinkage(centered)
        elif self.shrinkage is None:
            alpha = 0.0
        else:
            alpha = float(self.shrinkage)
            if not 0.0 <= alpha <= 1.0:
                raise ValueError(f"shrinkage must lie in [0, 1]; got {alpha}")
        n_feat = X.shape[1]
        mu = np.trace(pooled) / n_feat
        if mu <= 0.0:
            # Degenerate all-constant features: fall back to a unit covariance
            # so the classifier reduces to priors plus mean distances.
            covariance = np.eye(n_feat)
        else:
            covariance = (1.0 - alpha) * pooled + alpha * mu * np.eye(n_feat)

        self.classes_ = classes
        self.priors_ = counts / counts.sum()
        self.means_ = means
        self.covariance_ = covariance
        self.coef_ = np.linalg.solve(covariance, means.T)
        self.intercept_ = -0.5 * np.einsum(
            "cf,fc->c", means, self.coef_
        ) + np.log(self.priors_)
        self.n_features_in_ = n_feat
        return self

    def decision_scores(self, X):
        """Per-class discriminant scores, one column per class."""
        check_is_fitted(self, "coef_")
        X = check_feature_matrix(X, n_features=self.n_features_in_)
        return X @ self.coef_ + self.intercept_

    def decision_function(self, X):
        """Binary problems collapse to the second-minus-first class score."""
        scores = self.decision_scores(X)
        if scores.shape[1] == 2:
            return scores[:, 1] - scores[:, 0]
        return scores

    def predict(self, X):
        scores = self.decision_scores(X)
        return self.classes_[np.argmax(scores, axis=1)]


@dataclass
class _FeaturePipeline:
    """Fitted whiten -> select -> classify chain over a feature matrix."""

    whitener: WhiteningPCA
    selector: FisherScoreSelector
    classifier: ShrinkageLDA

    def features(self, F):
        return self.selector.transform(self.whitener.transform(F))

    def decision_function(self, F):
        return self.classifier.decision_function(self.features(F))

    def predict(self, F):
        return self.classifier.predict(self.features(F))


def fit_feature_pipeline(F, y, lda_shrinkage="auto"):
    """Fit the whitening, selection, and LDA stages on extracted features."""
    whitener = WhiteningPCA().fit(F)
    whitened = whitener.transform(F)
    selector = FisherScoreSelector().fit(whitened, y)
    classifier = ShrinkageLDA(shrinkage=lda_shrinkage).fit(
        selector.transform(whitened), y
    )
    return _FeaturePipeline(whitener, selector, classifier)


class BTTDAClassifier(BaseEstimator, ClassifierMixin):
    """Block-term feature extraction chained with the LDA decision stage.

    Parameters mirror :class:`~tensorda.bttda.BTTDA` plus ``lda_shrinkage``
    for the classifier.
    """

    def __init__(
        self,
        n_blocks=1,
        theta=0.0,
        shrinkage=None,
        lda_shrinkage="auto",
        init="hosvd",
        eig_order="algebraic",
        max_iter=128,
        tol=1e-6,
        random_state=None,
    ):
        self.n_blocks = n_blocks
        self.theta = theta
        self.shrinkage = shrinkage
        self.lda_shrinkage = lda_shrinkage
        self.init = init
        self.eig_order = eig_order
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y):
        self.bttda_ = BTTDA(
            n_blocks=self.n_blocks,
            theta=self.theta,
            shrinkage=self.shrinkage,
            init=self.init,
            eig_order=self.eig_order,
            max_iter=self.max_iter,
            tol=self.tol,
            random_state=self.random_state,
        ).fit(X, y)
        features = self.bttda_.transform(X)
        pipeline = fit_feature_pipeline(features, y, self.lda_shrinkage)
        self.whitener_ = pipeline.whitener
        self.selector_ = pipeline.selector
        self.lda_ = pipeline.classifier
        self.classes_ = self.lda_.classes_
        return self

    def _pipeline(self):
        check_is_fitted(self, "bttda_")
        return _FeaturePipeline(self.whitener_, self.selector_, self.lda_)

    def decision_function(self, X):
        return self._pipeline().decision_function(self.bttda_.transform(X))

    def decision_scores(self, X):
        pipe = self._pipeline()
        return self.lda_.decision_scores(pipe.features(self.bttda_.transform(X)))

    def predict(self, X):
        return self._pipeline().predict(self.bttda_.transform(X))


def class_contrast(model, block, class_a, class_b):
    """Reconstructed difference of two class-mean latents for one block.

    Expands ``mean_latent(class_a) - mean_latent(class_b)`` of the given block
    (0-based) through that block's activation patterns, yielding a tensor in
    the input dimensions.
    """
    if isinstance(model, BTTDAClassifier):
        model = model.bttda_
    check_is_fitted(model, "blocks_")
    if not 0 <= block < model.n_blocks_:
        raise ValueError(f"block {block} out of range [0, {model.n_blocks_})")
    blk = model.blocks_[block]
    classes = list(model.classes_)
    for label in (class_a, class_b):
        if label not in classes:
            raise ValueError(f"unknown class {label!r}")
    difference = (
        blk.latent_class_means[classes.index(class_a)]
        - blk.latent_class_means[classes.index(class_b)]
    )
    return reconstruct(difference[None], blk.patterns)[0]
