import math

import numpy as np
import pytest

from tensorda import (
    BTTDA,
    BTTDAClassifier,
    FisherScoreSelector,
    ShrinkageLDA,
    WhiteningPCA,
    class_contrast,
    fisher_scores,
    reconstruct,
    select_discriminant,
)
from tensorda.streams import generator


class TestWhiteningPCA:
    def test_training_covariance_identity(self):
        rng = generator(0)
        F = rng.standard_normal((50, 4)) @ rng.standard_normal((4, 4))
        w = WhiteningPCA().fit(F)
        white = w.transform(F)
        cov = np.cov(white, rowvar=False, ddof=1)
        assert np.max(np.abs(cov - np.eye(4))) < 1e-8

    def test_already_white_data_transform_close_to_rotation(self):
        rng = generator(6)
        F = rng.standard_normal((2000, 2))
        held_out = rng.standard_normal((2000, 2))
        w = WhiteningPCA().fit(F)
        transform = w.components_ * w.scales_
        assert np.max(np.abs(transform.T @ transform - np.eye(2))) < 5e-2
        cov = np.cov(w.transform(held_out), rowvar=False, ddof=1)
        assert np.max(np.abs(cov - np.eye(2))) < 5e-2

    def test_constant_column_zeroed(self):
        rng = generator(2)
        F = np.column_stack([rng.standard_normal(30), np.full(30, 7.0)])
        w = WhiteningPCA().fit(F)
        white = w.transform(F)
        assert np.isfinite(white).all()
        assert np.allclose(white[:, ~w.retained_], 0.0)
        assert w.retained_.sum() == 1

    def test_single_feature_variance_four(self):
        F = np.array([[2.0], [0.0], [-2.0]])  # sample variance (ddof=1) = 4
        w = WhiteningPCA().fit(F)
        assert np.isclose(w.scales_[0], 0.5)

    def test_needs_two_samples(self):
        with pytest.raises(ValueError):
            WhiteningPCA().fit(np.ones((1, 3)))


class TestFisherScores:
    def test_constant_component_scores_zero(self):
        F = np.column_stack([np.ones(4), [0.0, 1.0, 2.0, 3.0]])
        y = np.array([0, 0, 1, 1])
        scores = fisher_scores(F, y)
        assert scores[0] == 0.0

    def test_perfect_separation_infinite(self):
        F = np.array([[0.0], [0.0], [1.0], [1.0]])
        y = np.array([0, 0, 1, 1])
        assert fisher_scores(F, y)[0] == math.inf

    def test_scalar_case_matches_fisher_ratio(self):
        F = np.array([[0.0], [1.0], [2.0], [3.0]])
        y = np.array([0, 0, 1, 1])
        assert np.isclose(fisher_scores(F, y)[0], 4.0)


class TestSelectDiscriminant:
    def test_threshold_rule(self):
        mask = select_discriminant(np.array([0.5, 2.0, 1.5]))
        assert np.array_equal(mask, [False, True, True])

    def test_fallback_to_argmax(self):
        mask = select_discriminant(np.array([0.2, 0.9]))
        assert np.array_equal(mask, [False, True])

    def test_boundary_ties_keep_lowest_index(self):
        mask = select_discriminant(np.array([1.0, 1.0]))
        assert np.array_equal(mask, [True, False])

    def test_never_empty(self):
        mask = select_discriminant(np.zeros(3))
        assert mask.sum() == 1

    def test_selector_excludes_constant_columns_from_fallback(self):
        F = np.column_stack([np.full(4, 5.0), [0.0, 0.1, 0.05, 0.12]])
        y = np.array([0, 1, 0, 1])
        selector = FisherScoreSelector().fit(F, y)
        assert np.array_equal(selector.mask_, [False, True])

    def test_selector_all_constant_still_keeps_one(self):
        F = np.full((4, 3), 2.0)
        y = np.array([0, 1, 0, 1])
        selector = FisherScoreSelector().fit(F, y)
        assert selector.mask_.sum() == 1


class TestShrinkageLDA:
    def test_two_separated_1d_classes_threshold_between_means(self):
        F = np.array([[0.0], [0.2], [0.1], [2.0], [2.1], [1.9]])
        y = np.array([0, 0, 0, 1, 1, 1])
        clf = ShrinkageLDA().fit(F, y)
        assert np.array_equal(clf.predict(F), y)
        boundary_scores = clf.decision_function(np.array([[0.1], [1.0], [2.0]]))
        assert boundary_scores[0] < 0 < boundary_scores[2]

    def test_equal_class_means_auc_near_half(self):
        from tensorda import score_metric

        rng = generator(3)
        F_train = rng.standard_normal((2000, 3))
        y_train = np.repeat([0, 1], 1000)
        F_test = rng.standard_normal((2000, 3))
        y_test = np.repeat([0, 1], 1000)
        clf = ShrinkageLDA().fit(F_train, y_train)
        auc = score_metric(clf.decision_function(F_test), y_test, "roc_auc")
        assert abs(auc - 0.5) < 0.05

    def test_three_gaussian_blobs_high_accuracy(self):
        rng = generator(4)
        centers = np.array([[3.0, 0.0], [-1.5, 2.6], [-1.5, -2.6]])
        F = np.concatenate([c + 0.5 * rng.standard_normal((200, 2)) for c in centers])
        y = np.repeat([0, 1, 2], 200)
        clf = ShrinkageLDA().fit(F, y)
        assert (clf.predict(F) == y).mean() > 0.95

    def test_scores_shape_and_argmax(self):
        rng = generator(5)
        F = np.concatenate([rng.standard_normal((20, 2)), 4 + rng.standard_normal((20, 2))])
        y = np.repeat([3, 7], 20)  # non-contiguous labels
        clf = ShrinkageLDA().fit(F, y)
        scores = clf.decision_scores(F)
        assert scores.shape == (40, 2)
        assert np.array_equal(clf.classes_[np.argmax(scores, axis=1)], clf.predict(F))

    def test_shift_invariance_of_argmax(self):
        rng = generator(6)
        F = np.concatenate([rng.standard_normal((25, 3)), 2 + rng.standard_normal((25, 3))])
        y = np.repeat([0, 1], 25)
        clf_base = ShrinkageLDA().fit(F, y)
        clf_shift = ShrinkageLDA().fit(F + 10.0, y)
        assert np.array_equal(clf_base.predict(F), clf_shift.predict(F + 10.0))

    def test_matches_closed_form_1d(self):
        # Equal-prior 1-D case: score difference is (mu2-mu1)/var * x + const.
        F = np.array([[-1.0], [-1.2], [-0.8], [1.0], [1.2], [0.8]])
        y = np.array([0, 0, 0, 1, 1, 1])
        clf = ShrinkageLDA(shrinkage=None).fit(F, y)
        mu = [F[y == c].mean() for c in (0, 1)]
        var = np.concatenate([F[y == c] - m for c, m in zip((0, 1), mu)]).ravel()
        var = float(np.mean(var**2))
        grid = np.linspace(-2, 2, 9)[:, None]
        expected = (mu[1] - mu[0]) / var * grid.ravel() + (mu[0] ** 2 - mu[1] ** 2) / (2 * var)
        assert np.allclose(clf.decision_function(grid), expected, atol=1e-10)

    def test_covariance_positive_definite(self):
        rng = generator(7)
        F = rng.standard_normal((10, 6))  # fewer samples than a full-rank fit wants
        y = np.repeat([0, 1], 5)
        clf = ShrinkageLDA().fit(F, y)
        assert np.linalg.eigvalsh(clf.covariance_).min() > 0


class TestBTTDAClassifier:
    def test_end_to_end_determinism(self):
        rng = generator(8)
        X = rng.standard_normal((40, 4, 5))
        y = np.repeat([0, 1], 20)
        X[y == 1, 0, 0] += 1.0
        a = BTTDAClassifier(n_blocks=2, theta=0.0, random_state=0).fit(X, y)
        b = BTTDAClassifier(n_blocks=2, theta=0.0, random_state=0).fit(X, y)
        assert np.array_equal(a.decision_scores(X), b.decision_scores(X))

    def test_separable_problem_is_learned(self):
        rng = generator(9)
        X = rng.standard_normal((60, 4, 5))
        y = np.repeat([0, 1], 30)
        X[y == 1, 0, 0] += 3.0
        clf = BTTDAClassifier(n_blocks=1, theta=0.5).fit(X, y)
        assert (clf.predict(X) == y).mean() > 0.9

    def test_selected_components_satisfy_selection_rule(self):
        rng = generator(10)
        X = rng.standard_normal((50, 4, 4))
        y = np.repeat([0, 1], 25)
        X[y == 1, 0, 0] += 2.0
        clf = BTTDAClassifier(n_blocks=3, theta=0.2).fit(X, y)
        scores = clf.selector_.scores_
        mask = clf.selector_.mask_
        if mask.sum() > 1:
            assert np.all(scores[mask] > 1.0)
        else:
            kept = int(np.flatnonzero(mask)[0])
            assert scores[kept] == np.max(scores) or np.all(scores <= 1.0)


class TestClassContrast:
    def _fitted(self, seed=11):
        rng = generator(seed)
        X = rng.standard_normal((40, 4, 5))
        y = np.repeat([0, 1], 20)
        X[y == 1, 0, 0] += 1.5
        model = BTTDA(n_blocks=2, theta=0.4).fit(X, y)
        return X, y, model

    def test_same_class_contrast_is_zero(self):
        _, _, model = self._fitted()
        contrast = class_contrast(model, 0, 1, 1)
        assert np.allclose(contrast, 0.0)

    def test_antisymmetry(self):
        _, _, model = self._fitted()
        forward_c = class_contrast(model, 0, 1, 0)
        backward_c = class_contrast(model, 0, 0, 1)
        assert np.array_equal(forward_c, -backward_c)

    def test_full_rank_contrast_matches_reconstructed_mean_difference(self):
        rng = generator(12)
        X = rng.standard_normal((30, 3, 4))
        y = np.repeat([0, 1], 15)
        X[y == 1, 0, 0] += 1.0
        model = BTTDA(n_blocks=1, theta=1.0).fit(X, y)
        block = model.blocks_[0]
        latents = block.backward.transform(X)
        rebuilt = reconstruct(latents, block.patterns)
        mean_diff = rebuilt[y == 1].mean(axis=0) - rebuilt[y == 0].mean(axis=0)
        contrast = class_contrast(model, 0, 1, 0)
        assert np.max(np.abs(contrast - mean_diff)) < 1e-10

    def test_unknown_class_rejected(self):
        _, _, model = self._fitted()
        with pytest.raises(ValueError):
            class_contrast(model, 0, 5, 0)

    def test_classifier_wrapper_accepted(self):
        rng = generator(13)
        X = rng.standard_normal((30, 3, 3))
        y = np.repeat([0, 1], 15)
        X[y == 1, 0, 0] += 1.0
        clf = BTTDAClassifier(n_blocks=1, theta=0.5).fit(X, y)
        contrast = class_contrast(clf, 0, 1, 0)
        assert contrast.shape == (3, 3)
