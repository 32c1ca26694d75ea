import numpy as np
import pytest

from tensorda import EffectTerm, SyntheticConfig, generate_synthetic


def unit(dim, index):
    v = np.zeros(dim)
    v[index] = 1.0
    return tuple(v)


class TestGenerateSynthetic:
    def test_noiseless_single_effect(self):
        cfg = SyntheticConfig(
            dims=(3, 4),
            n_per_class=5,
            n_classes=2,
            effects=(EffectTerm((unit(3, 0), unit(4, 1)), (0.0, 1.0)),),
            noise_scale=0.0,
            seed=1,
        )
        X, y = generate_synthetic(cfg)
        assert np.allclose(X[y == 0], 0.0)
        for sample in X[y == 1]:
            assert np.linalg.matrix_rank(sample) == 1
            assert sample[0, 1] == 1.0
            assert np.isclose(np.abs(sample).sum(), 1.0)

    def test_deterministic_per_seed(self):
        cfg = SyntheticConfig(dims=(4, 4), n_per_class=10, n_classes=2, seed=9)
        X1, y1 = generate_synthetic(cfg)
        X2, y2 = generate_synthetic(cfg)
        assert np.array_equal(X1, X2)
        assert np.array_equal(y1, y2)
        X3, _ = generate_synthetic(SyntheticConfig(dims=(4, 4), n_per_class=10, n_classes=2, seed=10))
        assert not np.array_equal(X1, X3)

    def test_kronecker_noise_mode_covariance(self):
        # Monte Carlo vs the separable-covariance algebra: the expected mode-0
        # scatter of one noise sample is sigma^2 * tr(Sigma_1) * Sigma_0.
        rng = np.random.default_rng(3)
        root0 = np.tril(rng.uniform(0.3, 1.0, (4, 4)))
        root1 = np.tril(rng.uniform(0.3, 1.0, (4, 4)))
        sigma0 = root0 @ root0.T
        sigma1 = root1 @ root1.T
        cfg = SyntheticConfig(
            dims=(4, 4),
            n_per_class=2500,
            n_classes=2,
            noise_scale=0.7,
            noise_roots=(root0, root1),
            seed=11,
        )
        X, _ = generate_synthetic(cfg)
        empirical = np.zeros((4, 4))
        for sample in X:
            empirical += sample @ sample.T
        empirical /= X.shape[0]
        expected = 0.7**2 * np.trace(sigma1) * sigma0
        assert np.max(np.abs(empirical - expected)) / np.max(np.abs(expected)) < 0.1

    def test_effect_validation(self):
        with pytest.raises(ValueError):
            SyntheticConfig(
                dims=(3, 4),
                n_per_class=5,
                n_classes=2,
                effects=(EffectTerm((unit(3, 0),), (0.0, 1.0)),),
            )
        with pytest.raises(ValueError):
            SyntheticConfig(
                dims=(3, 4),
                n_per_class=5,
                n_classes=2,
                effects=(EffectTerm(((2.0, 0.0, 0.0), unit(4, 0)), (0.0, 1.0)),),
            )

    def test_negative_noise_rejected(self):
        with pytest.raises(ValueError):
            SyntheticConfig(dims=(2, 2), n_per_class=2, n_classes=2, noise_scale=-1.0)
