import numpy as np
import pytest

from tensorda import (
    BTTDA,
    HODA,
    PARAFACDA,
    select_block_ranks,
)
from tensorda.streams import generator


def labeled_data(seed=0, n=60, dims=(4, 6), separation=1.0):
    rng = generator(seed)
    X = rng.standard_normal((n,) + dims)
    y = np.repeat([0, 1], n // 2)
    X[y == 1, 0, 0] += separation
    X[y == 1, 1, 1] += 0.6 * separation
    return X, y


class TestSelectBlockRanks:
    def test_theta_zero_all_ones(self):
        X, _ = labeled_data()
        assert select_block_ranks(X, 0.0) == (1, 1)

    def test_theta_one_full_dims(self):
        X, _ = labeled_data()
        assert select_block_ranks(X, 1.0) == (4, 6)

    def test_cumulative_fraction_arithmetic(self):
        # Mode-0 scatter with eigenvalues exactly (9, 1): two rank-1 samples
        # with orthogonal mode-0 supports and norms 3 and 1.
        X = np.zeros((2, 2, 3))
        X[0, 0, 0] = 3.0
        X[1, 1, 1] = 1.0
        assert select_block_ranks(X, 0.8)[0] == 1  # 0.9 > 0.8
        assert select_block_ranks(X, 0.95)[0] == 2

    def test_degenerate_mode_falls_back_to_rank_one(self):
        X = np.zeros((3, 2, 2))
        assert select_block_ranks(X, 0.5) == (1, 1)

    def test_theta_out_of_range(self):
        X, _ = labeled_data()
        with pytest.raises(ValueError):
            select_block_ranks(X, 1.5)


def test_select_block_ranks_monotone_in_theta():
    from hypothesis import given, settings
    from hypothesis import strategies as st

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**31), data=st.data())
    def check(seed, data):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((8, 3, 4))
        lo = data.draw(st.floats(0.0, 1.0))
        hi = data.draw(st.floats(0.0, 1.0))
        if lo > hi:
            lo, hi = hi, lo
        ranks_lo = select_block_ranks(X, lo)
        ranks_hi = select_block_ranks(X, hi)
        assert all(a <= b for a, b in zip(ranks_lo, ranks_hi))

    check()


class TestBttdaFit:
    def test_single_block_matches_hoda(self):
        X, y = labeled_data(seed=1)
        theta = 0.5
        block_model = BTTDA(n_blocks=1, theta=theta).fit(X, y)
        ranks = select_block_ranks(X, theta)
        hoda = HODA(ranks=ranks).fit(X, y)
        latents = hoda.transform(X)
        flat = latents.transpose(0, 2, 1).reshape(latents.shape[0], -1)
        features = block_model.transform(X)
        assert np.max(np.abs(features - flat)) < 1e-10

    def test_parafacda_structure(self):
        X, y = labeled_data(seed=2, dims=(4, 4))
        model = BTTDA(n_blocks=3, theta=0.0).fit(X, y)
        assert all(block.ranks == (1, 1) for block in model.blocks_)
        assert model.transform(X).shape == (X.shape[0], 3)

    def test_parafacda_class_matches_theta_zero(self):
        X, y = labeled_data(seed=3)
        a = PARAFACDA(n_blocks=2).fit(X, y)
        b = BTTDA(n_blocks=2, theta=0.0).fit(X, y)
        assert np.array_equal(a.transform(X), b.transform(X))
        assert "theta" not in a.get_params()

    def test_training_nmse_non_increasing(self):
        X, y = labeled_data(seed=4)
        for theta in (0.0, 0.1):
            model = BTTDA(n_blocks=4, theta=theta).fit(X, y)
            assert np.all(np.diff(model.train_nmse_) <= 1e-12)

    def test_full_rank_single_block_lossless(self):
        X, y = labeled_data(seed=5)
        model = BTTDA(n_blocks=1, theta=1.0).fit(X, y)
        assert model.train_nmse_[0] <= 1e-20

    def test_theta_one_truncates_with_warning(self):
        X, y = labeled_data(seed=6)
        with pytest.warns(UserWarning):
            model = BTTDA(n_blocks=4, theta=1.0).fit(X, y)
        assert model.n_blocks_ == 1
        assert model.truncated_

    def test_truncation_equals_refit(self):
        # Deflation never looks ahead, so a long fit truncated to b blocks is
        # exactly the b-block fit.
        X, y = labeled_data(seed=7)
        long_fit = BTTDA(n_blocks=5, theta=0.0).fit(X, y)
        for blocks in (1, 3, 5):
            short_fit = BTTDA(n_blocks=blocks, theta=0.0).fit(X, y)
            assert np.array_equal(
                long_fit.transform_blocks(X, blocks), short_fit.transform(X)
            )

    def test_truncation_equals_refit_random_init(self):
        X, y = labeled_data(seed=8)
        long_fit = BTTDA(n_blocks=4, theta=0.0, init="random", random_state=5).fit(X, y)
        short_fit = BTTDA(n_blocks=2, theta=0.0, init="random", random_state=5).fit(X, y)
        assert np.array_equal(long_fit.transform_blocks(X, 2), short_fit.transform(X))

    def test_orthonormal_blocks(self):
        X, y = labeled_data(seed=9)
        model = BTTDA(n_blocks=3, theta=0.3).fit(X, y)
        for block in model.blocks_:
            for mat in block.backward.projections_:
                gram = mat.T @ mat
                assert np.max(np.abs(gram - np.eye(mat.shape[1]))) < 1e-10

    def test_rejects_bad_block_count(self):
        X, y = labeled_data()
        with pytest.raises(ValueError):
            BTTDA(n_blocks=0).fit(X, y)


class TestBttdaTransform:
    def test_training_round_trip_consistency(self):
        X, y = labeled_data(seed=10)
        model = BTTDA(n_blocks=3, theta=0.2).fit(X, y)
        first = model.transform(X)
        second = model.transform(X)
        assert np.array_equal(first, second)

    def test_feature_length_arithmetic(self):
        X, y = labeled_data(seed=11)
        model = BTTDA(n_blocks=2, theta=0.0).fit(X, y)
        # patch ranks bookkeeping check: (1,1)+(1,1) -> 2 features
        assert model.feature_length() == 2
        mixed = BTTDA(n_blocks=2, theta=0.45).fit(X, y)
        expected = sum(int(np.prod(block.ranks)) for block in mixed.blocks_)
        assert mixed.transform(X).shape[1] == expected

    def test_vectorization_order_first_mode_fastest(self):
        X, y = labeled_data(seed=12)
        model = BTTDA(n_blocks=1, theta=1.0).fit(X, y)
        from tensorda import vectorize

        block = model.blocks_[0]
        latents = block.backward.transform(X)
        features = model.transform(X)
        for n in (0, 3):
            assert np.array_equal(features[n], vectorize(latents[n]))

    def test_dims_checked(self):
        X, y = labeled_data(seed=13)
        model = BTTDA(n_blocks=1).fit(X, y)
        with pytest.raises(ValueError):
            model.transform(np.zeros((2, 5, 5)))

    def test_block_range_checked(self):
        X, y = labeled_data(seed=14)
        model = BTTDA(n_blocks=2).fit(X, y)
        with pytest.raises(ValueError):
            model.transform_blocks(X, 3)
