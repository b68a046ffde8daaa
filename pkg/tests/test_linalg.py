"""Basis, leverage-score, and sketching primitives."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from noisycur.linalg import (
    LeverageProfile,
    SketchMatrix,
    apply_sketch_transpose,
    build_sketch,
    check_subspace_embedding,
    column_leverage_and_coherence,
    embedding_distortion,
    numerical_rank,
    orthonormal_basis,
    shrinked_row_scores,
)


def svd_projector(a):
    """Independent projector onto span(a), straight from numpy's SVD."""
    u, sv, _ = np.linalg.svd(a, full_matrices=False)
    tol = max(a.shape) * sv[0] * np.finfo(float).eps
    keep = u[:, sv > tol]
    return keep @ keep.T


class TestOrthonormalBasis:
    def test_single_column_normalized(self):
        u = orthonormal_basis(np.array([[3.0], [0.0], [4.0]]))
        assert u.shape == (3, 1)
        np.testing.assert_allclose(np.abs(u[:, 0]), [0.6, 0.0, 0.8],
                                   atol=1e-12)

    def test_identity_is_its_own_basis(self):
        u = orthonormal_basis(np.eye(3))
        assert u.shape == (3, 3)
        np.testing.assert_allclose(u @ u.T, np.eye(3), atol=1e-10)

    def test_duplicated_columns_collapse(self):
        rng = np.random.default_rng(0)
        col = rng.standard_normal((4, 1))
        m = np.hstack([col, col])
        u = orthonormal_basis(m)
        assert u.shape[1] == 1
        resid = m - u @ (u.T @ m)
        assert np.linalg.norm(resid) < 1e-8
        # cross-check the projector against the independent SVD route
        np.testing.assert_allclose(u @ u.T, svd_projector(m), atol=1e-10)

    def test_zero_matrix_rejected(self):
        with pytest.raises(ValueError):
            orthonormal_basis(np.zeros((3, 2)))

    @given(st.integers(2, 8), st.integers(1, 4), st.integers(0, 100))
    @settings(max_examples=60, deadline=None)
    def test_orthonormality_property(self, m, r, seed):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((m, r))
        u = orthonormal_basis(a)
        gram = u.T @ u
        assert np.abs(gram - np.eye(u.shape[1])).max() < 1e-10


class TestShrinkedRowScores:
    def test_first_two_columns_of_identity(self):
        u = np.eye(4)[:, :2]
        prof = shrinked_row_scores(u)
        np.testing.assert_allclose(prof.scores, [0.375, 0.375, 0.125, 0.125],
                                   atol=1e-15)

    def test_scalar_matrix(self):
        prof = shrinked_row_scores(np.array([[2.5]]))
        np.testing.assert_allclose(prof.scores, [1.0])

    def test_matches_per_row_brute_force(self):
        rng = np.random.default_rng(3)
        u = orthonormal_basis(rng.standard_normal((6, 3)))
        prof = shrinked_row_scores(u)
        m = u.shape[0]
        fro_sq = np.sum(u * u)
        expected = np.array(
            [0.5 * np.dot(u[i], u[i]) / fro_sq + 0.5 / m for i in range(m)])
        np.testing.assert_allclose(prof.scores, expected, rtol=1e-13)
        assert abs(prof.scores.sum() - 1.0) < 1e-12
        assert (prof.scores >= 1 / 12 - 1e-12).all()

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            shrinked_row_scores(np.zeros((3, 2)))

    @given(st.integers(1, 12), st.integers(1, 5), st.integers(0, 200))
    @settings(max_examples=80, deadline=None)
    def test_sum_one_and_floor(self, m, r, seed):
        rng = np.random.default_rng(seed)
        u = rng.standard_normal((m, max(1, min(r, m))))
        prof = shrinked_row_scores(u)
        assert abs(prof.scores.sum() - 1.0) < 1e-12
        assert (prof.scores >= 0.5 / m - 1e-12).all()


class TestColumnLeverage:
    def test_identity(self):
        prof, coherence, beta = column_leverage_and_coherence(np.eye(5))
        np.testing.assert_allclose(prof.scores, np.ones(5), atol=1e-12)
        assert coherence == pytest.approx(1.0)
        assert beta == pytest.approx(1.0)

    def test_single_nonzero_column(self):
        a = np.zeros((4, 3))
        a[:, 1] = [1.0, 2.0, 0.0, -1.0]
        prof, coherence, beta = column_leverage_and_coherence(a)
        np.testing.assert_allclose(prof.scores, [0.0, 1.0, 0.0], atol=1e-12)
        assert coherence == pytest.approx(1.0)
        assert beta == pytest.approx(3.0)  # 1 * n / r with n=3, r=1

    def test_scores_sum_to_rank(self):
        rng = np.random.default_rng(11)
        a = rng.standard_normal((9, 4)) @ rng.standard_normal((4, 7))
        prof, coherence, beta = column_leverage_and_coherence(a)
        assert prof.scores.sum() == pytest.approx(4.0, abs=1e-9)
        assert coherence == pytest.approx(prof.scores.max())
        assert beta == pytest.approx(coherence * 7 / 4)


class TestBuildSketch:
    def test_uniform_scale(self):
        rng = np.random.default_rng(0)
        m, s = 6, 4
        sk = build_sketch(np.full(m, 1 / m), s, rng)
        np.testing.assert_allclose(sk.scales, np.sqrt(m / s))

    def test_degenerate_distribution(self):
        rng = np.random.default_rng(0)
        sk = build_sketch(np.array([1.0, 0.0, 0.0, 0.0]), 3, rng)
        assert (sk.indices == 0).all()
        np.testing.assert_allclose(sk.scales, 1 / np.sqrt(3))

    def test_s_zero_rejected(self):
        with pytest.raises(ValueError):
            build_sketch(np.array([0.5, 0.5]), 0, np.random.default_rng(0))

    def test_empirical_frequencies(self):
        rng = np.random.default_rng(123)
        u = orthonormal_basis(rng.standard_normal((5, 2)))
        prof = shrinked_row_scores(u)
        s = 10_000
        sk = build_sketch(prof, s, rng)
        counts = np.bincount(sk.indices, minlength=5)
        p = prof.scores
        sigma = np.sqrt(s * p * (1 - p))
        assert (np.abs(counts - s * p) <= 3 * sigma + 1e-9).all()

    def test_accepts_profile_and_raw_vector(self):
        rng = np.random.default_rng(5)
        p = np.array([0.25, 0.25, 0.25, 0.25])
        sk1 = build_sketch(p, 6, np.random.default_rng(9))
        sk2 = build_sketch(
            LeverageProfile(p, "shrinked-row"), 6, np.random.default_rng(9))
        np.testing.assert_array_equal(sk1.indices, sk2.indices)


class TestApplySketch:
    def test_single_row_selection(self):
        sk = SketchMatrix(n_rows=3, indices=np.array([1]),
                          scales=np.array([1.0]))
        out = apply_sketch_transpose(sk, np.eye(3))
        np.testing.assert_array_equal(out, [[0.0, 1.0, 0.0]])

    def test_duplicate_rows(self):
        sk = SketchMatrix(n_rows=4, indices=np.array([2, 2]),
                          scales=np.array([1.5, 1.5]))
        a = np.arange(8.0).reshape(4, 2)
        out = apply_sketch_transpose(sk, a)
        np.testing.assert_array_equal(out[0], out[1])

    def test_matches_dense_materialization(self):
        rng = np.random.default_rng(77)
        a = rng.standard_normal((8, 5))
        sk = build_sketch(np.full(8, 1 / 8), 6, rng)
        fast = apply_sketch_transpose(sk, a)
        dense = sk.dense().T @ a
        np.testing.assert_allclose(fast, dense, rtol=1e-12)

    def test_dimension_mismatch(self):
        sk = SketchMatrix(n_rows=3, indices=np.array([0]),
                          scales=np.array([1.0]))
        with pytest.raises(ValueError):
            apply_sketch_transpose(sk, np.eye(4))


class TestEmbeddingCheck:
    def test_full_identity_selection(self):
        m = 5
        sk = SketchMatrix(n_rows=m, indices=np.arange(m),
                          scales=np.ones(m))
        a = np.random.default_rng(1).standard_normal((m, 3))
        assert check_subspace_embedding(sk, a, eps=1e-6)

    def test_rank_deficient_sketch_fails(self):
        rng = np.random.default_rng(2)
        a = rng.standard_normal((6, 2))
        sk = SketchMatrix(n_rows=6, indices=np.array([0]),
                          scales=np.array([1.0]))
        assert not check_subspace_embedding(sk, a, eps=0.5)
        assert embedding_distortion(sk, a) >= 1.0

    def test_monte_carlo_success_rate(self):
        # at the guarantee sketch size for eps=0.5, delta=0.1 the failure
        # rate is at most delta; 100 trials should succeed >= 90 times
        from noisycur.theory import embedding_sketch_size

        rng = np.random.default_rng(42)
        m, r = 40, 3
        u = orthonormal_basis(rng.standard_normal((m, r)))
        prof = shrinked_row_scores(u)
        s = embedding_sketch_size(r, eps=0.5, delta=0.1)
        hits = sum(
            check_subspace_embedding(build_sketch(prof, s, rng), u, 0.5)
            for _ in range(100))
        assert hits >= 90


class TestStatisticalIdentity:
    def test_mean_s_st_is_identity(self):
        rng = np.random.default_rng(2024)
        m, s, n_draws = 6, 4, 100_000
        p = shrinked_row_scores(
            orthonormal_basis(rng.standard_normal((m, 2)))).scores
        acc = np.zeros((m, m))
        diag = np.zeros(m)
        for _ in range(n_draws):
            idx = rng.choice(m, size=s, p=p)
            np.add.at(diag, idx, 1.0 / (s * p[idx]))
        acc[np.arange(m), np.arange(m)] = diag
        mean = acc / n_draws
        assert np.abs(mean - np.eye(m)).max() < 0.05

    def test_mean_via_build_sketch_small(self):
        rng = np.random.default_rng(7)
        m, s = 4, 2
        p = np.full(m, 1 / m)
        acc = np.zeros((m, m))
        n_draws = 20_000
        for _ in range(n_draws):
            sk = build_sketch(p, s, rng)
            d = sk.dense()
            acc += d @ d.T
        assert np.abs(acc / n_draws - np.eye(m)).max() < 0.05


class TestSpectralDiagnostic:
    def test_exact_on_dense_form(self):
        rng = np.random.default_rng(31)
        sk = build_sketch(np.full(7, 1 / 7), 5, rng)
        exact = np.linalg.norm(sk.dense(), 2) ** 2
        assert sk.spectral_norm_sq() == pytest.approx(exact, rel=1e-12)

    def test_duplicates_can_exceed_two_m_over_s(self):
        # three draws landing on one row of a uniform profile push
        # ||S||_2^2 to 3m/s, so the 2m/s figure is a diagnostic to report,
        # not an invariant to assert
        m, s = 4, 3
        p = np.full(m, 1 / m)
        sk = SketchMatrix(n_rows=m, indices=np.zeros(s, dtype=np.int64),
                          scales=np.full(s, 1 / np.sqrt(s * p[0])))
        assert sk.spectral_norm_sq() > 2 * m / s

    def test_scale_bound_for_shrinked_profiles(self):
        # every individual column of S has squared scale <= 2m/s because
        # shrinked scores are floored at 1/(2m)
        rng = np.random.default_rng(8)
        u = orthonormal_basis(rng.standard_normal((9, 3)))
        prof = shrinked_row_scores(u)
        sk = build_sketch(prof, 6, rng)
        assert (sk.scales**2 <= 2 * 9 / 6 + 1e-12).all()


class TestNumericalRank:
    @given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 50))
    @settings(max_examples=60, deadline=None)
    def test_rank_of_product(self, r, extra, seed):
        rng = np.random.default_rng(seed)
        m, n = r + extra, r + 2
        a = rng.standard_normal((m, r)) @ rng.standard_normal((r, n))
        assert numerical_rank(a) == min(r, m, n)
