import numpy as np
import pytest

from etmvol.errors import DegeneracyError, DomainError
from etmvol.features import (
    FEATURE_NAMES,
    FeatureMatrix,
    acf_features,
    distribution_features,
    hurst,
    normalize_features,
    pca_instance_space,
    r2_attribution,
    spectral_entropy,
    spikiness,
    trend_remainder,
)


class TestAcfFeatures:
    def test_alternating_series(self):
        x = np.tile([1.0, -1.0], 50)
        f1, _ = acf_features(x)
        assert f1 == pytest.approx(-0.99)

    def test_iid_noise_bounds(self):
        rng = np.random.default_rng(0)
        f1, f2 = acf_features(rng.standard_normal(10_000))
        assert abs(f1) < 0.05
        assert f2 < 0.01

    def test_f2_bound(self):
        rng = np.random.default_rng(1)
        x = np.cumsum(rng.standard_normal(200))
        _, f2 = acf_features(x)
        assert 0.0 <= f2 <= 10.0

    def test_degenerate(self):
        with pytest.raises(DegeneracyError):
            acf_features(np.ones(50))

    def test_too_short(self):
        with pytest.raises(DomainError):
            acf_features(np.arange(5.0))


class TestHurst:
    def test_white_noise(self):
        rng = np.random.default_rng(7)
        h = hurst(rng.standard_normal(10_000))
        assert 0.4 <= h <= 0.6

    def test_random_walk(self):
        rng = np.random.default_rng(7)
        h = hurst(np.cumsum(rng.standard_normal(10_000)))
        assert h > 0.8

    def test_clamped_range(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            h = hurst(rng.standard_normal(64))
            assert 0.0 <= h <= 1.0

    def test_constant_raises(self):
        with pytest.raises(DegeneracyError):
            hurst(np.full(64, 3.0))


class TestDistributionFeatures:
    def test_symmetric_two_point(self):
        rv = np.array([1.0, 3.0, 1.0, 3.0])
        f4, f5, _ = distribution_features(rv, np.array([0.1]))
        assert f4 == pytest.approx(0.0)
        assert f5 == pytest.approx(1.0)

    def test_all_zero_returns(self):
        _, _, f6 = distribution_features(np.array([1.0, 2.0]), np.zeros(100))
        assert f6 == 1.0

    def test_gaussian_kurtosis(self):
        rng = np.random.default_rng(11)
        _, f5, _ = distribution_features(rng.standard_normal(100_000), np.array([1.0]))
        assert 2.9 <= f5 <= 3.1

    def test_zero_tolerance(self):
        returns = np.array([0.0, 1e-13, 1.0, -1.0])
        _, _, f6 = distribution_features(np.array([1.0, 2.0]), returns)
        assert f6 == pytest.approx(0.5)


class TestSpectralEntropy:
    def test_white_noise_high(self):
        rng = np.random.default_rng(13)
        assert spectral_entropy(rng.standard_normal(4096)) > 0.95

    def test_sinusoid_low(self):
        t = np.arange(1024)
        assert spectral_entropy(np.sin(2 * np.pi * 32 * t / 1024)) < 0.3

    def test_bounded(self):
        rng = np.random.default_rng(17)
        for n in (16, 64, 333):
            v = spectral_entropy(rng.standard_normal(n) + np.linspace(0, 3, n))
            assert 0.0 <= v <= 1.0


class TestSpikiness:
    def test_zero_remainder(self):
        # a short linear trend is reproduced exactly by local linear regression
        x = np.linspace(1.0, 5.0, 40)
        rem = trend_remainder(x)
        np.testing.assert_allclose(rem, 0.0, atol=1e-8)
        assert spikiness(x) == pytest.approx(0.0, abs=1e-16)

    def test_spike_raises_value(self):
        rng = np.random.default_rng(19)
        base = rng.standard_normal(120)
        spiked = base.copy()
        spiked[60] += 20.0
        assert spikiness(spiked) > spikiness(base)

    def test_nonnegative(self):
        rng = np.random.default_rng(23)
        assert spikiness(rng.standard_normal(60) ** 2) >= 0.0


class TestNormalization:
    def test_minmax_column(self):
        raw = np.column_stack([np.array([2.0, 4.0, 6.0])] * 8)
        fm = normalize_features(FeatureMatrix(("a", "b", "c"), raw))
        np.testing.assert_allclose(fm.normalized[:, 1], [0.0, 0.5, 1.0])

    def test_acf1_absolute_value_first(self):
        raw = np.column_stack([np.array([-0.8, 0.1, 0.9])] + [np.array([0.0, 1.0, 2.0])] * 7)
        fm = normalize_features(FeatureMatrix(("a", "b", "c"), raw))
        # abs first: column becomes [0.8, 0.1, 0.9] with range [0.1, 0.9]
        assert fm.normalized[0, 0] == pytest.approx((0.8 - 0.1) / 0.8)

    def test_two_metals_endpoints(self):
        raw = np.column_stack([np.array([1.0, 2.0])] * 8)
        fm = normalize_features(FeatureMatrix(("a", "b"), raw))
        assert set(np.unique(fm.normalized)) == {0.0, 1.0}

    def test_constant_column_raises(self):
        raw = np.column_stack([np.array([1.0, 2.0, 3.0])] * 7 + [np.ones(3)])
        with pytest.raises(DegeneracyError, match="F8"):
            normalize_features(FeatureMatrix(("a", "b", "c"), raw))

    def test_endpoints_attained_every_column(self):
        rng = np.random.default_rng(29)
        raw = rng.random((16, 8))
        fm = normalize_features(FeatureMatrix(tuple(f"m{i}" for i in range(16)), raw))
        np.testing.assert_allclose(fm.normalized.min(axis=0), 0.0, atol=1e-15)
        np.testing.assert_allclose(fm.normalized.max(axis=0), 1.0, atol=1e-15)


def synthetic_cluster_matrix(n=16, seed=31):
    """Two-cluster fixture: strong-ACF metals versus noisy/spiky metals."""
    rng = np.random.default_rng(seed)
    raw = np.empty((n, 8))
    for i in range(n):
        acf_strength = 1.0 if i < n // 2 else 0.0
        level = acf_strength + 0.1 * rng.standard_normal()
        noise = (1.0 - acf_strength) + 0.1 * rng.standard_normal()
        raw[i] = [
            0.8 * level + 0.1,
            0.6 * level + 0.05,
            0.5 * level + 0.4,
            2.0 * noise,
            3.0 * noise + 3.0,
            0.4 * noise,
            0.5 * noise + 0.3,
            1.5 * noise,
        ]
    return raw


class TestPca:
    def test_rank_one_data(self):
        t = np.linspace(0, 1, 10)
        direction = np.arange(1.0, 9.0)
        raw = np.outer(t, direction) + 0.5
        fm = FeatureMatrix(tuple(f"m{i}" for i in range(10)), raw, normalized=raw)
        space = pca_instance_space(fm)
        assert space.variance_explained[0] == pytest.approx(1.0, abs=1e-12)
        assert space.variance_explained[1] == pytest.approx(0.0, abs=1e-12)

    def test_zero_variance_raises(self):
        raw = np.ones((10, 8))
        fm = FeatureMatrix(tuple(f"m{i}" for i in range(10)), raw, normalized=raw)
        with pytest.raises(DegeneracyError):
            pca_instance_space(fm)

    def test_eigenvalue_shares_sum_to_one(self):
        rng = np.random.default_rng(37)
        raw = rng.random((16, 8))
        fm = normalize_features(FeatureMatrix(tuple(f"m{i}" for i in range(16)), raw))
        space = pca_instance_space(fm)
        assert space.eigenvalue_shares.sum() == pytest.approx(1.0, abs=1e-10)
        assert space.variance_explained[0] >= space.variance_explained[1]

    def test_scores_centered_and_diagonal_covariance(self):
        rng = np.random.default_rng(41)
        raw = rng.random((16, 8))
        fm = normalize_features(FeatureMatrix(tuple(f"m{i}" for i in range(16)), raw))
        space = pca_instance_space(fm)
        np.testing.assert_allclose(space.scores.mean(axis=0), 0.0, atol=1e-12)
        cov = space.scores.T @ space.scores / 15
        assert abs(cov[0, 1]) < 1e-10

    def test_loadings_orthonormal(self):
        rng = np.random.default_rng(43)
        raw = rng.random((16, 8))
        fm = normalize_features(FeatureMatrix(tuple(f"m{i}" for i in range(16)), raw))
        space = pca_instance_space(fm)
        gram = space.loadings @ space.loadings.T
        np.testing.assert_allclose(gram, np.eye(2), atol=1e-10)

    def test_reprojection_identity(self):
        rng = np.random.default_rng(47)
        raw = rng.random((16, 8))
        fm = normalize_features(FeatureMatrix(tuple(f"m{i}" for i in range(16)), raw))
        x = fm.normalized
        centered = x - x.mean(axis=0)
        cov = centered.T @ centered / 15
        vals, vecs = np.linalg.eigh(cov)
        recon = (centered @ vecs) @ vecs.T
        np.testing.assert_allclose(recon, centered, atol=1e-8)

    def test_sign_convention(self):
        rng = np.random.default_rng(53)
        raw = rng.random((16, 8))
        fm = normalize_features(FeatureMatrix(tuple(f"m{i}" for i in range(16)), raw))
        space = pca_instance_space(fm)
        for row in space.loadings:
            assert row[np.argmax(np.abs(row))] > 0

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(59)
        raw = rng.random((16, 8))
        metals = tuple(f"m{i}" for i in range(16))
        fm = normalize_features(FeatureMatrix(metals, raw))
        space = pca_instance_space(fm)
        perm = rng.permutation(16)
        fm2 = normalize_features(FeatureMatrix(tuple(metals[i] for i in perm), raw[perm]))
        space2 = pca_instance_space(fm2)
        np.testing.assert_allclose(space2.loadings, space.loadings, atol=1e-10)
        np.testing.assert_allclose(space2.scores, space.scores[perm], atol=1e-10)

    def test_cluster_fixture_sign_pattern(self):
        # with an ACF-vs-noise cluster structure, the first component loads
        # with one sign on F1..F3 and the other on F4..F8
        raw = synthetic_cluster_matrix()
        fm = normalize_features(FeatureMatrix(tuple(f"m{i}" for i in range(16)), raw))
        space = pca_instance_space(fm)
        pc1 = space.loadings[0]
        signs = np.sign(pc1)
        assert len(set(signs[:3])) == 1
        assert len(set(signs[3:])) == 1
        assert signs[0] != signs[3]


class TestR2Attribution:
    def test_feature_equal_to_score(self):
        rng = np.random.default_rng(61)
        scores = rng.standard_normal((16, 2))
        feats = np.column_stack([scores[:, 0]] + [rng.random(16) for _ in range(7)])
        table = r2_attribution(feats, scores)
        assert table[0, 0] == pytest.approx(1.0)

    def test_orthogonal_feature(self):
        scores = np.column_stack([np.tile([1.0, -1.0], 8), np.ones(16)])
        feats = np.column_stack([np.tile([1.0, 1.0, -1.0, -1.0], 4)] * 8)
        table = r2_attribution(feats, scores)
        assert table[0, 0] == pytest.approx(0.0, abs=1e-12)

    def test_equals_squared_correlation(self):
        rng = np.random.default_rng(67)
        feats = rng.random((16, 8))
        scores = rng.standard_normal((16, 2))
        table = r2_attribution(feats, scores)
        for j in range(8):
            for k in range(2):
                corr = np.corrcoef(feats[:, j], scores[:, k])[0, 1]
                assert table[j, k] == pytest.approx(corr**2, abs=1e-12)

    def test_entries_in_unit_interval(self):
        rng = np.random.default_rng(71)
        feats = rng.random((16, 8))
        scores = rng.standard_normal((16, 2))
        table = r2_attribution(feats, scores)
        assert np.all((table >= 0) & (table <= 1))


class TestScaleInvariance:
    def test_rv_scaling_leaves_most_features(self):
        rng = np.random.default_rng(73)
        rv = rng.standard_normal(200) ** 2 * 40 + 1.0
        c = 7.3
        f1a, f2a = acf_features(rv)
        f1b, f2b = acf_features(c * rv)
        assert f1a == pytest.approx(f1b)
        assert f2a == pytest.approx(f2b)
        assert hurst(rv) == pytest.approx(hurst(c * rv), abs=1e-10)
        sa, ka, _ = distribution_features(rv, np.array([1.0]))
        sb, kb, _ = distribution_features(c * rv, np.array([1.0]))
        assert sa == pytest.approx(sb)
        assert ka == pytest.approx(kb)
        assert spectral_entropy(rv) == pytest.approx(spectral_entropy(c * rv), abs=1e-10)
        # spikiness scales (by c^4); only nonnegativity is contracted
        assert spikiness(c * rv) == pytest.approx(c**4 * spikiness(rv), rel=1e-6)
