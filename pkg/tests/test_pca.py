import numpy as np
import pytest

from jse.pca import PcaModel, demean, pca_apply, pca_fit


def test_full_rank_reconstruction():
    rng = np.random.default_rng(0)
    Z = rng.standard_normal((50, 8)) @ np.diag(np.linspace(3, 0.5, 8))
    model = pca_fit(Z, k=8)
    scores = pca_apply(Z, model)
    recon = scores @ model.components.T + model.mean
    np.testing.assert_allclose(recon, Z, atol=1e-8)


def test_variances_non_increasing():
    rng = np.random.default_rng(1)
    Z = rng.standard_normal((300, 10)) * np.linspace(5, 0.1, 10)
    model = pca_fit(Z, k=10)
    assert np.all(np.diff(model.explained_variance) <= 1e-12)
    # oracle: eigenvalues of the covariance matrix, descending
    eig = np.sort(np.linalg.eigvalsh(np.cov((Z - Z.mean(0)).T)))[::-1]
    np.testing.assert_allclose(model.explained_variance, eig, rtol=1e-8)


def test_constant_column_never_in_top_components():
    rng = np.random.default_rng(2)
    Z = rng.standard_normal((200, 5))
    Z[:, 3] = 7.0  # constant: zero variance
    model = pca_fit(Z, k=4)
    # no component loads on the constant coordinate
    assert np.max(np.abs(model.components[3, :])) < 1e-8


def test_mean_from_train_only_no_leakage():
    rng = np.random.default_rng(3)
    train = rng.standard_normal((100, 4))
    model = pca_fit(train, k=4)
    val = rng.standard_normal((50, 4)) + 5.0  # mean differs from train
    scores = pca_apply(val, model)
    # the transform used the training mean: reconstruct and compare
    recon = scores @ model.components.T + model.mean
    np.testing.assert_allclose(recon, val, atol=1e-8)
    assert np.linalg.norm(scores.mean(axis=0)) > 1.0  # offset survives, not re-centered


def test_k_bounds():
    rng = np.random.default_rng(4)
    Z = rng.standard_normal((10, 6))
    with pytest.raises(ValueError, match="k must be"):
        pca_fit(Z, k=7)
    with pytest.raises(ValueError, match="k must be"):
        pca_fit(Z, k=0)


def test_apply_dimension_check():
    rng = np.random.default_rng(5)
    model = pca_fit(rng.standard_normal((30, 4)), k=2)
    with pytest.raises(ValueError, match="mismatch"):
        pca_apply(rng.standard_normal((5, 3)), model)


def test_components_orthonormal_enforced():
    with pytest.raises(ValueError, match="orthonormal"):
        PcaModel(np.zeros(3), np.ones((3, 2)), np.ones(2))


def test_demean_helper():
    Z = np.arange(6.0).reshape(2, 3)
    mu = np.array([1.0, 1.0, 1.0])
    np.testing.assert_array_equal(demean(Z, mu), Z - mu)


def test_deterministic_signs():
    rng = np.random.default_rng(6)
    Z = rng.standard_normal((80, 5))
    m1 = pca_fit(Z, 3)
    m2 = pca_fit(Z.copy(), 3)
    np.testing.assert_array_equal(m1.components, m2.components)
    # sign convention: the largest-magnitude coordinate of each component is positive
    for j in range(3):
        col = m1.components[:, j]
        assert col[np.abs(col).argmax()] > 0
