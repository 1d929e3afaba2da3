import numpy as np
import pytest

from distortion_lens.kernels import KernelParams, center_kernel, rbf_kernel_matrix
from distortion_lens.kpca import fit_kpca, transform


def assert_equal_up_to_sign(a, b, atol):
    for j in range(a.shape[1]):
        direct = np.abs(a[:, j] - b[:, j]).max()
        flipped = np.abs(a[:, j] + b[:, j]).max()
        assert min(direct, flipped) <= atol, f"dimension {j}: {direct=} {flipped=}"


class TestFitKpca:
    def test_symmetric_pair(self):
        X = np.array([[1.0, 0.0], [-1.0, 0.0]])
        model = fit_kpca(X, KernelParams(0.5), 1)
        coords = model.training_coordinates[:, 0]
        assert coords[0] == pytest.approx(-coords[1], abs=1e-10)
        assert abs(coords[0]) > 0

    def test_dense_eigensolver_oracle(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(12, 4))
        params = KernelParams(0.3)
        model = fit_kpca(X, params, 3)
        # independent oracle: full dense eigendecomposition of the centered Gram
        Kc = center_kernel(rbf_kernel_matrix(X, X, params))
        eigvals, eigvecs = np.linalg.eigh(Kc)
        order = np.argsort(eigvals)[::-1][:3]
        expected = eigvecs[:, order] * np.sqrt(eigvals[order])
        assert np.allclose(model.eigenvalues, eigvals[order], rtol=1e-10)
        assert_equal_up_to_sign(model.training_coordinates, expected, atol=1e-8)

    def test_duplicate_points_same_coordinates(self):
        rng = np.random.default_rng(1)
        base = rng.normal(size=(6, 3))
        X = np.vstack([base, base])
        model = fit_kpca(X, KernelParams(0.5), 1)
        assert np.allclose(model.training_coordinates[:6], model.training_coordinates[6:], atol=1e-8)

    def test_eigenvalue_ordering_and_nonnegativity(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(15, 4))
        model = fit_kpca(X, KernelParams(0.2), 5)
        lam = model.eigenvalues
        assert (np.diff(lam) <= 1e-12).all()
        assert (lam >= 0).all()

    def test_projected_mean_zero_and_variance(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(20, 3))
        model = fit_kpca(X, KernelParams(0.4), 3)
        coords = model.training_coordinates
        assert np.abs(coords.mean(axis=0)).max() < 1e-8
        assert np.allclose(coords.var(axis=0), model.eigenvalues / 20, rtol=1e-8)

    def test_uncorrelated_dimensions(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(18, 4))
        model = fit_kpca(X, KernelParams(0.3), 3)
        cov = np.cov(model.training_coordinates, rowvar=False)
        off = cov - np.diag(np.diag(cov))
        assert np.abs(off).max() < 1e-6 * model.eigenvalues[0] / 18

    def test_sign_convention_deterministic(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(10, 3))
        a = fit_kpca(X, KernelParams(0.5), 2)
        b = fit_kpca(X, KernelParams(0.5), 2)
        assert np.array_equal(a.training_coordinates, b.training_coordinates)
        for j in range(2):
            col = a.projection_coefficients[:, j]
            assert col[np.argmax(np.abs(col))] > 0

    def test_rank_deficiency_warns(self):
        X = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])  # 2 distinct points: centered rank 1
        with pytest.warns(UserWarning, match="rank deficiency"):
            model = fit_kpca(X, KernelParams(0.5), 2)
        assert np.allclose(model.projection_coefficients[:, 1], 0.0)

    def test_d_out_of_range(self):
        X = np.zeros((4, 2))
        with pytest.raises(ValueError, match="d"):
            fit_kpca(X, KernelParams(1.0), 4)


class TestTransform:
    def test_self_consistency(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(14, 4))
        model = fit_kpca(X, KernelParams(0.4), 3)
        assert np.abs(transform(model, X) - model.training_coordinates).max() < 1e-8

    def test_duplicate_of_training_point(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(10, 3))
        model = fit_kpca(X, KernelParams(0.6), 2)
        out = transform(model, X[4:5])
        assert np.allclose(out[0], model.training_coordinates[4], atol=1e-8)

    def test_feature_space_oracle(self):
        # project held-out points with an explicit eigen-feature-space construction
        rng = np.random.default_rng(8)
        params = KernelParams(0.3)
        X_train = rng.normal(size=(12, 3))
        X_test = rng.normal(size=(6, 3))
        model = fit_kpca(X_train, params, 3)
        both = np.vstack([X_train, X_test])
        K_all = rbf_kernel_matrix(both, both, params)
        eigvals, eigvecs = np.linalg.eigh(K_all)
        phi = eigvecs * np.sqrt(np.clip(eigvals, 0, None))
        mean = phi[:12].mean(axis=0)
        cross_centered = (phi[12:] - mean) @ (phi[:12] - mean).T
        expected = cross_centered @ model.projection_coefficients
        assert np.allclose(transform(model, X_test), expected, atol=1e-6)

    def test_dim_mismatch(self):
        model = fit_kpca(np.random.default_rng(9).normal(size=(5, 3)), KernelParams(1.0), 2)
        with pytest.raises(ValueError, match="dimension mismatch"):
            transform(model, np.zeros((2, 4)))
