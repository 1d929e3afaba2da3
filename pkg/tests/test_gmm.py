import numpy as np
import pytest

from distortion_lens.distortion import DistortionKind
from distortion_lens.gmm import (
    GmmComponent,
    GmmModel,
    fit_gmm,
    gmm_centroid_confusion,
    gmm_confidence_distortion,
    responsibilities,
)
from oracles import gaussian_density
from test_feature_store import make_fs


def single_gaussian_model(class_id, mean, cov):
    return GmmModel(
        class_id=class_id,
        components=(GmmComponent(weight=1.0, mean=np.asarray(mean, float), covariance=np.asarray(cov, float)),),
    )


class TestFitGmm:
    def test_single_component_closed_form(self):
        rng = np.random.default_rng(0)
        pts = rng.normal(size=(50, 3))
        model = fit_gmm(pts, 1, seed=1)
        comp = model.components[0]
        assert np.allclose(comp.mean, pts.mean(axis=0), atol=1e-10)
        expected_cov = np.cov(pts, rowvar=False, bias=True) + 1e-6 * np.eye(3)
        assert np.allclose(comp.covariance, expected_cov, atol=1e-8)
        assert comp.weight == 1.0

    def test_two_blob_recovery(self):
        recovered = 0
        centers = np.array([[0.0, 0.0], [6.0, 6.0]])
        for seed in range(10):
            rng = np.random.default_rng(100 + seed)
            a = centers[0] + 0.15 * rng.normal(size=(60, 2))
            b = centers[1] + 0.15 * rng.normal(size=(40, 2))
            pts = np.vstack([a, b])
            model = fit_gmm(pts, 2, seed=seed)
            means = np.array([c.mean for c in model.components])
            weights = np.array([c.weight for c in model.components])
            order = np.argsort(means[:, 0])
            mean_err = np.abs(means[order] - centers).max()
            weight_err = np.abs(weights[order] - [0.6, 0.4]).max()
            if mean_err < 0.1 and weight_err < 0.05:
                recovered += 1
        assert recovered >= 9

    def test_loglik_monotone(self):
        rng = np.random.default_rng(5)
        pts = rng.normal(size=(80, 3))
        model = fit_gmm(pts, 3, seed=7)
        ll = np.array(model.log_likelihoods)
        assert (np.diff(ll) >= -1e-9).all()

    def test_deterministic(self):
        rng = np.random.default_rng(6)
        pts = rng.normal(size=(40, 2))
        a = fit_gmm(pts, 3, seed=11)
        b = fit_gmm(pts, 3, seed=11)
        for ca, cb in zip(a.components, b.components):
            assert np.array_equal(ca.mean, cb.mean)
            assert np.array_equal(ca.covariance, cb.covariance)

    def test_too_few_points(self):
        with pytest.raises(ValueError, match="at least"):
            fit_gmm(np.zeros((2, 2)) + np.arange(2)[:, None], 3, seed=0)

    def test_degenerate_identical_points(self):
        pts = np.ones((10, 2))
        with pytest.warns(UserWarning, match="identical"):
            model = fit_gmm(pts, 3, seed=0)
        assert model.degenerate
        assert len(model.components) == 1
        assert np.allclose(model.components[0].covariance, 1e-6 * np.eye(2))

    def test_weights_sum_to_one(self):
        rng = np.random.default_rng(8)
        model = fit_gmm(rng.normal(size=(30, 2)), 3, seed=3)
        assert sum(c.weight for c in model.components) == pytest.approx(1.0, abs=1e-9)


class TestResponsibilities:
    def test_separation_limit(self):
        models = [
            single_gaussian_model(0, [0.0, 0.0], 0.01 * np.eye(2)),
            single_gaussian_model(1, [100.0, 100.0], 0.01 * np.eye(2)),
        ]
        r = responsibilities(models, np.array([0.0, 0.0]))
        assert r[0] == pytest.approx(1.0, abs=1e-12)
        assert r[1] == pytest.approx(0.0, abs=1e-12)

    def test_identical_components_uniform(self):
        models = [
            single_gaussian_model(0, [1.0, 1.0], np.eye(2)),
            single_gaussian_model(1, [1.0, 1.0], np.eye(2)),
        ]
        r = responsibilities(models, np.array([3.0, -1.0]))
        assert np.allclose(r, 0.5, atol=1e-12)

    def test_density_formula_oracle(self):
        cov_a = np.array([[1.0, 0.3], [0.3, 0.8]])
        cov_b = np.array([[0.5, -0.1], [-0.1, 1.5]])
        models = [
            GmmModel(
                class_id=0,
                components=(
                    GmmComponent(0.7, np.array([0.0, 0.0]), cov_a),
                    GmmComponent(0.3, np.array([2.0, 1.0]), cov_b),
                ),
            ),
            single_gaussian_model(1, [4.0, -2.0], np.eye(2)),
        ]
        x = np.array([1.0, 0.5])
        joint = np.array(
            [
                0.5 * 0.7 * gaussian_density(x, [0.0, 0.0], cov_a),
                0.5 * 0.3 * gaussian_density(x, [2.0, 1.0], cov_b),
                0.5 * 1.0 * gaussian_density(x, [4.0, -2.0], np.eye(2)),
            ]
        )
        expected = joint / joint.sum()
        assert np.allclose(responsibilities(models, x), expected, atol=1e-10)

    def test_sums_to_one(self):
        rng = np.random.default_rng(9)
        models = [
            single_gaussian_model(0, rng.normal(size=2), np.eye(2)),
            single_gaussian_model(1, rng.normal(size=2), np.eye(2)),
            single_gaussian_model(2, rng.normal(size=2), np.eye(2)),
        ]
        for _ in range(20):
            r = responsibilities(models, rng.normal(size=2) * 5)
            assert r.sum() == pytest.approx(1.0, abs=1e-12)

    def test_class_coverage_checked(self):
        models = [single_gaussian_model(0, [0.0], np.eye(1)), single_gaussian_model(2, [1.0], np.eye(1))]
        with pytest.raises(ValueError, match="cover classes"):
            responsibilities(models, np.array([0.0]))


class TestConfidenceDistortion:
    def test_separation_limit(self):
        models = [
            single_gaussian_model(0, [0.0, 0.0], 0.01 * np.eye(2)),
            single_gaussian_model(1, [100.0, 100.0], 0.01 * np.eye(2)),
        ]
        fs = make_fs([[0, 0], [0.01, 0], [100, 100], [100, 100.01]], [0, 0, 1, 1])
        dm = gmm_confidence_distortion(models, fs)
        assert np.allclose(np.diag(dm.values), 1.0, atol=1e-9)
        assert np.allclose(dm.values - np.diag(np.diag(dm.values)), 0.0, atol=1e-9)
        assert dm.kind is DistortionKind.GMM_CONFIDENCE

    def test_identical_classes_symmetric(self):
        models = [
            single_gaussian_model(0, [0.0, 0.0], np.eye(2)),
            single_gaussian_model(1, [0.0, 0.0], np.eye(2)),
        ]
        rng = np.random.default_rng(10)
        pts = rng.normal(size=(40, 2))
        fs = make_fs(pts, [0] * 20 + [1] * 20)
        dm = gmm_confidence_distortion(models, fs)
        assert np.allclose(dm.values, 0.5, atol=1e-12)

    def test_brute_force_oracle(self):
        rng = np.random.default_rng(11)
        models = []
        for c in range(3):
            comps = []
            weights = rng.dirichlet(np.ones(2))
            for k in range(2):
                A = rng.normal(size=(2, 2))
                comps.append(GmmComponent(float(weights[k]), rng.normal(size=2) * 3, A @ A.T + 0.2 * np.eye(2)))
            models.append(GmmModel(class_id=c, components=tuple(comps)))
        pts = rng.normal(size=(30, 2)) * 2
        labels = np.concatenate([np.full(10, c) for c in range(3)])
        fs = make_fs(pts, labels)
        dm = gmm_confidence_distortion(models, fs)
        expected = np.zeros((3, 3))
        for i in range(3):
            rows = np.flatnonzero(labels == i)
            for j in range(3):
                vals = []
                for r in rows:
                    joint = []
                    owners = []
                    for m in models:
                        for comp in m.components:
                            joint.append(
                                (1 / 3) * comp.weight * gaussian_density(pts[r], comp.mean, comp.covariance)
                            )
                            owners.append(m.class_id)
                    joint = np.array(joint) / np.sum(joint)
                    vals.append(max(joint[np.array(owners) == j]))
                expected[i, j] = np.mean(vals)
        assert np.allclose(dm.values, expected, atol=1e-10)
        assert ((dm.values >= 0) & (dm.values <= 1)).all()


class TestCentroidConfusion:
    def test_samples_at_own_centroids(self):
        models = [
            single_gaussian_model(0, [0.0, 0.0], np.eye(2)),
            single_gaussian_model(1, [5.0, 5.0], np.eye(2)),
        ]
        fs = make_fs([[0, 0], [0, 0], [5, 5], [5, 5]], [0, 0, 1, 1])
        dm = gmm_centroid_confusion(models, fs)
        assert np.array_equal(dm.values, np.eye(2))

    def test_all_samples_nearer_other_class(self):
        models = [
            single_gaussian_model(0, [100.0, 0.0], np.eye(2)),
            single_gaussian_model(1, [0.0, 0.0], np.eye(2)),
        ]
        fs = make_fs([[0, 0], [1, 0], [0, 1], [1, 1]], [0, 0, 1, 1])
        dm = gmm_centroid_confusion(models, fs)
        assert dm.values[0, 1] == 1.0  # class 0 mass lands on class 1

    def test_tie_breaks_to_lower_class(self):
        models = [
            single_gaussian_model(0, [-1.0, 0.0], np.eye(2)),
            single_gaussian_model(1, [1.0, 0.0], np.eye(2)),
        ]
        fs = make_fs([[0, 0], [-1, 0], [0, 0], [1, 0]], [0, 0, 1, 1])
        dm = gmm_centroid_confusion(models, fs)
        # equidistant points at the origin go to class 0
        assert dm.values[0, 0] == 1.0
        assert dm.values[1, 0] == 0.5

    def test_brute_force_loop(self):
        rng = np.random.default_rng(12)
        models = []
        for c in range(3):
            comps = tuple(
                GmmComponent(0.5, rng.normal(size=2) * 4, np.eye(2)) for _ in range(2)
            )
            models.append(GmmModel(class_id=c, components=comps))
        pts = rng.normal(size=(30, 2)) * 3
        labels = np.concatenate([np.full(10, c) for c in range(3)])
        fs = make_fs(pts, labels)
        dm = gmm_centroid_confusion(models, fs)
        counts = np.zeros((3, 3))
        for r in range(30):
            best = (np.inf, None)
            for m in models:
                for comp in m.components:
                    d = float(np.sum((pts[r] - comp.mean) ** 2))
                    if d < best[0]:
                        best = (d, m.class_id)
            counts[labels[r], best[1]] += 1
        expected = counts / counts.sum(axis=1, keepdims=True)
        assert np.array_equal(dm.values, expected)

    def test_rows_sum_exactly_one(self):
        rng = np.random.default_rng(13)
        models = [single_gaussian_model(c, rng.normal(size=2), np.eye(2)) for c in range(3)]
        pts = rng.normal(size=(27, 2))
        labels = np.concatenate([np.full(9, c) for c in range(3)])
        dm = gmm_centroid_confusion(models, make_fs(pts, labels))
        assert np.array_equal(dm.values.sum(axis=1), np.ones(3))
