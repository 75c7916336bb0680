import math

import numpy as np
import pytest

from oracles import draw_well_conditioned_set

from samoo.surrogates import (
    FitError,
    PnnModel,
    RbfModel,
    pnn_fit,
    pnn_predict,
    rbf_fit,
    rbf_predict,
)


class TestRbfFit:
    def test_single_point_interpolates(self):
        model = rbf_fit([[0.3, 0.4]], [3.0])
        assert rbf_predict(model, [0.3, 0.4]) == pytest.approx(3.0, abs=1e-12)

    def test_two_point_hand_solution(self):
        # Solve the 2x2 kernel system by hand: prediction at the midpoint is
        # exp(-0.25) / (1 + exp(-1)).
        model = rbf_fit([[0.0], [1.0]], [0.0, 1.0], width=1.0)
        expected = math.exp(-0.25) / (1.0 + math.exp(-1.0))
        assert rbf_predict(model, [0.5]) == pytest.approx(expected, abs=1e-12)

    def test_interpolation_on_random_sets(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            X = draw_well_conditioned_set(rng)
            y = rng.normal(size=X.shape[0])
            model = rbf_fit(X, y)
            scale = max(1.0, float(np.abs(y).max()))
            assert np.abs(rbf_predict(model, X) - y).max() < 1e-6 * scale

    def test_linear_in_targets(self):
        rng = np.random.default_rng(1)
        X = rng.random((12, 4))
        y = rng.normal(size=12)
        q = rng.random((5, 4))
        base = rbf_predict(rbf_fit(X, y, width=0.8), q)
        scaled = rbf_predict(rbf_fit(X, 7.5 * y, width=0.8), q)
        assert np.abs(scaled - 7.5 * base).max() < 1e-9 * max(1.0, np.abs(base).max())

    def test_duplicate_centers_rejected(self):
        with pytest.raises(FitError):
            rbf_fit([[0.0, 0.0], [0.0, 0.0]], [1.0, 2.0])

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            rbf_fit([[0.0], [1.0]], [1.0])

    def test_width_policy_default_is_median(self):
        X = np.array([[0.0], [1.0], [4.0]])
        model = rbf_fit(X, [0.0, 1.0, 2.0])
        assert model.width == pytest.approx(3.0)  # distances 1, 3, 4


class TestRbfPredict:
    def test_far_field_decays(self):
        rng = np.random.default_rng(2)
        centers = rng.random((10, 3))
        model = RbfModel(centers=centers, weights=rng.uniform(-1, 1, 10), width=0.5,
                         regularization=0.0)
        far = centers.mean(axis=0) + 10.0 * model.width * np.array([1.0, 1.0, 1.0])
        assert abs(rbf_predict(model, far)) < 1e-10

    def test_no_constant_shift_property(self):
        # Without a polynomial tail, fitting y + c does not predict yhat + c.
        X = np.array([[0.0], [1.0]])
        y = np.array([0.0, 1.0])
        base = rbf_predict(rbf_fit(X, y, width=1.0), [0.5])
        shifted = rbf_predict(rbf_fit(X, y + 5.0, width=1.0), [0.5])
        assert abs(shifted - (base + 5.0)) > 1e-3

    def test_dimension_mismatch(self):
        model = rbf_fit([[0.0, 0.0]], [1.0])
        with pytest.raises(ValueError):
            rbf_predict(model, [0.0, 0.0, 0.0])

    def test_batch_matches_single(self):
        rng = np.random.default_rng(3)
        model = rbf_fit(rng.random((8, 2)), rng.normal(size=8))
        Q = rng.random((6, 2))
        batch = rbf_predict(model, Q)
        singles = [rbf_predict(model, q) for q in Q]
        assert np.allclose(batch, singles, atol=0)


class TestPnn:
    def test_two_singleton_classes(self):
        model = pnn_fit([[0.0], [2.0]], [1, 2])
        assert {int(c) for c in model.class_labels} == {1, 2}
        assert (model.labels == 1).sum() == 1 and (model.labels == 2).sum() == 1

    def test_single_class_always_predicted(self):
        rng = np.random.default_rng(4)
        model = pnn_fit(rng.random((6, 2)), [3] * 6)
        assert np.all(pnn_predict(model, rng.random((20, 2))) == 3)

    def test_fixed_sigma_policy(self):
        model = pnn_fit([[0.0], [1.0]], [1, 2], sigma=0.5)
        assert model.sigma == 0.5

    def test_hand_computed_density_ordering(self):
        # p1 ~ exp(-0.125) beats p2 ~ exp(-1.125) at the query 0.5.
        model = pnn_fit([[0.0], [2.0]], [1, 2], sigma=1.0)
        assert pnn_predict(model, [0.5]) == 1

    def test_equidistant_tie_takes_smaller_label(self):
        model = pnn_fit([[0.0], [2.0]], [2, 1], sigma=1.0)
        assert pnn_predict(model, [1.0]) == 1

    def test_well_separated_pattern_recovered(self):
        model = pnn_fit([[0.0, 0.0], [100.0, 100.0]], [1, 2], sigma=0.1)
        assert pnn_predict(model, [0.0, 0.0]) == 1
        assert pnn_predict(model, [100.0, 100.0]) == 2

    def test_tiny_sigma_is_nearest_pattern(self):
        rng = np.random.default_rng(5)
        X = rng.random((40, 3))
        labels = rng.integers(1, 5, size=40)
        model = pnn_fit(X, labels, sigma=1e-6)
        queries = rng.random((1000, 3))
        predicted = pnn_predict(model, queries)
        diff = queries[:, None, :] - X[None, :, :]
        nearest = labels[np.argmin((diff**2).sum(-1), axis=1)]
        assert np.array_equal(predicted, nearest)

    def test_prediction_label_always_known(self):
        rng = np.random.default_rng(6)
        X = rng.random((15, 2))
        labels = rng.integers(1, 4, size=15)
        model = pnn_fit(X, labels)
        out = pnn_predict(model, rng.random((200, 2)) * 3 - 1)
        assert set(np.unique(out)) <= set(np.unique(labels))

    def test_argmax_invariant_to_normalization_constant(self):
        # Including the dimension-dependent Gaussian constant rescales every
        # class density identically, so the argmax cannot change.
        rng = np.random.default_rng(7)
        d = 3
        X = rng.random((20, d))
        labels = rng.integers(1, 4, size=20)
        sigma = 0.3
        model = pnn_fit(X, labels, sigma=sigma)
        queries = rng.random((50, d))
        const = (2.0 * math.pi) ** (d / 2.0) * sigma**d
        classes = np.unique(labels)
        manual = []
        for q in queries:
            dens = []
            for c in classes:
                pats = X[labels == c]
                kern = np.exp(-((pats - q) ** 2).sum(1) / (2 * sigma**2)) / const
                dens.append(kern.mean())
            manual.append(classes[int(np.argmax(dens))])
        assert np.array_equal(pnn_predict(model, queries), manual)

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            pnn_fit(np.empty((0, 2)), [])

    def test_dimension_mismatch(self):
        model = pnn_fit([[0.0, 0.0]], [1])
        with pytest.raises(ValueError):
            pnn_predict(model, [0.0])
