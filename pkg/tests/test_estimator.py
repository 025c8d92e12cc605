import numpy as np
import pytest
from sklearn.base import clone

from science_index.errors import InsufficientData
from science_index.estimator import ScienceIndexModel
from science_index.regression import REFERENCE_WEIGHTS, reference_preset


def make_xy(n=200, seed=3, noise=0.0):
    rng = np.random.default_rng(seed)
    X = np.column_stack([rng.uniform(0, 40, n),
                         rng.uniform(0, 200, n),
                         rng.uniform(0, 5000, n)])
    w0, w1, w2, w3 = REFERENCE_WEIGHTS
    y = w0 + X @ np.array([w1, w2, w3]) + rng.normal(0, noise, n)
    return X, y


class TestEstimatorApi:
    def test_get_params_round_trip(self):
        est = ScienceIndexModel(ridge_lambda=1e-6, share_weight=0.5)
        params = est.get_params()
        assert params["ridge_lambda"] == 1e-6
        assert params["share_weight"] == 0.5
        cloned = clone(est)
        assert cloned.get_params() == params

    def test_fit_exposes_sklearn_attributes(self):
        X, y = make_xy()
        est = ScienceIndexModel().fit(X, y)
        assert est.n_features_in_ == 3
        assert est.coef_.shape == (3,)
        assert np.isfinite(est.intercept_)

    def test_fit_recovers_generating_coefficients(self):
        X, y = make_xy(noise=0.0)
        est = ScienceIndexModel().fit(X, y)
        np.testing.assert_allclose(
            [est.intercept_, *est.coef_], REFERENCE_WEIGHTS, atol=1e-6)

    def test_predict_matches_linear_form(self):
        X, y = make_xy(noise=0.0)
        est = ScienceIndexModel().fit(X, y)
        np.testing.assert_allclose(est.predict(X), y, atol=1e-6)

    def test_partial_fit_matches_batch(self):
        X, y = make_xy(n=300, noise=1.0)
        batch = ScienceIndexModel().fit(X, y)
        online = ScienceIndexModel().partial_fit(X[:10], y[:10])
        for i in range(10, len(y)):
            online.partial_fit(X[i:i + 1], y[i:i + 1])
        np.testing.assert_allclose(online.state_.weights,
                                   batch.state_.weights, rtol=1e-8)

    def test_partial_fit_needs_enough_initial_rows(self):
        X, y = make_xy(n=2)
        with pytest.raises(InsufficientData):
            ScienceIndexModel().partial_fit(X, y)

    def test_from_state_wraps_shipped_model(self):
        est = ScienceIndexModel.from_state(reference_preset())
        got = est.predict(np.array([[20.0, 50.0, 1000.0]]))
        assert got[0] == pytest.approx(11.57323, abs=1e-9)

    def test_score_phi_runs_full_pipeline(self):
        est = ScienceIndexModel.from_state(reference_preset())
        X = np.array([[20.0, 50.0, 1000.0]])
        phi = est.score_phi(X, np.array([12.0]))
        assert phi[0] == pytest.approx(6.051021110763315, abs=1e-9)

    def test_augmented_feature_set(self):
        rng = np.random.default_rng(5)
        X = np.column_stack([rng.uniform(0, 40, 100),
                             rng.uniform(0, 200, 100),
                             rng.uniform(0, 5000, 100),
                             rng.integers(0, 10, 100)])
        y = 1.0 + 0.1 * X[:, 0] + 0.2 * X[:, 1] + 0.003 * X[:, 2] \
            + 0.01 * X[:, 3] ** 2
        est = ScienceIndexModel(feature_set="augmented",
                                mode="literal").fit(X, y)
        np.testing.assert_allclose(
            [est.intercept_, *est.coef_], [1.0, 0.1, 0.2, 0.003, 0.01],
            atol=1e-6)
