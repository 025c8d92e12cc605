"""Scikit-learn compatible front end.

Wraps the immutable model core in the familiar fit/partial_fit/predict
surface so the index composes with pipelines and model selection
tooling. Columns of X are (career_length, publication_count,
citation_count) for the base feature set, plus data_share_count as a
fourth column when augmented (squared internally).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .errors import DimensionMismatch, InsufficientData
from .regression import (FEATURE_AUGMENTED, FEATURE_BASE, DEFAULT_RIDGE,
                         FeatureVector, ModelConfig, ModelState, fit_batch,
                         predict as _predict, update_online)
from .scoring import MODE_SHARE_BONUS, score as _score
from .bibliometrics import CareerStats


class ScienceIndexModel(BaseEstimator, RegressorMixin):
    """Predicts h-index from career statistics and scores researchers.

    Parameters
    ----------
    feature_set : {"base", "augmented"}
        Whether the squared data-share count enters the regression.
    ridge_lambda : float
        Ridge applied to all non-intercept coefficients.
    mode : {"literal", "share_bonus"}
        Scoring mode used by score_phi.
    share_weight : float
        Bonus weight on the squared share count (share_bonus mode).

    Attributes
    ----------
    state_ : ModelState
        The fitted immutable model snapshot.
    coef_ : ndarray
        Non-intercept weights.
    intercept_ : float
    n_features_in_ : int
    """

    def __init__(self, feature_set=FEATURE_BASE, ridge_lambda=DEFAULT_RIDGE,
                 mode=MODE_SHARE_BONUS, share_weight=0.0):
        self.feature_set = feature_set
        self.ridge_lambda = ridge_lambda
        self.mode = mode
        self.share_weight = share_weight

    def _config(self) -> ModelConfig:
        return ModelConfig(feature_set=self.feature_set,
                           ridge_lambda=self.ridge_lambda)

    def _expected_cols(self) -> int:
        return 4 if self.feature_set == FEATURE_AUGMENTED else 3

    def _rows_to_features(self, X, y):
        if X.shape[1] != self._expected_cols():
            raise DimensionMismatch(
                f"expected {self._expected_cols()} columns, got {X.shape[1]}")
        augmented = self.feature_set == FEATURE_AUGMENTED
        out = []
        for row, target in zip(X, y):
            share_sq = float(row[3]) ** 2 if augmented else None
            out.append(FeatureVector(alpha1=float(row[0]),
                                     alpha2=float(row[1]),
                                     alpha3=float(row[2]),
                                     actual_h=float(target),
                                     share_sq=share_sq))
        return out

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.state_ = fit_batch(self._config(), self._rows_to_features(X, y))
        self.n_features_in_ = X.shape[1]
        self.coef_ = np.asarray(self.state_.weights[1:])
        self.intercept_ = self.state_.weights[0]
        return self

    def partial_fit(self, X, y):
        X, y = check_X_y(X, y)
        if not hasattr(self, "state_"):
            if X.shape[0] < self._config().dimension:
                raise InsufficientData(
                    "first partial_fit needs at least as many rows as "
                    "model parameters")
            return self.fit(X, y)
        state = self.state_
        for point in self._rows_to_features(X, y):
            state = update_online(state, point)
        self.state_ = state
        self.coef_ = np.asarray(state.weights[1:])
        self.intercept_ = state.weights[0]
        return self

    @classmethod
    def from_state(cls, state: ModelState) -> "ScienceIndexModel":
        """Wrap an existing snapshot (e.g. the shipped pre-trained model)."""
        est = cls(feature_set=state.config.feature_set,
                  ridge_lambda=state.config.ridge_lambda)
        est.state_ = state
        est.n_features_in_ = est._expected_cols()
        est.coef_ = np.asarray(state.weights[1:])
        est.intercept_ = state.weights[0]
        return est

    def predict(self, X):
        """Raw predicted h-index (before outlier scaling)."""
        check_is_fitted(self, "state_")
        X = check_array(X)
        feats = self._rows_to_features(X, np.zeros(X.shape[0]))
        return np.array([_predict(self.state_, f) for f in feats])

    def score_phi(self, X, y, share_counts=None):
        """Full pipeline output (phi) per row; y is the actual h-index."""
        check_is_fitted(self, "state_")
        X, y = check_X_y(X, y)
        if share_counts is None:
            share_counts = (X[:, 3].astype(int)
                            if X.shape[1] >= 4 else np.zeros(len(y), dtype=int))
        out = []
        for row, target, shares in zip(X, y, share_counts):
            stats = CareerStats(career_length=int(round(row[0])),
                                publication_count=max(int(round(row[1])),
                                                      int(round(target))),
                                citation_count=int(round(row[2])),
                                h_index=int(round(target)),
                                data_share_count=int(shares))
            out.append(_score(stats, self.state_, self.mode,
                              self.share_weight).phi)
        return np.array(out)
