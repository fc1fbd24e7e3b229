"""scikit-learn style wrappers around the model, statistics and fits."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .analytic import expected_X, expected_Y
from .experiments.ensemble import fit_power_law
from .model import ModelParams, generate
from .statistics import count_tables
from .validation import check_attractiveness, check_k_grid


class GraphSampler(BaseEstimator):
    """Draws realisations of the model; hyper-parameters are ``a``, ``m``, ``n``."""

    def __init__(self, a=1.0, m=1, n=1000):
        self.a = a
        self.m = m
        self.n = n

    def sample(self, seed):
        """Return ``(XiSequence, MultiGraph)`` for one seed."""
        return generate(ModelParams(self.a, self.m, self.n), seed)

    def sample_many(self, seeds):
        return [self.sample(s)[1] for s in seeds]


class SecondDegreeCounts(TransformerMixin, BaseEstimator):
    """Map each graph to its row of ``Y(k)`` (or ``X(k)``) over ``k_grid``.

    Stateless: :meth:`fit` only validates hyper-parameters.
    """

    def __init__(self, k_grid=(4, 8, 16, 32), statistic="Y"):
        self.k_grid = k_grid
        self.statistic = statistic

    def fit(self, X, y=None):
        check_k_grid(self.k_grid)
        if self.statistic not in ("Y", "X"):
            raise ValueError("statistic must be 'Y' or 'X'")
        self.n_features_out_ = len(self.k_grid)
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_out_")
        rows = []
        for g in X:
            t = count_tables(g)
            if self.statistic == "Y":
                rows.append(t.y_array(self.k_grid))
            else:
                rows.append([t.X.get(k, 0) for k in self.k_grid])
        return np.asarray(rows, dtype=float).reshape(-1, len(self.k_grid))

    def get_feature_names_out(self, input_features=None):
        return np.array([f"{self.statistic}_{k}" for k in self.k_grid], dtype=object)


class PowerLawRegressor(RegressorMixin, BaseEstimator):
    """Fit ``y = exp(intercept) * k**slope`` by least squares in log-log space.

    ``X`` is a column of k values (shape ``(n_samples, 1)`` or 1-d).
    """

    def fit(self, X, y):
        k = np.asarray(X, dtype=float).reshape(-1)
        fit = fit_power_law(k, y)
        self.slope_ = fit.slope
        self.slope_se_ = fit.slope_se
        self.intercept_ = fit.intercept
        return self

    def predict(self, X):
        check_is_fitted(self, "slope_")
        k = np.asarray(X, dtype=float).reshape(-1)
        return np.exp(self.intercept_) * k ** self.slope_

    def score(self, X, y, sample_weight=None):
        """R^2 in log space, where the fit is made."""
        from sklearn.metrics import r2_score

        return r2_score(np.log(y), np.log(self.predict(X)), sample_weight=sample_weight)


class AnalyticPredictor(BaseEstimator):
    """Leading-order ``E Y(k)`` or ``E X(k)`` for given ``a`` and ``n``; nothing to fit."""

    def __init__(self, a=1.0, n=100_000, statistic="Y"):
        self.a = a
        self.n = n
        self.statistic = statistic

    def fit(self, X=None, y=None):
        check_attractiveness(self.a)
        self.fitted_ = True
        return self

    def predict(self, X):
        k = np.asarray(X).reshape(-1)
        f = expected_Y if self.statistic == "Y" else expected_X
        return np.array([f(self.n, int(kk), self.a) for kk in k])
