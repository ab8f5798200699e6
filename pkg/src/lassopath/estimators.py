"""scikit-learn compatible wrapper around the path solvers.

No intercept is fitted: centre X and y beforehand if one is wanted.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .core import LassoProblem, path_eval
from .errors import InputError
from .lars import ALGOS, solve
from .oracle import NOISE_MODES, QueryLedger


class LarsLassoPath(RegressorMixin, BaseEstimator):
    """Lasso fitted along its whole regularisation path.

    Parameters
    ----------
    lam : float or None
        Penalty used by ``predict`` and ``coef_``. ``None`` selects
        ``lam_ratio`` times the largest useful penalty.
    lam_ratio : float
        Used only when ``lam`` is None.
    algo, epsilon, delta, max_kinks, noise_mode, random_state
        Passed to the path solver.

    Attributes
    ----------
    path_ : RegularisationPath
    coef_ : ndarray of shape (n_features,)
    lam_ : float
    ledger_ : QueryLedger
    """

    def __init__(self, lam=None, lam_ratio=0.1, algo="exact", epsilon=0.05, delta=0.05,
                 max_kinks=None, noise_mode="stochastic", random_state=0):
        self.lam = lam
        self.lam_ratio = lam_ratio
        self.algo = algo
        self.epsilon = epsilon
        self.delta = delta
        self.max_kinks = max_kinks
        self.noise_mode = noise_mode
        self.random_state = random_state

    def _validate_params(self) -> None:
        if self.algo not in ALGOS:
            raise InputError(f"algo must be one of {ALGOS}")
        if self.noise_mode not in NOISE_MODES:
            raise InputError(f"noise_mode must be one of {NOISE_MODES}")
        if self.lam is not None and not self.lam >= 0:
            raise InputError("lam must be non-negative")
        if self.lam is None and not 0 <= self.lam_ratio <= 1:
            raise InputError("lam_ratio must lie in [0, 1]")

    def fit(self, X, y):
        self._validate_params()
        X, y = check_X_y(X, y, dtype=float, y_numeric=True)
        problem = LassoProblem(X, y)
        lam0 = float(np.abs(X.T @ y).max())
        lam = float(self.lam) if self.lam is not None else self.lam_ratio * lam0
        seed = self.random_state if isinstance(self.random_state, (int, np.integer)) else 0
        self.ledger_ = QueryLedger()
        self.path_ = solve(problem, self.algo, epsilon=self.epsilon, delta=self.delta,
                           max_kinks=self.max_kinks, seed=int(seed), noise_mode=self.noise_mode,
                           ledger=self.ledger_, lambda_min=min(lam, lam0))
        self.lam_ = lam
        self.coef_ = path_eval(self.path_, lam)
        self.n_features_in_ = X.shape[1]
        return self

    def coef_at(self, lam: float) -> np.ndarray:
        """Coefficients at another penalty on the fitted path (lam >= lam_)."""
        check_is_fitted(self, "path_")
        return path_eval(self.path_, lam)

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise InputError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X @ self.coef_
