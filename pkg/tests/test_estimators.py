import numpy as np
import pytest
from sklearn.base import clone

from lassopath import lars_exact, path_eval
from lassopath.errors import InputError
from lassopath.estimators import LarsLassoPath
from lassopath.verify import duality_gap

from conftest import gaussian_problem


def test_fit_predict_matches_path():
    p = gaussian_problem(0, 20, 40)
    lam = 0.2 * np.abs(p.X.T @ p.y).max()
    est = LarsLassoPath(lam=lam).fit(p.X, p.y)
    ref = path_eval(lars_exact(p), lam)
    assert np.allclose(est.coef_, ref, atol=1e-10)
    assert np.allclose(est.predict(p.X), p.X @ ref)
    assert np.allclose(est.coef_at(2 * lam), path_eval(lars_exact(p), 2 * lam), atol=1e-10)


def test_approximate_fit_is_certified():
    p = gaussian_problem(1, 20, 60)
    est = LarsLassoPath(algo="approx-classical", epsilon=0.1, lam_ratio=0.3, random_state=2)
    est.fit(p.X, p.y)
    assert duality_gap(p, est.coef_, est.lam_) <= est.lam_ * 0.1 * np.abs(est.coef_).sum() + 1e-9
    assert est.ledger_.sample_draws > 0


def test_params_and_clone():
    est = LarsLassoPath(algo="quantum-simple", epsilon=0.2)
    params = est.get_params()
    assert params["algo"] == "quantum-simple" and params["epsilon"] == 0.2
    assert clone(est).get_params() == params


def test_validation():
    X = np.random.default_rng(0).standard_normal((5, 3))
    y = np.ones(5)
    with pytest.raises(InputError):
        LarsLassoPath(algo="magic").fit(X, y)
    with pytest.raises(InputError):
        LarsLassoPath(lam=-1.0).fit(X, y)
    with pytest.raises(ValueError):
        LarsLassoPath().fit(X, np.ones(4))
    with pytest.raises(ValueError):
        LarsLassoPath().fit(np.full((5, 3), np.nan), y)
    est = LarsLassoPath().fit(X, y)
    with pytest.raises(InputError):
        est.predict(np.ones((2, 4)))
    from sklearn.exceptions import NotFittedError
    with pytest.raises(NotFittedError):
        LarsLassoPath().predict(X)
