import numpy as np
import pytest

from lassopath import ApproxConfig, LassoProblem, lars_approx, lars_exact, lars_quantum_simple, path_eval, solve
from lassopath.errors import InputError, ZeroResidual
from lassopath.lars import IterationContext, crossing_times, join_candidates, joining_times, mutual_incoherence, mutual_overlap
from lassopath.linalg import ActiveSetState, from_columns
from lassopath.oracle import ADVERSARIAL, QueryLedger
from lassopath.verify import certify_path, kkt_check, lasso_oracle

from conftest import dense_pinv, gaussian_problem


def _ctx(problem, A, lam_t, signs):
    state = from_columns(problem.X, problem.y, A)
    state.set_eta(np.asarray(signs, float))
    XA = problem.X[:, A]
    resid = problem.y - XA @ state.mu()
    direc = XA @ state.theta()
    return IterationContext(lam_t, state, resid, direc, QueryLedger())


def test_joining_time_identity(identity_problem):
    ctx = _ctx(identity_problem, [0], 3.0, [1.0])
    assert np.allclose(joining_times(ctx, identity_problem), [1.0])


def test_joining_time_zero_numerator():
    X = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    p = LassoProblem(X, np.array([2.0, 0.0, 1.0]))
    ctx = _ctx(p, [0], 2.0, [1.0])
    assert joining_times(ctx, p)[0] == 0.0


def test_joining_times_dense_oracle():
    p = gaussian_problem(21, 10, 25)
    path = lars_exact(p, max_kinks=4)
    A = list(path.kinks[1].active)
    lam_t = path.kinks[1].lam
    XA = p.X[:, A]
    signs = np.sign(XA.T @ (p.y - XA @ path.kinks[1].dense(p.d)[A]))
    ctx = _ctx(p, A, lam_t, signs)
    Pd = dense_pinv(XA)
    inactive = np.setdiff1d(np.arange(p.d), A)
    ref = np.zeros(inactive.size)
    for t, i in enumerate(inactive):
        xi = p.X[:, i]
        num = xi @ (p.y - XA @ (Pd @ p.y))
        bterm = xi @ (XA @ (np.linalg.inv(XA.T @ XA) @ signs))
        for s in (1.0, -1.0):
            den = s - bterm
            if s * den > 0 and 0 < num / den <= lam_t * (1 + 1e-9):
                ref[t] = max(ref[t], min(num / den, lam_t))
    assert np.allclose(joining_times(ctx, p), ref, rtol=1e-9, atol=1e-12)
    assert np.max(ref) == pytest.approx(path.kinks[2].lam, rel=1e-9)


def test_join_candidates_filters():
    vals, signs = join_candidates(np.array([1.0, 5.0, -1.0, 0.0]), np.array([0.0, 0.0, 1.0, 0.2]), 3.0)
    assert np.allclose(vals, [1.0, 0.0, 0.5, 0.0])
    assert list(signs) == [1.0, 0.0, -1.0, 0.0]


def test_crossing_examples():
    assert np.allclose(crossing_times(np.array([2.0, -1.0]), np.array([1.0, 1.0]), 3.0), [2.0, 0.0])
    assert crossing_times(np.array([5.0]), np.array([1.0]), 3.0)[0] == 0.0
    assert crossing_times(np.array([1.0]), np.array([0.0]), 3.0)[0] == 0.0
    fresh = np.array([True, True])
    out = crossing_times(np.array([1e-17, 1e-17]), np.array([1.0, -1.0]), 3.0, fresh, np.array([1.0, 1.0]))
    assert list(out) == [0.0, 3.0]


def test_lars_exact_identity(identity_problem):
    path = lars_exact(identity_problem)
    assert [k.lam for k in path.kinks] == [3.0, 1.0, 0.0]
    assert [str(k.event) for k in path.kinks] == ["Join(0)", "Join(1)", "Terminal"]
    for lam in (2.5, 1.5, 0.7, 0.2):
        ref = np.sign(identity_problem.y) * np.maximum(np.abs(identity_problem.y) - lam, 0)
        assert np.allclose(path_eval(path, lam), ref)


def test_lars_exact_zero_y():
    path = lars_exact(LassoProblem(np.eye(3), np.zeros(3)))
    assert len(path) == 1 and path.kinks[0].lam == 0.0 and str(path.kinks[0].event) == "Init"


def test_lars_exact_matches_oracle_10x25(small_gaussian):
    path = lars_exact(small_gaussian)
    lam0 = path.kinks[0].lam
    lams = np.linspace(0.05 * lam0, lam0, 20)
    B = lasso_oracle(small_gaussian, lams, tol=1e-10)
    for k, lam in enumerate(lams):
        assert np.max(np.abs(path_eval(path, lam) - B[:, k])) <= 1e-5


def test_exact_path_kkt_at_kinks_and_midpoints():
    for seed in range(5):
        p = gaussian_problem(seed, 15, 40)
        path = lars_exact(p)
        for k in path.kinks:
            if k.lam > 0:
                assert kkt_check(p, k.dense(p.d), k.lam, 0.0, 1e-8).passed
        for _, lo, hi in path.segments():
            mid = 0.5 * (lo + hi)
            assert kkt_check(p, path_eval(path, mid), mid, 0.0, 1e-8).passed


def test_duplicate_argmax_joins_together():
    rng = np.random.default_rng(0)
    c = rng.standard_normal(6)
    # y = c + reversed(c) correlates equally with both columns
    p = LassoProblem(np.column_stack([c, c[::-1], 0.1 * rng.standard_normal(6)]), c + c[::-1])
    path = lars_exact(p)
    assert set(path.kinks[0].event.indices) == {0, 1}


def test_quantum_simple_equals_exact():
    for seed in range(4):
        p = gaussian_problem(seed, 12, 30)
        exact = lars_exact(p)
        led = QueryLedger()
        qs = lars_quantum_simple(p, ledger=led, seed=seed)
        assert len(exact) == len(qs)
        for a, b in zip(exact.kinks, qs.kinks):
            assert a.lam == b.lam and np.array_equal(a.dense(p.d), b.dense(p.d))
            assert str(a.event) == str(b.event)
        assert led.by_phase["join_search"]["charged_quantum_queries"] > 0


def test_quantum_simple_search_charge_scaling():
    rng = np.random.default_rng(0)
    charges = []
    for d in (101, 401):
        X = rng.standard_normal((10, d))
        p = LassoProblem(X, rng.standard_normal(10))
        led = QueryLedger()
        lars_quantum_simple(p, max_kinks=2, ledger=led)
        charges.append(led.by_phase["join_search"]["charged_quantum_queries"])
    assert 1.9 <= charges[1] / charges[0] <= 2.1


def test_quantum_simple_failure_injection_changes_path():
    p = gaussian_problem(3, 12, 30)
    exact = lars_exact(p)
    ref = [k.lam for k in exact.kinks[:6]]
    runs = [[k.lam for k in lars_quantum_simple(p, 6, delta=0.9, seed=s, inject_failure=True).kinks]
            for s in range(10)]
    assert any(r != ref for r in runs)


def test_approx_tiny_eps_reproduces_exact():
    for seed in range(5):
        p = gaussian_problem(seed, 15, 40)
        exact = lars_exact(p)
        approx = lars_approx(p, ApproxConfig(epsilon=1e-12, estimator="exact"))
        assert len(exact) == len(approx)
        assert np.allclose(exact.lambdas, approx.lambdas, rtol=0, atol=1e-8)


@pytest.mark.parametrize("estimator", ["quantum", "classical"])
@pytest.mark.parametrize("mode", ["stochastic", "adversarial"])
def test_approx_path_certified(estimator, mode):
    p = gaussian_problem(99, 20, 100, scaled=False)
    led = QueryLedger()
    path = lars_approx(p, ApproxConfig(epsilon=0.05, estimator=estimator, noise_mode=mode, seed=4), led)
    assert path.mode == "approximate" and not path.truncated
    assert np.all(np.diff(path.lambdas) <= 0)
    cert = certify_path(path, p, 0.05, 50)
    assert cert.passed, cert
    assert path.diagnostics["join_bound_violations"] == 0
    key = "charged_quantum_queries" if estimator == "quantum" else "sample_draws"
    assert getattr(led, key) > 0


def test_approx_path_is_seed_deterministic():
    p = gaussian_problem(1, 15, 40)
    cfg = ApproxConfig(epsilon=0.1, estimator="classical", seed=3)
    a, b = lars_approx(p, cfg), lars_approx(p, cfg)
    assert np.array_equal(a.lambdas, b.lambdas)
    assert np.array_equal(a.betas(), b.betas())


def test_lambda_min_stops_early():
    p = gaussian_problem(2, 15, 40)
    full = lars_exact(p)
    lam = 0.3 * full.kinks[0].lam
    part = lars_exact(p, lambda_min=lam)
    assert part.kinks[-1].lam == lam
    assert np.allclose(path_eval(part, lam), path_eval(full, lam), atol=1e-10)


def test_truncation_flag():
    p = gaussian_problem(2, 15, 40)
    path = lars_exact(p, max_kinks=3)
    assert path.truncated and len(path) == 3


def test_approx_config_validation():
    for kwargs in ({"epsilon": 0.0}, {"epsilon": 1.0}, {"epsilon": 0.1, "delta": 0.0},
                   {"epsilon": 0.1, "estimator": "oracle"}, {"epsilon": 0.1, "noise_mode": "x"},
                   {"epsilon": 0.1, "max_kinks": 0}):
        with pytest.raises(InputError):
            ApproxConfig(**kwargs)
    with pytest.raises(InputError):
        solve(gaussian_problem(0, 4, 5), "magic")


def test_mutual_incoherence_examples():
    X = np.eye(4)
    p = LassoProblem(X, np.ones(4))
    assert mutual_incoherence(p, [0, 1]) == 0.0
    X2 = np.column_stack([np.eye(3), np.eye(3)[:, 0]])
    assert mutual_incoherence(LassoProblem(X2, np.ones(3)), [0, 1]) >= 1.0
    q = gaussian_problem(4, 20, 30)
    A = [2, 5, 7]
    M = dense_pinv(q.X[:, A]) @ np.delete(q.X, A, axis=1)
    assert mutual_incoherence(q, A) == pytest.approx(np.abs(M).sum(axis=0).max(), rel=1e-9)
    assert mutual_incoherence(q, []) == 0.0


def test_mutual_overlap_examples():
    assert mutual_overlap(LassoProblem(np.eye(2), np.array([3.0, 1.0])), []) == pytest.approx(0.75)
    assert mutual_overlap(LassoProblem(np.eye(3), np.array([0.0, 2.0, 0.0])), []) == pytest.approx(1.0)
    q = gaussian_problem(5, 20, 30)
    A = [1, 4]
    XA = q.X[:, A]
    r = q.y - XA @ (dense_pinv(XA) @ q.y)
    ref = np.abs(q.X.T @ r).max() / (np.abs(q.X).max() * np.abs(r).sum())
    assert mutual_overlap(q, A) == pytest.approx(ref, rel=1e-9)
    with pytest.raises(ZeroResidual):
        mutual_overlap(LassoProblem(np.eye(2), np.array([1.0, 0.0])), [0])
