import math

import numpy as np
import pytest

from lassopath.errors import ContractViolation, EmptyDomain, InputError
from lassopath.minfind import (NoisyValueOracle, max_approx_sim, min_approx_sim, min_delta2,
                               min_exact_sim, search_charge)
from lassopath.oracle import ADVERSARIAL, QueryLedger


def test_min_exact_examples():
    assert min_exact_sim([3.0, 1.0, 2.0], 0.1) == (1, 1.0)
    assert min_exact_sim([4.0, 4.0, 4.0], 0.1) == (0, 4.0)
    v = np.random.default_rng(0).standard_normal(500)
    k, val = min_exact_sim(v, 0.1)
    best = 0
    for i in range(1, 500):
        if v[i] < v[best]:
            best = i
    assert (k, val) == (best, v[best])
    with pytest.raises(EmptyDomain):
        min_exact_sim([], 0.1)


def test_min_exact_failure_injection():
    rng = np.random.default_rng(1)
    v = np.arange(100.0)
    wrong = sum(min_exact_sim(v, 0.5, rng=rng, inject_failure=True)[0] != 0 for _ in range(400))
    assert 100 < wrong < 300
    with pytest.raises(InputError):
        min_exact_sim(v, 0.5, inject_failure=True)


def test_search_charge_sqrt_scaling():
    led1, led4 = QueryLedger(), QueryLedger()
    min_exact_sim(np.ones(1000), 0.01, led1)
    min_exact_sim(np.ones(4000), 0.01, led4)
    assert 1.9 <= led4.charged_quantum_queries / led1.charged_quantum_queries <= 2.1
    assert search_charge(100, 0.1) == math.ceil(8 * 10 * math.log(10))


def _oracle(u, eps, m=None, delta1=0.1):
    return NoisyValueOracle.uniform_noise(u, eps, min_delta2(len(u) if m is None else m, delta1))


def test_min_approx_examples():
    u = np.array([3.0, 1.0, 2.0])
    rng = np.random.default_rng(0)
    assert min_approx_sim(_oracle(u, 0.0), 0.1, rng=rng) == 1
    picks = {min_approx_sim(_oracle(u, 0.6), 0.1, rng=rng) for _ in range(200)}
    assert picks <= {1, 2} and picks == {1, 2}
    assert min_approx_sim(_oracle(u, 0.6), 0.1, mode=ADVERSARIAL) == 2


def test_min_approx_monte_carlo():
    rng = np.random.default_rng(3)
    u = rng.standard_normal(300)
    eps, delta1 = 0.05, 0.05
    ok = 0
    for _ in range(500):
        k = min_approx_sim(_oracle(u, eps, delta1=delta1), delta1, rng=rng, inject_failure=True)
        ok += u[k] <= u.min() + 2 * eps
    assert ok / 500 >= (1 - delta1) - 0.02


def test_min_approx_contract_violation_and_domain():
    u = np.ones(10)
    with pytest.raises(ContractViolation):
        min_approx_sim(NoisyValueOracle.uniform_noise(u, 0.1, 0.5), 0.1, rng=np.random.default_rng(0))
    with pytest.raises(EmptyDomain):
        min_approx_sim(_oracle(np.zeros(0), 0.1, m=1), 0.1)
    with pytest.raises(InputError):
        min_approx_sim(_oracle(u, 0.1), 0.1)  # stochastic mode without rng


def test_max_is_negated_min():
    rng = np.random.default_rng(4)
    v = rng.standard_normal(50)
    o = _oracle(v, 0.0)
    assert max_approx_sim(o, 0.1, mode=ADVERSARIAL) == int(np.argmax(v))
    neg = _oracle(-v, 0.0)
    assert max_approx_sim(o, 0.1, mode=ADVERSARIAL) == min_approx_sim(neg, 0.1, mode=ADVERSARIAL)


def test_adversarial_guarantee_deterministic():
    rng = np.random.default_rng(5)
    for _ in range(50):
        u = rng.standard_normal(40)
        eps = rng.uniform(0, 1)
        k = min_approx_sim(_oracle(u, eps), 0.1, mode=ADVERSARIAL)
        assert u[k] <= u.min() + 2 * eps


def test_from_estimates_uses_given_values():
    u = np.array([1.0, 1.05, 3.0])
    o = NoisyValueOracle.from_estimates(u, [1.2, 1.0, 3.0], 0.2, min_delta2(3, 0.1))
    assert min_approx_sim(o, 0.1, rng=np.random.default_rng(0)) == 1


def test_approx_search_charges_sqrt():
    led1, led4 = QueryLedger(), QueryLedger()
    min_approx_sim(_oracle(np.ones(250), 0.1), 0.1, led1, mode=ADVERSARIAL)
    min_approx_sim(_oracle(np.ones(1000), 0.1), 0.1, led4, mode=ADVERSARIAL)
    assert 1.9 <= led4.charged_quantum_queries / led1.charged_quantum_queries <= 2.1
