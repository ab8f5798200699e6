"""Simulated quantum minimum finding, exact and over noisy value oracles.

Both routines compute the answer set directly and charge the ledger
ceil(c * sqrt(m) * ln(1/delta)) oracle invocations with c = 8. Failure
injection is off by default; when on, a failure returns a uniform index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ContractViolation, EmptyDomain, InputError
from .oracle import ADVERSARIAL, STOCHASTIC, QueryLedger, check_mode

SEARCH_CHARGE_CONSTANT = 8


def search_charge(m: int, delta: float, c: float = SEARCH_CHARGE_CONSTANT) -> int:
    if m < 1:
        raise EmptyDomain("search domain is empty")
    if not 0 < delta < 1:
        raise InputError("delta must lie in (0, 1)")
    return int(math.ceil(c * math.sqrt(m) * math.log(1.0 / delta)))


def min_exact_sim(values, delta: float, ledger: QueryLedger | None = None,
                  rng: np.random.Generator | None = None, inject_failure: bool = False,
                  c: float = SEARCH_CHARGE_CONSTANT) -> tuple[int, float]:
    """Index and value of the minimum; ties go to the lowest index."""
    values = np.asarray(values, dtype=float).reshape(-1)
    m = values.shape[0]
    if m == 0:
        raise EmptyDomain("search domain is empty")
    if ledger is not None:
        ledger.charge("charged_quantum_queries", search_charge(m, delta, c))
    k = int(np.argmin(values))
    if inject_failure:
        if rng is None:
            raise InputError("failure injection needs an rng")
        if rng.random() < delta:
            k = int(rng.integers(m))
    return k, float(values[k])


def min_delta2(m: int, delta1: float, C: float = 1.0) -> float:
    """Largest per-call oracle failure prob allowed for approximate search."""
    return C * delta1**2 / (m * math.log(1.0 / delta1))


@dataclass
class NoisyValueOracle:
    """Noisy access to values ``u`` over a domain of size ``m``.

    ``evaluate(rng)`` returns one estimate per element with
    |r_k - u_k| <= epsilon except with probability ``delta2`` per call.
    ``true_values`` are used only to form the qualifying set.
    """

    true_values: np.ndarray
    epsilon: float
    delta2: float
    evaluate: Callable[[np.random.Generator], np.ndarray]

    @property
    def m(self) -> int:
        return int(np.asarray(self.true_values).shape[0])

    @classmethod
    def from_estimates(cls, true_values, estimates, epsilon: float, delta2: float) -> "NoisyValueOracle":
        est = np.asarray(estimates, dtype=float)
        return cls(np.asarray(true_values, float), float(epsilon), float(delta2), lambda rng: est)

    @classmethod
    def uniform_noise(cls, true_values, epsilon: float, delta2: float) -> "NoisyValueOracle":
        """Estimates uniform within +-epsilon of the truth."""
        u = np.asarray(true_values, float)
        return cls(u, float(epsilon), float(delta2),
                   lambda rng: u + rng.uniform(-epsilon, epsilon, size=u.shape))


def min_approx_sim(oracle: NoisyValueOracle, delta1: float, ledger: QueryLedger | None = None,
                   rng: np.random.Generator | None = None, mode: str = STOCHASTIC,
                   C: float = 1.0, inject_failure: bool = False,
                   c: float = SEARCH_CHARGE_CONSTANT) -> int:
    """An index k whose true value is within 2*epsilon of the minimum.

    Stochastic mode evaluates every element once through the noisy oracle,
    keeps the qualifying elements whose estimate is within epsilon of the best
    estimate and picks one uniformly. Adversarial mode returns the qualifying
    element with the largest true value.
    """
    check_mode(mode)
    m = oracle.m
    if m == 0:
        raise EmptyDomain("search domain is empty")
    if not 0 < delta1 < 1:
        raise InputError("delta1 must lie in (0, 1)")
    if oracle.delta2 > min_delta2(m, delta1, C) * (1 + 1e-12):
        raise ContractViolation(
            f"oracle failure prob {oracle.delta2:.3g} exceeds {min_delta2(m, delta1, C):.3g}")
    if ledger is not None:
        ledger.charge("charged_quantum_queries", search_charge(m, delta1, c))
    u = np.asarray(oracle.true_values, float)
    eps = oracle.epsilon
    qualifying = np.flatnonzero(u <= u.min() + 2.0 * eps)
    if mode == ADVERSARIAL:
        worst = u[qualifying].max()
        k = int(qualifying[np.flatnonzero(u[qualifying] == worst)[0]])
    else:
        if rng is None:
            raise InputError("stochastic mode needs an rng")
        r = np.asarray(oracle.evaluate(rng), float)
        pool = qualifying[r[qualifying] <= r.min() + eps]
        if pool.size == 0:
            pool = qualifying
        k = int(pool[rng.integers(pool.size)]) if pool.size > 1 else int(pool[0])
    if inject_failure:
        if rng is None:
            raise InputError("failure injection needs an rng")
        if rng.random() < delta1:
            k = int(rng.integers(m))
    return k


def max_approx_sim(oracle: NoisyValueOracle, delta1: float, **kwargs) -> int:
    """Maximisation by negation of the oracle."""
    neg = NoisyValueOracle(-np.asarray(oracle.true_values, float), oracle.epsilon, oracle.delta2,
                           lambda rng: -np.asarray(oracle.evaluate(rng), float))
    return min_approx_sim(neg, delta1, **kwargs)
