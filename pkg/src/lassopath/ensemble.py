"""Gaussian random-design experiments and noisy-regime error-rate checks.

Designs have rows drawn i.i.d. from N(0, Sigma), built as X = Z Sigma^{1/2}.
The experiments draw many designs and report how often a statistic meets a
probabilistic bound. Every trial gets its own RNG stream spawned from the
master seed, so results do not depend on thread scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import LassoProblem, path_eval
from .errors import (DimensionMismatch, InputError, NotApplicable, NotPositiveDefinite,
                     PreconditionViolated, RankDeficient, ZeroResidual)
from .lars import ApproxConfig, lars_approx, mutual_incoherence, mutual_overlap
from .verify import duality_gap


@dataclass(frozen=True, eq=False)
class GaussianSpec:
    """Dimensions, covariance (``None`` means identity) and seed."""

    n: int
    d: int
    sigma: np.ndarray | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1 or self.d < 1:
            raise InputError("n and d must be positive")
        if self.sigma is not None:
            s = np.asarray(self.sigma, float)
            if s.shape != (self.d, self.d):
                raise DimensionMismatch(f"sigma must be {self.d}x{self.d}")
            object.__setattr__(self, "sigma", s)

    def covariance(self) -> np.ndarray:
        return np.eye(self.d) if self.sigma is None else self.sigma


def ar1_covariance(d: int, rho: float) -> np.ndarray:
    """Sigma_ij = rho^|i-j|, unit diagonal."""
    idx = np.arange(d)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def sqrt_covariance(sigma: np.ndarray) -> np.ndarray:
    """Symmetric square root; raises if sigma is not positive definite."""
    sigma = np.asarray(sigma, float)
    try:
        np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("covariance is not positive definite") from exc
    w, V = np.linalg.eigh(sigma)
    return (V * np.sqrt(w)) @ V.T


def gaussian_design(spec: GaussianSpec, rng: np.random.Generator | None = None) -> np.ndarray:
    rng = np.random.default_rng(spec.seed) if rng is None else rng
    Z = rng.standard_normal((spec.n, spec.d))
    if spec.sigma is None:
        return Z
    return Z @ sqrt_covariance(spec.sigma)


def conditioning_stat(X: np.ndarray, A: Sequence[int]) -> float:
    """||X||_max * ||X_A^+||_2 = ||X||_max / sigma_min(X_A)."""
    X = np.asarray(X, float)
    A = list(A)
    if not A:
        raise InputError("active set must be nonempty")
    sv = np.linalg.svd(X[:, A], compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        raise RankDeficient("X_A is rank deficient")
    return float(np.abs(X).max() / sv[-1])


def conditioning_bound(n: int, d: int, delta: float) -> float:
    """High-probability upper bound on ``conditioning_stat`` for Sigma = I, |A| <= n/2."""
    if not 2 * math.exp(-n / 2) < delta < 1:
        raise PreconditionViolated("delta must lie in (2 exp(-n/2), 1)")
    den = (1 - 1 / math.sqrt(2)) * math.sqrt(n) - math.sqrt(2 * math.log(2 / delta))
    if den <= 0:
        raise PreconditionViolated("n too small for the conditioning bound")
    return math.sqrt(math.log(4 * n * d / delta)) / den


def prefix_incoherence(sigma: np.ndarray, k: int) -> float:
    """max over j outside the first k of ||Sigma_jA Sigma_AA^{-1}||_1."""
    if k == 0 or k >= sigma.shape[0]:
        return 0.0
    S_AA = sigma[:k, :k]
    S_cA = sigma[k:, :k]
    return float(np.abs(np.linalg.solve(S_AA, S_cA.T)).sum(axis=0).max())


def incoherence_budget(spec: GaussianSpec, delta: float) -> int:
    """Largest |A| with |A| <= (1 - abar)^2 sigma_min(Sigma) n / (72 ln(4d/delta))."""
    sigma = spec.covariance()
    smin = float(np.linalg.eigvalsh(sigma)[0])
    base = smin * spec.n / (72 * math.log(4 * spec.d / delta))
    k = 0
    while k + 1 < spec.d:
        abar = prefix_incoherence(sigma, k + 1)
        if abar >= 1 or k + 1 > (1 - abar) ** 2 * base:
            break
        k += 1
    return k


def overlap_bound(y: np.ndarray, spec: GaussianSpec, delta: float, A_size: int) -> float:
    """Lower bound on the mutual overlap of a Sigma-Gaussian design."""
    y = np.asarray(y, float)
    y1 = float(np.abs(y).sum())
    if y1 == 0.0:
        raise ZeroResidual("y is zero")
    sigma = spec.covariance()
    root = sqrt_covariance(sigma)
    root_l1 = float(np.abs(root).sum(axis=0).max())
    c_sigma = conditional_min_eig(sigma, A_size)
    n, d = spec.n, spec.d
    return ((delta / 3) ** (2 / d) / (4 * root_l1) * (np.linalg.norm(y) / y1)
            * math.sqrt(math.pi * c_sigma / math.log(6 * n * d / delta)))


def conditional_min_eig(sigma: np.ndarray, k: int) -> float:
    """sigma_min of the Schur complement Sigma_{A^c|A} for A the first k indices."""
    if k == 0:
        return float(np.linalg.eigvalsh(sigma)[0])
    S = sigma[k:, k:] - sigma[k:, :k] @ np.linalg.solve(sigma[:k, :k], sigma[:k, k:])
    return float(np.linalg.eigvalsh(S)[0])


@dataclass
class ExperimentResult:
    name: str
    trials: int
    successes: int
    bound: float | None
    threshold: float | None
    stats: list[float] = field(default_factory=list)
    params: dict = field(default_factory=dict)

    @property
    def frequency(self) -> float:
        return self.successes / self.trials if self.trials else float("nan")

    def to_dict(self, per_trial: bool = True) -> dict:
        out = {"experiment": self.name, "trials": self.trials, "successes": int(self.successes),
               "frequency": self.frequency, "bound": self.bound, "threshold": self.threshold,
               "params": self.params}
        if per_trial:
            out["stats"] = self.stats
        return out


def _trial_rngs(seed: int, trials: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]


def _map(fn: Callable, items: list, threads: int) -> list:
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _check_trials(trials: int) -> None:
    if trials < 1:
        raise InputError("trials must be at least 1")


def conditioning_experiment(spec: GaussianSpec, A_size: int, trials: int, delta: float,
                            threads: int = 1) -> ExperimentResult:
    """Frequency with which ``conditioning_stat`` stays below its bound (Sigma = I)."""
    _check_trials(trials)
    if spec.sigma is not None:
        raise PreconditionViolated("the conditioning bound is stated for Sigma = I")
    if not 1 <= A_size <= spec.n / 2:
        raise PreconditionViolated("need 1 <= |A| <= n/2")
    bound = conditioning_bound(spec.n, spec.d, delta)
    A = list(range(A_size))
    stats = _map(lambda rng: conditioning_stat(gaussian_design(spec, rng), A),
                 _trial_rngs(spec.seed, trials), threads)
    ok = int(sum(s <= bound for s in stats))
    return ExperimentResult("conditioning", trials, ok, bound, None, stats,
                            {"n": spec.n, "d": spec.d, "A_size": A_size, "delta": delta})


def incoherence_experiment(spec: GaussianSpec, A_size: int, trials: int, delta: float,
                           threads: int = 1,
                           design: Callable[[np.random.Generator], np.ndarray] | None = None
                           ) -> ExperimentResult:
    """Frequency with which ||X_A^+ X_{A^c}||_1 <= 1/2 + abar/2 at |A| within budget.

    ``design`` overrides the Gaussian generator (used for deterministic checks).
    """
    _check_trials(trials)
    sigma = spec.covariance()
    if np.any(np.diag(sigma) > 1 + 1e-12):
        raise PreconditionViolated("covariance diagonal must not exceed 1")
    budget = incoherence_budget(spec, delta)
    if A_size > budget:
        raise PreconditionViolated(f"|A| = {A_size} exceeds the budget {budget}")
    abar = prefix_incoherence(sigma, A_size)
    threshold = 0.5 + abar / 2
    A = list(range(A_size))
    gen = design or (lambda rng: gaussian_design(spec, rng))

    def one(rng):
        X = gen(rng)
        return mutual_incoherence(LassoProblem(X, np.zeros(X.shape[0])), A) if A else 0.0

    stats = _map(one, _trial_rngs(spec.seed, trials), threads)
    ok = int(sum(s <= threshold for s in stats))
    return ExperimentResult("incoherence", trials, ok, None, threshold, stats,
                            {"n": spec.n, "d": spec.d, "A_size": A_size, "budget": budget,
                             "delta": delta, "abar": abar})


def overlap_experiment(spec: GaussianSpec, y: np.ndarray, A_size: int, trials: int, delta: float,
                       threads: int = 1) -> ExperimentResult:
    """Frequency with which the mutual overlap meets its lower bound."""
    _check_trials(trials)
    y = np.asarray(y, float).reshape(-1)
    if y.shape[0] != spec.n:
        raise DimensionMismatch("y must have length n")
    if not np.any(y):
        raise ZeroResidual("y is zero")
    if A_size > min(spec.n / 2, spec.n - 16 * math.log(3 / delta)):
        raise PreconditionViolated("|A| exceeds min(n/2, n - 16 ln(3/delta))")
    bound = overlap_bound(y, spec, delta, A_size)
    A = list(range(A_size))
    stats = _map(lambda rng: mutual_overlap(LassoProblem(gaussian_design(spec, rng), y), A),
                 _trial_rngs(spec.seed, trials), threads)
    ok = int(sum(s >= bound for s in stats))
    return ExperimentResult("overlap", trials, ok, bound, None, stats,
                            {"n": spec.n, "d": spec.d, "A_size": A_size, "delta": delta})


# -- noisy linear model ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NoisyModelSpec:
    """True coefficients and noise: ``"gaussian"`` with variance sigma^2, or a
    fixed vector ``w`` with ||w||_inf <= sigma."""

    beta_star: np.ndarray
    noise: str = "gaussian"
    sigma: float = 1.0
    w: np.ndarray | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "beta_star", np.asarray(self.beta_star, float).reshape(-1))
        if self.noise not in ("gaussian", "fixed"):
            raise InputError("noise must be 'gaussian' or 'fixed'")
        if not np.isfinite(self.sigma) or self.sigma < 0:
            raise InputError("sigma must be finite and nonnegative")
        if self.noise == "fixed":
            if self.w is None:
                raise InputError("fixed noise needs a vector w")
            w = np.asarray(self.w, float).reshape(-1)
            if np.abs(w).max(initial=0.0) > self.sigma * (1 + 1e-12):
                raise InputError("fixed noise must satisfy ||w||_inf <= sigma")
            object.__setattr__(self, "w", w)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.beta_star)


def noise_vector(spec: NoisyModelSpec, n: int) -> np.ndarray:
    if spec.noise == "fixed":
        if spec.w.shape[0] != n:
            raise DimensionMismatch("noise vector length must be n")
        return spec.w.copy()
    return spec.sigma * np.random.default_rng(spec.seed).standard_normal(n)


def noisy_model(X: np.ndarray, spec: NoisyModelSpec) -> np.ndarray:
    """y = X beta* + w."""
    X = np.asarray(X, float)
    if X.shape[1] != spec.beta_star.shape[0]:
        raise DimensionMismatch("beta* length must equal the number of columns")
    return X @ spec.beta_star + noise_vector(spec, X.shape[0])


@dataclass(frozen=True)
class RateCheck:
    lhs: float
    rhs: float
    passed: bool
    pe: float = float("nan")
    l1: float = float("nan")


def _certified(problem: LassoProblem, beta: np.ndarray, lam: float, eps: float, atol: float) -> bool:
    return duality_gap(problem, beta, lam) <= lam * eps * np.abs(beta).sum() + atol


def slow_rate_check(problem: LassoProblem, beta_star: np.ndarray, beta_tilde: np.ndarray,
                    lam: float, eps: float, atol: float = 1e-9,
                    check_certificate: bool = True) -> RateCheck:
    """||X(beta* - beta~)||^2 <= 2(2 - eps) lam ||beta*||_1.

    Requires lam >= ||X^T w||_inf / (1 - eps) with w = y - X beta*, and a
    duality-gap certificate of error lam * eps * ||beta~||_1 for beta~
    (skipped when ``check_certificate`` is False).
    """
    if not 0 <= eps < 1:
        raise NotApplicable("eps must lie in [0, 1)")
    beta_star = np.asarray(beta_star, float)
    beta_tilde = np.asarray(beta_tilde, float)
    w = problem.y - problem.X @ beta_star
    if lam < np.abs(problem.X.T @ w).max() / (1 - eps):
        raise NotApplicable("lambda is below ||X^T w||_inf / (1 - eps)")
    if check_certificate and not _certified(problem, beta_tilde, lam, eps, atol):
        raise NotApplicable("beta~ lacks a duality-gap certificate at this lambda")
    diff = problem.X @ (beta_star - beta_tilde)
    lhs = float(diff @ diff)
    rhs = 2 * (2 - eps) * lam * float(np.abs(beta_star).sum())
    return RateCheck(lhs, rhs, lhs <= rhs)


def global_kappa(X: np.ndarray) -> float:
    """sigma_min(X^T X) / n, a valid restricted-eigenvalue constant when n >= d."""
    n, d = X.shape
    if n < d:
        raise NotApplicable("global kappa needs n >= d")
    return float(np.linalg.eigvalsh(X.T @ X)[0] / n)


def fast_rate_check(problem: LassoProblem, beta_star: np.ndarray, beta_tilde: np.ndarray,
                    lam: float, eps: float, kappa: float | None = None,
                    atol: float = 1e-9, check_certificate: bool = True) -> RateCheck:
    """||X(b~ - b*)||^2 + 3 lam ||b~ - b*||_1 <= 81 lam^2 |S|/(n kappa) + 18 lam eps ||b*_S||_1.

    Requires eps <= 1/4, lam >= 4 ||X^T w||_inf and a certificate for b~
    (skipped when ``check_certificate`` is False).
    ``kappa`` defaults to the global constant, which needs n >= d.
    """
    if not 0 <= eps <= 0.25:
        raise NotApplicable("eps must lie in [0, 1/4]")
    beta_star = np.asarray(beta_star, float)
    beta_tilde = np.asarray(beta_tilde, float)
    X = problem.X
    w = problem.y - X @ beta_star
    if lam < 4 * np.abs(X.T @ w).max():
        raise NotApplicable("lambda is below 4 ||X^T w||_inf")
    if kappa is None:
        kappa = global_kappa(X)
    if not kappa > 0:
        raise NotApplicable("kappa must be positive")
    if check_certificate and not _certified(problem, beta_tilde, lam, eps, atol):
        raise NotApplicable("beta~ lacks a duality-gap certificate at this lambda")
    S = np.flatnonzero(beta_star)
    diff = beta_tilde - beta_star
    pe = float(np.sum((X @ diff) ** 2))
    l1 = float(np.abs(diff).sum())
    rhs = 81 * lam**2 * S.size / (problem.n * kappa) + 18 * lam * eps * float(np.abs(beta_star[S]).sum())
    lhs = pe + 3 * lam * l1
    return RateCheck(lhs, rhs, lhs <= rhs, pe, l1)


def _sparse_truth(rng: np.random.Generator, d: int, s: int, scale: float) -> np.ndarray:
    beta = np.zeros(d)
    support = rng.choice(d, size=s, replace=False)
    beta[support] = scale * rng.choice((-1.0, 1.0), size=s) * rng.uniform(0.5, 1.5, size=s)
    return beta


def approximate_solution(problem: LassoProblem, lam: float, eps: float, estimator: str = "classical",
                         noise_mode: str = "stochastic", seed: int = 0, delta: float = 0.05) -> np.ndarray:
    """Coefficients at ``lam`` from an approximate path stopped at ``lam``."""
    cfg = ApproxConfig(epsilon=max(eps, 1e-12), delta=delta, estimator=estimator,
                       noise_mode=noise_mode, seed=seed, lambda_min=lam)
    path = lars_approx(problem, cfg)
    return path_eval(path, lam)


def rate_experiment(kind: str, n: int, d: int, sparsity: int, sigma: float, eps: float,
                    trials: int, seed: int = 0, delta: float = 0.05, estimator: str = "classical",
                    noise_mode: str = "stochastic", signal: float = 1.0,
                    threads: int = 1) -> ExperimentResult:
    """Repeated slow- or fast-rate checks on Gaussian designs with Gaussian noise.

    Slow rate uses lam = sqrt(2 C sigma^2 n ln(2d/delta)) / (1 - eps) with
    C = max_i ||X_i||^2 / n. Fast rate uses lam = 4 ||X^T w||_inf and needs n >= d.
    """
    _check_trials(trials)
    if kind not in ("slow", "fast"):
        raise InputError("kind must be 'slow' or 'fast'")
    if kind == "fast" and n < d:
        raise PreconditionViolated("fast-rate experiments need n >= d")
    if kind == "fast" and not 0 <= eps <= 0.25:
        raise NotApplicable("fast-rate experiments need eps in [0, 1/4]")
    if kind == "slow" and not 0 <= eps < 1:
        raise NotApplicable("slow-rate experiments need eps in [0, 1)")
    if not 0 < sparsity <= d:
        raise InputError("sparsity must lie in [1, d]")

    def one(rng):
        X = rng.standard_normal((n, d))
        beta_star = _sparse_truth(rng, d, sparsity, signal)
        model = NoisyModelSpec(beta_star, "gaussian", sigma, seed=int(rng.integers(2**32)))
        y = noisy_model(X, model)
        problem = LassoProblem(X, y)
        w = y - X @ beta_star
        if kind == "slow":
            C = float((X**2).sum(axis=0).max() / n)
            lam = math.sqrt(2 * C * sigma**2 * n * math.log(2 * d / delta)) / (1 - eps)
        else:
            lam = 4 * float(np.abs(X.T @ w).max())
        beta_tilde = approximate_solution(problem, lam, eps, estimator, noise_mode,
                                          int(rng.integers(2**32)), delta)
        try:
            check = slow_rate_check(problem, beta_star, beta_tilde, lam, eps) if kind == "slow" \
                else fast_rate_check(problem, beta_star, beta_tilde, lam, eps)
        except NotApplicable:
            return (None, False)
        return (check.lhs / check.rhs if check.rhs > 0 else 0.0, check.passed)

    out = _map(one, _trial_rngs(seed, trials), threads)
    ok = int(sum(p for _, p in out))
    return ExperimentResult(f"{kind}_rate", trials, ok, None, 1.0, [r for r, _ in out],
                            {"n": n, "d": d, "sparsity": sparsity, "sigma": sigma, "epsilon": eps,
                             "delta": delta, "estimator": estimator, "noise_mode": noise_mode})
