"""LARS homotopy for the Lasso path: exact, simple quantum and approximate variants.

All four solvers share one loop. At a kink ``lam_t`` with active set ``A``
the solution on the next segment is ``beta_A(lam) = mu - lam * theta`` with
``mu = X_A^+ y`` and ``theta = (X_A^T X_A)^{-1} eta``. The next kink is the
largest of the joining times of inactive features and the crossing times of
active coefficients.

The approximate solvers use a real-valued ``eta`` (the active correlations
divided by ``lam_t``), pick a joining feature whose joining time is within a
factor ``1 - eps/(1 + alpha_A)`` of the largest one, and rescale that time up
by the inverse factor so no inactive correlation overshoots ``lam``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import Event, Kink, LassoProblem, RegularisationPath, lambda_max
from .errors import AllZeroObservations, InputError, StationaryStall, ZeroResidual
from .linalg import ActiveSetState, from_columns
from .minfind import NoisyValueOracle, min_approx_sim, min_delta2, min_exact_sim, search_charge
from .oracle import (STOCHASTIC, QueryLedger, check_mode, classical_sample_count,
                     inner_products_classical, inner_products_quantum_sim, norm_products,
                     quantum_query_charge, ratio_error_bounds)

DEN_TOL = 1e-12
JOIN_SLACK = 1e-9
RESID_RTOL = 1e-11
# below this relative precision an element is read exactly instead of sampled
PRECISION_FLOOR = 1e-12
ESTIMATORS = ("quantum", "classical", "exact")


@dataclass
class IterationContext:
    """Snapshot of one LARS iteration."""

    lambda_t: float
    state: ActiveSetState
    residual_vec: np.ndarray
    direction_vec: np.ndarray
    ledger: QueryLedger
    alpha_A: float | None = None


@dataclass
class ApproxConfig:
    """Settings for the approximate solvers.

    ``estimator`` is ``"quantum"`` (simulated amplitude estimation plus
    approximate minimum finding), ``"classical"`` (sampling estimates plus a
    direct argmax) or ``"exact"`` (noise-free values, used for the small-eps
    limit). ``alpha_provider(problem, state)`` must return an upper bound on
    the mutual incoherence of the current active set; the default computes it
    exactly. ``gamma_lower`` optionally replaces the measured overlap.
    """

    epsilon: float
    delta: float = 0.05
    max_kinks: int | None = None
    estimator: str = "quantum"
    noise_mode: str = STOCHASTIC
    alpha_provider: Callable[[LassoProblem, ActiveSetState], float] | None = None
    gamma_lower: float | None = None
    stationary_cap: int = 3
    min_find_C: float = 1.0
    inject_failure: bool = False
    seed: int | None = 0
    lambda_min: float = 0.0

    def __post_init__(self) -> None:
        if not 0 < self.epsilon < 1:
            raise InputError("epsilon must lie in (0, 1)")
        if not 0 < self.delta < 1:
            raise InputError("delta must lie in (0, 1)")
        if self.estimator not in ESTIMATORS:
            raise InputError(f"estimator must be one of {ESTIMATORS}")
        check_mode(self.noise_mode)
        if self.max_kinks is not None and self.max_kinks < 1:
            raise InputError("max_kinks must be positive")
        if self.stationary_cap < 0:
            raise InputError("stationary_cap must be nonnegative")


# -- event times ------------------------------------------------------------

def join_candidates(a: np.ndarray, b: np.ndarray, lam_t: float) -> tuple[np.ndarray, np.ndarray]:
    """Joining times a / (s - b) over s = +-1, keeping times in (0, lam_t].

    A sign ``s`` counts only when the correlation ``a + lam*b`` reaches ``s*lam``
    from inside as lam decreases, that is when ``s*(s - b) > 0``. Returns the
    joining time (0 when no sign is valid) and the sign used.
    """
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    best = np.zeros_like(a)
    sign = np.zeros_like(a)
    for s in (1.0, -1.0):
        den = s - b
        ok = (s * den > 0) & (np.abs(den) >= DEN_TOL)
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = np.where(ok, a / np.where(ok, den, 1.0), 0.0)
        ok &= (cand > 0) & (cand <= lam_t * (1 + JOIN_SLACK))
        cand = np.minimum(cand, lam_t)
        take = ok & (cand > best)
        best = np.where(take, cand, best)
        sign = np.where(take, s, sign)
    return best, sign


def joining_times(ctx: IterationContext, problem: LassoProblem,
                  inactive: np.ndarray | None = None) -> np.ndarray:
    """Joining time of each inactive feature (0 when it never joins on this segment)."""
    idx = ctx.state.inactive() if inactive is None else inactive
    Xi = problem.X[:, idx]
    vals, _ = join_candidates(Xi.T @ ctx.residual_vec, Xi.T @ ctx.direction_vec, ctx.lambda_t)
    return vals


def crossing_times(mu: np.ndarray, theta: np.ndarray, lam_t: float,
                   fresh: np.ndarray | None = None, eta: np.ndarray | None = None) -> np.ndarray:
    """Crossing time mu_i/theta_i of each active coefficient, 0 if none in (0, lam_t].

    ``fresh`` marks coefficients that are zero at ``lam_t`` because they just
    joined; they cross at ``lam_t`` only if they move against ``eta``.
    """
    mu = np.asarray(mu, float)
    theta = np.asarray(theta, float)
    out = np.zeros_like(mu)
    nz = theta != 0
    ratio = np.zeros_like(mu)
    ratio[nz] = mu[nz] / theta[nz]
    ok = nz & (ratio > 0) & (ratio <= lam_t * (1 + JOIN_SLACK))
    out[ok] = np.minimum(ratio[ok], lam_t)
    if fresh is not None:
        fresh = np.asarray(fresh, bool)
        out[fresh] = 0.0
        if eta is not None:
            against = fresh & (theta * np.asarray(eta, float) < 0)
            out[against] = lam_t
    return out


# -- incoherence and overlap -----------------------------------------------

def mutual_incoherence(problem: LassoProblem, A, state: ActiveSetState | None = None) -> float:
    """||X_A^+ X_{A^c}||_1: largest l1 norm of X_A^+ X_j over inactive j."""
    A = [int(i) for i in A]
    if not A:
        return 0.0
    if state is None:
        state = from_columns(problem.X, problem.y, A)
    mask = np.ones(problem.d, dtype=bool)
    mask[A] = False
    if not mask.any():
        return 0.0
    return float(np.abs(state.P @ problem.X[:, mask]).sum(axis=0).max())


def mutual_overlap(problem: LassoProblem, A, state: ActiveSetState | None = None) -> float:
    """||X^T r||_inf / (||X||_max ||r||_1) for the residual r = (I - X_A X_A^+) y."""
    A = [int(i) for i in A]
    if state is None:
        state = from_columns(problem.X, problem.y, A) if A else ActiveSetState(problem.X, problem.y)
    r = state.project_residual()
    r1 = float(np.abs(r).sum())
    if r1 <= 1e-12 * max(float(np.abs(problem.y).sum()), 1e-300):
        raise ZeroResidual("y lies in the span of the active columns")
    xmax = float(np.abs(problem.X).max())
    return float(np.abs(problem.X.T @ r).max() / (xmax * r1))


def _default_alpha(problem: LassoProblem, state: ActiveSetState) -> float:
    return mutual_incoherence(problem, state.A, state)


# -- main loop --------------------------------------------------------------

@dataclass
class _Run:
    problem: LassoProblem
    mode: str
    algo: str
    ledger: QueryLedger
    max_kinks: int
    lambda_min: float = 0.0
    cfg: ApproxConfig | None = None
    delta: float = 0.05
    rng: np.random.Generator | None = None
    inject_failure: bool = False
    diagnostics: dict = field(default_factory=dict)


def _default_budget(problem: LassoProblem) -> int:
    return 100 * (min(problem.n, problem.d) + 1)


def _trivial_path(problem: LassoProblem, run: _Run) -> RegularisationPath:
    kink = Kink.from_dense(0.0, np.zeros(problem.d), Event("Init"))
    return RegularisationPath((kink,), problem.d, run.mode,
                              run.cfg.epsilon if run.cfg else 0.0, run.algo, False, run.diagnostics)


def _solve(run: _Run) -> RegularisationPath:
    problem = run.problem
    X, y = problem.X, problem.y
    n = problem.n
    approx = run.mode == "approximate"
    try:
        lam0, A0 = lambda_max(problem)
    except AllZeroObservations:
        return _trivial_path(problem, run)
    if lam0 == 0.0:
        return _trivial_path(problem, run)

    state = ActiveSetState(X, y)
    for j in A0:
        state.insert(j)
    beta_A = np.zeros(len(A0))
    kinks = [Kink.from_dense(lam0, np.zeros(problem.d), Event("Join", A0), A0)]
    lam_t = lam0
    fresh = set(A0)
    truncated = False
    diag = run.diagnostics
    diag.update(join_bound_violations=0, stationary_events=0, forced_joins=0,
                precision_floor_hits=0)
    stationary_run = 0
    stall_seen: dict[frozenset, int] = {}

    while True:
        if len(kinks) >= run.max_kinks:
            truncated = True
            break
        XA = X[:, state.A]
        corr_A = XA.T @ (y - XA @ beta_A)
        eta = corr_A / lam_t if approx else np.sign(corr_A)
        state.set_eta(eta)
        mu = state.mu()
        theta = state.theta()
        resid = y - XA @ mu
        direc = XA @ theta
        run.ledger.charge("entry_reads", n * len(state.A), "active_update")

        inactive = state.inactive()
        fresh_mask = np.array([j in fresh for j in state.A])
        cross = crossing_times(mu, theta, lam_t, fresh_mask, eta)
        lam_cross = float(cross.max()) if cross.size else 0.0
        i_cross = int(np.argmax(cross)) if cross.size else -1

        lam_join, j_join = 0.0, -1
        # a saturated active set fits y exactly, so nothing else can join
        saturated = len(state.A) >= n or np.linalg.norm(resid) <= RESID_RTOL * np.linalg.norm(y)
        if inactive.size and not saturated:
            Xi = X[:, inactive]
            a = Xi.T @ resid
            b = Xi.T @ direc
            Lam, sgn = join_candidates(a, b, lam_t)
            ctx = IterationContext(lam_t, state, resid, direc, run.ledger)
            if approx:
                forced = stationary_run >= run.cfg.stationary_cap
                pick = _approx_pick(run, ctx, Xi, a, b, Lam, sgn, forced)
                if forced:
                    diag["forced_joins"] += 1
            elif run.algo == "quantum-simple":
                pick = _simple_quantum_pick(run, Lam)
            else:
                run.ledger.charge("entry_reads", n * inactive.size, "join_scan")
                pick = int(np.argmax(Lam))
            if Lam[pick] > 0:
                j_join = int(inactive[pick])
                if approx:
                    lam_join = float(Lam[pick]) / (1.0 - run.cfg.epsilon / (1.0 + ctx.alpha_A))
                    if lam_join < float(Lam.max()) * (1 - 1e-12):
                        diag["join_bound_violations"] += 1
                else:
                    lam_join = float(Lam[pick])

        lam_next = max(lam_join, lam_cross)
        if approx:
            lam_next = min(lam_t, lam_next)
        if lam_next <= run.lambda_min or lam_next <= 0.0:
            lam_end = run.lambda_min
            beta_end = mu - lam_end * theta
            kinks.append(_kink(problem, state.A, beta_end, lam_end, Event("Terminal"), state.A))
            break

        beta_next = mu - lam_next * theta
        moved = lam_next < lam_t
        if not moved:
            beta_next[fresh_mask] = 0.0
        old_A = list(state.A)
        if lam_cross > 0 and lam_cross >= lam_join:
            j = old_A[i_cross]
            beta_next[i_cross] = 0.0
            event = Event("Cross", (j,))
            state.remove(j)
            beta_A = np.delete(beta_next, i_cross)
            fresh = set() if moved else fresh - {j}
            stationary_run = 0
        else:
            j = j_join
            is_stationary = approx and lam_next >= lam_t
            event = Event("Stationary" if is_stationary else "Join", (j,))
            if is_stationary:
                diag["stationary_events"] += 1
                stationary_run += 1
                key = frozenset(old_A + [j])
                stall_seen[key] = stall_seen.get(key, 0) + 1
                if stall_seen[key] > 2:
                    raise StationaryStall(f"active set {sorted(key)} revisited at a stationary step")
            else:
                stationary_run = 0
            state.insert(j)
            beta_A = np.append(beta_next, 0.0)
            fresh = {j} if moved else fresh | {j}
        kinks.append(_kink(problem, old_A, beta_next, lam_next, event, state.A))
        lam_t = lam_next

    eps = run.cfg.epsilon if run.cfg else 0.0
    return RegularisationPath(tuple(kinks), problem.d, run.mode, eps, run.algo, truncated, diag)


def _kink(problem: LassoProblem, cols, vals, lam, event, active) -> Kink:
    beta = np.zeros(problem.d)
    beta[list(cols)] = vals
    return Kink.from_dense(lam, beta, event, active)


def _simple_quantum_pick(run: _Run, Lam: np.ndarray) -> int:
    n = run.problem.n
    per_iter_delta = run.delta / run.max_kinks
    k, _ = min_exact_sim(-Lam, per_iter_delta, None, run.rng, run.inject_failure)
    charge = search_charge(Lam.size, per_iter_delta)
    run.ledger.charge("charged_quantum_queries", charge, "join_search")
    run.ledger.charge("entry_reads", charge * 2 * n, "join_value")
    return k


def _start_precisions(problem: LassoProblem, state: ActiveSetState, eps: float, alpha: float,
                      gamma: float) -> tuple[float, float]:
    """Relative precisions for the numerator and denominator estimates.

    Follows the split eps1 = eps(1-a)g/(2(1+a)^2) and
    eps2 = eps(1-a)/(2(1+a) sqrt(n) ||X||_max ||X_A^+||_2); when a >= 1 the
    split is undefined and sizing starts from 1.
    """
    if alpha >= 1.0:
        return 1.0, 1.0
    xmax = float(np.abs(problem.X).max())
    pinv_norm = float(np.linalg.norm(state.P, 2)) if state.A else 1.0
    eps1 = eps * (1 - alpha) * gamma / (2 * (1 + alpha) ** 2)
    eps2 = eps * (1 - alpha) / (2 * (1 + alpha) * math.sqrt(problem.n) * xmax * pinv_norm)
    return min(eps1, 1.0), min(eps2, 1.0)


def _approx_pick(run: _Run, ctx: IterationContext, Xi: np.ndarray, a: np.ndarray, b: np.ndarray,
                 Lam: np.ndarray, sgn: np.ndarray, forced: bool) -> int:
    cfg = run.cfg
    problem = run.problem
    provider = cfg.alpha_provider or _default_alpha
    alpha = float(provider(problem, ctx.state))
    ctx.alpha_A = alpha
    lam_join = float(Lam.max())
    if forced or cfg.estimator == "exact" or lam_join <= 0.0:
        return int(np.argmax(Lam))

    valid = Lam > 0
    m = Lam.size
    eps0 = cfg.epsilon * lam_join / (2.0 * (1.0 + alpha))
    if cfg.gamma_lower is not None:
        gamma = cfg.gamma_lower
    else:
        r1 = float(np.abs(ctx.residual_vec).sum())
        xmax = float(np.abs(problem.X).max())
        gamma = float(np.abs(a).max()) / (xmax * r1) if r1 > 0 else 1.0
    e1, e2 = _start_precisions(problem, ctx.state, cfg.epsilon, alpha, gamma)
    scale_a, _ = norm_products(Xi, ctx.residual_vec)
    scale_b, _ = norm_products(Xi, ctx.direction_vec)
    den = np.where(valid, sgn - b, 1.0)
    eps1 = np.full(m, e1)
    eps2 = np.full(m, e2)
    exact_read = np.zeros(m, dtype=bool)
    for _ in range(200):
        bounds = ratio_error_bounds(a, den, eps1 * scale_a, eps2 * scale_b)
        bad = valid & ~exact_read & (bounds > eps0)
        if not bad.any():
            break
        eps1[bad] /= 2.0
        eps2[bad] /= 2.0
        floor = bad & (np.minimum(eps1, eps2) < PRECISION_FLOOR)
        exact_read |= floor
    run.diagnostics["precision_floor_hits"] += int(exact_read.sum())
    # invalid elements have joining time 0 and are never needed precisely
    eps1 = np.where(valid, eps1, e1)
    eps2 = np.where(valid, eps2, e2)

    T = run.max_kinks
    if cfg.estimator == "quantum":
        delta1 = cfg.delta / (2.0 * T)
        delta2 = min(min_delta2(m, delta1, cfg.min_find_C), 0.5)
        a_est = inner_products_quantum_sim(Xi, ctx.residual_vec, eps1, delta2 / 2, run.rng, cfg.noise_mode)
        b_est = inner_products_quantum_sim(Xi, ctx.direction_vec, eps2, delta2 / 2, run.rng, cfg.noise_mode)
    else:
        delta_el = cfg.delta / (4.0 * T * m)
        a_est = inner_products_classical(Xi, ctx.residual_vec, eps1, delta_el, run.rng, cfg.noise_mode)
        b_est = inner_products_classical(Xi, ctx.direction_vec, eps2, delta_el, run.rng, cfg.noise_mode)
    a_est = np.where(exact_read, a, a_est)
    b_est = np.where(exact_read, b, b_est)
    with np.errstate(divide="ignore", invalid="ignore"):
        Lam_est = np.where(valid, a_est / np.where(valid, sgn - b_est, 1.0), 0.0)

    n = problem.n
    if cfg.estimator == "quantum":
        search = search_charge(m, delta1)
        per_eval = max(quantum_query_charge(e, delta2 / 2) for e in eps1[valid]) + \
            max(quantum_query_charge(e, delta2 / 2) for e in eps2[valid])
        run.ledger.charge("charged_quantum_queries", search, "join_search")
        run.ledger.charge("charged_quantum_queries", search * per_eval, "join_estimate")
        run.ledger.charge("entry_reads", int(exact_read.sum()) * 2 * n, "join_estimate")
        oracle = NoisyValueOracle.from_estimates(-Lam, -Lam_est, eps0, delta2)
        return min_approx_sim(oracle, delta1, None, run.rng, cfg.noise_mode, cfg.min_find_C,
                              cfg.inject_failure)
    draws = sum(classical_sample_count(e, delta_el) for e in eps1[valid & ~exact_read]) + \
        sum(classical_sample_count(e, delta_el) for e in eps2[valid & ~exact_read])
    run.ledger.charge("sample_draws", int(draws), "join_estimate")
    run.ledger.charge("entry_reads", int(draws) + int(exact_read.sum()) * 2 * n, "join_estimate")
    return int(np.argmax(Lam_est))


# -- public solvers ---------------------------------------------------------

def lars_exact(problem: LassoProblem, max_kinks: int | None = None,
               ledger: QueryLedger | None = None, lambda_min: float = 0.0) -> RegularisationPath:
    """Exact Lasso path by the LARS homotopy with sign-valued ``eta``."""
    run = _Run(problem, "exact", "exact", ledger or QueryLedger(),
               max_kinks or _default_budget(problem), lambda_min)
    return _solve(run)


def lars_quantum_simple(problem: LassoProblem, max_kinks: int | None = None, delta: float = 0.05,
                        ledger: QueryLedger | None = None, seed: int | None = 0,
                        inject_failure: bool = False, lambda_min: float = 0.0) -> RegularisationPath:
    """Exact path whose joining feature is found by simulated minimum finding.

    Each iteration spends failure budget ``delta / max_kinks``. With failure
    injection off the output equals ``lars_exact``.
    """
    if not 0 < delta < 1:
        raise InputError("delta must lie in (0, 1)")
    run = _Run(problem, "exact", "quantum-simple", ledger or QueryLedger(),
               max_kinks or _default_budget(problem), lambda_min, None, delta,
               np.random.default_rng(seed), inject_failure)
    return _solve(run)


def lars_approx(problem: LassoProblem, cfg: ApproxConfig,
                ledger: QueryLedger | None = None) -> RegularisationPath:
    """Approximate path certified to error lam * eps * ||beta(lam)||_1."""
    algo = {"quantum": "approx-quantum", "classical": "approx-classical", "exact": "approx-exact"}
    run = _Run(problem, "approximate", algo[cfg.estimator], ledger or QueryLedger(),
               cfg.max_kinks or _default_budget(problem), cfg.lambda_min, cfg, cfg.delta,
               np.random.default_rng(cfg.seed))
    return _solve(run)


ALGOS = ("exact", "quantum-simple", "approx-quantum", "approx-classical")


def solve(problem: LassoProblem, algo: str = "exact", epsilon: float = 0.05, delta: float = 0.05,
          max_kinks: int | None = None, seed: int | None = 0, noise_mode: str = STOCHASTIC,
          ledger: QueryLedger | None = None, lambda_min: float = 0.0) -> RegularisationPath:
    """Dispatch on the CLI algorithm name."""
    if algo == "exact":
        return lars_exact(problem, max_kinks, ledger, lambda_min)
    if algo == "quantum-simple":
        return lars_quantum_simple(problem, max_kinks, delta, ledger, seed, lambda_min=lambda_min)
    if algo in ("approx-quantum", "approx-classical"):
        cfg = ApproxConfig(epsilon=epsilon, delta=delta, max_kinks=max_kinks,
                           estimator=algo.split("-")[1], noise_mode=noise_mode, seed=seed,
                           lambda_min=lambda_min)
        return lars_approx(problem, cfg, ledger)
    raise InputError(f"unknown algorithm {algo!r}; choose from {ALGOS}")


__all__ = [
    "ApproxConfig", "IterationContext", "join_candidates", "joining_times", "crossing_times",
    "mutual_incoherence", "mutual_overlap", "lars_exact", "lars_quantum_simple", "lars_approx",
    "solve", "ALGOS",
]
