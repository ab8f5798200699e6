"""Certificates of Lasso optimality.

``kkt_check`` tests the relaxed optimality conditions, ``duality_gap`` bounds
suboptimality of any coefficient vector, ``lasso_oracle`` is an independent
proximal-gradient solver, and ``certify_path`` sweeps a whole path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LassoProblem, RegularisationPath, path_eval
from .errors import DimensionMismatch, InputError, NoConvergence

KKT_TOL = 1e-9


@dataclass(frozen=True)
class KktReport:
    """Per-coordinate slacks of the relaxed KKT conditions.

    For active coordinates (beta_j != 0) ``lower_slack`` is
    c_j - lam(1-eps) and ``upper_slack`` is lam - c_j with
    c_j = X_j^T(y - X beta) sign(beta_j). For inactive coordinates only
    ``upper_slack`` = lam - |X_j^T(y - X beta)| is meaningful.
    """

    lam: float
    epsilon: float
    active: np.ndarray
    lower_slack: np.ndarray
    upper_slack: np.ndarray
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.min_slack >= -self.tol)

    @property
    def min_slack(self) -> float:
        low = self.lower_slack[self.active]
        return float(min(self.upper_slack.min(initial=np.inf), low.min(initial=np.inf)))

    def violations(self) -> np.ndarray:
        bad = self.upper_slack < -self.tol
        bad |= self.active & (self.lower_slack < -self.tol)
        return np.flatnonzero(bad)


def kkt_check(problem: LassoProblem, beta: np.ndarray, lam: float, epsilon: float = 0.0,
              tol: float = KKT_TOL) -> KktReport:
    beta = np.asarray(beta, dtype=float).reshape(-1)
    if beta.shape[0] != problem.d:
        raise DimensionMismatch(f"beta has length {beta.shape[0]}, expected {problem.d}")
    if not lam > 0:
        raise InputError("lambda must be positive")
    if not 0 <= epsilon < 1:
        raise InputError("epsilon must lie in [0, 1)")
    corr = problem.X.T @ (problem.y - problem.X @ beta)
    active = beta != 0
    signed = corr * np.sign(beta)
    lower = np.where(active, signed - lam * (1.0 - epsilon), np.inf)
    upper = np.where(active, lam - signed, lam - np.abs(corr))
    return KktReport(float(lam), float(epsilon), active, lower, upper, tol)


def duality_gap(problem: LassoProblem, beta: np.ndarray, lam: float) -> float:
    """Primal minus dual objective at a rescaled feasible dual point.

    The dual point is s (X beta - y) with s = min(1, lam / ||X^T (X beta - y)||_inf).
    """
    beta = np.asarray(beta, dtype=float).reshape(-1)
    if beta.shape[0] != problem.d:
        raise DimensionMismatch(f"beta has length {beta.shape[0]}, expected {problem.d}")
    if not lam > 0:
        raise InputError("lambda must be positive")
    r = problem.y - problem.X @ beta
    return _gap(problem.X, problem.y, r, np.abs(beta).sum(), lam)


def _gap(X, y, r, l1, lam):
    """Gap from the residual r = y - X beta; vectorised over trailing columns."""
    corr = np.abs(X.T @ r).max(axis=0)
    with np.errstate(divide="ignore"):
        s = np.minimum(1.0, np.where(corr > 0, lam / np.where(corr > 0, corr, 1.0), 1.0))
    rr = (r * r).sum(axis=0)
    ry = y @ r
    # 0.5|r|^2 + lam|b|_1 - (-0.5 s^2 |r|^2 - s (X b - y)^T y)
    gap = 0.5 * rr + lam * l1 + 0.5 * s * s * rr - s * ry
    return gap if np.ndim(gap) else float(gap)


def lasso_oracle(problem: LassoProblem, lam, tol: float = 1e-10, max_iter: int = 10**6,
                 restart: int = 200, check_every: int = 10) -> np.ndarray:
    """Accelerated proximal gradient with fixed restarts and duality-gap stopping.

    ``lam`` may be a scalar or a 1-D array; for an array the problems are
    solved side by side and a (d, len(lam)) array is returned.
    """
    X, y = problem.X, problem.y
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
    if np.any(lam_arr <= 0):
        raise InputError("lambda must be positive")
    if not tol > 0:
        raise InputError("tol must be positive")
    k = lam_arr.size
    L = float(np.linalg.norm(X, 2)) ** 2
    if L == 0.0:
        out = np.zeros((problem.d, k))
        return out[:, 0] if np.ndim(lam) == 0 else out
    step = 1.0 / L
    Xty = X.T @ y
    G = X.T @ X if problem.d <= 4 * problem.n else None
    beta = np.zeros((problem.d, k))
    z = beta.copy()
    t = 1.0
    thresh = lam_arr * step
    done = np.zeros(k, dtype=bool)
    for it in range(1, max_iter + 1):
        grad = (G @ z - Xty[:, None]) if G is not None else X.T @ (X @ z - y[:, None])
        w = z - step * grad
        new = np.sign(w) * np.maximum(np.abs(w) - thresh, 0.0)
        new[:, done] = beta[:, done]
        if it % restart == 0:
            t_next = 1.0
            z = new
        else:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            z = new + ((t - 1.0) / t_next) * (new - beta)
        beta, t = new, t_next
        if it % check_every == 0:
            live = ~done
            r = y[:, None] - X @ beta[:, live]
            gaps = _gap(X, y, r, np.abs(beta[:, live]).sum(axis=0), lam_arr[live])
            done[np.flatnonzero(live)[np.atleast_1d(gaps) <= tol]] = True
            if done.all():
                return beta[:, 0] if np.ndim(lam) == 0 else beta
    raise NoConvergence(f"no convergence to gap {tol} within {max_iter} iterations")


@dataclass(frozen=True)
class Certificate:
    epsilon: float
    grid: int
    max_violation: float
    worst_lambda: float
    passed: bool
    points: int = 0

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "grid": self.grid, "max_violation": self.max_violation,
                "worst_lambda": self.worst_lambda, "pass": self.passed}


def certify_path(path: RegularisationPath, problem: LassoProblem, epsilon: float,
                 grid_per_segment: int = 50, atol: float = 1e-9) -> Certificate:
    """Check gap <= lam * eps * ||beta(lam)||_1 + atol on a grid over every segment.

    Each segment [lam_{t+1}, lam_t] contributes ``grid_per_segment`` evenly
    spaced points including both ends; lam = 0 is skipped because the gap
    is only defined for lam > 0. ``max_violation`` is the largest value of
    gap - lam * eps * ||beta||_1.
    """
    if len(path.kinks) == 0:
        raise InputError("path has no kinks")
    if grid_per_segment < 2:
        raise InputError("grid_per_segment must be at least 2")
    X, y = problem.X, problem.y
    if path.d != problem.d:
        raise DimensionMismatch("path and problem have different numbers of features")
    lams = []
    for _, lo, hi in path.segments():
        pts = np.linspace(lo, hi, grid_per_segment)
        lams.append(pts[pts > 0])
    if not lams:
        lam0 = path.kinks[0].lam
        lams.append(np.array([lam0]) if lam0 > 0 else np.zeros(0))
    grid = np.concatenate(lams)
    if grid.size == 0:
        return Certificate(float(epsilon), grid_per_segment, 0.0, 0.0, True, 0)
    B = np.array([path_eval(path, lam) for lam in grid]).T
    r = y[:, None] - X @ B
    l1 = np.abs(B).sum(axis=0)
    gaps = np.atleast_1d(_gap(X, y, r, l1, grid))
    excess = gaps - grid * epsilon * l1
    w = int(np.argmax(excess))
    worst = float(excess[w])
    return Certificate(float(epsilon), grid_per_segment, worst, float(grid[w]), worst <= atol, grid.size)
