"""Maintained pseudo-inverse of the active columns.

``ActiveSetState`` keeps ``P = X_A^+`` and ``G = (X_A^T X_A)^{-1}`` for the
active columns. Appending a column is a rank-one (Greville) update costing
O(n|A| + |A|^2). Removing a column, and every ``REFACTOR_EVERY`` updates,
rebuilds both from a QR factorisation of the retained columns.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, NotActive, RankDeficient

RANK_TOL = 1e-10
REFACTOR_EVERY = 50


class ActiveSetState:
    """Active set ``A``, signs ``eta`` and the factors of ``X_A``.

    Parameters
    ----------
    X : ndarray of shape (n, d)
        Full design matrix; columns are referenced by index.
    y : ndarray of shape (n,)
        Observations used for ``mu = X_A^+ y``.
    """

    def __init__(self, X: np.ndarray, y: np.ndarray, rank_tol: float = RANK_TOL,
                 refactor_every: int = REFACTOR_EVERY) -> None:
        self.X = np.asarray(X, dtype=float)
        self.y = np.asarray(y, dtype=float).reshape(-1)
        if self.y.shape[0] != self.X.shape[0]:
            raise DimensionMismatch("y length does not match X rows")
        self.rank_tol = rank_tol
        self.refactor_every = refactor_every
        n = self.X.shape[0]
        self.A: list[int] = []
        self.eta = np.zeros(0)
        self.P = np.zeros((0, n))
        self.G = np.zeros((0, 0))
        self.update_count = 0

    # -- bookkeeping -------------------------------------------------------
    def copy(self) -> "ActiveSetState":
        new = ActiveSetState.__new__(ActiveSetState)
        new.X, new.y = self.X, self.y
        new.rank_tol, new.refactor_every = self.rank_tol, self.refactor_every
        new.A = list(self.A)
        new.eta = self.eta.copy()
        new.P = self.P.copy()
        new.G = self.G.copy()
        new.update_count = self.update_count
        return new

    def __len__(self) -> int:
        return len(self.A)

    def __contains__(self, j: int) -> bool:
        return j in self.A

    @property
    def XA(self) -> np.ndarray:
        return self.X[:, self.A]

    def inactive(self) -> np.ndarray:
        mask = np.ones(self.X.shape[1], dtype=bool)
        mask[self.A] = False
        return np.flatnonzero(mask)

    # -- updates -----------------------------------------------------------
    def insert(self, j: int, x: np.ndarray | None = None, eta_j: float = 0.0) -> "ActiveSetState":
        """Append column ``j`` in place; raises ``RankDeficient`` if dependent."""
        j = int(j)
        if j in self.A:
            raise RankDeficient(f"feature {j} is already active")
        x = self.X[:, j] if x is None else np.asarray(x, dtype=float)
        xnorm = float(np.linalg.norm(x))
        if xnorm == 0.0:
            raise RankDeficient(f"column {j} is zero")
        dvec = self.P @ x
        c = x - self.X[:, self.A] @ dvec if self.A else x.copy()
        cn2 = float(c @ c)
        if np.sqrt(cn2) <= self.rank_tol * xnorm:
            raise RankDeficient(f"column {j} lies in the span of the active columns")
        b = c / cn2
        self.P = np.vstack([self.P - np.outer(dvec, b), b[None, :]])
        k = len(self.A)
        G = np.empty((k + 1, k + 1))
        G[:k, :k] = self.G + np.outer(dvec, dvec) / cn2
        G[:k, k] = -dvec / cn2
        G[k, :k] = -dvec / cn2
        G[k, k] = 1.0 / cn2
        self.G = G
        self.A.append(j)
        self.eta = np.append(self.eta, eta_j)
        self.update_count += 1
        if self.update_count >= self.refactor_every:
            self.refactor()
        return self

    def remove(self, j: int) -> "ActiveSetState":
        """Drop column ``j`` in place by refactorising the remaining columns."""
        j = int(j)
        if j not in self.A:
            raise NotActive(f"feature {j} is not active")
        pos = self.A.index(j)
        del self.A[pos]
        self.eta = np.delete(self.eta, pos)
        self.refactor()
        return self

    def refactor(self) -> None:
        """Rebuild ``P`` and ``G`` from a QR factorisation of ``X_A``."""
        n = self.X.shape[0]
        self.update_count = 0
        if not self.A:
            self.P = np.zeros((0, n))
            self.G = np.zeros((0, 0))
            return
        Q, R = np.linalg.qr(self.XA)
        sv = np.linalg.svd(R, compute_uv=False)
        if sv[-1] < self.rank_tol * sv[0]:
            raise RankDeficient("active columns are numerically dependent")
        Rinv = solve_triangular(R, np.eye(R.shape[0]))
        self.P = Rinv @ Q.T
        self.G = Rinv @ Rinv.T

    def set_eta(self, eta: np.ndarray) -> None:
        eta = np.asarray(eta, dtype=float).reshape(-1)
        if eta.shape[0] != len(self.A):
            raise DimensionMismatch("eta must have one entry per active feature")
        self.eta = eta.copy()

    # -- derived quantities ------------------------------------------------
    def mu(self) -> np.ndarray:
        """Least-squares coefficients ``X_A^+ y``."""
        return self.P @ self.y

    def theta(self, eta: np.ndarray | None = None) -> np.ndarray:
        """Direction ``(X_A^T X_A)^{-1} eta``."""
        return self.G @ (self.eta if eta is None else eta)

    def apply_pinv(self, v: np.ndarray) -> np.ndarray:
        return self.P @ v

    def project_residual(self, v: np.ndarray | None = None) -> np.ndarray:
        """``(I - X_A X_A^+) v``; defaults to ``v = y``."""
        v = self.y if v is None else np.asarray(v, dtype=float)
        if v.shape[0] != self.X.shape[0]:
            raise DimensionMismatch("vector length does not match X rows")
        if not self.A:
            return v.copy()
        return v - self.XA @ (self.P @ v)


def pinv_insert(state: ActiveSetState, j: int, x: np.ndarray | None = None) -> ActiveSetState:
    """Functional variant of ``ActiveSetState.insert``."""
    return state.copy().insert(j, x)


def pinv_remove(state: ActiveSetState, j: int) -> ActiveSetState:
    """Functional variant of ``ActiveSetState.remove``."""
    return state.copy().remove(j)


def project_residual(state: ActiveSetState, y: np.ndarray) -> np.ndarray:
    return state.project_residual(y)


def from_columns(X: np.ndarray, y: np.ndarray, columns: Sequence[int]) -> ActiveSetState:
    """State with ``columns`` active, built by one factorisation."""
    state = ActiveSetState(X, y)
    state.A = [int(c) for c in columns]
    state.eta = np.zeros(len(state.A))
    state.refactor()
    return state
