"""Lasso problems, regularisation paths and the objective.

Indices are 0-based throughout. A path is a list of kinks ordered by
decreasing lambda; between two kinks the solution moves linearly in lambda.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import AllZeroObservations, DimensionMismatch, EmptyPath, InputError

TIE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class LassoProblem:
    """Design matrix ``X`` (n x d) and observations ``y`` (n,)."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        X = np.array(self.X, dtype=float, copy=True)
        y = np.array(self.y, dtype=float, copy=True).reshape(-1)
        if X.ndim != 2:
            raise DimensionMismatch(f"X must be 2-D, got shape {X.shape}")
        n, d = X.shape
        if n < 1 or d < 1:
            raise DimensionMismatch(f"X must have n >= 1 and d >= 1, got {X.shape}")
        if y.shape[0] != n:
            raise DimensionMismatch(f"y has length {y.shape[0]} but X has {n} rows")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise InputError("X and y must contain only finite values")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class Event:
    """What happened at a kink.

    ``kind`` is one of Init, Join, Cross, Stationary, Terminal. Join may carry
    several indices (the tied argmax at the first kink).
    """

    kind: str
    indices: tuple[int, ...] = ()

    KINDS = ("Init", "Join", "Cross", "Stationary", "Terminal")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise InputError(f"unknown event kind {self.kind!r}")

    def __str__(self) -> str:
        if not self.indices:
            return self.kind
        return f"{self.kind}({','.join(str(i) for i in self.indices)})"

    @classmethod
    def parse(cls, text: str) -> "Event":
        text = text.strip()
        if "(" not in text:
            return cls(text)
        if not text.endswith(")"):
            raise InputError(f"malformed event {text!r}")
        kind, _, rest = text.partition("(")
        body = rest[:-1].strip()
        try:
            idx = tuple(int(tok) for tok in body.split(",")) if body else ()
        except ValueError as exc:
            raise InputError(f"malformed event {text!r}") from exc
        return cls(kind, idx)


@dataclass(frozen=True, eq=False)
class Kink:
    """One node of a path: lambda, sparse beta and the event that created it."""

    lam: float
    indices: np.ndarray
    values: np.ndarray
    event: Event
    active: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        lam = float(self.lam)
        if not np.isfinite(lam) or lam < 0:
            raise InputError(f"kink lambda must be finite and >= 0, got {lam}")
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        val = np.asarray(self.values, dtype=float).reshape(-1)
        if idx.shape != val.shape:
            raise DimensionMismatch("kink indices and values differ in length")
        order = np.argsort(idx, kind="stable")
        idx, val = idx[order], val[order]
        idx.setflags(write=False)
        val.setflags(write=False)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)
        object.__setattr__(self, "active", tuple(int(i) for i in self.active))

    @classmethod
    def from_dense(cls, lam: float, beta: np.ndarray, event: Event,
                   active: Iterable[int] = ()) -> "Kink":
        active = tuple(int(i) for i in active)
        beta = np.asarray(beta, dtype=float)
        support = np.flatnonzero(beta)
        # stored entries are the active set plus anything nonzero
        idx = np.union1d(np.asarray(active, dtype=np.int64), support).astype(np.int64)
        return cls(lam, idx, beta[idx], event, active)

    def dense(self, d: int) -> np.ndarray:
        out = np.zeros(d)
        out[self.indices] = self.values
        return out

    @property
    def beta(self) -> dict[int, float]:
        return {int(i): float(v) for i, v in zip(self.indices, self.values)}


@dataclass(frozen=True, eq=False)
class RegularisationPath:
    """Ordered kinks plus the mode that produced them.

    ``mode`` is ``"exact"`` or ``"approximate"``; ``epsilon`` is 0 for exact
    paths. ``truncated`` is set when the kink budget stopped the solver early.
    """

    kinks: tuple[Kink, ...]
    d: int
    mode: str = "exact"
    epsilon: float = 0.0
    algo: str = "exact"
    truncated: bool = False
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kinks", tuple(self.kinks))
        if self.mode not in ("exact", "approximate"):
            raise InputError(f"unknown path mode {self.mode!r}")

    def __len__(self) -> int:
        return len(self.kinks)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([k.lam for k in self.kinks])

    def betas(self) -> np.ndarray:
        """Dense (len(path), d) array of kink coefficients."""
        return np.array([k.dense(self.d) for k in self.kinks]).reshape(len(self.kinks), self.d)

    def segments(self) -> list[tuple[int, float, float]]:
        """(t, lambda_{t+1}, lambda_t) for every segment of positive length."""
        lams = self.lambdas
        return [(t, lams[t + 1], lams[t]) for t in range(len(lams) - 1) if lams[t + 1] < lams[t]]

    def __call__(self, lam: float) -> np.ndarray:
        return path_eval(self, lam)


def lambda_max(problem: LassoProblem) -> tuple[float, tuple[int, ...]]:
    """Smallest lambda with a zero solution and the features attaining it."""
    if not np.any(problem.y):
        raise AllZeroObservations("y is identically zero; the path is beta = 0")
    corr = np.abs(problem.X.T @ problem.y)
    lam0 = float(corr.max())
    if lam0 == 0.0:
        return 0.0, ()
    tied = np.flatnonzero(corr >= lam0 * (1.0 - TIE_RTOL))
    return lam0, tuple(int(i) for i in tied)


def lasso_cost(problem: LassoProblem, beta: np.ndarray, lam: float) -> float:
    """Half squared residual plus lam times the l1 norm of ``beta``."""
    beta = np.asarray(beta, dtype=float).reshape(-1)
    if beta.shape[0] != problem.d:
        raise DimensionMismatch(f"beta has length {beta.shape[0]}, expected {problem.d}")
    if lam < 0:
        raise InputError("lambda must be nonnegative")
    r = problem.y - problem.X @ beta
    return float(0.5 * (r @ r) + lam * np.abs(beta).sum())


def _segment_index(lams: np.ndarray, lam: float) -> int:
    # lams is non-increasing; find t with lams[t+1] <= lam <= lams[t]
    neg = -lams
    t = int(np.searchsorted(neg, -lam, side="right")) - 1
    return max(0, min(t, len(lams) - 2))


def path_eval(path: RegularisationPath, lam: float) -> np.ndarray:
    """Dense coefficients at ``lam`` by linear interpolation between kinks."""
    if len(path.kinks) == 0:
        raise EmptyPath("path has no kinks")
    lam = float(lam)
    lams = path.lambdas
    if lam >= lams[0]:
        return np.zeros(path.d)
    if lam < lams[-1] - 1e-12 * max(1.0, lams[0]):
        raise InputError(f"lambda {lam} lies below the last kink {lams[-1]}")
    if len(lams) == 1:
        return path.kinks[0].dense(path.d)
    t = _segment_index(lams, lam)
    hi, lo = path.kinks[t], path.kinks[t + 1]
    if lam == hi.lam:
        return hi.dense(path.d)
    if lam <= lo.lam:
        return lo.dense(path.d)
    w = (hi.lam - lam) / (hi.lam - lo.lam)
    return (1.0 - w) * hi.dense(path.d) + w * lo.dense(path.d)


def path_eval_many(path: RegularisationPath, lams: Sequence[float]) -> np.ndarray:
    """Vectorised ``path_eval`` returning a (len(lams), d) array."""
    return np.array([path_eval(path, lam) for lam in lams]).reshape(len(lams), path.d)
