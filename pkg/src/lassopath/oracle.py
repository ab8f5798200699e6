"""Inner-product estimators, the amplitude-estimation simulator and query ledgers.

The quantum routines here are contract simulators. They compute the exact
quantity, then inject an error that respects the routine's stated guarantee
and charge the ledger the documented number of queries. Two noise modes are
available: ``stochastic`` draws errors at random inside the guarantee,
``adversarial`` always sits on the edge of the error bound.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import InputError, PreconditionViolated, ZeroVector
from .kptree import SamplableVector

STOCHASTIC = "stochastic"
ADVERSARIAL = "adversarial"
NOISE_MODES = (STOCHASTIC, ADVERSARIAL)

QUANTUM_CHARGE_CONSTANT = 8
AMP_SUCCESS_PROB = 0.9
# per-run success 9/10, so the median of k runs fails with prob <= exp(-0.32 k)
_MEDIAN_RATE = 2 * (AMP_SUCCESS_PROB - 0.5) ** 2

COUNTERS = ("entry_reads", "sample_draws", "charged_quantum_queries", "wall_operations")


def check_mode(mode: str) -> str:
    if mode not in NOISE_MODES:
        raise InputError(f"noise mode must be one of {NOISE_MODES}, got {mode!r}")
    return mode


@dataclass
class QueryLedger:
    """Monotone counters of oracle use, with a per-phase breakdown."""

    entry_reads: int = 0
    sample_draws: int = 0
    charged_quantum_queries: int = 0
    wall_operations: int = 0
    by_phase: dict[str, dict[str, int]] = field(default_factory=dict)
    _phase: str | None = field(default=None, repr=False)

    def charge(self, kind: str, amount: int, phase: str | None = None) -> None:
        if kind not in COUNTERS:
            raise InputError(f"unknown ledger counter {kind!r}")
        amount = int(amount)
        if amount < 0:
            raise InputError("ledger charges must be nonnegative")
        setattr(self, kind, getattr(self, kind) + amount)
        phase = phase or self._phase
        if phase is not None:
            bucket = self.by_phase.setdefault(phase, {})
            bucket[kind] = bucket.get(kind, 0) + amount

    @contextmanager
    def phase(self, name: str) -> Iterator["QueryLedger"]:
        prev, self._phase = self._phase, name
        try:
            yield self
        finally:
            self._phase = prev

    def merge(self, other: "QueryLedger") -> "QueryLedger":
        for kind in COUNTERS:
            setattr(self, kind, getattr(self, kind) + getattr(other, kind))
        for ph, counts in other.by_phase.items():
            bucket = self.by_phase.setdefault(ph, {})
            for kind, amount in counts.items():
                bucket[kind] = bucket.get(kind, 0) + amount
        return self

    def to_dict(self) -> dict:
        return {
            "entry_reads": self.entry_reads,
            "sample_draws": self.sample_draws,
            "charged_quantum_queries": self.charged_quantum_queries,
            "by_phase": {ph: dict(sorted(c.items())) for ph, c in sorted(self.by_phase.items())},
        }


def _charge(ledger: QueryLedger | None, kind: str, amount: int) -> None:
    if ledger is not None:
        ledger.charge(kind, amount)


@dataclass(frozen=True)
class EstimateContract:
    epsilon: float
    delta: float
    mode: str = STOCHASTIC

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise InputError("epsilon must be positive")
        if not 0 < self.delta < 1:
            raise InputError("delta must lie in (0, 1)")
        check_mode(self.mode)


def classical_sample_count(epsilon: float, delta: float) -> int:
    """Hoeffding sample size ceil(2 eps^-2 ln(2/delta))."""
    return int(math.ceil(2.0 * math.log(2.0 / delta) / epsilon**2))


def quantum_query_charge(epsilon: float, delta: float, c: float = QUANTUM_CHARGE_CONSTANT) -> int:
    """Charged queries ceil(c eps^-1 ln(1/delta)) of one simulated estimate."""
    return int(math.ceil(c * math.log(1.0 / delta) / epsilon))


def amp_bound(a, M: int):
    """Success-branch error bound sqrt(a(1-a))/M + 1/M^2."""
    a = np.asarray(a, dtype=float)
    return np.sqrt(np.clip(a * (1.0 - a), 0.0, None)) / M + 1.0 / M**2


def amp_est_sim(a, M: int, rng: np.random.Generator, ledger: QueryLedger | None = None,
                mode: str = STOCHASTIC):
    """Simulated amplitude estimation of ``a`` using ``M`` queries.

    Stochastic mode succeeds with probability 9/10, returning ``a`` plus noise
    uniform within the bound; otherwise the noise is uniform within twice the
    bound. Adversarial mode returns ``a`` plus or minus exactly the
    bound. Amplitudes 0 and 1 are returned exactly. Works elementwise on arrays.
    """
    check_mode(mode)
    if M < 1:
        raise InputError("M must be a positive integer")
    a_arr = np.asarray(a, dtype=float)
    if np.any((a_arr < 0) | (a_arr > 1)):
        raise InputError("amplitude must lie in [0, 1]")
    # a in {0, 1} is estimated without error: the phase is then an exact
    # multiple of pi, which the estimation circuit resolves deterministically
    bound = np.where(a_arr * (1.0 - a_arr) == 0.0, 0.0, amp_bound(a_arr, M))
    sign = rng.choice((-1.0, 1.0), size=a_arr.shape)
    if mode == ADVERSARIAL:
        err = sign * bound
    else:
        ok = rng.random(a_arr.shape) < AMP_SUCCESS_PROB
        inside = rng.uniform(-1.0, 1.0, size=a_arr.shape) * bound
        wide = rng.uniform(-2.0, 2.0, size=a_arr.shape) * bound
        err = np.where(ok, inside, wide)
    _charge(ledger, "charged_quantum_queries", M * max(a_arr.size, 1))
    out = a_arr + err
    return float(out) if np.ndim(a) == 0 else out


def amp_precision_m(target: float) -> int:
    """Smallest M with 1/(2M) + 1/M^2 <= target, covering every a in [0, 1]."""
    if not target > 0:
        raise InputError("target precision must be positive")
    # positive root of target M^2 - M/2 - 1 = 0, then fix rounding at the edge
    M = max(1, int(math.ceil((1.0 + math.sqrt(1.0 + 16.0 * target)) / (4.0 * target))))
    while M > 1 and 1.0 / (2 * (M - 1)) + 1.0 / (M - 1) ** 2 <= target:
        M -= 1
    while 1.0 / (2 * M) + 1.0 / M**2 > target:
        M += 1
    return M


def ratio_error_bound(a: float, b: float, eps_a: float, eps_b: float) -> float:
    """Error bound on a~/b~ when |a~ - a| <= eps_a and |b~ - b| <= eps_b.

    Evaluates 2(|a|/|b|)(eps_a/|a| + eps_b/|b|) in expanded form so that a = 0
    is allowed.
    """
    if b == 0:
        raise PreconditionViolated("b must be nonzero")
    if eps_a < 0 or eps_b < 0:
        raise PreconditionViolated("error radii must be nonnegative")
    if eps_b > abs(b) / 2:
        raise PreconditionViolated("eps_b must not exceed |b|/2")
    return 2.0 * eps_a / abs(b) + 2.0 * abs(a) * eps_b / b**2


def ratio_error_bounds(a: np.ndarray, b: np.ndarray, eps_a: np.ndarray, eps_b: np.ndarray) -> np.ndarray:
    """Vectorised ``ratio_error_bound``; entries violating the precondition give inf."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    eps_a, eps_b = np.broadcast_to(eps_a, a.shape), np.broadcast_to(eps_b, a.shape)
    absb = np.abs(b)
    ok = (absb > 0) & (eps_b <= absb / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 2.0 * eps_a / absb + 2.0 * np.abs(a) * eps_b / absb**2
    return np.where(ok, out, np.inf)


def norm_products(cols: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-column min(||A_j||_inf ||u||_1, ||A_j||_1 ||u||_inf) and which side wins.

    Returns ``(scale, sample_u)`` where ``sample_u`` is True when sampling
    from ``u`` gives the smaller product.
    """
    cols = np.asarray(cols, float).reshape(len(u), -1)
    u1, uinf = float(np.abs(u).sum()), float(np.abs(u).max()) if len(u) else 0.0
    c_inf = np.abs(cols).max(axis=0) if cols.size else np.zeros(cols.shape[1])
    c_1 = np.abs(cols).sum(axis=0)
    via_u = c_inf * u1
    via_col = c_1 * uinf
    return np.minimum(via_u, via_col), via_u <= via_col


def inner_product_classical(col: SamplableVector, u: SamplableVector, contract: EstimateContract,
                            rng: np.random.Generator, ledger: QueryLedger | None = None) -> float:
    """Sampling estimate of ``col . u`` with error eps * min-norm-product w.p. 1 - delta.

    Draws q = ceil(2 eps^-2 ln(2/delta)) indices from whichever vector gives
    the smaller norm product and averages ||s||_1 * other_i * sign(s_i).
    """
    if len(col) != len(u):
        raise InputError("vectors differ in length")
    q = classical_sample_count(contract.epsilon, contract.delta)
    if col.norm1 == 0.0 or u.norm1 == 0.0:
        return 0.0
    via_u = col.norm_inf * u.norm1
    via_col = col.norm1 * u.norm_inf
    sampled, other = (u, col) if via_u <= via_col else (col, u)
    scale = min(via_u, via_col)
    exact = float(sampled.values @ other.values)
    _charge(ledger, "sample_draws", q)
    _charge(ledger, "entry_reads", q)
    if contract.mode == ADVERSARIAL:
        return exact + float(rng.choice((-1.0, 1.0))) * contract.epsilon * scale
    counts = sampled.sample_counts(rng, q)
    z = sampled.norm1 * other.values * np.sign(sampled.values)
    return float(counts @ z) / q


def inner_products_classical(cols: np.ndarray, u: np.ndarray, epsilon, delta: float,
                             rng: np.random.Generator, mode: str = STOCHASTIC,
                             ledger: QueryLedger | None = None) -> np.ndarray:
    """Batched sampling estimates of ``cols[:, j] . u`` for every column.

    ``epsilon`` may be a scalar or one value per column. Same estimator as
    ``inner_product_classical``; per-column counts are drawn in one
    multinomial call.
    """
    cols = np.asarray(cols, float)
    u = np.asarray(u, float)
    k = cols.shape[1]
    eps = np.broadcast_to(np.asarray(epsilon, float), (k,))
    exact = cols.T @ u
    scale, sample_u = norm_products(cols, u)
    q = np.array([classical_sample_count(e, delta) for e in eps], dtype=np.int64)
    _charge(ledger, "sample_draws", int(q.sum()))
    _charge(ledger, "entry_reads", int(q.sum()))
    if mode == ADVERSARIAL:
        return exact + rng.choice((-1.0, 1.0), size=k) * eps * scale
    out = np.zeros(k)
    live = scale > 0
    if not np.any(live):
        return out
    absu = np.abs(u)
    u1 = absu.sum()
    col1 = np.abs(cols).sum(axis=0)
    for side in (True, False):
        sel = np.flatnonzero(live & (sample_u == side))
        if sel.size == 0:
            continue
        if side:
            p = np.broadcast_to(absu / u1, (sel.size, u.size))
            z = u1 * cols[:, sel].T * np.sign(u)[None, :]
        else:
            p = (np.abs(cols[:, sel]) / col1[sel]).T
            z = col1[sel][:, None] * u[None, :] * np.sign(cols[:, sel]).T
        counts = rng.multinomial(q[sel], p)
        out[sel] = (counts * z).sum(axis=1) / q[sel]
    return out


def _quantum_parts(col: np.ndarray, u: np.ndarray) -> tuple[float, float, float]:
    """Scale and the split amplitudes a+ and a- of the smaller norm product."""
    via_u = np.abs(col).max() * np.abs(u).sum()
    via_col = np.abs(col).sum() * np.abs(u).max()
    scale = float(min(via_u, via_col))
    if scale == 0.0:
        return 0.0, 0.0, 0.0
    terms = col * u / scale
    return scale, float(terms[terms > 0].sum()), float(-terms[terms < 0].sum())


def quantum_median_reps(delta: float) -> int:
    """Repetitions so the median of two parts fails with total prob <= delta."""
    return int(math.ceil(math.log(2.0 / delta) / _MEDIAN_RATE))


def inner_product_quantum_sim(col, u, contract: EstimateContract, rng: np.random.Generator,
                              ledger: QueryLedger | None = None,
                              c: float = QUANTUM_CHARGE_CONSTANT) -> float:
    """Simulated quantum estimate of ``col . u``.

    Splits the normalised products into positive and negative parts, estimates
    each with ``amp_est_sim`` to within (eps/2) of the smaller norm product
    (median of repeated runs for confidence 1 - delta) and recombines.
    Charges ceil(c eps^-1 ln(1/delta)) queries.
    """
    colv = col.values if isinstance(col, SamplableVector) else np.asarray(col, float)
    uv = u.values if isinstance(u, SamplableVector) else np.asarray(u, float)
    if colv.shape != uv.shape:
        raise InputError("vectors differ in length")
    _charge(ledger, "charged_quantum_queries", quantum_query_charge(contract.epsilon, contract.delta, c))
    scale, a_pos, a_neg = _quantum_parts(colv, uv)
    if scale == 0.0:
        return 0.0
    est = _median_amp(np.array([a_pos, a_neg]), contract.epsilon, contract.delta, rng, contract.mode)
    return scale * float(est[0] - est[1])


def _median_amp(a: np.ndarray, epsilon, delta: float, rng: np.random.Generator, mode: str) -> np.ndarray:
    eps = np.broadcast_to(np.asarray(epsilon, float), a.shape)
    reps = quantum_median_reps(delta)
    out = np.empty(a.shape)
    flat_a, flat_eps, flat_out = a.reshape(-1), eps.reshape(-1), out.reshape(-1)
    # group by precision so each group shares one M
    for e in np.unique(flat_eps):
        sel = np.flatnonzero(flat_eps == e)
        M = amp_precision_m(e / 2.0)
        runs = amp_est_sim(np.broadcast_to(np.clip(flat_a[sel], 0.0, 1.0), (reps, sel.size)).copy(),
                           M, rng, None, mode)
        flat_out[sel] = np.median(runs, axis=0)
    return out


def inner_products_quantum_sim(cols: np.ndarray, u: np.ndarray, epsilon, delta: float,
                               rng: np.random.Generator, mode: str = STOCHASTIC,
                               ledger: QueryLedger | None = None,
                               c: float = QUANTUM_CHARGE_CONSTANT) -> np.ndarray:
    """Batched ``inner_product_quantum_sim`` over the columns of ``cols``."""
    cols = np.asarray(cols, float)
    u = np.asarray(u, float)
    k = cols.shape[1]
    eps = np.broadcast_to(np.asarray(epsilon, float), (k,))
    if ledger is not None:
        ledger.charge("charged_quantum_queries", sum(quantum_query_charge(e, delta, c) for e in eps))
    scale, _ = norm_products(cols, u)
    safe = np.where(scale > 0, scale, 1.0)
    terms = cols * u[:, None] / safe
    a_pos = np.clip(terms, 0, None).sum(axis=0)
    a_neg = np.clip(-terms, 0, None).sum(axis=0)
    est = _median_amp(np.stack([a_pos, a_neg]), np.stack([eps, eps]), delta, rng, mode)
    return np.where(scale > 0, scale * (est[0] - est[1]), 0.0)


def estimate_inner_product(kind: str, col: np.ndarray, u: np.ndarray, contract: EstimateContract,
                           rng: np.random.Generator, ledger: QueryLedger | None = None) -> float:
    """Dispatch helper used by the CLI ``estimate`` command."""
    col = np.asarray(col, float)
    u = np.asarray(u, float)
    if kind == "classical":
        if not np.any(col) or not np.any(u):
            return 0.0
        return inner_product_classical(SamplableVector(col), SamplableVector(u), contract, rng, ledger)
    if kind == "quantum":
        return inner_product_quantum_sim(col, SamplableVector(u), contract, rng, ledger)
    if kind == "exact":
        _charge(ledger, "entry_reads", 2 * col.size)
        return float(col @ u)
    raise InputError(f"unknown estimator {kind!r}")


def error_scale(col: np.ndarray, u: np.ndarray) -> float:
    """min(||col||_inf ||u||_1, ||col||_1 ||u||_inf)."""
    col = np.asarray(col, float)
    u = np.asarray(u, float)
    if col.size == 0:
        raise ZeroVector("empty vectors")
    return float(min(np.abs(col).max() * np.abs(u).sum(), np.abs(col).sum() * np.abs(u).max()))
