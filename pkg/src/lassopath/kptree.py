"""Sum tree over |u_i| with signs kept at the leaves.

Supports O(log m) updates and index sampling with probability |u_i| / ||u||_1.
The tree is stored heap-style in a flat array of length 2 * capacity.
"""

from __future__ import annotations

import numpy as np

from .errors import IndexOutOfRange, InputError, ZeroVector

# above this many draws, per-leaf counts come from one multinomial instead of
# walking the tree q times; both give the same distribution of counts
DIRECT_DRAW_LIMIT = 1 << 20


class SamplableVector:
    def __init__(self, u: np.ndarray) -> None:
        u = np.asarray(u, dtype=float).reshape(-1)
        if not np.all(np.isfinite(u)):
            raise InputError("samplable vector entries must be finite")
        self.m = u.shape[0]
        cap = 1
        while cap < max(self.m, 1):
            cap *= 2
        self.capacity = cap
        self.values = u.copy()
        self.tree = np.zeros(2 * cap)
        self.tree[cap:cap + self.m] = np.abs(u)
        for level_start in _levels(cap):
            lo, hi = level_start, 2 * level_start
            self.tree[lo:hi] = self.tree[2 * lo:2 * hi:2] + self.tree[2 * lo + 1:2 * hi:2]

    @property
    def norm1(self) -> float:
        return float(self.tree[1])

    @property
    def norm_inf(self) -> float:
        return float(np.abs(self.values).max()) if self.m else 0.0

    def __len__(self) -> int:
        return self.m

    def lookup(self, i: int) -> float:
        self._check(i)
        return float(self.values[i])

    def sign(self, i: int) -> float:
        return float(np.sign(self.lookup(i)))

    def update(self, i: int, v: float) -> None:
        self._check(i)
        v = float(v)
        if not np.isfinite(v):
            raise InputError("samplable vector entries must be finite")
        self.values[i] = v
        node = self.capacity + i
        self.tree[node] = abs(v)
        node //= 2
        while node >= 1:
            self.tree[node] = self.tree[2 * node] + self.tree[2 * node + 1]
            node //= 2

    def probabilities(self) -> np.ndarray:
        total = self.norm1
        if total == 0.0:
            raise ZeroVector("cannot sample from a zero vector")
        return np.abs(self.values) / np.abs(self.values).sum()

    def sample(self, rng: np.random.Generator) -> tuple[int, float]:
        """One index drawn from D_u together with the sign of that entry."""
        i = int(self.sample_many(rng, 1)[0])
        return i, float(np.sign(self.values[i]))

    def sample_many(self, rng: np.random.Generator, q: int) -> np.ndarray:
        """``q`` independent indices, by vectorised root-to-leaf descent."""
        if self.norm1 == 0.0:
            raise ZeroVector("cannot sample from a zero vector")
        target = rng.random(q) * self.tree[1]
        node = np.ones(q, dtype=np.int64)
        for _ in range(self.capacity.bit_length() - 1):
            left = self.tree[2 * node]
            right_side = (target >= left) & (self.tree[2 * node + 1] > 0)
            target = np.where(right_side, target - left, target)
            node = 2 * node + right_side
        return node - self.capacity

    def sample_counts(self, rng: np.random.Generator, q: int) -> np.ndarray:
        """Number of times each index appears among ``q`` draws."""
        if q <= DIRECT_DRAW_LIMIT:
            return np.bincount(self.sample_many(rng, q), minlength=self.m)[: self.m]
        return rng.multinomial(q, self.probabilities())

    def _check(self, i: int) -> None:
        if not 0 <= int(i) < self.m:
            raise IndexOutOfRange(f"index {i} outside [0, {self.m})")


def _levels(cap: int):
    level = cap // 2
    while level >= 1:
        yield level
        level //= 2


def build(u: np.ndarray) -> SamplableVector:
    return SamplableVector(u)
