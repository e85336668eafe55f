"""Multi-way vantage-point tree."""

from __future__ import annotations

import random
from typing import Callable, Sequence

from ..dataset import Dataset
from .buckets import _BucketTree

DEFAULT_ARITY = 5


def equal_count_bands(scored: Sequence[tuple[float, int]], arity: int) -> list[list[tuple[float, int]]]:
    """Split (distance, id) pairs, sorted, into `arity` contiguous equal-count bands."""
    m = len(scored)
    bands = [list(scored[j * m // arity:(j + 1) * m // arity]) for j in range(arity)]
    return [b for b in bands if b]


class MVPT(_BucketTree):
    """Each node keeps one vantage point; the other members are cut into
    `arity` distance-quantile bands, each with its [min, max] distance."""

    kind = "mvpt"
    uses_pivots = False

    def __init__(self, dataset: Dataset, arity: int = DEFAULT_ARITY, leaf_capacity: int = 4, seed: int = 0,
                 choose_vantage: Callable[[list[int], random.Random], int] | None = None, **kw):
        super().__init__(dataset, **kw)
        if arity < 2:
            raise ValueError("arity must be >= 2")
        if leaf_capacity < 1:
            raise ValueError("leaf_capacity must be >= 1")
        self.arity = arity
        self.leaf_capacity = leaf_capacity
        self._init_tree(1.0, seed)
        rng = random.Random(seed)
        self._choose = choose_vantage or (lambda ids, rng: ids[rng.randrange(len(ids))])
        self._rng = rng
        self.root = self._build(list(range(self.n)), [()] * self.n, 0)
        del self._rng, self._choose
        self._finish_build()

    def _build(self, ids, phis, depth):
        node = self._new_node(depth)
        if len(ids) <= self.leaf_capacity:
            node.leaf_ids, node.leaf_phi = list(ids), list(phis)
            return node
        vp = self._choose(ids, self._rng)
        node.pivot = vp
        phi_of = dict(zip(ids, phis))
        scored = sorted((self.bd(o, vp), o) for o in ids if o != vp)
        for b, band in enumerate(equal_count_bands(scored, self.arity)):
            members = [o for _, o in band]
            child = self._build(members, [phi_of[o] + (d,) for d, o in band], depth + 1)
            node.children[b] = (band[0][0], band[-1][0], child)
        return node

    def _level_pivot(self, node):
        return node.pivot

    def _check_band(self, b, ds):
        pass
