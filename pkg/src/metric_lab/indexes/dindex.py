"""A small in-memory D-index: a cascade of rho-split levels."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..dataset import Dataset
from ..pivots import select_hf
from ..pruning import (SplitOutcome, bps_split, clearly_gt, clearly_le, exclusive_filter,
                       exclusive_validate, lower_median)
from ..query import Hit
from .base import DIST_BYTES, ID_BYTES, MetricIndex

DEFAULT_LEVELS = 4
RHO_FRACTION = 0.05


@dataclass
class DIndexLevel:
    center: int
    d_med: float
    rho: float
    # partition -> [(id, phi)] where phi holds distances to this and all earlier centers
    buckets: dict[SplitOutcome, list[tuple[int, tuple]]] = field(default_factory=dict)


def default_rho(dataset: Dataset, dist, seed: int = 0, pairs: int = 256) -> float:
    rng = random.Random(seed)
    objs = dataset.payloads
    top = max(dist(objs[rng.randrange(dataset.n)], objs[rng.randrange(dataset.n)]) for _ in range(pairs))
    return RHO_FRACTION * top


class DIndex(MetricIndex):
    """Level i rho-splits the exclusion set left by level i-1 around its own
    center; the last level's exclusion set is kept as a residual bucket."""

    kind = "dindex"
    disk_class = True

    def __init__(self, dataset: Dataset, levels: int = DEFAULT_LEVELS, rho: float | None = None,
                 seed: int = 0, **kw):
        super().__init__(dataset, **kw)
        if levels < 1:
            raise ValueError("levels must be >= 1")
        if rho is None:
            rho = default_rho(dataset, self.raw_dist, seed)
        if rho < 0:
            raise ValueError("rho must be >= 0")
        self.rho = rho
        levels = min(levels, self.n)
        centers = select_hf(dataset, levels, dist=self.metric, seed=seed).ids
        self.levels: list[DIndexLevel] = []
        pending = [(o, ()) for o in range(self.n)]
        for c in centers:
            if not pending:
                break
            scored = [(o, phi + (self.bd(o, c),)) for o, phi in pending]
            d_med = lower_median([phi[-1] for _, phi in scored])
            level = DIndexLevel(c, d_med, rho, {SplitOutcome.ZERO: [], SplitOutcome.ONE: []})
            pending = []
            for o, phi in scored:
                part = bps_split(phi[-1], d_med, rho)
                if part == SplitOutcome.EXCLUSION:
                    pending.append((o, phi))
                else:
                    level.buckets[part].append((o, phi))
            self.levels.append(level)
        self.residue = pending
        self._finish_build()

    def node_sizes(self):
        for i, lv in enumerate(self.levels):
            for part in (SplitOutcome.ZERO, SplitOutcome.ONE):
                yield (i, int(part)), self._bucket_bytes(lv.buckets[part], i + 1)
        yield "residue", self._bucket_bytes(self.residue, len(self.levels))

    def _bucket_bytes(self, bucket, depth):
        return ID_BYTES + len(bucket) * (self.object_bytes + ID_BYTES + depth * DIST_BYTES)

    def stored_ids(self):
        out = [o for lv in self.levels for b in lv.buckets.values() for o, _ in b]
        return out + [o for o, _ in self.residue]

    def _scan(self, ctx, bucket, key, qpath, r, exact, hits):
        if not bucket:
            return
        ctx.touch(key)
        for o, phi in bucket:
            if any(clearly_gt(abs(a - b), r) for a, b in zip(phi, qpath)):
                continue
            if not exact and o not in ctx.cache:
                ub = min(a + b for a, b in zip(phi, qpath))
                if clearly_le(ub, r):
                    hits.append(Hit(o, ub, False))
                    continue
            d = ctx.d(o)
            if d <= r:
                hits.append(Hit(o, d))

    def _range(self, ctx, r, exact):
        hits: list[Hit] = []
        self._walk(ctx, lambda: r, exact, hits)
        return hits

    def _walk(self, ctx, radius, exact, hits):
        qpath: tuple = ()
        for i, lv in enumerate(self.levels):
            dq = ctx.d(lv.center)
            qpath = qpath + (dq,)
            r = radius()
            only = exclusive_validate(dq, lv.d_med, lv.rho, r)
            pruned = exclusive_filter(dq, lv.d_med, lv.rho, r)
            for part in (SplitOutcome.ZERO, SplitOutcome.ONE):
                if part in pruned or (only is not None and part != only):
                    continue
                self._scan(ctx, lv.buckets[part], (i, int(part)), qpath, radius(), exact, hits)
            if only is not None:
                return
        self._scan(ctx, self.residue, "residue", qpath, radius(), exact, hits)

    def _knn(self, ctx, heap):
        sink = _HeapSink(heap)
        self._walk(ctx, lambda: heap.radius, True, sink)

    def audit(self):
        super().audit()
        dist, objs = self.raw_dist, self.objects
        for i, lv in enumerate(self.levels):
            path = [l.center for l in self.levels[:i + 1]]
            for part, bucket in lv.buckets.items():
                for o, phi in bucket:
                    assert phi == tuple(dist(objs[o], objs[p]) for p in path), "phi"
                    assert bps_split(phi[-1], lv.d_med, lv.rho) == part, "split predicate"
                    for j, earlier in enumerate(self.levels[:i]):
                        assert bps_split(phi[j], earlier.d_med, earlier.rho) == SplitOutcome.EXCLUSION
        for o, phi in self.residue:
            assert all(bps_split(phi[j], lv.d_med, lv.rho) == SplitOutcome.EXCLUSION
                       for j, lv in enumerate(self.levels)), "residue"


class _HeapSink(list):
    """Adapter so the range scan feeds verified objects into a kNN heap."""

    def __init__(self, heap):
        super().__init__()
        self.heap = heap

    def append(self, hit):
        if hit.exact:
            self.heap.push(hit.id, hit.distance)
