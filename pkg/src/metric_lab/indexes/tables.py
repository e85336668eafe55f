"""Pivot tables: LAESA (shared pivots) and EPT / EPT* (per-object pivots)."""

from __future__ import annotations

import numpy as np

from ..dataset import Dataset
from ..pivots import DEFAULT_CP_SCALE, PivotGroupTable, PivotSet, build_ept_groups, select_psa
from ..pruning import clearly_gt, margin
from ..query import Hit
from .base import DIST_BYTES, ID_BYTES, MetricIndex


class PivotTableIndex(MetricIndex):
    """Row o holds (pivot, d(o, pivot)) for l pivots; search scans the table
    with pivot filtering and pivot validation."""

    uses_pivots = True
    pivot_ids: tuple[int, ...]
    slots: np.ndarray
    dists: np.ndarray

    def node_sizes(self):
        row = self.object_bytes + self.slots.shape[1] * (ID_BYTES + DIST_BYTES)
        return ((("row", o), row) for o in range(self.n))

    def _query_view(self, ctx):
        qp = np.array([ctx.d(p) for p in self.pivot_ids])
        qv = qp[self.slots]
        lb = np.abs(self.dists - qv).max(axis=1)
        return qv, lb

    def _range(self, ctx, r, exact):
        qv, lb = self._query_view(ctx)
        cand = np.flatnonzero(lb - r <= margin(lb, r))
        if not exact:
            ub = (self.dists[cand] + qv[cand]).min(axis=1)
            sure = r - ub >= margin(ub, r)
        hits = []
        for pos, o in enumerate(cand.tolist()):
            if not exact and sure[pos] and o not in ctx.cache:
                hits.append(Hit(o, float(ub[pos]), False))
                continue
            ctx.touch(("row", o))
            d = ctx.d(o)
            if d <= r:
                hits.append(Hit(o, d))
        return hits

    def _knn(self, ctx, heap):
        _, lb = self._query_view(ctx)
        order = np.lexsort((np.arange(self.n), lb))
        for o in order.tolist():
            if clearly_gt(lb[o], heap.radius):
                break
            ctx.touch(("row", o))
            heap.push(o, ctx.d(o))

    def stored_ids(self):
        return list(range(self.n))

    def row(self, o: int) -> list[tuple[int, float]]:
        return [(self.pivot_ids[s], float(d)) for s, d in zip(self.slots[o], self.dists[o])]

    def audit(self):
        super().audit()
        for o in range(self.n):
            for pid, d in self.row(o):
                assert self.raw_dist(self.objects[o], self.objects[pid]) == d, f"row {o} pivot {pid}"


class LAESA(PivotTableIndex):
    kind = "laesa"

    def __init__(self, dataset: Dataset, pivots: PivotSet, **kw):
        super().__init__(dataset, **kw)
        self.pivot_set = pivots
        self.pivot_ids = pivots.ids
        l = len(pivots)
        self.slots = np.tile(np.arange(l), (self.n, 1))
        self.dists = np.array([[self.bd(o, p) for p in pivots.ids] for o in range(self.n)]).reshape(self.n, l)
        self._finish_build()


class _GroupTableIndex(PivotTableIndex):
    def _adopt(self, table: PivotGroupTable) -> None:
        self.table = table
        self.pivot_ids = table.pivot_ids
        self.slots = table.slots
        self.dists = table.dists
        self._finish_build()


class EPT(_GroupTableIndex):
    kind = "ept"

    def __init__(self, dataset: Dataset, l: int = 5, g: int = 4, seed: int = 0, **kw):
        super().__init__(dataset, **kw)
        self._adopt(build_ept_groups(dataset, l, g, seed, dist=self.metric))


class EPTStar(_GroupTableIndex):
    kind = "ept*"

    def __init__(self, dataset: Dataset, l: int = 5, cp_scale: int = DEFAULT_CP_SCALE,
                 sample_size: int = 64, seed: int = 0, **kw):
        super().__init__(dataset, **kw)
        cp_scale = min(cp_scale, dataset.n)
        l = min(l, cp_scale)
        self._adopt(select_psa(dataset, l, cp_scale, sample_size, seed, dist=self.metric))
