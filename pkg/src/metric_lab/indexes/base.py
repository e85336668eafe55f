"""Shared build/search plumbing for every index."""

from __future__ import annotations

import math
import random
import time
from typing import Any, Iterator

from ..dataset import Dataset
from ..metrics import CountedMetric, DistanceFn
from ..pages import DEFAULT_PAGE_SIZE, PageModel
from ..query import Hit, QueryContext, QueryStats, ResultSet, run_knn

ID_BYTES = 4
DIST_BYTES = 8


class MetricIndex:
    """Base class. Subclasses build in ``__init__`` and implement
    ``_range(ctx, r, exact)`` and ``_knn(ctx, heap)``."""

    kind = "index"
    disk_class = False
    uses_pivots = False

    def __init__(self, dataset: Dataset, dist: DistanceFn | None = None, page_size: int = DEFAULT_PAGE_SIZE):
        if dataset.n == 0:
            raise ValueError("cannot index an empty dataset")
        self.dataset = dataset
        self.objects = dataset.payloads
        self.n = dataset.n
        self.raw_dist = dist if dist is not None else dataset.distance
        self.metric = CountedMetric(self.raw_dist)
        self.object_bytes = dataset.object_size
        self.page_size = page_size
        self.pages = PageModel(page_size)
        self._r0 = None

    # build helpers -------------------------------------------------------
    def bd(self, i: int, j: int) -> float:
        """Counted build-time distance between stored objects i and j."""
        return self.metric(self.objects[i], self.objects[j])

    @property
    def build_compdists(self) -> int:
        return self.metric.count

    def _finish_build(self) -> None:
        self.build_distance_count = self.metric.count
        self.pages.place(self.node_sizes())

    def node_sizes(self) -> Iterator[tuple[Any, int]]:
        """(node key, bytes) in construction order."""
        return iter(())

    # queries -------------------------------------------------------------
    def context(self, q) -> QueryContext:
        return QueryContext(q, self.objects, self.raw_dist)

    def stats(self, ctx: QueryContext) -> QueryStats:
        elapsed = time.perf_counter_ns() - ctx.started
        pa = self.pages.charge(ctx.touched) if self.disk_class else 0
        return QueryStats(ctx.compdists, pa, elapsed, ctx.rounds, list(ctx.radius_trace))

    def range_search(self, q, r: float, validate: bool = True):
        if r < 0:
            raise ValueError("radius must be >= 0")
        ctx = self.context(q)
        hits = self._range(ctx, r, exact=not validate)
        return ResultSet.of(hits), self.stats(ctx)

    def knn_search(self, q, k: int, strategy: str = "dynamic", **kw):
        return run_knn(self, q, k, strategy, **kw)

    def default_r0(self) -> float:
        """1st percentile of a 1000-pair distance sample (uncounted)."""
        if self._r0 is None:
            rng = random.Random(12345)
            ds = []
            for _ in range(1000):
                i, j = rng.randrange(self.n), rng.randrange(self.n)
                if i != j:
                    ds.append(self.raw_dist(self.objects[i], self.objects[j]))
            ds = sorted(d for d in ds if d > 0)
            self._r0 = ds[len(ds) // 100] if ds else 1.0
        return self._r0

    def _range(self, ctx: QueryContext, r: float, exact: bool) -> list[Hit]:
        raise NotImplementedError

    def _knn(self, ctx: QueryContext, heap) -> None:
        raise NotImplementedError

    # audits --------------------------------------------------------------
    def stored_ids(self) -> list[int]:
        """Every data object id reachable in the structure (with multiplicity)."""
        raise NotImplementedError

    def audit(self) -> None:
        """Recompute structural invariants; raise AssertionError on violation."""
        ids = sorted(self.stored_ids())
        assert ids == list(range(self.n)), "stored ids differ from dataset ids"

    def __getstate__(self):
        state = self.__dict__.copy()
        state["metric"] = None
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self.metric = CountedMetric(self.raw_dist)
        self.metric.count = state.get("build_distance_count", 0)


def bound_hits(ids, upper: float) -> list[Hit]:
    return [Hit(i, upper, False) for i in ids]


INF = math.inf
