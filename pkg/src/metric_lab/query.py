"""Query types, brute-force oracles and the three MkNN strategy drivers."""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Sequence

from .metrics import CountedMetric, DistanceFn

STRATEGIES = ("incremental", "dynamic", "seeded")


class Hit(NamedTuple):
    id: int
    distance: float
    # False when the object was validated without computing d(q, o);
    # `distance` then holds an upper bound that is <= r.
    exact: bool = True


@dataclass
class ResultSet:
    hits: list[Hit]

    @classmethod
    def of(cls, hits) -> "ResultSet":
        return cls(sorted(hits, key=lambda h: (h.distance, h.id)))

    @property
    def ids(self) -> list[int]:
        return [h.id for h in self.hits]

    @property
    def distances(self) -> list[float]:
        return [h.distance for h in self.hits]

    @property
    def nd_k(self) -> float:
        return self.hits[-1].distance if self.hits else math.inf

    def __len__(self) -> int:
        return len(self.hits)

    def __iter__(self):
        return iter(self.hits)


@dataclass(frozen=True)
class RangeQuery:
    q: Any
    r: float

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("radius must be >= 0")


@dataclass(frozen=True)
class KnnQuery:
    q: Any
    k: int
    strategy: str = "dynamic"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")


@dataclass
class QueryStats:
    compdists: int = 0
    page_accesses: int = 0
    elapsed_ns: int = 0
    rounds: int = 1
    radius_trace: list[float] = field(default_factory=list)


class QueryContext:
    """Per-query state: counted distances to stored objects, touched nodes.

    d(q, o) is memoised by object id, so no object is verified twice.
    """

    def __init__(self, q, objects: Sequence[Any], dist: DistanceFn):
        self.q = q
        self.objects = objects
        self.metric = CountedMetric(dist)
        self.cache: dict[int, float] = {}
        self.touched: set = set()
        self.radius_trace: list[float] = []
        self.rounds = 1
        self.started = time.perf_counter_ns()

    def d(self, oid: int) -> float:
        v = self.cache.get(oid)
        if v is None:
            v = self.metric(self.q, self.objects[oid])
            self.cache[oid] = v
        return v

    def touch(self, node) -> None:
        self.touched.add(node)

    @property
    def compdists(self) -> int:
        return self.metric.count


class SeedComplete(Exception):
    """Raised by a seeding KnnHeap once k candidates are collected."""


class KnnHeap:
    """Best-k list under (distance, id) order; `radius` is the k-th distance."""

    def __init__(self, k: int, ctx: QueryContext | None = None, seeding: bool = False):
        self.k = k
        self._heap: list[tuple[float, int]] = []
        self._trace = ctx.radius_trace if ctx is not None else None
        self._seeding = seeding

    @property
    def radius(self) -> float:
        return -self._heap[0][0] if len(self._heap) >= self.k else math.inf

    def push(self, oid: int, d: float) -> None:
        h = self._heap
        if len(h) < self.k:
            heapq.heappush(h, (-d, -oid))
        elif (d, oid) < (-h[0][0], -h[0][1]):
            heapq.heapreplace(h, (-d, -oid))
        else:
            return
        if self._trace is not None and len(h) >= self.k:
            self._trace.append(-h[0][0])
        if self._seeding and len(h) >= self.k:
            raise SeedComplete

    def hits(self) -> list[Hit]:
        return [Hit(-oid, -nd) for nd, oid in self._heap]


def brute_force_range(objects: Sequence[Any], q, r: float, dist: DistanceFn) -> ResultSet:
    if r < 0:
        raise ValueError("radius must be >= 0")
    hits = []
    for i, o in enumerate(objects):
        d = dist(q, o)
        if d <= r:
            hits.append(Hit(i, d))
    return ResultSet.of(hits)


def brute_force_knn(objects: Sequence[Any], q, k: int, dist: DistanceFn) -> ResultSet:
    if not 1 <= k <= len(objects):
        raise ValueError(f"k must be in [1, {len(objects)}]")
    scored = sorted(((dist(q, o), i) for i, o in enumerate(objects)))
    return ResultSet([Hit(i, d) for d, i in scored[:k]])


def _trim(hits, k: int) -> list[Hit]:
    return sorted(hits, key=lambda h: (h.distance, h.id))[:k]


def _check_k(index, k: int) -> None:
    if not 1 <= k <= index.n:
        raise ValueError(f"k must be in [1, {index.n}]")


def knn_incremental(index, q, k: int, r0: float | None = None, growth: float = 2.0):
    """Repeated range searches with a geometrically growing radius."""
    _check_k(index, k)
    r = index.default_r0() if r0 is None else r0
    if not r > 0:
        raise ValueError("r0 must be > 0")
    if not growth > 1:
        raise ValueError("growth must be > 1")
    ctx = index.context(q)
    rounds = 0
    while True:
        rounds += 1
        hits = index._range(ctx, r, exact=True)
        if len(hits) >= k:
            break
        r *= growth
    ctx.rounds = rounds
    return ResultSet(_trim(hits, k)), index.stats(ctx)


def knn_dynamic(index, q, k: int):
    """Single traversal with the radius shrinking to the current k-th distance."""
    _check_k(index, k)
    ctx = index.context(q)
    heap = KnnHeap(k, ctx)
    index._knn(ctx, heap)
    return ResultSet(_trim(heap.hits(), k)), index.stats(ctx)


def knn_seeded(index, q, k: int):
    """Greedy k candidates, then one range search at their k-th distance."""
    _check_k(index, k)
    ctx = index.context(q)
    seed = KnnHeap(k, ctx, seeding=True)
    try:
        index._knn(ctx, seed)
    except SeedComplete:
        pass
    r = seed.radius
    hits = index._range(ctx, r, exact=True)
    return ResultSet(_trim(hits, k)), index.stats(ctx)


def run_knn(index, q, k: int, strategy: str = "dynamic", **kw):
    if strategy == "dynamic":
        return knn_dynamic(index, q, k)
    if strategy == "incremental":
        return knn_incremental(index, q, k, **kw)
    if strategy == "seeded":
        return knn_seeded(index, q, k)
    raise ValueError(f"unknown strategy {strategy!r}")
