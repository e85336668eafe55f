"""Distance-bucket trees: BKT (random pivot per node) and FQT (one pivot per level)."""

from __future__ import annotations

import heapq
import itertools
import math
import random
from dataclasses import dataclass, field

from ..dataset import Dataset
from ..pivots import PivotSet
from ..pruning import clearly_gt
from ..query import Hit
from .base import DIST_BYTES, ID_BYTES, MetricIndex

BUCKETS_PER_RANGE = 32


def default_bucket_width(dataset: Dataset, dist, seed: int = 0, pairs: int = 256) -> float:
    """1 for discrete metrics, else (max sampled distance) / 32."""
    if dataset.metric.discrete:
        return 1.0
    rng = random.Random(seed)
    objs = dataset.payloads
    top = 0.0
    for _ in range(pairs):
        top = max(top, dist(objs[rng.randrange(dataset.n)], objs[rng.randrange(dataset.n)]))
    return top / BUCKETS_PER_RANGE if top > 0 else 1.0


@dataclass
class BucketNode:
    key: int
    depth: int
    pivot: int | None = None  # BKT: stored object acting as pivot
    # bucket -> (min distance, max distance, child)
    children: dict[int, tuple[float, float, "BucketNode"]] = field(default_factory=dict)
    leaf_ids: list[int] = field(default_factory=list)
    leaf_phi: list[tuple[float, ...]] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children


class _BucketTree(MetricIndex):
    uses_pivots = True

    def _init_tree(self, bucket_width: float | None, seed: int) -> None:
        if bucket_width is None:
            bucket_width = default_bucket_width(self.dataset, self.raw_dist, seed)
        if not bucket_width > 0:
            raise ValueError("bucket_width must be > 0")
        self.bucket_width = float(bucket_width)
        self._keys = itertools.count()
        self.nodes: list[BucketNode] = []

    def _new_node(self, depth: int) -> BucketNode:
        node = BucketNode(next(self._keys), depth)
        self.nodes.append(node)
        return node

    def bucket_of(self, d: float) -> int:
        return int(math.floor(d / self.bucket_width))

    def _split(self, node, ids, phis, pivot_obj_id, build_child):
        groups: dict[int, list[tuple[int, tuple, float]]] = {}
        for o, ph in zip(ids, phis):
            d = self.bd(o, pivot_obj_id)
            groups.setdefault(self.bucket_of(d), []).append((o, ph + (d,), d))
        for b in sorted(groups):
            members = groups[b]
            ds = [m[2] for m in members]
            child = build_child([m[0] for m in members], [m[1] for m in members])
            node.children[b] = (min(ds), max(ds), child)

    def _level_pivot(self, node) -> int:
        raise NotImplementedError

    def node_sizes(self):
        for node in self.nodes:
            size = ID_BYTES + len(node.children) * (ID_BYTES + 2 * DIST_BYTES)
            size += len(node.leaf_ids) * (self.object_bytes + ID_BYTES + node.depth * DIST_BYTES)
            if node.pivot is not None:
                size += self.object_bytes
            yield node.key, size

    def _range(self, ctx, r, exact):
        hits = []
        stack = [(self.root, ())]
        while stack:
            node, qpath = stack.pop()
            ctx.touch(node.key)
            if node.pivot is not None:
                dp = ctx.d(node.pivot)
                if dp <= r:
                    hits.append(Hit(node.pivot, dp))
            for o, ph in zip(node.leaf_ids, node.leaf_phi):
                if any(clearly_gt(abs(a - b), r) for a, b in zip(ph, qpath)):
                    continue
                d = ctx.d(o)
                if d <= r:
                    hits.append(Hit(o, d))
            if node.children:
                dp = ctx.d(self._level_pivot(node))
                sub = qpath + (dp,)
                for lo, hi, child in node.children.values():
                    if clearly_gt(lo - dp, r) or clearly_gt(dp - hi, r):
                        continue
                    stack.append((child, sub))
        return hits

    def _knn(self, ctx, heap):
        tie = itertools.count()
        pq = [(0.0, next(tie), self.root, (), None)]
        while pq:
            lb, _, node, qpath, oid = heapq.heappop(pq)
            if clearly_gt(lb, heap.radius):
                break
            if node is None:
                heap.push(oid, ctx.d(oid))
                continue
            ctx.touch(node.key)
            if node.pivot is not None:
                heap.push(node.pivot, ctx.d(node.pivot))
            for o, ph in zip(node.leaf_ids, node.leaf_phi):
                olb = max((abs(a - b) for a, b in zip(ph, qpath)), default=0.0)
                if not clearly_gt(olb, heap.radius):
                    heapq.heappush(pq, (max(lb, olb), next(tie), None, None, o))
            if node.children:
                dp = ctx.d(self._level_pivot(node))
                sub = qpath + (dp,)
                for lo, hi, child in node.children.values():
                    gap = lo - dp if dp < lo else (dp - hi if dp > hi else 0.0)
                    clb = max(lb, gap)
                    if not clearly_gt(clb, heap.radius):
                        heapq.heappush(pq, (clb, next(tie), child, sub, None))

    def stored_ids(self):
        out = []
        for node in self.nodes:
            out.extend(node.leaf_ids)
            if node.pivot is not None:
                out.append(node.pivot)
        return out

    def height(self) -> int:
        return max(node.depth for node in self.nodes)

    def _path_pivots(self):
        """Yield (node, pivots on the path from the root, excluding node's own)."""
        stack = [(self.root, ())]
        while stack:
            node, path = stack.pop()
            yield node, path
            if node.children:
                sub = path + (self._level_pivot(node),)
                for _, _, child in node.children.values():
                    stack.append((child, sub))

    def audit(self):
        super().audit()
        dist, objs = self.raw_dist, self.objects
        for node, path in self._path_pivots():
            for o, ph in zip(node.leaf_ids, node.leaf_phi):
                assert ph == tuple(dist(objs[o], objs[p]) for p in path), f"phi of {o}"
            if node.children:
                p = self._level_pivot(node)
                for b, (lo, hi, child) in node.children.items():
                    ds = [dist(objs[i], objs[p]) for i in _subtree_ids(child)]
                    self._check_band(b, ds)
                    assert (min(ds), max(ds)) == (lo, hi), "bucket bounds"

    def _check_band(self, b, ds):
        assert all(self.bucket_of(d) == b for d in ds), "bucket membership"


def _subtree_ids(node: BucketNode):
    stack = [node]
    while stack:
        nd = stack.pop()
        yield from nd.leaf_ids
        if nd.pivot is not None:
            yield nd.pivot
        stack.extend(c for _, _, c in nd.children.values())


class BKT(_BucketTree):
    """Burkhard-Keller tree: each internal node picks a random pivot among its
    objects and buckets the rest by distance; height at most `pivot_budget`."""

    kind = "bkt"

    def __init__(self, dataset: Dataset, pivot_budget: int = 5, bucket_width: float | None = None,
                 seed: int = 0, **kw):
        super().__init__(dataset, **kw)
        if pivot_budget < 1:
            raise ValueError("pivot_budget must be >= 1")
        self.pivot_budget = pivot_budget
        self._init_tree(bucket_width, seed)
        self._rng = random.Random(seed)
        self.root = self._build(list(range(self.n)), [()] * self.n, 0)
        del self._rng
        self._finish_build()

    def _build(self, ids, phis, depth):
        node = self._new_node(depth)
        if len(ids) <= 1 or depth == self.pivot_budget:
            node.leaf_ids, node.leaf_phi = list(ids), list(phis)
            return node
        k = self._rng.randrange(len(ids))
        node.pivot = ids[k]
        rest = ids[:k] + ids[k + 1:]
        rest_phi = phis[:k] + phis[k + 1:]
        self._split(node, rest, rest_phi, node.pivot, lambda i, p: self._build(i, p, depth + 1))
        return node

    def _level_pivot(self, node):
        return node.pivot


class FQT(_BucketTree):
    """Fixed-queries tree: every node at depth i buckets by distance to pivot i."""

    kind = "fqt"

    def __init__(self, dataset: Dataset, pivots: PivotSet, bucket_width: float | None = None, seed: int = 0, **kw):
        super().__init__(dataset, **kw)
        self.pivot_set = pivots
        self._init_tree(bucket_width, seed)
        self.root = self._build(list(range(self.n)), [()] * self.n, 0)
        self._finish_build()

    def _build(self, ids, phis, depth):
        node = self._new_node(depth)
        if len(ids) <= 1 or depth == len(self.pivot_set):
            node.leaf_ids, node.leaf_phi = list(ids), list(phis)
            return node
        self._split(node, ids, phis, self.pivot_set.ids[depth], lambda i, p: self._build(i, p, depth + 1))
        return node

    def _level_pivot(self, node):
        return self.pivot_set.ids[node.depth]
