"""Hyperplane-partitioned trees: GHT, BST / BST* and GNAT."""

from __future__ import annotations

import heapq
import itertools
import random
from dataclasses import dataclass, field

from ..dataset import Dataset
from ..pivots import farthest_first
from ..pruning import clearly_gt, clearly_le, gh_assign
from ..query import Hit
from .base import DIST_BYTES, ID_BYTES, MetricIndex

DEFAULT_GNAT_ARITY = 5


@dataclass
class HPNode:
    key: int
    centers: list[int]
    radii: list[float] = field(default_factory=list)
    children: list["HPNode | None"] = field(default_factory=list)
    # GNAT only: ranges[i][j] = (min, max) of d(o, c_j) over o in {c_i} + subtree i
    ranges: list[list[tuple[float, float]]] | None = None


class _HPTree(MetricIndex):
    def _init_nodes(self, seed):
        self._rng = random.Random(seed)
        self._keys = itertools.count()
        self.nodes: list[HPNode] = []

    def _node(self, centers) -> HPNode:
        node = HPNode(next(self._keys), list(centers))
        self.nodes.append(node)
        return node

    def _done(self):
        del self._rng, self._keys
        self._finish_build()

    def _pick_centers(self, ids: list[int], m: int) -> tuple[list[int], list[list[float]]]:
        """Farthest-first from a random anchor; returns positions into `ids` and
        distance rows from each center to every member of `ids`."""
        objs = [self.objects[i] for i in ids]
        anchor = self._rng.randrange(len(ids))
        return farthest_first(objs, m, self.metric, anchor)

    def node_sizes(self):
        per_center = self.object_bytes + ID_BYTES
        for node in self.nodes:
            size = len(node.centers) * per_center + len(node.radii) * DIST_BYTES
            if node.ranges is not None:
                size += len(node.centers) ** 2 * 2 * DIST_BYTES
            yield node.key, size

    def stored_ids(self):
        return [c for node in self.nodes for c in node.centers]

    def subtree_ids(self, node):
        out, stack = [], [node]
        while stack:
            nd = stack.pop()
            if nd is None:
                continue
            out.extend(nd.centers)
            stack.extend(nd.children)
        return out

    def height(self) -> int:
        best, stack = 0, [(self.root, 1)]
        while stack:
            nd, h = stack.pop()
            if nd is None:
                continue
            best = max(best, h)
            stack.extend((c, h + 1) for c in nd.children)
        return best


class GHT(_HPTree):
    """Binary generalized-hyperplane tree; pruning by the two-center hyperplane only."""

    kind = "ght"

    def __init__(self, dataset: Dataset, seed: int = 0, **kw):
        super().__init__(dataset, **kw)
        self._init_nodes(seed)
        self.root = self._build_topdown(list(range(self.n)), with_radii=False)
        self._done()

    def _build_topdown(self, ids, with_radii):
        root_slot: list = [None]
        work = [(ids, root_slot, 0)]
        while work:
            ids, slot, pos = work.pop()
            if len(ids) <= 2:
                node = self._node(ids)
                if with_radii:
                    node.radii = [0.0] * len(ids)
                    node.children = [None] * len(ids)
                slot[pos] = node
                continue
            (a, b), rows = self._pick_centers(ids, 2)
            node = self._node([ids[a], ids[b]])
            sides: list[list[int]] = [[], []]
            far = [0.0, 0.0]
            for k, o in enumerate(ids):
                if k == a or k == b:
                    continue
                side = gh_assign([rows[0][k], rows[1][k]])
                sides[side].append(o)
                far[side] = max(far[side], rows[side][k])
            if with_radii:
                node.radii = far
            node.children = [None, None]
            slot[pos] = node
            for s in (0, 1):
                if sides[s]:
                    work.append((sides[s], node.children, s))
        return root_slot[0]

    def _range(self, ctx, r, exact):
        hits = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            ctx.touch(node.key)
            ds = [ctx.d(c) for c in node.centers]
            for c, d in zip(node.centers, ds):
                if d <= r:
                    hits.append(Hit(c, d))
            for i, child in enumerate(node.children):
                if child is None:
                    continue
                if clearly_gt(ds[i] - ds[1 - i], 2 * r):
                    continue
                stack.append(child)
        return hits

    def _knn(self, ctx, heap):
        tie = itertools.count()
        pq = [(0.0, next(tie), self.root)]
        while pq:
            lb, _, node = heapq.heappop(pq)
            if clearly_gt(lb, heap.radius):
                break
            ctx.touch(node.key)
            ds = [ctx.d(c) for c in node.centers]
            for c, d in zip(node.centers, ds):
                heap.push(c, d)
            for i, child in enumerate(node.children):
                if child is not None:
                    clb = max(lb, (ds[i] - ds[1 - i]) / 2)
                    if not clearly_gt(clb, heap.radius):
                        heapq.heappush(pq, (clb, next(tie), child))

    def audit(self):
        super().audit()
        dist, objs = self.raw_dist, self.objects
        for node in self.nodes:
            for i, child in enumerate(node.children):
                ci, cj = objs[node.centers[i]], objs[node.centers[1 - i]]
                for o in self.subtree_ids(child):
                    assert dist(objs[o], ci) <= dist(objs[o], cj), "hyperplane side"


class BST(GHT):
    """Bisector tree: two balls per node. `mode` is "insertion" (one object
    at a time) or "topdown" (BST*, recursive hyperplane split)."""

    kind = "bst"

    def __init__(self, dataset: Dataset, mode: str = "insertion", seed: int = 0, **kw):
        MetricIndex.__init__(self, dataset, **kw)
        if mode not in ("insertion", "topdown"):
            raise ValueError(f"unknown BST mode {mode!r}")
        self.mode = mode
        if mode == "topdown":
            self.kind = "bst*"
        self._init_nodes(seed)
        if mode == "topdown":
            self.root = self._build_topdown(list(range(self.n)), with_radii=True)
        else:
            self.root = self._node([])
            for o in range(self.n):
                self._insert(o)
        self._done()

    def _insert(self, o):
        node = self.root
        while True:
            if len(node.centers) < 2:
                node.centers.append(o)
                node.radii.append(0.0)
                node.children.append(None)
                return
            ds = [self.bd(o, c) for c in node.centers]
            side = gh_assign(ds)
            if ds[side] > node.radii[side]:
                node.radii[side] = ds[side]
            child = node.children[side]
            if child is None:
                child = self._node([])
                node.children[side] = child
            node = child

    def _range(self, ctx, r, exact):
        hits = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            ctx.touch(node.key)
            for c, rad, child in zip(node.centers, node.radii, node.children):
                d = ctx.d(c)
                if d <= r:
                    hits.append(Hit(c, d))
                if child is None or clearly_gt(d - rad, r):
                    continue
                if not exact and clearly_le(d + rad, r):
                    hits.extend(_validated(ctx, self.subtree_ids(child), d + rad))
                    continue
                stack.append(child)
        return hits

    def _knn(self, ctx, heap):
        tie = itertools.count()
        pq = [(0.0, next(tie), self.root)]
        while pq:
            lb, _, node = heapq.heappop(pq)
            if clearly_gt(lb, heap.radius):
                break
            ctx.touch(node.key)
            for c, rad, child in zip(node.centers, node.radii, node.children):
                d = ctx.d(c)
                heap.push(c, d)
                if child is not None:
                    clb = max(lb, d - rad)
                    if not clearly_gt(clb, heap.radius):
                        heapq.heappush(pq, (clb, next(tie), child))

    def audit(self):
        MetricIndex.audit(self)
        dist, objs = self.raw_dist, self.objects
        for node in self.nodes:
            for c, rad, child in zip(node.centers, node.radii, node.children):
                for o in self.subtree_ids(child):
                    assert dist(objs[o], objs[c]) <= rad, "covering radius"
            if self.mode == "topdown" and len(node.children) == 2:
                for i in (0, 1):
                    ci, cj = objs[node.centers[i]], objs[node.centers[1 - i]]
                    for o in self.subtree_ids(node.children[i]):
                        assert dist(objs[o], ci) <= dist(objs[o], cj), "hyperplane side"


def _validated(ctx, ids, bound):
    return [Hit(o, ctx.cache[o]) if o in ctx.cache else Hit(o, bound, False) for o in ids]


class GNAT(_HPTree):
    """m-ary hyperplane tree with per-child distance ranges to every center."""

    kind = "gnat"

    def __init__(self, dataset: Dataset, arity: int = DEFAULT_GNAT_ARITY, seed: int = 0, **kw):
        super().__init__(dataset, **kw)
        if arity < 2:
            raise ValueError("arity must be >= 2")
        self.arity = arity
        self._init_nodes(seed)
        root_slot: list = [None]
        work = [(list(range(self.n)), root_slot, 0)]
        while work:
            ids, slot, pos = work.pop()
            m = min(self.arity, len(ids))
            picks, rows = self._pick_centers(ids, m)
            node = self._node([ids[p] for p in picks])
            members: list[list[int]] = [[p] for p in picks]  # positions into ids
            chosen = set(picks)
            for k in range(len(ids)):
                if k not in chosen:
                    members[gh_assign([row[k] for row in rows])].append(k)
            node.ranges = [[(min(rows[j][k] for k in mem), max(rows[j][k] for k in mem)) for j in range(m)]
                           for mem in members]
            node.children = [None] * m
            slot[pos] = node
            for i, mem in enumerate(members):
                if len(mem) > 1:
                    work.append(([ids[k] for k in mem[1:]], node.children, i))
        self.root = root_slot[0]
        self._done()

    def _range(self, ctx, r, exact):
        hits = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            ctx.touch(node.key)
            m = len(node.centers)
            alive = [True] * m
            dq: list[float | None] = [None] * m
            for i in range(m):
                if not alive[i]:
                    continue
                di = dq[i] = ctx.d(node.centers[i])
                if di <= r:
                    hits.append(Hit(node.centers[i], di))
                for j in range(m):
                    if j == i or not alive[j]:
                        continue
                    lo, hi = node.ranges[j][i]
                    if clearly_gt(lo - di, r) or clearly_gt(di - hi, r):
                        alive[j] = False
                    elif dq[j] is not None and clearly_gt(dq[j] - di, 2 * r):
                        alive[j] = False
                    elif dq[j] is not None and clearly_gt(di - dq[j], 2 * r):
                        alive[i] = False
            for i in range(m):
                if alive[i] and node.children[i] is not None:
                    stack.append(node.children[i])
        return hits

    def _knn(self, ctx, heap):
        tie = itertools.count()
        pq = [(0.0, next(tie), self.root)]
        while pq:
            lb, _, node = heapq.heappop(pq)
            if clearly_gt(lb, heap.radius):
                break
            ctx.touch(node.key)
            m = len(node.centers)
            bound = [lb] * m
            dq: list[float | None] = [None] * m
            for i in range(m):
                if clearly_gt(bound[i], heap.radius):
                    continue
                di = dq[i] = ctx.d(node.centers[i])
                heap.push(node.centers[i], di)
                for j in range(m):
                    if j == i:
                        continue
                    lo, hi = node.ranges[j][i]
                    gap = lo - di if di < lo else (di - hi if di > hi else 0.0)
                    bound[j] = max(bound[j], gap)
                    if dq[j] is not None:
                        bound[j] = max(bound[j], (dq[j] - di) / 2)
                        bound[i] = max(bound[i], (di - dq[j]) / 2)
            for i in range(m):
                child = node.children[i]
                if child is not None and not clearly_gt(bound[i], heap.radius):
                    heapq.heappush(pq, (bound[i], next(tie), child))

    def audit(self):
        MetricIndex.audit(self)
        dist, objs = self.raw_dist, self.objects
        for node in self.nodes:
            for i, c in enumerate(node.centers):
                group = [c] + self.subtree_ids(node.children[i])
                for j, cj in enumerate(node.centers):
                    ds = [dist(objs[o], objs[cj]) for o in group]
                    assert node.ranges[i][j] == (min(ds), max(ds)), "range table"
                for o in group[1:]:
                    do = [dist(objs[o], objs[cj]) for cj in node.centers]
                    assert do[i] == min(do), "nearest center"
