"""Spatial approximation tree."""

from __future__ import annotations

import heapq
import itertools
import random
from dataclasses import dataclass, field

from ..dataset import Dataset
from ..pruning import clearly_gt
from ..query import Hit
from .base import DIST_BYTES, ID_BYTES, MetricIndex

ROOT_RULES = ("random", "distal")


@dataclass
class SATNode:
    key: int
    obj: int
    radius: float = 0.0
    children: list["SATNode"] = field(default_factory=list)


class SAT(MetricIndex):
    """Each node's neighbor set N(a) holds the bag members closer to a than to
    any earlier neighbor; everything else descends to its nearest neighbor."""

    kind = "sat"

    def __init__(self, dataset: Dataset, root_rule: str = "distal", seed: int = 0, **kw):
        super().__init__(dataset, **kw)
        if root_rule not in ROOT_RULES:
            raise ValueError(f"root_rule must be one of {ROOT_RULES}")
        self.root_rule = root_rule
        rng = random.Random(seed)
        start = rng.randrange(self.n)
        if root_rule == "distal" and self.n > 1:
            # farthest object from a random start
            root_id = max((o for o in range(self.n) if o != start), key=lambda o: (self.bd(o, start), -o))
        else:
            root_id = start
        keys = itertools.count()
        self.nodes: list[SATNode] = []

        def make(o):
            node = SATNode(next(keys), o)
            self.nodes.append(node)
            return node

        self.root = make(root_id)
        bag = [o for o in range(self.n) if o != root_id]
        work = [(self.root, bag, None)]
        while work:
            node, bag, known = work.pop()
            a = node.obj
            da = known if known is not None else {o: self.bd(o, a) for o in bag}
            order = sorted(bag, key=lambda o: (da[o], o))
            if order:
                node.radius = da[order[-1]]
            neigh: list[int] = []
            rows: dict[int, dict[int, float]] = {}  # neighbor -> d(o, neighbor) for tested o
            rest: list[tuple[int, list[float]]] = []
            for o in order:
                ds = [self.bd(o, b) for b in neigh]
                for b, d in zip(neigh, ds):
                    rows[b][o] = d
                if all(da[o] < d for d in ds):
                    neigh.append(o)
                    rows[o] = {}
                else:
                    rest.append((o, ds))
            bags: dict[int, list[int]] = {b: [] for b in neigh}
            for o, ds in rest:
                # distances to neighbors added after o was tested are still missing
                full = ds + [self.bd(o, b) for b in neigh[len(ds):]]
                for b, d in zip(neigh[len(ds):], full[len(ds):]):
                    rows[b][o] = d
                j = min(range(len(neigh)), key=lambda i: (full[i], i))
                bags[neigh[j]].append(o)
            for b in neigh:
                child = make(b)
                node.children.append(child)
                work.append((child, bags[b], {o: rows[b][o] for o in bags[b]}))
        self._finish_build()

    def node_sizes(self):
        for node in self.nodes:
            yield node.key, self.object_bytes + ID_BYTES + DIST_BYTES + len(node.children) * ID_BYTES

    def stored_ids(self):
        return [node.obj for node in self.nodes]

    def _range(self, ctx, r, exact):
        hits = []
        d0 = ctx.d(self.root.obj)
        stack = [(self.root, d0, d0)]
        while stack:
            node, da, dmin = stack.pop()
            ctx.touch(node.key)
            if da <= r:
                hits.append(Hit(node.obj, da))
            if not node.children or clearly_gt(da - node.radius, r):
                continue
            dcs = [ctx.d(c.obj) for c in node.children]
            dmin = min(dmin, min(dcs))
            for child, dc in zip(node.children, dcs):
                if not clearly_gt(dc - dmin, 2 * r):
                    stack.append((child, dc, dmin))
        return hits

    def _knn(self, ctx, heap):
        tie = itertools.count()
        d0 = ctx.d(self.root.obj)
        pq = [(0.0, next(tie), self.root, d0, d0)]
        while pq:
            lb, _, node, da, dmin = heapq.heappop(pq)
            if clearly_gt(lb, heap.radius):
                break
            ctx.touch(node.key)
            heap.push(node.obj, da)
            if not node.children:
                continue
            dcs = [ctx.d(c.obj) for c in node.children]
            dmin = min(dmin, min(dcs))
            for child, dc in zip(node.children, dcs):
                clb = max(lb, dc - child.radius, (dc - dmin) / 2)
                if not clearly_gt(clb, heap.radius):
                    heapq.heappush(pq, (clb, next(tie), child, dc, dmin))

    def height(self) -> int:
        best, stack = 0, [(self.root, 1)]
        while stack:
            nd, h = stack.pop()
            best = max(best, h)
            stack.extend((c, h + 1) for c in nd.children)
        return best

    def audit(self):
        super().audit()
        dist, objs = self.raw_dist, self.objects
        for node in self.nodes:
            a = objs[node.obj]
            sub = _subtree(node)
            assert all(dist(objs[o], a) <= node.radius for o in sub), "covering radius"
            prev = []
            for child in node.children:
                c = objs[child.obj]
                assert all(dist(c, a) < dist(c, objs[p]) for p in prev), "N(a) closeness"
                prev.append(child.obj)
            ds_sorted = [dist(objs[ch.obj], a) for ch in node.children]
            assert ds_sorted == sorted(ds_sorted), "neighbors in ascending distance"
            for child in node.children:
                for o in _subtree(child)[1:]:
                    do = [dist(objs[o], objs[ch.obj]) for ch in node.children]
                    assert do[node.children.index(child)] == min(do), "nearest neighbor bag"


def _subtree(node):
    out, stack = [], [node]
    while stack:
        nd = stack.pop()
        out.append(nd.obj)
        stack.extend(nd.children)
    return out
