"""M-tree and PM-tree (M-tree with pivot images and hyper-rings)."""

from __future__ import annotations

import heapq
import itertools
import math
import random
from dataclasses import dataclass, field

from ..dataset import Dataset
from ..pivots import PivotSet
from ..pruning import IntervalBox, clearly_gt, clearly_le, gh_assign, pivot_lower_bound
from ..query import Hit
from .base import DIST_BYTES, ID_BYTES, MetricIndex

SPLIT_PAIR_SAMPLES = 32
MIN_CAPACITY = 4


@dataclass
class Entry:
    obj: int
    pd: float  # distance to the parent routing object (inf at root)
    radius: float = 0.0
    child: "MNode | None" = None
    phi: tuple | None = None  # PM-tree leaf entries
    hr: IntervalBox | None = None  # PM-tree routing entries


@dataclass
class MNode:
    key: int
    leaf: bool
    entries: list[Entry] = field(default_factory=list)
    parent: "MNode | None" = None
    parent_entry: Entry | None = None


class MTree(MetricIndex):
    """Built by inserting objects one at a time."""

    kind = "mtree"
    disk_class = True

    def __init__(self, dataset: Dataset, node_capacity: int | None = None, seed: int = 0, **kw):
        super().__init__(dataset, **kw)
        self._setup_pivots()
        if node_capacity is None:
            node_capacity = max(MIN_CAPACITY, self.page_size // self._entry_bytes())
        if node_capacity < 2:
            raise ValueError("node_capacity must be >= 2")
        self.capacity = node_capacity
        self._rng = random.Random(seed)
        self._keys = itertools.count()
        self.nodes: list[MNode] = []
        self.root = self._node(leaf=True)
        for o in range(self.n):
            self._insert(o)
        del self._rng, self._keys
        self._finish_build()

    # hooks overridden by PM-tree -------------------------------------------
    pivot_ids: tuple[int, ...] = ()

    def _setup_pivots(self):
        pass

    def _phi(self, o):
        return None

    def _entry_bytes(self) -> int:
        return self.object_bytes + ID_BYTES + 2 * DIST_BYTES

    # build -----------------------------------------------------------------
    def _node(self, leaf) -> MNode:
        node = MNode(next(self._keys), leaf)
        self.nodes.append(node)
        return node

    def _insert(self, o):
        phi = self._phi(o)
        node = self.root
        d_parent = math.inf
        while not node.leaf:
            best = None
            for e in node.entries:
                d = self.bd(o, e.obj)
                key = (max(0.0, d - e.radius), d)
                if best is None or key < best[0]:
                    best = (key, e, d)
            _, e, d = best
            if d > e.radius:
                e.radius = d
            if e.hr is not None:
                e.hr.add_point(phi)
            node, d_parent = e.child, d
        node.entries.append(Entry(o, d_parent, phi=phi))
        while len(node.entries) > self.capacity:
            node = self._split(node)

    def _split(self, node: MNode) -> MNode:
        """Split an overflowing node in two; returns the parent (which may now overflow)."""
        entries = node.entries
        m = len(entries)
        memo: dict[tuple[int, int], float] = {}

        def dd(i, j):
            if i == j:
                return 0.0
            key = (min(i, j), max(i, j))
            if key not in memo:
                memo[key] = self.bd(entries[i].obj, entries[j].obj)
            return memo[key]

        pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
        if len(pairs) > SPLIT_PAIR_SAMPLES:
            pairs = self._rng.sample(pairs, SPLIT_PAIR_SAMPLES)
        best = None
        for a, b in pairs:
            sides = self._distribute(entries, a, b, dd)
            cost = max(sides[0][1], sides[1][1])
            if best is None or cost < best[0]:
                best = (cost, a, b, sides)
        _, a, b, sides = best

        other = self._node(node.leaf)
        halves = (node, other)
        promoted = (entries[a], entries[b])
        routing = []
        for half, (members, radius), pro in zip(halves, sides, promoted):
            half.entries = []
            for idx, d in members:
                e = entries[idx]
                e.pd = d
                if e.child is not None:
                    e.child.parent = half
                half.entries.append(e)
            for e in half.entries:
                if e.child is not None:
                    e.child.parent_entry = e
            routing.append(Entry(pro.obj, math.inf, radius, half, hr=self._node_box(half)))

        parent = node.parent
        if parent is None:
            root = self._node(leaf=False)
            root.entries = routing
            self.root = root
            parent = root
        else:
            old = node.parent_entry
            pos = parent.entries.index(old)
            parent.entries[pos:pos + 1] = routing
            grand = parent.parent_entry.obj if parent.parent_entry is not None else None
            for r_e in routing:
                r_e.pd = self.bd(r_e.obj, grand) if grand is not None else math.inf
        for r_e, half in zip(routing, halves):
            half.parent = parent
            half.parent_entry = r_e
        return parent

    def _distribute(self, entries, a, b, dd):
        """Assign every entry to the nearer promoted object; promoted stay on their side."""
        out = [[], []]
        radii = [0.0, 0.0]
        for i, e in enumerate(entries):
            if i == a:
                s = 0
            elif i == b:
                s = 1
            else:
                s = gh_assign([dd(i, a), dd(i, b)])
            d = dd(i, (a, b)[s])
            out[s].append((i, d))
            radii[s] = max(radii[s], d + e.radius)
        return (out[0], radii[0]), (out[1], radii[1])

    def _node_box(self, node: MNode):
        return None

    # layout ----------------------------------------------------------------
    def node_sizes(self):
        header = ID_BYTES + 1
        for node in self.nodes:
            size = header + len(node.entries) * self._entry_bytes()
            yield node.key, size

    def stored_ids(self):
        return [e.obj for node in self.nodes if node.leaf for e in node.entries]

    def height(self) -> int:
        h, node = 1, self.root
        while not node.leaf:
            node = node.entries[0].child
            h += 1
        return h

    # search ----------------------------------------------------------------
    def _query_pivots(self, ctx):
        return None

    def _entry_lb(self, e, qp):
        return 0.0

    def _entry_ub(self, e, qp):
        return math.inf

    def _range(self, ctx, r, exact):
        qp = self._query_pivots(ctx)
        hits = []
        stack = [(self.root, None)]
        while stack:
            node, d_par = stack.pop()
            ctx.touch(node.key)
            for e in node.entries:
                if d_par is not None and clearly_gt(abs(d_par - e.pd) - e.radius, r):
                    continue
                if clearly_gt(self._entry_lb(e, qp), r):
                    continue
                if node.leaf:
                    if not exact and e.obj not in ctx.cache:
                        ub = self._entry_ub(e, qp)
                        if clearly_le(ub, r):
                            hits.append(Hit(e.obj, ub, False))
                            continue
                    d = ctx.d(e.obj)
                    if d <= r:
                        hits.append(Hit(e.obj, d))
                    continue
                d = ctx.d(e.obj)
                if clearly_gt(d - e.radius, r):
                    continue
                if not exact and clearly_le(d + e.radius, r):
                    for o in _leaf_ids(e.child):
                        hits.append(Hit(o, ctx.cache[o]) if o in ctx.cache else Hit(o, d + e.radius, False))
                    continue
                stack.append((e.child, d))
        return hits

    def _knn(self, ctx, heap):
        qp = self._query_pivots(ctx)
        tie = itertools.count()
        pq = [(0.0, next(tie), self.root, None)]
        while pq:
            lb, _, node, d_par = heapq.heappop(pq)
            if clearly_gt(lb, heap.radius):
                break
            ctx.touch(node.key)
            for e in node.entries:
                if d_par is not None and clearly_gt(abs(d_par - e.pd) - e.radius, heap.radius):
                    continue
                elb = self._entry_lb(e, qp)
                if clearly_gt(elb, heap.radius):
                    continue
                d = ctx.d(e.obj)
                if node.leaf:
                    heap.push(e.obj, d)
                    continue
                clb = max(lb, elb, d - e.radius)
                if not clearly_gt(clb, heap.radius):
                    heapq.heappush(pq, (clb, next(tie), e.child, d))

    # audit -----------------------------------------------------------------
    def audit(self):
        super().audit()
        dist, objs = self.raw_dist, self.objects
        stack = [(self.root, None)]
        while stack:
            node, parent_obj = stack.pop()
            assert len(node.entries) <= self.capacity, "overflow"
            for e in node.entries:
                want = math.inf if parent_obj is None else dist(objs[e.obj], objs[parent_obj])
                assert e.pd == want, "parent distance"
                if not node.leaf:
                    assert e.child.parent is node and e.child.parent_entry is e, "parent links"
                    for o in _leaf_ids(e.child):
                        assert dist(objs[o], objs[e.obj]) <= e.radius, "covering radius"
                    stack.append((e.child, e.obj))
            self._audit_pivots(node)

    def _audit_pivots(self, node):
        pass


def _leaf_ids(node: MNode) -> list[int]:
    out, stack = [], [node]
    while stack:
        nd = stack.pop()
        if nd.leaf:
            out.extend(e.obj for e in nd.entries)
        else:
            stack.extend(e.child for e in nd.entries)
    return out


class PMTree(MTree):
    """M-tree whose leaf entries keep phi(o) and routing entries keep the
    bounding box (hyper-ring per pivot) of their subtree's images."""

    kind = "pmtree"

    def __init__(self, dataset: Dataset, pivots: PivotSet, node_capacity: int | None = None, seed: int = 0, **kw):
        self.pivot_set = pivots
        self.pivot_ids = tuple(pivots.ids)
        super().__init__(dataset, node_capacity=node_capacity, seed=seed, **kw)

    def _setup_pivots(self):
        self._l = len(self.pivot_ids)

    def _entry_bytes(self) -> int:
        return super()._entry_bytes() + 2 * self._l * DIST_BYTES

    def _phi(self, o):
        return tuple(self.bd(o, p) for p in self.pivot_ids)

    def _node_box(self, node: MNode):
        if node.leaf:
            return IntervalBox.of([e.phi for e in node.entries])
        box = node.entries[0].hr.copy()
        for e in node.entries[1:]:
            box.add_box(e.hr)
        return box

    def _query_pivots(self, ctx):
        return tuple(ctx.d(p) for p in self.pivot_ids)

    def _entry_lb(self, e, qp):
        return pivot_lower_bound(e.phi if e.hr is None else e.hr, qp)

    def _entry_ub(self, e, qp):
        return min(a + b for a, b in zip(e.phi, qp))

    def _audit_pivots(self, node):
        dist, objs = self.raw_dist, self.objects
        for e in node.entries:
            if node.leaf:
                assert e.phi == tuple(dist(objs[e.obj], objs[p]) for p in self.pivot_ids), "leaf phi"
            else:
                phis = [tuple(dist(objs[o], objs[p]) for p in self.pivot_ids) for o in _leaf_ids(e.child)]
                box = IntervalBox.of(phis)
                assert (list(e.hr.lows), list(e.hr.highs)) == (list(box.lows), list(box.highs)), "hyper-ring box"
