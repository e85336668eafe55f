"""List of clusters with fixed bucket size."""

from __future__ import annotations

from dataclasses import dataclass

from ..dataset import Dataset
from ..pruning import clearly_gt, clearly_le
from ..query import Hit
from .base import DIST_BYTES, ID_BYTES, MetricIndex

DEFAULT_BUCKET_SIZE = 16


@dataclass
class ClusterBucket:
    center: int
    radius: float
    members: list[tuple[int, float]]  # (id, d(o, center)), ascending


class LC(MetricIndex):
    """Clusters are cut greedily: a center takes its `bucket_size` nearest
    remaining objects. The next center is the remaining object farthest from
    the previous one."""

    kind = "lc"
    disk_class = True

    def __init__(self, dataset: Dataset, bucket_size: int = DEFAULT_BUCKET_SIZE, **kw):
        super().__init__(dataset, **kw)
        if bucket_size < 1:
            raise ValueError("bucket_size must be >= 1")
        self.bucket_size = bucket_size
        self.clusters: list[ClusterBucket] = []
        remaining = list(range(self.n))
        center = 0
        while remaining:
            remaining.remove(center)
            scored = sorted((self.bd(o, center), o) for o in remaining)
            take, left = scored[:bucket_size], scored[bucket_size:]
            radius = take[-1][0] if take else 0.0
            self.clusters.append(ClusterBucket(center, radius, [(o, d) for d, o in take]))
            remaining = sorted(o for _, o in left)
            if left:
                top = left[-1][0]
                center = min(o for d, o in left if d == top)
        self._finish_build()

    def node_sizes(self):
        entry = self.object_bytes + ID_BYTES + DIST_BYTES
        for i, cl in enumerate(self.clusters):
            yield i, self.object_bytes + ID_BYTES + DIST_BYTES + len(cl.members) * entry

    def stored_ids(self):
        return [c.center for c in self.clusters] + [o for c in self.clusters for o, _ in c.members]

    def _range(self, ctx, r, exact):
        hits = []
        for i, cl in enumerate(self.clusters):
            ctx.touch(i)
            dc = ctx.d(cl.center)
            if dc <= r:
                hits.append(Hit(cl.center, dc))
            if cl.members and not clearly_gt(dc - cl.radius, r):
                if not exact and clearly_le(dc + cl.radius, r):
                    hits.extend(_bound(ctx, [o for o, _ in cl.members], dc + cl.radius))
                else:
                    for o, do in cl.members:
                        if clearly_gt(abs(dc - do), r):
                            continue
                        if not exact and clearly_le(do + dc, r) and o not in ctx.cache:
                            hits.append(Hit(o, dc + do, False))
                            continue
                        d = ctx.d(o)
                        if d <= r:
                            hits.append(Hit(o, d))
            # every later object lies at distance >= radius from this center
            if clearly_gt(cl.radius - dc, r):
                break
        return hits

    def _knn(self, ctx, heap):
        for i, cl in enumerate(self.clusters):
            ctx.touch(i)
            dc = ctx.d(cl.center)
            heap.push(cl.center, dc)
            if cl.members and not clearly_gt(dc - cl.radius, heap.radius):
                for o, do in cl.members:
                    if not clearly_gt(abs(dc - do), heap.radius):
                        heap.push(o, ctx.d(o))
            if clearly_gt(cl.radius - dc, heap.radius):
                break

    def audit(self):
        super().audit()
        dist, objs = self.raw_dist, self.objects
        later: set[int] = set(range(self.n))
        for cl in self.clusters:
            c = objs[cl.center]
            later.discard(cl.center)
            assert len(cl.members) <= self.bucket_size
            for o, d in cl.members:
                assert dist(objs[o], c) == d <= cl.radius, "member radius"
                later.discard(o)
            for o in later:
                assert dist(objs[o], c) >= cl.radius, "bucket holds the nearest remaining objects"


def _bound(ctx, ids, upper):
    return [Hit(o, ctx.cache[o]) if o in ctx.cache else Hit(o, upper, False) for o in ids]
