"""Pivot mapping, filtering/validation predicates and partitioning primitives.

A tie at the boundary is never prunable. Bounds built from several rounded
distances can overshoot the true distance by a few ulps, so every prune or
validate decision must clear the threshold by a small relative margin
(``ROUND_SLACK``); rounding can then only cost pruning, never an answer.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Sequence

from .metrics import DistanceFn

ROUND_SLACK = 1e-9


def margin(x, y):
    """Rounding allowance for comparing x against y (works on numpy arrays)."""
    return ROUND_SLACK * (1.0 + abs(x) + abs(y))


def clearly_gt(x, y) -> bool:
    """x > y even after allowing for accumulated rounding."""
    return x - y > margin(x, y)


def clearly_le(x, y) -> bool:
    """x <= y even after allowing for accumulated rounding."""
    return y - x >= margin(x, y)


class SplitOutcome(enum.IntEnum):
    ZERO = 0
    ONE = 1
    EXCLUSION = 2


def pivot_map(o, pivots: Sequence[Any], dist: DistanceFn) -> tuple[float, ...]:
    """Image of `o` in pivot space: its distances to each pivot, in order."""
    return tuple(dist(o, p) for p in pivots)


@dataclass(frozen=True)
class SearchRegion:
    lows: tuple[float, ...]
    highs: tuple[float, ...]

    @classmethod
    def around(cls, query_coords: Sequence[float], r: float) -> "SearchRegion":
        return cls(tuple(max(0.0, c - r) for c in query_coords), tuple(c + r for c in query_coords))

    def contains(self, point: Sequence[float]) -> bool:
        return all(lo <= x <= hi for lo, x, hi in zip(self.lows, point, self.highs))


@dataclass
class IntervalBox:
    lows: list[float]
    highs: list[float]

    @classmethod
    def of(cls, points) -> "IntervalBox":
        points = list(points)
        if not points:
            raise ValueError("empty box")
        return cls([min(c) for c in zip(*points)], [max(c) for c in zip(*points)])

    def copy(self) -> "IntervalBox":
        return IntervalBox(list(self.lows), list(self.highs))

    def add_point(self, point: Sequence[float]) -> None:
        for i, x in enumerate(point):
            if x < self.lows[i]:
                self.lows[i] = x
            if x > self.highs[i]:
                self.highs[i] = x

    def add_box(self, other: "IntervalBox") -> None:
        self.add_point(other.lows)
        self.add_point(other.highs)

    def contains(self, point: Sequence[float]) -> bool:
        return all(lo <= x <= hi for lo, x, hi in zip(self.lows, point, self.highs))

    def __len__(self) -> int:
        return len(self.lows)


@dataclass(frozen=True)
class BallRegion:
    center: int
    radius: float


def pivot_lower_bound(point_or_box, query_coords: Sequence[float]) -> float:
    """L_inf gap between a mapped point (or box) and the query image."""
    best = 0.0
    if isinstance(point_or_box, IntervalBox):
        for lo, hi, q in zip(point_or_box.lows, point_or_box.highs, query_coords):
            gap = lo - q if q < lo else q - hi
            if gap > best:
                best = gap
        return best
    if len(point_or_box) != len(query_coords):
        raise ValueError("pivot count mismatch")
    for x, q in zip(point_or_box, query_coords):
        gap = x - q if x > q else q - x
        if gap > best:
            best = gap
    return best


def can_prune_by_pivots(point_or_box, query_coords: Sequence[float], r: float) -> bool:
    """True iff the point/box lies outside the query's search region."""
    if isinstance(point_or_box, IntervalBox):
        if len(point_or_box) != len(query_coords):
            raise ValueError("pivot count mismatch")
        for lo, hi, q in zip(point_or_box.lows, point_or_box.highs, query_coords):
            if clearly_gt(lo - q, r) or clearly_gt(q - hi, r):
                return True
        return False
    return clearly_gt(pivot_lower_bound(point_or_box, query_coords), r)


def can_prune_ball(dq_center: float, ball_radius: float, r: float) -> bool:
    return clearly_gt(dq_center - ball_radius, r)


def can_prune_hyperplane(dq_pi: float, dq_pj: float, r: float) -> bool:
    """Prune p_i's side when q is more than 2r closer to p_j."""
    return clearly_gt(dq_pi - dq_pj, 2 * r)


def exclusive_filter(dq_center: float, d_med: float, rho: float, r: float) -> frozenset:
    """Partitions of a rho-split that cannot hold answers.

    ONE is pruned when d(q,c) <= d_med + rho - r, ZERO when
    d(q,c) > d_med - rho + r; with r <= rho both can hold at once.
    """
    out = set()
    if clearly_le(dq_center, d_med + rho - r):
        out.add(SplitOutcome.ONE)
    if clearly_gt(dq_center, d_med - rho + r):
        out.add(SplitOutcome.ZERO)
    return frozenset(out)


def can_validate_by_pivot(d_o_pi: float, dq_pi: float, r: float) -> bool:
    return clearly_le(d_o_pi + dq_pi, r)


def can_validate_ball(dq_center: float, ball_radius: float, r: float) -> bool:
    return clearly_le(dq_center + ball_radius, r)


def exclusive_validate(dq_center: float, d_med: float, rho: float, r: float) -> SplitOutcome | None:
    """Partition guaranteed to contain every answer, if any."""
    if clearly_le(dq_center, d_med - rho - r):
        return SplitOutcome.ZERO
    if clearly_gt(dq_center, d_med + rho + r):
        return SplitOutcome.ONE
    return None


def ball_partition(objects: Sequence[Any], center, radius: float, dist: DistanceFn):
    """Split object indices into (inside, outside) of the closed ball."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    inside, outside = [], []
    for i, o in enumerate(objects):
        (inside if dist(o, center) <= radius else outside).append(i)
    return inside, outside


def gh_assign(distances: Sequence[float], delta: float = 0.0) -> int:
    """Index of the first center within `delta` of the closest one."""
    best = min(distances)
    for i, d in enumerate(distances):
        if d <= best + delta:
            return i
    raise AssertionError("unreachable")


def gh_partition(objects: Sequence[Any], centers: Sequence[Any], dist: DistanceFn, delta: float = 0.0):
    """Generalized-hyperplane partition of object indices, one list per center."""
    if not centers:
        raise ValueError("need at least one center")
    parts: list[list[int]] = [[] for _ in centers]
    for i, o in enumerate(objects):
        parts[gh_assign([dist(o, c) for c in centers], delta)].append(i)
    return parts


def bps_split(d_c_o: float, d_med: float, rho: float) -> SplitOutcome:
    if d_c_o <= d_med - rho:
        return SplitOutcome.ZERO
    if d_c_o > d_med + rho:
        return SplitOutcome.ONE
    return SplitOutcome.EXCLUSION


def bps_multi(outcomes: Sequence[SplitOutcome]) -> int:
    m = len(outcomes)
    if m < 1:
        raise ValueError("need at least one split")
    if any(o == SplitOutcome.EXCLUSION for o in outcomes):
        return 2**m
    return sum(int(o) << i for i, o in enumerate(outcomes))


def lower_median(values: Sequence[float]) -> float:
    if not values:
        raise ValueError("median of empty sequence")
    s = sorted(values)
    return s[(len(s) - 1) // 2]


def median_distance(objects: Sequence[Any], center, dist: DistanceFn) -> float:
    return lower_median([dist(o, center) for o in objects])
