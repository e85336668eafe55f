"""Pivot selection (random, HF, HFI, PSA, EPT groups) and the EPT cost models."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .dataset import Dataset, sample_ids
from .metrics import DistanceFn

HF_ANCHOR_SAMPLE = 32
DEFAULT_CP_SCALE = 40


@dataclass(frozen=True)
class PivotSet:
    ids: tuple[int, ...]
    objects: tuple[Any, ...]

    @classmethod
    def from_ids(cls, dataset: Dataset, ids: Sequence[int]) -> "PivotSet":
        ids = tuple(int(i) for i in ids)
        if len(set(ids)) != len(ids):
            raise ValueError("pivots must be distinct")
        return cls(ids, tuple(dataset.payloads[i] for i in ids))

    @property
    def l(self) -> int:
        return len(self.ids)

    def __len__(self) -> int:
        return len(self.ids)


@dataclass
class PivotGroupTable:
    """Per-object pivot assignment: row o, slot j -> (pivot index, distance).

    `pivot_ids` lists every pivot the table can reference (dataset ids);
    `slots[o, j]` indexes into it and `dists[o, j]` is the stored distance.
    """

    pivot_ids: tuple[int, ...]
    slots: np.ndarray
    dists: np.ndarray
    groups: tuple[tuple[int, ...], ...] | None = None

    @property
    def l(self) -> int:
        return self.slots.shape[1]

    @property
    def n(self) -> int:
        return self.slots.shape[0]

    def row(self, o: int) -> list[tuple[int, float]]:
        return [(self.pivot_ids[s], float(d)) for s, d in zip(self.slots[o], self.dists[o])]


def _dist(dataset: Dataset, dist: DistanceFn | None) -> DistanceFn:
    return dist if dist is not None else dataset.distance


def select_random(dataset: Dataset, l: int, seed: int) -> PivotSet:
    if l < 1:
        raise ValueError("l must be >= 1")
    if l > dataset.n:
        raise ValueError(f"cannot pick {l} pivots from {dataset.n} objects")
    return PivotSet.from_ids(dataset, sample_ids(dataset.n, l, seed))


def hf_anchor(objects: Sequence[Any], dist: DistanceFn, seed: int = 0) -> int:
    """Object with the least total distance to a small seeded sample."""
    n = len(objects)
    probe = sample_ids(n, min(n, HF_ANCHOR_SAMPLE), seed)
    best, best_sum = 0, float("inf")
    for i in range(n):
        s = sum(dist(objects[i], objects[j]) for j in probe)
        if s < best_sum:
            best, best_sum = i, s
    return best


def farthest_first(objects: Sequence[Any], count: int, dist: DistanceFn, start: int) -> tuple[list[int], list[list[float]]]:
    """Greedy max-min traversal seeded with the object farthest from `start`.

    Returns chosen indices and, per chosen index, its distances to every object.
    """
    n = len(objects)
    to_start = [dist(objects[start], o) for o in objects]
    first = max(range(n), key=lambda i: (to_start[i], -i))
    chosen = [first]
    rows = [to_start if first == start else [dist(objects[first], o) for o in objects]]
    mind = list(rows[0])
    taken = [False] * n
    taken[first] = True
    while len(chosen) < count:
        nxt = -1
        for i in range(n):
            if not taken[i] and (nxt < 0 or mind[i] > mind[nxt]):
                nxt = i
        chosen.append(nxt)
        taken[nxt] = True
        row = [dist(objects[nxt], o) for o in objects]
        rows.append(row)
        mind = [min(a, b) for a, b in zip(mind, row)]
    return chosen, rows


def select_hf(dataset: Dataset, count: int, dist: DistanceFn | None = None, seed: int = 0) -> PivotSet:
    """HF outliers: farthest-first traversal from an anchor object."""
    if count < 1 or count > dataset.n:
        raise ValueError(f"cannot pick {count} pivots from {dataset.n} objects")
    dist = _dist(dataset, dist)
    anchor = hf_anchor(dataset.payloads, dist, seed)
    chosen, _ = farthest_first(dataset.payloads, count, dist, anchor)
    return PivotSet.from_ids(dataset, chosen)


def _pair_matrix(dataset: Dataset, ids: Sequence[int], dist: DistanceFn) -> np.ndarray:
    objs = dataset.payloads
    m = len(ids)
    out = np.zeros((m, m))
    for a in range(m):
        for b in range(a + 1, m):
            out[a, b] = out[b, a] = dist(objs[ids[a]], objs[ids[b]])
    return out


def hfi_objective(pivot_rows: np.ndarray, pair_d: np.ndarray) -> float:
    """Mean over sampled pairs with d > 0 of max_i |d(x,p_i) - d(y,p_i)| / d(x,y).

    `pivot_rows` has shape (l, m): distances from each pivot to m sample objects.
    """
    iu = np.triu_indices(pair_d.shape[0], 1)
    d = pair_d[iu]
    keep = d > 0
    if not keep.any():
        return 0.0
    if pivot_rows.shape[0] == 0:
        return 0.0
    lb = np.abs(pivot_rows[:, iu[0]] - pivot_rows[:, iu[1]]).max(axis=0)
    return float((lb[keep] / d[keep]).mean())


def select_hfi(dataset: Dataset, l: int, candidate_count: int = DEFAULT_CP_SCALE, sample_size: int = 64,
               seed: int = 0, dist: DistanceFn | None = None) -> PivotSet:
    """Greedy pick of HF candidates maximising pivot-space / metric-space distance ratio."""
    if not 1 <= l <= candidate_count <= dataset.n:
        raise ValueError("need 1 <= l <= candidate_count <= n")
    dist = _dist(dataset, dist)
    cands = select_hf(dataset, candidate_count, dist, seed).ids
    if l == candidate_count:
        return PivotSet.from_ids(dataset, cands)
    sids = sample_ids(dataset.n, min(sample_size, dataset.n), seed + 1)
    pair_d = _pair_matrix(dataset, sids, dist)
    objs = dataset.payloads
    cand_rows = np.array([[dist(objs[c], objs[s]) for s in sids] for c in cands])
    iu = np.triu_indices(len(sids), 1)
    d = pair_d[iu]
    keep = d > 0
    diffs = np.abs(cand_rows[:, iu[0]] - cand_rows[:, iu[1]])[:, keep] / d[keep]
    current = np.zeros(diffs.shape[1])
    chosen: list[int] = []
    for _ in range(l):
        best, best_val = -1, -1.0
        for c in range(len(cands)):
            if c in chosen:
                continue
            val = np.maximum(current, diffs[c]).mean() if diffs.shape[1] else 0.0
            if val > best_val:
                best, best_val = c, val
        chosen.append(best)
        current = np.maximum(current, diffs[best])
    return PivotSet.from_ids(dataset, [cands[c] for c in chosen])


def select_psa(dataset: Dataset, l: int, cp_scale: int = DEFAULT_CP_SCALE, sample_size: int = 64,
               seed: int = 0, dist: DistanceFn | None = None) -> PivotGroupTable:
    """Per-object greedy pivot choice from HF candidates (EPT* construction).

    For each object o the pivot added next maximises
    sum over sample s of D(s, o) / d(s, o), D being the pivot-space L_inf
    distance under the pivots chosen so far; pairs with d(s, o) = 0 are skipped.
    """
    if not 1 <= l <= cp_scale <= dataset.n:
        raise ValueError("need 1 <= l <= cp_scale <= n")
    if sample_size < 1:
        raise ValueError("empty sample")
    dist = _dist(dataset, dist)
    objs = dataset.payloads
    cands = select_hf(dataset, cp_scale, dist, seed).ids
    sids = sample_ids(dataset.n, min(sample_size, dataset.n), seed + 1)
    # distances object -> candidate, sample -> candidate, sample -> object
    obj_cp = np.array([[dist(o, objs[c]) for c in cands] for o in objs])
    s_cp = obj_cp[sids]
    s_obj = np.array([[dist(objs[s], o) for o in objs] for s in sids])
    slots = np.empty((dataset.n, l), dtype=np.int64)
    for o in range(dataset.n):
        d_so = s_obj[:, o]
        keep = d_so > 0
        gain = np.abs(s_cp[keep] - obj_cp[o]) / d_so[keep, None]  # (|S'|, cp)
        current = np.zeros(gain.shape[0])
        used = np.zeros(len(cands), dtype=bool)
        for j in range(l):
            score = np.maximum(current[:, None], gain).sum(axis=0)
            score[used] = -np.inf
            best = int(np.argmax(score))  # first max -> lowest candidate index
            slots[o, j] = best
            used[best] = True
            current = np.maximum(current, gain[:, best])
    dists = np.take_along_axis(obj_cp, slots, axis=1)
    return PivotGroupTable(tuple(cands), slots, dists)


def build_ept_groups(dataset: Dataset, l: int, g: int, seed: int = 0, dist: DistanceFn | None = None) -> PivotGroupTable:
    """l random groups of g pivots; each object keeps the pivot of each group
    whose distance deviates most from that pivot's mean distance."""
    if l < 1 or g < 1:
        raise ValueError("l and g must be >= 1")
    if g * l > dataset.n:
        raise ValueError("need g * l <= n")
    dist = _dist(dataset, dist)
    objs = dataset.payloads
    pivot_ids = tuple(sample_ids(dataset.n, g * l, seed))
    full = np.array([[dist(o, objs[p]) for p in pivot_ids] for o in objs])
    mu = full.mean(axis=0)
    dev = np.abs(full - mu)
    slots = np.empty((dataset.n, l), dtype=np.int64)
    for j in range(l):
        block = dev[:, j * g:(j + 1) * g]
        slots[:, j] = j * g + np.argmax(block, axis=1)
    dists = np.take_along_axis(full, slots, axis=1)
    groups = tuple(pivot_ids[j * g:(j + 1) * g] for j in range(l))
    return PivotGroupTable(pivot_ids, slots, dists, groups)


@dataclass(frozen=True)
class CostModelInputs:
    g: int
    l: int
    n: int
    sigma_x2: float
    sigma_y2: float
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("r must be > 0")


def est_cost_lower_bound(inputs: CostModelInputs) -> float:
    """g*l + n * (1 - (sx2 + sy2) / r^2)^l with the base clamped to [0, 1]."""
    base = 1.0 - (inputs.sigma_x2 + inputs.sigma_y2) / (inputs.r * inputs.r)
    base = min(1.0, max(0.0, base))
    return inputs.g * inputs.l + inputs.n * base ** inputs.l


def est_cost_empirical(table: PivotGroupTable, query_pivot_dists: Sequence[Sequence[float]], r: float) -> float:
    """g*l + n * fraction of (query, object) pairs left unpruned by the table.

    `query_pivot_dists[i][s]` is d(q_i, pivot_ids[s]).
    """
    qs = np.asarray(query_pivot_dists, dtype=float)
    if qs.ndim != 2 or qs.shape[0] == 0:
        raise ValueError("need a nonempty sample of queries")
    unpruned = 0
    for qrow in qs:
        lb = np.abs(table.dists - qrow[table.slots]).max(axis=1)
        unpruned += int((lb <= r).sum())
    return len(table.pivot_ids) + table.n * unpruned / (qs.shape[0] * table.n)
