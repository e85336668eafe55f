"""Index registry: one constructor per kind, shared defaults."""

from __future__ import annotations

from ..dataset import Dataset
from ..pivots import DEFAULT_CP_SCALE, PivotSet, select_hfi, select_random
from .base import MetricIndex
from .buckets import BKT, FQT
from .dindex import DIndex
from .hyperplane import BST, GHT, GNAT
from .lc import LC
from .mtree import MTree, PMTree
from .mvpt import MVPT
from .sat import SAT
from .tables import EPT, LAESA, EPTStar

INDEX_KINDS = ("laesa", "ept", "ept*", "bkt", "fqt", "mvpt", "bst", "bst*",
               "ght", "gnat", "sat", "lc", "mtree", "pmtree", "dindex")
PIVOT_SELECTORS = ("hfi", "random")


def choose_pivots(dataset: Dataset, l: int, selector: str = "hfi", seed: int = 0) -> PivotSet:
    l = min(l, dataset.n)
    if selector == "random":
        return select_random(dataset, l, seed)
    if selector == "hfi":
        return select_hfi(dataset, l, candidate_count=max(l, min(DEFAULT_CP_SCALE, dataset.n)), seed=seed)
    raise ValueError(f"unknown pivot selector {selector!r}")


def build_index(kind: str, dataset: Dataset, l: int = 5, seed: int = 0, pivot_selector: str = "hfi",
                pivots: PivotSet | None = None, **params) -> MetricIndex:
    """Build any index by name. `l` is the pivot budget where the index uses one."""
    if kind not in INDEX_KINDS:
        raise ValueError(f"unknown index kind {kind!r}; choose from {', '.join(INDEX_KINDS)}")
    if l < 1:
        raise ValueError("l must be >= 1")

    def pv():
        return pivots if pivots is not None else choose_pivots(dataset, l, pivot_selector, seed)

    if kind == "laesa":
        return LAESA(dataset, pv(), **params)
    if kind == "ept":
        g = params.pop("g", 4)
        g = max(1, min(g, dataset.n // min(l, dataset.n)))
        return EPT(dataset, l=min(l, dataset.n), g=g, seed=seed, **params)
    if kind == "ept*":
        return EPTStar(dataset, l=l, seed=seed, **params)
    if kind == "bkt":
        return BKT(dataset, pivot_budget=params.pop("pivot_budget", l), seed=seed, **params)
    if kind == "fqt":
        return FQT(dataset, pv(), seed=seed, **params)
    if kind == "mvpt":
        return MVPT(dataset, seed=seed, **params)
    if kind == "bst":
        return BST(dataset, mode="insertion", seed=seed, **params)
    if kind == "bst*":
        return BST(dataset, mode="topdown", seed=seed, **params)
    if kind == "ght":
        return GHT(dataset, seed=seed, **params)
    if kind == "gnat":
        return GNAT(dataset, seed=seed, **params)
    if kind == "sat":
        return SAT(dataset, seed=seed, **params)
    if kind == "lc":
        return LC(dataset, **params)
    if kind == "mtree":
        return MTree(dataset, seed=seed, **params)
    if kind == "pmtree":
        return PMTree(dataset, pv(), seed=seed, **params)
    return DIndex(dataset, levels=params.pop("levels", l), seed=seed, **params)


__all__ = ["INDEX_KINDS", "PIVOT_SELECTORS", "MetricIndex", "build_index", "choose_pivots",
           "LAESA", "EPT", "EPTStar", "BKT", "FQT", "MVPT", "BST", "GHT", "GNAT", "SAT",
           "LC", "MTree", "PMTree", "DIndex"]
