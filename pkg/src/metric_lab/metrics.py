"""Distance functions, metric-axiom checks and intrinsic dimensionality.

Every distance evaluation made while building or querying an index goes
through a :class:`CountedMetric`, so compdists figures are exact.
"""

from __future__ import annotations

import itertools
import math
import operator
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

DistanceFn = Callable[[Any, Any], float]

LP_KINDS = ("L1", "L2", "Linf")
KINDS = LP_KINDS + ("Edit",)


class DegenerateDistributionError(ValueError):
    """Raised when a distance sample has zero variance."""


@dataclass(frozen=True)
class MetricDescriptor:
    kind: str
    payload_kind: str
    dim: int | None = None
    discrete: bool = False
    n_d: float = math.inf

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.kind == "Edit" and self.payload_kind != "string":
            raise ValueError("edit distance requires string payloads")
        if self.kind in LP_KINDS and self.payload_kind != "vector":
            raise ValueError(f"{self.kind} requires real-vector payloads")
        if self.payload_kind == "vector" and (self.dim is None or self.dim < 1):
            raise ValueError("vector payloads need a dimension >= 1")
        if not self.n_d > 0:
            raise ValueError("n_d must be positive")

    @property
    def name(self) -> str:
        return self.kind

    def function(self) -> DistanceFn:
        return distance_for(self.kind)


def _check_dims(u: Sequence[float], v: Sequence[float]) -> None:
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} != {len(v)}")
    if not u:
        raise ValueError("vectors must have dimension >= 1")


def l1(u, v) -> float:
    _check_dims(u, v)
    return float(sum(map(abs, map(operator.sub, u, v))))


def l2(u, v) -> float:
    _check_dims(u, v)
    return math.dist(u, v)


def linf(u, v) -> float:
    _check_dims(u, v)
    return float(max(map(abs, map(operator.sub, u, v))))


def lp_distance(u, v, p) -> float:
    """L_p distance for p in {1, 2, inf}."""
    if p == 1:
        return l1(u, v)
    if p == 2:
        return l2(u, v)
    if p in (math.inf, "inf", "Linf"):
        return linf(u, v)
    raise ValueError(f"unsupported p: {p!r}")


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance with unit costs, two-row dynamic programme."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        append = cur.append
        for j, cb in enumerate(b, 1):
            cost = prev[j - 1] + (ca != cb)
            ins = cur[j - 1] + 1
            dele = prev[j] + 1
            if ins < cost:
                cost = ins
            if dele < cost:
                cost = dele
            append(cost)
        prev = cur
    return prev[-1]


_FUNCTIONS: dict[str, DistanceFn] = {"L1": l1, "L2": l2, "Linf": linf, "Edit": edit_distance}


def distance_for(kind: str) -> DistanceFn:
    try:
        return _FUNCTIONS[kind]
    except KeyError:
        raise ValueError(f"unknown metric kind {kind!r}") from None


class CountedMetric:
    """Wraps a distance function and counts its evaluations."""

    def __init__(self, fn: DistanceFn):
        if isinstance(fn, CountedMetric):
            fn = fn.fn
        self.fn = fn
        self.count = 0

    def __call__(self, a, b) -> float:
        self.count += 1
        return self.fn(a, b)

    def reset(self) -> None:
        self.count = 0


def intrinsic_dim(distances: Iterable[float]) -> float:
    """mu^2 / (2 sigma^2) of a distance sample, population variance."""
    arr = np.asarray(list(distances), dtype=float)
    if arr.size < 2:
        raise ValueError("need at least two distances")
    var = arr.var()
    if var == 0:
        raise DegenerateDistributionError("distances have zero variance")
    mu = arr.mean()
    return float(mu * mu / (2.0 * var))


@dataclass
class AxiomReport:
    passed: dict[str, bool] = field(default_factory=dict)
    violations: dict[str, tuple] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.passed.values())


def check_metric_axioms(dist: DistanceFn, sample: Sequence[Any]) -> AxiomReport:
    """Exhaustively check the four metric axioms over pairs/triples of `sample`.

    Each failing axiom records its first violating tuple (by index order).
    """
    if len(sample) < 3:
        raise ValueError("need at least 3 sample objects")
    m = len(sample)
    d = [[dist(sample[i], sample[j]) for j in range(m)] for i in range(m)]
    report = AxiomReport()

    def fail(axiom, witness):
        if axiom not in report.violations:
            report.violations[axiom] = witness

    for i in range(m):
        if d[i][i] != 0:
            fail("identity", (sample[i],))
        for j in range(m):
            if d[i][j] < 0:
                fail("non_negativity", (sample[i], sample[j]))
            if d[i][j] != d[j][i]:
                fail("symmetry", (sample[i], sample[j]))
            if i != j and d[i][j] == 0 and sample[i] != sample[j]:
                fail("identity", (sample[i], sample[j]))
    for i, j, k in itertools.product(range(m), repeat=3):
        if d[i][k] > d[i][j] + d[j][k]:
            fail("triangle", (sample[i], sample[j], sample[k]))
            break
    for axiom in ("symmetry", "non_negativity", "identity", "triangle"):
        report.passed[axiom] = axiom not in report.violations
    return report
