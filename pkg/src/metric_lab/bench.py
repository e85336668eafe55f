"""Benchmark runner: parameter sweeps, radius resolution and CSV/Markdown reports."""

from __future__ import annotations

import csv
import os
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import (Dataset, dna_example, gen_synthetic, load_string_file, load_vector_file,
                      vector_dataset)
from .indexes import INDEX_KINDS, build_index
from .metrics import DegenerateDistributionError
from .pages import PageModel

L_GRID = (3, 5, 10, 15, 20)
R_GRID = (2, 4, 8, 16, 32)
K_GRID = (5, 10, 20, 50, 100)
DEFAULT_L, DEFAULT_R, DEFAULT_K = 5, 8, 20
QUERIES_PER_CELL = 100
SEED_ENV = "METRIC_LAB_SEED"
CSV_COLUMNS = ("index", "dataset", "query", "param", "compdists", "pa", "time_ns")
RADIUS_MODES = ("fraction", "max")
# kinds whose structure depends on the pivot budget l
L_SENSITIVE = frozenset({"laesa", "ept", "ept*", "fqt", "pmtree", "bkt", "dindex"})


@dataclass
class ExperimentPlan:
    datasets: list[str]
    indexes: list[str]
    l_values: list[int] = field(default_factory=lambda: list(L_GRID))
    radii: list[float] = field(default_factory=lambda: list(R_GRID))
    k_values: list[int] = field(default_factory=lambda: list(K_GRID))
    default_l: int = DEFAULT_L
    default_r: float = DEFAULT_R
    default_k: int = DEFAULT_K
    queries: int = QUERIES_PER_CELL
    query_types: list[str] = field(default_factory=lambda: ["range", "knn"])
    strategy: str = "dynamic"
    radius_mode: str = "fraction"
    pivot_selector: str = "hfi"
    page_size: int = 4096
    seed: int = 0

    def __post_init__(self):
        for kind in self.indexes:
            if kind not in INDEX_KINDS:
                raise ValueError(f"unknown index kind {kind!r}")
        for q in self.query_types:
            if q not in ("range", "knn"):
                raise ValueError(f"unknown query type {q!r}")
        if self.radius_mode not in RADIUS_MODES:
            raise ValueError(f"radius_mode must be one of {RADIUS_MODES}")
        if self.queries < 0:
            raise ValueError("queries must be >= 0")


@dataclass(frozen=True)
class ReportRow:
    index: str
    dataset: str  # "<name>[<metric>]"
    query: str
    param: str
    compdists: float
    pa: float
    time_ns: int
    error: str = ""

    @property
    def metric(self) -> str:
        return self.dataset.rsplit("[", 1)[-1].rstrip("]") if "[" in self.dataset else ""


# plan files ------------------------------------------------------------------

_LIST_KEYS = {"dataset": "datasets", "index": "indexes", "l": "l_values", "radius": "radii",
              "k": "k_values", "query": "query_types"}
_SCALAR_KEYS = {"default_l": int, "default_r": float, "default_k": int, "queries": int,
                "strategy": str, "radius_mode": str, "pivot_selector": str, "page_size": int, "seed": int}
_LIST_TYPES = {"l_values": int, "radii": float, "k_values": int}


def parse_plan(text: str, env: dict | None = None) -> ExperimentPlan:
    """key=value lines; repeated keys build lists; '#' starts a comment."""
    lists: dict[str, list] = {}
    scalars: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"plan line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in _LIST_KEYS:
            name = _LIST_KEYS[key]
            lists.setdefault(name, []).append(_LIST_TYPES.get(name, str)(value))
        elif key in _SCALAR_KEYS:
            scalars[key] = _SCALAR_KEYS[key](value)
        else:
            raise ValueError(f"plan line {lineno}: unknown key {key!r}")
    if "datasets" not in lists or "indexes" not in lists:
        raise ValueError("plan needs at least one dataset= and one index= line")
    env = os.environ if env is None else env
    if env.get(SEED_ENV):
        scalars["seed"] = int(env[SEED_ENV])
    return ExperimentPlan(**lists, **scalars)


def load_plan(path) -> ExperimentPlan:
    return parse_plan(Path(path).read_text(encoding="utf-8"))


def load_dataset_spec(spec: str, seed: int = 0) -> Dataset:
    """Dataset from a short spec:

    synthetic:n=1000,dim=20,free=5  |  uniform:n=500,dim=8,kind=L2
    vectors:PATH:DIM[:KIND]         |  strings:PATH  |  dna
    """
    head, _, rest = spec.partition(":")
    if head == "dna":
        return dna_example()
    if head in ("synthetic", "uniform"):
        opts = dict(kv.split("=", 1) for kv in rest.split(",") if kv)
        n = int(opts.get("n", 1000))
        s = int(opts.get("seed", seed))
        if head == "synthetic":
            ds = gen_synthetic(n, int(opts.get("dim", 20)), int(opts.get("free", 5)), s)
            ds.name = f"synthetic-{n}"
            return ds
        rng = np.random.default_rng(s)
        dim = int(opts.get("dim", 8))
        return vector_dataset(rng.random((n, dim)).tolist(), opts.get("kind", "L2"), f"uniform-{n}")
    if head == "vectors":
        parts = rest.split(":")
        if len(parts) < 2:
            raise ValueError("vectors spec needs PATH:DIM")
        return load_vector_file(parts[0], int(parts[1]), parts[2] if len(parts) > 2 else "L2")
    if head == "strings":
        return load_string_file(rest)
    raise ValueError(f"unknown dataset spec {spec!r}")


# radius ----------------------------------------------------------------------

def resolve_radius(dataset: Dataset, percent: float, sample_pairs: int = 2000, seed: int = 0,
                   queries=None, mode: str = "fraction") -> float:
    """Radius for a target selectivity.

    fraction: the percent-quantile of sampled query-to-object distances, so an
    average range query returns about percent% of the objects.
    max: percent% of the largest sampled distance.
    """
    if mode == "fraction" and not 0 < percent < 100:
        raise ValueError("percent must be in (0, 100)")
    if mode == "max" and not 0 < percent <= 100:
        raise ValueError("percent must be in (0, 100]")
    if mode not in RADIUS_MODES:
        raise ValueError(f"mode must be one of {RADIUS_MODES}")
    rng = random.Random(seed)
    dist, objs = dataset.distance, dataset.payloads
    ds = []
    for _ in range(sample_pairs):
        q = rng.choice(queries) if queries else objs[rng.randrange(dataset.n)]
        ds.append(dist(q, objs[rng.randrange(dataset.n)]))
    arr = np.asarray(ds, dtype=float)
    if arr.size == 0 or arr.min() == arr.max():
        raise DegenerateDistributionError("all sampled distances are equal")
    if mode == "max":
        return float(arr.max() * percent / 100)
    return float(np.quantile(arr, percent / 100, method="inverted_cdf"))


def charge_pages(model: PageModel, touched) -> int:
    return model.charge(touched)


# runner ----------------------------------------------------------------------

def split_queries(dataset: Dataset, count: int, seed: int):
    """Hold `count` objects out as queries; index the rest."""
    count = min(count, max(0, dataset.n - 1))
    qids = set(random.Random(seed).sample(range(dataset.n), count))
    keep = [i for i in range(dataset.n) if i not in qids]
    return dataset.subset(keep), [dataset.payloads[i] for i in sorted(qids)]


def _cells(plan: ExperimentPlan, kind: str):
    """(query type, l, r, k, label) per cell: one parameter varies, the rest stay at defaults."""
    for qt in plan.query_types:
        if kind in L_SENSITIVE:
            for l in plan.l_values:
                yield qt, l, plan.default_r, plan.default_k, f"l={l}"
        if qt == "range":
            for r in plan.radii:
                yield qt, plan.default_l, r, plan.default_k, f"r={r:g}%"
        else:
            for k in plan.k_values:
                yield qt, plan.default_l, plan.default_r, k, f"k={k}"


def run_benchmark(plan: ExperimentPlan) -> list[ReportRow]:
    rows: list[ReportRow] = []
    if plan.queries == 0:
        return rows
    for spec in plan.datasets:
        full = load_dataset_spec(spec, plan.seed)
        data, queries = split_queries(full, plan.queries, plan.seed)
        label = f"{full.name}[{full.metric.name}]"
        radius_cache: dict[float, float] = {}
        for kind in plan.indexes:
            built: dict[int, object] = {}
            for qt, l, r_pct, k, param in _cells(plan, kind):
                key = l if kind in L_SENSITIVE else plan.default_l
                try:
                    if key not in built:
                        built[key] = build_index(kind, data, l=key, seed=plan.seed,
                                                 pivot_selector=plan.pivot_selector, page_size=plan.page_size)
                    index = built[key]
                    if qt == "range" and r_pct not in radius_cache:
                        radius_cache[r_pct] = resolve_radius(data, r_pct, seed=plan.seed, queries=queries,
                                                             mode=plan.radius_mode)
                    r = radius_cache.get(r_pct)
                    k_eff = min(k, data.n)
                    stats = []
                    for q in queries:
                        if qt == "range":
                            _, st = index.range_search(q, r)
                        else:
                            _, st = index.knn_search(q, k_eff, strategy=plan.strategy)
                        stats.append(st)
                except Exception as exc:  # flag the cell, keep going
                    rows.append(ReportRow(kind, label, qt, param, float("nan"), float("nan"), -1,
                                          f"{type(exc).__name__}: {exc}"))
                    continue
                m = len(stats)
                rows.append(ReportRow(kind, label, qt, param,
                                      sum(s.compdists for s in stats) / m,
                                      sum(s.page_accesses for s in stats) / m,
                                      sum(s.elapsed_ns for s in stats) // m))
    return rows


# reports ---------------------------------------------------------------------

def emit_csv(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in rows:
            w.writerow([row.index, row.dataset, row.query, row.param,
                        repr(float(row.compdists)), repr(float(row.pa)), int(row.time_ns)])


def read_csv(path) -> list[ReportRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        return [ReportRow(r["index"], r["dataset"], r["query"], r["param"], float(r["compdists"]),
                          float(r["pa"]), int(r["time_ns"])) for r in reader]


def rank_rows(rows):
    """Per (dataset, query, param) group, ordinal ranks for each metric (1 = lowest)."""
    groups: dict[tuple, list[int]] = {}
    for i, row in enumerate(rows):
        groups.setdefault((row.dataset, row.query, row.param), []).append(i)
    ranks = [dict() for _ in rows]
    for members in groups.values():
        for col in ("compdists", "pa", "time_ns"):
            order = sorted(members, key=lambda i: (_rank_key(getattr(rows[i], col)), rows[i].index, i))
            for pos, i in enumerate(order, 1):
                ranks[i][col] = pos
    return ranks


def _rank_key(v):
    return float("inf") if v != v or v < 0 else v  # failed cells rank last


def emit_markdown(rows, path) -> None:
    if not rows:
        raise ValueError("no rows to rank")
    ranks = rank_rows(rows)
    head = "| index | dataset | query | param | compdists | rank | PA | rank | time (ns) | rank |"
    lines = [head, "|" + "---|" * 10]
    for row, rk in zip(rows, ranks):
        note = f" ({row.error})" if row.error else ""
        lines.append(f"| {row.index}{note} | {row.dataset} | {row.query} | {row.param} | {row.compdists:.1f} | "
                     f"{rk['compdists']} | {row.pa:.1f} | {rk['pa']} | {row.time_ns} | {rk['time_ns']} |")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


__all__ = ["ExperimentPlan", "ReportRow", "charge_pages", "emit_csv", "emit_markdown", "load_dataset_spec",
           "load_plan", "parse_plan", "read_csv", "rank_rows", "resolve_radius", "run_benchmark",
           "split_queries"]
