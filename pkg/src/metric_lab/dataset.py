"""Datasets: file loaders, the synthetic generator and seeded sampling."""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .metrics import DistanceFn, MetricDescriptor

_FIELD_SPLIT = re.compile(r"[\s,]+")

# Small DNA example used as an end-to-end anchor, edit distance.
DNA_EXAMPLE = ("ATAGCTCA", "AATCTGA", "AATCTGT", "AAAACGG", "CATCTGT")


@dataclass(frozen=True)
class ObjectRecord:
    id: int
    payload: Any
    byte_size: int


def payload_size(payload) -> int:
    if isinstance(payload, str):
        return max(1, len(payload.encode("utf-8")))
    return max(1, 8 * len(payload))


class Dataset:
    """Immutable ordered collection of objects bound to a metric."""

    def __init__(self, payloads: Sequence[Any], metric: MetricDescriptor, name: str = "dataset"):
        self.metric = metric
        self.name = name
        kind = metric.payload_kind
        items = []
        for i, p in enumerate(payloads):
            if kind == "string":
                if not isinstance(p, str):
                    raise TypeError(f"object {i}: expected a string payload")
            else:
                p = tuple(float(x) for x in p)
                if len(p) != metric.dim:
                    raise ValueError(f"object {i}: dimension {len(p)} != {metric.dim}")
            items.append(p)
        self.payloads: tuple = tuple(items)
        self.records = tuple(ObjectRecord(i, p, payload_size(p)) for i, p in enumerate(self.payloads))

    @property
    def n(self) -> int:
        return len(self.payloads)

    def __len__(self) -> int:
        return len(self.payloads)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i: int) -> ObjectRecord:
        return self.records[i]

    @property
    def distance(self) -> DistanceFn:
        return self.metric.function()

    @property
    def object_size(self) -> int:
        """Mean stored object size in bytes (at least 1)."""
        if not self.records:
            return 1
        return max(1, round(sum(r.byte_size for r in self.records) / len(self.records)))

    def subset(self, ids: Sequence[int], name: str | None = None) -> "Dataset":
        return Dataset([self.payloads[i] for i in ids], self.metric, name or self.name)

    def __repr__(self) -> str:
        return f"Dataset({self.name!r}, n={self.n}, metric={self.metric.kind})"


def vector_dataset(rows, kind: str = "L2", name: str = "vectors", discrete: bool = False) -> Dataset:
    rows = [tuple(r) for r in rows]
    dim = len(rows[0]) if rows else 1
    return Dataset(rows, MetricDescriptor(kind, "vector", dim, discrete=discrete), name)


def string_dataset(words, name: str = "strings") -> Dataset:
    return Dataset(list(words), MetricDescriptor("Edit", "string", discrete=True), name)


def dna_example() -> Dataset:
    return string_dataset(DNA_EXAMPLE, name="dna")


def load_vector_file(path, dimension: int, kind: str = "L2") -> Dataset:
    """One object per line; fields split on whitespace or commas; '#' lines skipped."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            fields = [f for f in _FIELD_SPLIT.split(text) if f]
            if len(fields) != dimension:
                raise ValueError(f"{path}:{lineno}: expected {dimension} fields, got {len(fields)}")
            try:
                rows.append(tuple(float(f) for f in fields))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric field") from None
    return Dataset(rows, MetricDescriptor(kind, "vector", dimension), Path(path).stem)


def load_string_file(path) -> Dataset:
    """One word per nonempty line, UTF-8."""
    try:
        text = Path(path).read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ValueError(f"{path}: invalid UTF-8 ({exc.reason})") from None
    words = [w.strip() for w in text.splitlines()]
    return Dataset([w for w in words if w], MetricDescriptor("Edit", "string", discrete=True), Path(path).stem)


FREE_RANGE = (0, 100)
COEF_RANGE = (1, 5)


def synthetic_coefficients(dim: int, free_dims: int, seed: int) -> np.ndarray:
    """Integer weight matrix (dim - free_dims, free_dims) for the derived coordinates."""
    rng = np.random.default_rng([seed, 1])
    return rng.integers(COEF_RANGE[0], COEF_RANGE[1] + 1, size=(dim - free_dims, free_dims))


def derive_coordinates(free: np.ndarray, coef: np.ndarray) -> np.ndarray:
    # weighted mean of the free coordinates, floored: stays integer and within FREE_RANGE
    return (free @ coef.T) // coef.sum(axis=1)


def gen_synthetic(n: int, dim: int = 20, free_dims: int = 5, seed: int = 0) -> Dataset:
    """Integer vectors: `free_dims` uniform coordinates, the rest linear combinations."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if not 1 <= free_dims <= dim:
        raise ValueError("need 1 <= free_dims <= dim")
    rng = np.random.default_rng([seed, 0])
    free = rng.integers(FREE_RANGE[0], FREE_RANGE[1] + 1, size=(n, free_dims))
    coef = synthetic_coefficients(dim, free_dims, seed)
    data = np.hstack([free, derive_coordinates(free, coef)]) if dim > free_dims else free
    metric = MetricDescriptor("Linf", "vector", dim, discrete=True, n_d=FREE_RANGE[1] - FREE_RANGE[0] + 1)
    return Dataset([tuple(row) for row in data.tolist()], metric, f"synthetic{dim}")


def sample(dataset: Dataset, k: int, seed: int) -> Dataset:
    ids = sample_ids(dataset.n, k, seed)
    return dataset.subset(ids)


def sample_ids(n: int, k: int, seed: int) -> list[int]:
    if not 0 <= k <= n:
        raise ValueError(f"cannot sample {k} of {n} objects")
    return random.Random(seed).sample(range(n), k)
