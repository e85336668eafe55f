from __future__ import annotations

import random

import pytest

from metric_lab.dataset import string_dataset, vector_dataset

METRICS = ("L1", "L2", "Linf", "Edit")
ALPHABET = "ACGT"


def random_dataset(metric: str, n: int, seed: int, dim: int = 6):
    rng = random.Random(seed)
    if metric == "Edit":
        return string_dataset(random_word(rng) for _ in range(n))
    return vector_dataset([[rng.random() for _ in range(dim)] for _ in range(n)], metric)


def random_word(rng, lo=4, hi=12):
    return "".join(rng.choice(ALPHABET) for _ in range(rng.randint(lo, hi)))


def random_queries(ds, count: int, seed: int):
    rng = random.Random(seed + 10_000)
    if ds.metric.kind == "Edit":
        return [random_word(rng) for _ in range(count)]
    return [tuple(rng.random() for _ in range(ds.metric.dim)) for _ in range(count)]


def quantile_radius(ds, q, frac: float) -> float:
    """Distance of the object at the given selectivity for this query."""
    ds_sorted = sorted(ds.distance(q, o) for o in ds.payloads)
    return ds_sorted[min(len(ds_sorted) - 1, int(frac * len(ds_sorted)))]


@pytest.fixture
def dna():
    from metric_lab.dataset import dna_example
    return dna_example()


# acceptance criteria record a verdict here; printed at the end of the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for num in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[num])
