from __future__ import annotations

import math

import numpy as np
import pytest

from metric_lab.bench import (
    CSV_COLUMNS,
    SEED_ENV,
    ReportRow,
    emit_csv,
    emit_markdown,
    load_dataset_spec,
    parse_plan,
    rank_rows,
    read_csv,
    resolve_radius,
    run_benchmark,
    split_queries,
)
from metric_lab.dataset import vector_dataset
from metric_lab.metrics import DegenerateDistributionError

SMALL = """
# tiny sweep
dataset = uniform:n=150,dim=4,kind=L1
dataset = dna
index = laesa
index = mtree
l = 2
l = 3
radius = 4
radius = 16
k = 2
k = 5
queries = 4
seed = 7
"""


def test_parse_plan_lists_and_scalars():
    plan = parse_plan(SMALL, env={})
    assert plan.datasets == ["uniform:n=150,dim=4,kind=L1", "dna"]
    assert plan.indexes == ["laesa", "mtree"]
    assert plan.l_values == [2, 3] and plan.radii == [4.0, 16.0] and plan.k_values == [2, 5]
    assert plan.queries == 4 and plan.seed == 7


def test_seed_env_overrides_plan():
    assert parse_plan(SMALL, env={SEED_ENV: "11"}).seed == 11


@pytest.mark.parametrize("text", [
    "index = laesa",  # no dataset
    "dataset = dna\nindex = kd",  # unknown kind
    "dataset = dna\nindex = lc\nbogus = 1",
    "dataset = dna\nindex = lc\njust a line",
    "dataset = dna\nindex = lc\nradius_mode = median",
])
def test_bad_plans(text):
    with pytest.raises(ValueError):
        parse_plan(text, env={})


def test_dataset_specs(tmp_path):
    assert load_dataset_spec("dna").n == 5
    ds = load_dataset_spec("synthetic:n=50,dim=6,free=2", seed=1)
    assert ds.n == 50 and ds.metric.dim == 6
    p = tmp_path / "v.txt"
    p.write_text("1 2\n3 4\n")
    assert load_dataset_spec(f"vectors:{p}:2:Linf").metric.kind == "Linf"
    with pytest.raises(ValueError):
        load_dataset_spec("parquet:x")


def test_resolve_radius_hits_target_selectivity():
    rng = np.random.default_rng(0)
    ds = vector_dataset(rng.random((2000, 3)).tolist(), "L2")
    queries = rng.random((50, 3)).tolist()
    for pct in (2, 8, 32):
        r = resolve_radius(ds, pct, sample_pairs=20000, seed=1, queries=[tuple(q) for q in queries])
        arr = np.array(ds.payloads)
        sel = np.mean([(np.sqrt(((arr - q) ** 2).sum(1)) <= r).mean() for q in queries])
        assert abs(100 * sel - pct) <= 2


def test_resolve_radius_modes_and_errors():
    ds = vector_dataset([[float(i)] for i in range(11)], "L1")
    top = resolve_radius(ds, 100, sample_pairs=3000, mode="max")
    assert top == 10
    assert resolve_radius(ds, 50, sample_pairs=3000, mode="max") == 5
    with pytest.raises(ValueError):
        resolve_radius(ds, 0)
    with pytest.raises(ValueError):
        resolve_radius(ds, 100)
    with pytest.raises(DegenerateDistributionError):
        resolve_radius(vector_dataset([[1.0]] * 5, "L1"), 10)


def test_split_queries_are_held_out():
    ds = load_dataset_spec("uniform:n=40,dim=2")
    data, qs = split_queries(ds, 5, seed=3)
    assert data.n == 35 and len(qs) == 5
    assert not set(qs) & set(data.payloads)


def test_run_benchmark_rows_and_determinism(tmp_path):
    plan = parse_plan(SMALL, env={})
    rows = run_benchmark(plan)
    # per dataset: laesa has 2 l-cells + 2 radii + 2 l-cells + 2 k; mtree has 2 radii + 2 k
    assert len(rows) == 2 * (8 + 4)
    assert all(not r.error for r in rows)
    assert {r.metric for r in rows} == {"L1", "Edit"}
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_csv(rows, a)
    emit_csv(run_benchmark(parse_plan(SMALL, env={})), b)
    strip = lambda p: [line.rsplit(",", 1)[0] for line in p.read_text().splitlines()]
    assert strip(a) == strip(b)
    back = read_csv(a)
    assert [(r.index, r.compdists, r.pa) for r in back] == [(r.index, r.compdists, r.pa) for r in rows]


def test_failed_cells_are_flagged(tmp_path):
    # every distance is zero, so no radius can be resolved for range cells
    p = tmp_path / "same.txt"
    p.write_text("1 1\n" * 20)
    plan = parse_plan(f"dataset = vectors:{p}:2\nindex = lc\nradius = 8\nk = 3\nqueries = 3", env={})
    rows = run_benchmark(plan)
    bad = [r for r in rows if r.error]
    assert [r.query for r in bad] == ["range"]
    assert math.isnan(bad[0].compdists) and bad[0].time_ns == -1
    assert "DegenerateDistributionError" in bad[0].error
    assert [r.query for r in rows if not r.error] == ["knn"]


def test_empty_plan_gives_no_rows(tmp_path):
    plan = parse_plan("dataset = dna\nindex = lc\nqueries = 0", env={})
    rows = run_benchmark(plan)
    assert rows == []
    emit_csv(rows, tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text().strip() == ",".join(CSV_COLUMNS)
    with pytest.raises(ValueError):
        emit_markdown(rows, tmp_path / "e.md")


def test_ranks_are_permutations(tmp_path):
    rows = [ReportRow("a", "d[L2]", "range", "r=8%", 10.0, 1.0, 5),
            ReportRow("b", "d[L2]", "range", "r=8%", 5.0, 1.0, 9),
            ReportRow("c", "d[L2]", "range", "r=8%", float("nan"), float("nan"), -1, "boom"),
            ReportRow("a", "d[L2]", "knn", "k=5", 3.0, 0.0, 1)]
    ranks = rank_rows(rows)
    assert [r["compdists"] for r in ranks[:3]] == [2, 1, 3]
    assert sorted(r["pa"] for r in ranks[:3]) == [1, 2, 3]
    assert ranks[3] == {"compdists": 1, "pa": 1, "time_ns": 1}
    out = tmp_path / "r.md"
    emit_markdown(rows, out)
    text = out.read_text()
    assert "boom" in text and text.count("\n") == 6


def test_read_csv_rejects_wrong_header(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_csv(p)
