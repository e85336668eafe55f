from __future__ import annotations

import pickle
import random

import pytest

from conftest import METRICS, quantile_radius, random_dataset, random_queries
from metric_lab.dataset import string_dataset, vector_dataset
from metric_lab.indexes import INDEX_KINDS, build_index, choose_pivots
from metric_lab.indexes.buckets import _subtree_ids
from metric_lab.indexes.hyperplane import BST
from metric_lab.indexes.lc import LC
from metric_lab.indexes.mtree import MTree, PMTree
from metric_lab.indexes.mvpt import MVPT
from metric_lab.pruning import bps_split
from metric_lab.query import STRATEGIES, brute_force_knn, brute_force_range
from metric_lab.serialize import dumps, load_index, loads, save_index

DISK = {"lc", "mtree", "pmtree", "dindex"}


def check_range(idx, ds, q, r):
    want = brute_force_range(ds.payloads, q, r, ds.distance)
    for validate in (True, False):
        res, st = idx.range_search(q, r, validate=validate)
        assert sorted(res.ids) == sorted(want.ids), (idx.kind, validate, r)
        for h in res:
            true_d = ds.distance(q, ds.payloads[h.id])
            assert (h.distance == true_d) if h.exact else (true_d <= h.distance <= r)
        assert st.compdists <= ds.n


@pytest.mark.parametrize("metric", METRICS)
@pytest.mark.parametrize("kind", INDEX_KINDS)
def test_exact_against_brute_force(kind, metric):
    ds = random_dataset(metric, 120, seed=hash((kind, metric)) % 1000)
    idx = build_index(kind, ds, l=4, seed=1)
    idx.audit()
    for q in random_queries(ds, 4, 5):
        for frac in (0.02, 0.1, 0.4):
            check_range(idx, ds, q, quantile_radius(ds, q, frac))
        for k in (1, 7, 30):
            want = brute_force_knn(ds.payloads, q, k, ds.distance).distances
            for strategy in STRATEGIES:
                res, st = idx.knn_search(q, k, strategy=strategy)
                assert res.distances == want, (kind, strategy, k)
                assert st.compdists <= ds.n


@pytest.mark.parametrize("kind", INDEX_KINDS)
def test_dna_example(kind, dna):
    idx = build_index(kind, dna, l=2, seed=0)
    res, _ = idx.range_search("CAATCTGT", 2)
    assert {dna.payloads[i] for i in res.ids} == {"AATCTGA", "AATCTGT", "CATCTGT"}
    for strategy in STRATEGIES:
        res, _ = idx.knn_search("CAATCTGT", 2, strategy=strategy)
        assert {dna.payloads[i] for i in res.ids} == {"AATCTGT", "CATCTGT"}


@pytest.mark.parametrize("kind", INDEX_KINDS)
def test_edge_cases(kind):
    one = vector_dataset([[0.5, 0.5]], "L2")
    idx = build_index(kind, one, l=3)
    idx.audit()
    assert idx.range_search((0.5, 0.5), 0)[0].ids == [0]
    assert idx.range_search((0.9, 0.9), 0.1)[0].ids == []
    assert idx.knn_search((3, 3), 1)[0].ids == [0]

    ds = random_dataset("L1", 60, 3)
    idx = build_index(kind, ds, l=3)
    q = ds.payloads[7]
    assert 7 in idx.range_search(q, 0)[0].ids  # r = 0 finds the duplicate
    everything, _ = idx.range_search(q, 1e9)
    assert sorted(everything.ids) == list(range(60))
    res, _ = idx.knn_search(q, 60)
    assert sorted(res.ids) == list(range(60))
    with pytest.raises(ValueError):
        idx.knn_search(q, 61)


def test_duplicates_and_ties():
    ds = vector_dataset([[1, 1]] * 10 + [[2, 2]] * 5, "Linf")
    for kind in INDEX_KINDS:
        idx = build_index(kind, ds, l=2)
        idx.audit()
        res, _ = idx.knn_search((1, 1), 3)
        assert res.distances == [0, 0, 0]
        assert len(idx.range_search((1.5, 1.5), 0.5)[0]) == 15


@pytest.mark.parametrize("kind", INDEX_KINDS)
def test_no_object_verified_twice(kind):
    ds = random_dataset("L2", 150, 9)
    idx = build_index(kind, ds, l=4)
    seen = []

    def recorder(a, b):
        seen.append(id(b))  # identity: equal payloads are distinct objects
        return ds.distance(a, b)

    idx.default_r0()  # the incremental start radius samples pairs outside any query
    idx.raw_dist = recorder
    for q in random_queries(ds, 3, 9):
        for run in (lambda: idx.range_search(q, quantile_radius(ds, q, 0.2)),
                    lambda: idx.knn_search(q, 10, strategy="incremental"),
                    lambda: idx.knn_search(q, 10, strategy="seeded"),
                    lambda: idx.knn_search(q, 10)):
            seen.clear()
            _, st = run()
            assert len(seen) == len(set(seen)) == st.compdists


@pytest.mark.parametrize("kind", INDEX_KINDS)
def test_page_accesses_only_for_disk_indexes(kind):
    ds = random_dataset("L2", 200, 4)
    idx = build_index(kind, ds, l=3)
    _, st = idx.range_search(ds.payloads[0], 0.3)
    if kind in DISK:
        assert st.page_accesses >= 1
        assert st.page_accesses <= idx.pages.pages_used
    else:
        assert st.page_accesses == 0


def test_laesa_build_cost_and_rows():
    ds = random_dataset("L1", 100, 0)
    pv = choose_pivots(ds, 5, "random", 0)
    idx = build_index("laesa", ds, pivots=pv)
    assert idx.build_distance_count == 500
    assert idx.row(3) == [(p, ds.distance(ds.payloads[3], ds.payloads[p])) for p in pv.ids]


def test_bkt_uses_distance_buckets_on_strings():
    ds = string_dataset(["ACGT", "ACGA", "TTTT", "ACG", "GGGGGG", "A", "CCCC", "ACGTAC"])
    idx = build_index("bkt", ds, l=3)
    assert idx.bucket_width == 1.0
    root = idx.root
    for b, (lo, hi, child) in root.children.items():
        assert lo == hi == b  # discrete metric: one distance per branch
        for o in _subtree_ids(child):
            assert ds.distance(ds.payloads[o], ds.payloads[root.pivot]) == b


def test_fqt_identical_signatures_share_a_leaf():
    ds = vector_dataset([[0, 0], [0, 0], [1, 0], [0, 1], [5, 5]], "L1")
    pv = choose_pivots(ds, 2, "random", 1)
    idx = build_index("fqt", ds, pivots=pv, bucket_width=1.0)
    leaves = [n for n in idx.nodes if n.is_leaf and n.leaf_ids]
    assert any({0, 1} <= set(n.leaf_ids) for n in leaves)


def test_binary_mvpt_matches_direct_vantage_tree():
    rng = random.Random(0)
    xs = [rng.random() for _ in range(40)]
    ds = vector_dataset([[x] for x in xs], "L1")
    idx = MVPT(ds, arity=2, leaf_capacity=1, choose_vantage=lambda ids, rng: min(ids))

    def direct(ids):
        if len(ids) <= 1:
            return sorted(ids)
        vp = min(ids)
        scored = sorted((abs(xs[o] - xs[vp]), o) for o in ids if o != vp)
        half = len(scored) // 2
        return (vp, [direct([o for _, o in scored[:half]]), direct([o for _, o in scored[half:]])])

    def shape(node):
        if node.is_leaf:
            return sorted(node.leaf_ids)
        kids = [node.children[b][2] for b in sorted(node.children)]
        if len(kids) == 1:
            kids = [None] + kids
        return (node.pivot, [shape(k) if k is not None else [] for k in kids])

    assert shape(idx.root) == direct(list(range(40)))


def test_topdown_bst_is_not_taller_on_sorted_input():
    ds = vector_dataset([[float(i)] for i in range(64)], "L1")
    ins = BST(ds, mode="insertion")
    top = BST(ds, mode="topdown")
    assert top.kind == "bst*" and ins.kind == "bst"
    assert top.height() <= ins.height()
    ins.audit()
    top.audit()


def test_gnat_ranges_cover_subtrees():
    ds = random_dataset("L2", 150, 2)
    idx = build_index("gnat", ds, arity=4)
    node = idx.root
    for i, ci in enumerate(node.centers):
        members = [ci] + (idx.subtree_ids(node.children[i]) if node.children[i] else [])
        for j, cj in enumerate(node.centers):
            ds_ = [ds.distance(ds.payloads[o], ds.payloads[cj]) for o in members]
            assert node.ranges[i][j] == (min(ds_), max(ds_))


def test_sat_neighbors_are_closer_to_parent():
    ds = random_dataset("L1", 120, 6)
    idx = build_index("sat", ds)
    idx.audit()
    d = lambda a, b: ds.distance(ds.payloads[a], ds.payloads[b])
    stack = [idx.root]
    while stack:
        node = stack.pop()
        kids = [c.obj for c in node.children]
        for i, a in enumerate(kids):
            for b in kids[:i]:
                assert d(a, node.obj) < d(a, b)
        stack.extend(node.children)


def test_lc_single_cluster_when_bucket_holds_everything():
    ds = random_dataset("Linf", 30, 1)
    idx = LC(ds, bucket_size=100)
    assert len(idx.clusters) == 1
    assert idx.build_distance_count == 29
    idx.audit()


def test_mtree_invariants_and_small_capacity():
    ds = random_dataset("L2", 300, 5)
    idx = MTree(ds, node_capacity=4, seed=2)
    idx.audit()
    assert idx.height() >= 3
    res, _ = idx.range_search(ds.payloads[0], 0.4)
    assert sorted(res.ids) == sorted(brute_force_range(ds.payloads, ds.payloads[0], 0.4, ds.distance).ids)
    with pytest.raises(ValueError):
        MTree(ds, node_capacity=1)


def test_pmtree_never_worse_than_mtree_with_same_tree():
    ds = random_dataset("L2", 400, 8, dim=8)
    mt = MTree(ds, node_capacity=8, seed=0)
    pm = PMTree(ds, choose_pivots(ds, 4, "hfi", 0), node_capacity=8, seed=0)
    pm.audit()
    tot_m = tot_p = 0
    for q in random_queries(ds, 20, 8):
        r = quantile_radius(ds, q, 0.05)
        tot_m += mt.range_search(q, r)[1].compdists
        _, st = pm.range_search(q, r)
        tot_p += st.compdists
    assert tot_p <= tot_m


def test_dindex_levels_partition_the_data():
    ds = random_dataset("L1", 200, 3)
    idx = build_index("dindex", ds, l=3, rho=0.05)
    ids = [o for lv in idx.levels for part in lv.buckets.values() for o, _ in part]
    ids += [o for o, _ in idx.residue]
    assert sorted(ids) == list(range(200))
    for depth, lv in enumerate(idx.levels):
        for part, members in lv.buckets.items():
            for o, phi in members:
                assert bps_split(phi[depth], lv.d_med, lv.rho) == part
    with pytest.raises(ValueError):
        build_index("dindex", ds, rho=-1)


@pytest.mark.parametrize("kind", INDEX_KINDS)
def test_serialization_round_trip(kind, tmp_path):
    ds = random_dataset("Edit", 80, 2)
    idx = build_index(kind, ds, l=3)
    path = tmp_path / "idx.bin"
    save_index(idx, path)
    back = load_index(path)
    back.audit()
    q = "ACGTACG"
    assert back.range_search(q, 3)[0].ids == idx.range_search(q, 3)[0].ids
    assert back.knn_search(q, 5)[1].compdists == idx.knn_search(q, 5)[1].compdists
    assert back.build_distance_count == idx.build_distance_count


def test_serialization_rejects_garbage():
    blob = dumps(build_index("lc", random_dataset("L2", 20, 0)))
    with pytest.raises(ValueError):
        loads(b"XXXX" + blob[4:])
    with pytest.raises(ValueError):
        loads(blob[:-3])


def test_build_index_errors():
    ds = random_dataset("L2", 20, 0)
    with pytest.raises(ValueError):
        build_index("kd-tree", ds)
    with pytest.raises(ValueError):
        build_index("laesa", ds, l=0)
    with pytest.raises(ValueError):
        choose_pivots(ds, 2, "magic")
