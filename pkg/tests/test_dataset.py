from __future__ import annotations

import numpy as np
import pytest

from metric_lab.dataset import (
    DNA_EXAMPLE,
    FREE_RANGE,
    gen_synthetic,
    load_string_file,
    load_vector_file,
    payload_size,
    sample,
    sample_ids,
    string_dataset,
    vector_dataset,
)


def test_records_are_dense_and_sized():
    ds = vector_dataset([[1, 2], [3, 4], [5, 6]], "L1")
    assert [r.id for r in ds] == [0, 1, 2]
    assert all(r.byte_size == 16 for r in ds)
    assert payload_size("") == 1
    assert payload_size("héllo") == 6


def test_dimension_and_type_checks():
    with pytest.raises(ValueError):
        vector_dataset([[1, 2], [3]], "L2")
    with pytest.raises(TypeError):
        string_dataset(["ok", 3])


def test_load_vector_file(tmp_path):
    p = tmp_path / "v.txt"
    p.write_text("# header\n1 2 3\n4,5,6\n\n7\t8 9\n")
    ds = load_vector_file(p, 3)
    assert ds.n == 3 and ds.payloads[1] == (4.0, 5.0, 6.0)


def test_load_vector_file_names_bad_line(tmp_path):
    p = tmp_path / "v.txt"
    p.write_text("1 2 3\n1 2\n")
    with pytest.raises(ValueError, match=":2:"):
        load_vector_file(p, 3)
    p.write_text("1 2 x\n")
    with pytest.raises(ValueError, match=":1:"):
        load_vector_file(p, 3)


def test_load_string_file(tmp_path):
    p = tmp_path / "w.txt"
    p.write_text("\n".join(DNA_EXAMPLE) + "\n\n")
    ds = load_string_file(p)
    assert ds.payloads == DNA_EXAMPLE
    bad = tmp_path / "bad.txt"
    bad.write_bytes(b"ok\n\xff\xfe\n")
    with pytest.raises(ValueError):
        load_string_file(bad)


def test_synthetic_shape_range_and_determinism():
    a = gen_synthetic(300, dim=20, free_dims=5, seed=4)
    b = gen_synthetic(300, dim=20, free_dims=5, seed=4)
    c = gen_synthetic(300, dim=20, free_dims=5, seed=5)
    assert a.payloads == b.payloads
    assert a.payloads != c.payloads
    arr = np.array(a.payloads)
    assert arr.shape == (300, 20)
    assert arr.min() >= FREE_RANGE[0] and arr.max() <= FREE_RANGE[1]
    assert np.all(arr == np.round(arr))
    assert a.metric.kind == "Linf" and a.metric.discrete


def test_synthetic_low_rank_structure():
    # derived coordinates are floored linear combinations of the free ones:
    # rank is free_dims up to a rounding perturbation of at most 1 per entry
    n, dim, free = 400, 20, 5
    arr = np.array(gen_synthetic(n, dim, free, seed=1).payloads, dtype=float)
    s = np.linalg.svd(arr, compute_uv=False)
    assert s[free] <= np.sqrt(n * (dim - free))
    assert s[free - 1] > 2 * np.sqrt(n * (dim - free))


def test_sampling():
    ids = sample_ids(50, 10, seed=3)
    assert ids == sample_ids(50, 10, seed=3)
    assert len(set(ids)) == 10
    ds = vector_dataset([[i] for i in range(50)], "L1")
    assert sample(ds, 10, 3).payloads == tuple((float(i),) for i in ids)
    with pytest.raises(ValueError):
        sample_ids(5, 6, 0)
