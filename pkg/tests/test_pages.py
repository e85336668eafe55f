from __future__ import annotations

import pytest

from metric_lab.pages import PageModel, UnplacedNodeError


def test_small_node_takes_one_page():
    pm = PageModel()
    pm.place([("a", 100)])
    assert pm.charge(["a"]) == 1


def test_large_node_spans_pages():
    pm = PageModel()
    pm.place([("a", 10 * 1024)])
    assert pm.charge(["a"]) == 3


def test_shared_page_counted_once():
    pm = PageModel(4096)
    pm.place([("a", 1000), ("b", 1000), ("c", 3000)])
    assert pm.charge(["a", "b"]) == 1
    assert pm.charge(["a", "c"]) == 2
    assert pm.pages_used == 2


def test_unplaced_and_bad_size():
    pm = PageModel()
    with pytest.raises(UnplacedNodeError):
        pm.charge(["zz"])
    with pytest.raises(ValueError):
        PageModel(0)
