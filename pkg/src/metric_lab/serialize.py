"""Save and load built indexes.

Format: b"MIL1", a little-endian u32 payload length, then a pickle of the
index (the distance counter is rebuilt on load).
"""

from __future__ import annotations

import pickle
import struct
import sys
from pathlib import Path

MAGIC = b"MIL1"


# deep trees (e.g. insertion-built BST on sorted input) pickle recursively
_RECURSION_FLOOR = 100_000


def _deep(fn, *args):
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, _RECURSION_FLOOR))
    try:
        return fn(*args)
    finally:
        sys.setrecursionlimit(old)


def dumps(index) -> bytes:
    body = _deep(pickle.dumps, index, pickle.HIGHEST_PROTOCOL)
    return MAGIC + struct.pack("<I", len(body)) + body


def loads(blob: bytes):
    if blob[:4] != MAGIC:
        raise ValueError("not a metric_lab index file")
    (size,) = struct.unpack("<I", blob[4:8])
    body = blob[8:]
    if len(body) != size:
        raise ValueError("truncated index file")
    return _deep(pickle.loads, body)


def save_index(index, path) -> None:
    Path(path).write_bytes(dumps(index))


def load_index(path):
    return loads(Path(path).read_bytes())
