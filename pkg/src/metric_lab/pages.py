"""Simulated page model: nodes packed into fixed-size pages in build order."""

from __future__ import annotations

import math
from typing import Hashable, Iterable

DEFAULT_PAGE_SIZE = 4096


class UnplacedNodeError(KeyError):
    pass


class PageModel:
    def __init__(self, page_size: int = DEFAULT_PAGE_SIZE):
        if page_size < 1:
            raise ValueError("page size must be positive")
        self.page_size = page_size
        self.placement: dict[Hashable, range] = {}
        self.pages_used = 0
        self._free = 0  # bytes left on the last page

    def place(self, nodes: Iterable[tuple[Hashable, int]]) -> None:
        """Place (node, nbytes) pairs in order. Small nodes share the current
        page when they fit; larger ones start on fresh pages."""
        ps = self.page_size
        for key, nbytes in nodes:
            nbytes = max(1, int(nbytes))
            if nbytes <= self._free:
                self.placement[key] = range(self.pages_used - 1, self.pages_used)
                self._free -= nbytes
                continue
            span = math.ceil(nbytes / ps)
            self.placement[key] = range(self.pages_used, self.pages_used + span)
            self.pages_used += span
            self._free = span * ps - nbytes if span == 1 else 0

    def charge(self, touched: Iterable[Hashable]) -> int:
        pages: set[int] = set()
        for key in touched:
            try:
                pages.update(self.placement[key])
            except KeyError:
                raise UnplacedNodeError(key) from None
        return len(pages)
