"""Monotonic run-scoped identifiers.

Counter-based so benchmark replays are byte-identical across runs while
ids stay unique within one service or harness lifetime.
"""

from __future__ import annotations

import threading

__all__ = ["IdAllocator"]


class IdAllocator:
    def __init__(self, prefix: str):
        self._prefix = prefix
        self._counter = 0
        self._lock = threading.Lock()

    def next(self) -> str:
        with self._lock:
            self._counter += 1
            return f"{self._prefix}-{self._counter:04d}"
