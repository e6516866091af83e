"""Append-only line-delimited JSON logs shared by the gateway and the
benchmark harness (outcome log and mission record log)."""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any, Iterator

__all__ = ["JsonlWriter", "read_jsonl"]


class JsonlWriter:
    """One JSON document per line; appends are serialized with a lock."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def append(self, doc: dict[str, Any]) -> None:
        line = json.dumps(doc, separators=(",", ":"), ensure_ascii=False)
        with self._lock:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")


def read_jsonl(path: str | Path) -> Iterator[dict[str, Any]]:
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)
