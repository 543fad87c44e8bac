from __future__ import annotations

import json
import threading
from collections import OrderedDict
from hashlib import sha256
from pathlib import Path
from typing import Any, Callable, Hashable, Optional


class LRUCache:
    """Small thread-safe in-memory LRU keyed by hashable values."""

    def __init__(self, maxsize: int = 64):
        self.maxsize = maxsize
        self._data: OrderedDict[Hashable, Any] = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key: Hashable) -> Optional[Any]:
        with self._lock:
            if key not in self._data:
                self.misses += 1
                return None
            self.hits += 1
            self._data.move_to_end(key)
            return self._data[key]

    def set(self, key: Hashable, value: Any) -> None:
        with self._lock:
            self._data[key] = value
            self._data.move_to_end(key)
            overflow = len(self._data) - self.maxsize
            for _ in range(max(0, overflow)):
                # front of the ordering is the least recently touched key
                self._data.popitem(last=False)

    def get_or_set(self, key: Hashable, factory: Callable[[], Any]) -> Any:
        existing = self.get(key)
        if existing is not None:
            return existing
        value = factory()
        self.set(key, value)
        return value

    def clear(self) -> None:
        with self._lock:
            self._data.clear()

    def __len__(self) -> int:
        return len(self._data)


def digest_bytes(data: bytes) -> str:
    return "sha256:" + sha256(data).hexdigest()


def digest_file(path: Path) -> str:
    return digest_bytes(Path(path).read_bytes())


def digest_payload(payload: Any) -> str:
    """Digest of a JSON-compatible payload, independent of key order."""
    canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return digest_bytes(canonical.encode("utf-8"))


__all__ = ["LRUCache", "digest_bytes", "digest_file", "digest_payload"]
