"""Content-addressed response cache: one JSON file per request digest."""

from __future__ import annotations

import json
import logging
import os
import tempfile
import threading
import weakref
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterator, Mapping

from .base import CacheKey

LOGGER = logging.getLogger(__name__)


class ResponseCache:
    """Files ``<directory>/<digest>.json`` holding ``{request, response, timestamps}``.

    Readers never block; writers of the same key are serialised and each write
    lands atomically through ``os.replace``. Entries are never evicted; a
    key lock lives only while some caller holds it.
    """

    def __init__(self, directory: str | Path | None, *, enabled: bool = True) -> None:
        self.enabled = enabled and directory is not None
        self.directory = Path(directory) if directory is not None else None
        self._locks: weakref.WeakValueDictionary[str, Any] = weakref.WeakValueDictionary()
        self._guard = threading.Lock()
        if self.enabled and self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)

    def path_for(self, key: CacheKey) -> Path:
        if self.directory is None:
            raise RuntimeError("cache has no directory")
        return self.directory / f"{key.digest}.json"

    def lock(self, key: CacheKey) -> Any:
        with self._guard:
            lock = self._locks.get(key.digest)
            if lock is None:
                lock = threading.RLock()
                self._locks[key.digest] = lock
            return lock

    @property
    def lock_count(self) -> int:
        return len(self._locks)

    def get(self, key: CacheKey) -> Mapping[str, Any] | None:
        if not self.enabled:
            return None
        path = self.path_for(key)
        try:
            entry = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            return None
        except (OSError, ValueError) as exc:
            LOGGER.warning("Ignoring unreadable cache entry %s: %s", path.name, exc)
            return None
        response = entry.get("response") if isinstance(entry, Mapping) else None
        return response if isinstance(response, Mapping) else None

    def put(self, key: CacheKey, request: Mapping[str, Any], response: Mapping[str, Any]) -> None:
        if not self.enabled:
            return
        entry = {
            "request": dict(request),
            "response": dict(response),
            "timestamps": {"stored_at": datetime.now(timezone.utc).isoformat()},
        }
        path = self.path_for(key)
        with self.lock(key):
            handle, temp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{key.digest[:12]}", suffix=".tmp")
            try:
                with os.fdopen(handle, "w", encoding="utf-8") as stream:
                    json.dump(entry, stream, ensure_ascii=False, sort_keys=True)
                os.replace(temp_name, path)
            except BaseException:
                Path(temp_name).unlink(missing_ok=True)
                raise

    def entries(self) -> Iterator[Path]:
        if self.directory is None or not self.directory.exists():
            return iter(())
        return iter(sorted(self.directory.glob("*.json")))
