"""Content-addressed cache for provider responses.

Keys are SHA-256 digests of the canonical JSON serialization of
(capability, model name, request payload), so semantically identical
requests share an entry regardless of payload key order. One
human-inspectable JSON file per digest; corrupt entries are evicted and
treated as misses.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

logger = logging.getLogger(__name__)


def canonical_json(payload: object) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def request_digest(capability: str, model_name: str, payload: object) -> str:
    """Stable hex digest identifying one provider request."""
    body = canonical_json(
        {"capability": capability, "model_name": model_name, "payload": payload}
    )
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


class ResponseCache:
    """One file per digest under ``cache_dir``; concurrent reads, serialized
    writes. Identical digests imply identical payloads, so last-writer-wins
    conflicts cannot produce divergent entries."""

    def __init__(self, cache_dir: str | Path) -> None:
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()

    def _entry_path(self, digest: str) -> Path:
        return self.cache_dir / f"{digest}.json"

    def lookup(self, digest: str) -> Optional[str]:
        """Return the cached raw response, or None on miss.

        A corrupt entry is evicted, logged, and reported as a miss.
        """
        path = self._entry_path(digest)
        if not path.exists():
            return None
        try:
            entry = json.loads(path.read_text())
            response = entry["response"]
            if not isinstance(response, str):
                raise TypeError("response must be a string")
            return response
        except (json.JSONDecodeError, KeyError, TypeError, OSError) as exc:
            logger.warning("evicting corrupt cache entry %s: %s", path.name, exc)
            path.unlink(missing_ok=True)
            return None

    def store(self, digest: str, request: object, response: str) -> None:
        entry = {
            "digest": digest,
            "request": request,
            "response": response,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        path = self._entry_path(digest)
        tmp = path.with_suffix(".tmp")
        with self._write_lock:
            tmp.write_text(json.dumps(entry, sort_keys=True, indent=2))
            tmp.replace(path)
