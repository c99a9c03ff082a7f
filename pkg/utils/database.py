"""Append-only JSON-lines store for LLM sensor transcripts."""

import hashlib
import json
import logging
import os
import threading
from datetime import datetime, timezone
from typing import Dict, Optional

from config.settings import TRANSCRIPT_CACHE_PATH

logger = logging.getLogger(__name__)


def comment_key(comment: str) -> str:
    """SHA-256 hex digest of the comment text."""
    return hashlib.sha256(comment.encode("utf-8")).hexdigest()


class TranscriptCache:
    """Raw sensor responses keyed by comment hash.

    The first entry for a key wins; later appends for the same key are kept
    on disk but ignored on load.
    """

    def __init__(self, path: str = TRANSCRIPT_CACHE_PATH):
        self.path = path
        self._entries: Dict[str, str] = {}
        self._lock = threading.Lock()
        self._load()

    def _load(self):
        if not os.path.exists(self.path):
            return
        with open(self.path, "r", encoding="utf-8") as f:
            for line_number, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    entry = json.loads(line)
                    self._entries.setdefault(entry["key"], entry["response"])
                except (json.JSONDecodeError, KeyError) as e:
                    logger.warning(f"Skipping bad transcript line {line_number} in {self.path}: {e}")
        logger.info(f"Loaded {len(self._entries)} cached transcripts from {self.path}")

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, comment: str) -> bool:
        return comment_key(comment) in self._entries

    def get(self, comment: str) -> Optional[str]:
        return self._entries.get(comment_key(comment))

    def put(self, comment: str, response: str) -> None:
        key = comment_key(comment)
        with self._lock:
            if key in self._entries:
                return
            self._entries[key] = response
            directory = os.path.dirname(self.path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            entry = {
                "key": key,
                "response": response,
                "timestamp": datetime.now(timezone.utc).isoformat(),
            }
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(json.dumps(entry) + "\n")
