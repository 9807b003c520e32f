# where: phylotope/cache.py
# what: On-disk cache of fiber count tables keyed by (canonical tree, group, n, sockets, method).
# why: Quartet tables at n=3 are reused by every plan run; recomputing them is the slow path.

from __future__ import annotations

import hashlib
import logging
import os
import tempfile
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

from pydantic import ValidationError

if TYPE_CHECKING:
    from .hilbert import FiberCountTable

logger = logging.getLogger(__name__)


class FiberTableCache:
    def __init__(self, directory: Path | str) -> None:
        self.directory = Path(directory).expanduser()
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key(tree: str, group: str, n: int, sockets: Sequence[str], clades: Sequence[str], method: str) -> str:
        material = "\n".join([tree, group, str(n), ",".join(sockets), ",".join(clades), method])
        return hashlib.sha256(material.encode("utf-8")).hexdigest()

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(
        self, tree: str, group: str, n: int, sockets: Sequence[str], clades: Sequence[str], method: str
    ) -> "FiberCountTable | None":
        from .hilbert import FiberCountTable

        path = self._path(self.key(tree, group, n, sockets, clades, method))
        if not path.is_file():
            self.misses += 1
            logger.debug("Cache miss for %s n=%d sockets=%s", tree, n, list(sockets))
            return None
        try:
            table = FiberCountTable.from_json(path.read_text(encoding="utf-8"))
        except (OSError, ValidationError, ValueError) as exc:
            logger.warning("Ignoring unreadable cache entry %s: %s", path, exc)
            self.misses += 1
            return None
        if (table.tree, table.group, table.n, table.sockets, table.method) != (tree, group, n, tuple(sockets), method):
            logger.warning("Ignoring cache entry %s with mismatched metadata", path)
            self.misses += 1
            return None
        self.hits += 1
        logger.info("Cache hit for %s over %s n=%d sockets=%s", tree, group, n, list(sockets))
        return table

    def put(self, table: "FiberCountTable", clades: Sequence[str]) -> None:
        key = self.key(table.tree, table.group, table.n, table.sockets, clades, table.method)
        temp_path: str | None = None
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
            handle, temp_path = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
            with os.fdopen(handle, "w", encoding="utf-8") as fp:
                fp.write(table.to_json())
            os.replace(temp_path, self._path(key))
        except OSError as exc:  # pragma: no cover - read-only cache directories are tolerated
            logger.warning("Could not write cache entry for %s: %s", table.tree, exc)
            if temp_path is not None:
                Path(temp_path).unlink(missing_ok=True)
