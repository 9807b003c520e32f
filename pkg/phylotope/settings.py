# where: phylotope/settings.py
# what: Validated runtime settings (caps, threads, cache) and the context handed to library calls.
# why: Every entry point reads the same limits instead of re-parsing flags and environment.

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Any, Mapping

from pydantic import BaseModel, ConfigDict, Field, ValidationError

if TYPE_CHECKING:
    from .cache import FiberTableCache

logger = logging.getLogger(__name__)

DEFAULT_CACHE_DIR = ".phylotope-cache"
DEFAULT_VERTEX_CAP = 2**20
DEFAULT_MULTISET_CAP = 10**8
DEFAULT_MEMORY_CAP = 8 * 1024**3
DEFAULT_NODE_CAP = 10**8

# environment variable -> settings field
_ENVIRONMENT_FIELDS = {
    "PHYLOTOPE_CACHE_DIR": "cache_dir",
    "PHYLOTOPE_THREADS": "threads",
    "PHYLOTOPE_VERTEX_CAP": "vertex_cap",
    "PHYLOTOPE_MULTISET_CAP": "multiset_cap",
    "PHYLOTOPE_MEMORY_CAP": "memory_cap_bytes",
    "PHYLOTOPE_NODE_CAP": "node_cap",
    "PHYLOTOPE_SPILL_DIR": "spill_dir",
}


class RuntimeSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    threads: int = Field(default=1, ge=1, le=256)
    vertex_cap: int = Field(default=DEFAULT_VERTEX_CAP, ge=1)
    multiset_cap: int = Field(default=DEFAULT_MULTISET_CAP, ge=1)
    memory_cap_bytes: int = Field(default=DEFAULT_MEMORY_CAP, ge=1024**2)
    node_cap: int = Field(default=DEFAULT_NODE_CAP, ge=1)
    cache_dir: Path = Path(DEFAULT_CACHE_DIR)
    spill_dir: Path | None = None  # system temp directory when unset
    use_cache: bool = True
    require_trivalent: bool = False

    @classmethod
    def from_environment(
        cls,
        overrides: Mapping[str, Any] | None = None,
        environ: Mapping[str, str] | None = None,
    ) -> "RuntimeSettings":
        """Build settings from defaults, then environment, then explicit overrides."""

        environ = os.environ if environ is None else environ
        values: dict[str, Any] = {}
        for variable, field in _ENVIRONMENT_FIELDS.items():
            raw = (environ.get(variable) or "").strip()
            if raw:
                values[field] = raw
                logger.debug("Setting %s from %s", field, variable)

        for key, value in (overrides or {}).items():
            if value is not None:
                values[key] = value

        try:
            return cls(**values)
        except ValidationError as exc:
            problems = []
            reverse = {field: variable for variable, field in _ENVIRONMENT_FIELDS.items()}
            for error in exc.errors():
                field = str(error["loc"][0]) if error["loc"] else "?"
                source = reverse.get(field, field)
                problems.append(f"{source}: {error['msg']}")
            raise ValueError("invalid runtime settings: " + "; ".join(problems)) from exc


@dataclass(frozen=True, slots=True)
class RuntimeContext:
    settings: RuntimeSettings
    cache: "FiberTableCache | None" = None

    @classmethod
    def from_settings(cls, settings: RuntimeSettings) -> "RuntimeContext":
        from .cache import FiberTableCache

        cache = FiberTableCache(settings.cache_dir) if settings.use_cache else None
        return cls(settings=settings, cache=cache)

    @classmethod
    def default(cls) -> "RuntimeContext":
        """A cache-less context with default caps, for library use and tests."""
        return cls(settings=RuntimeSettings(use_cache=False))
