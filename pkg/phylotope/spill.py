# where: phylotope/spill.py
# what: Disk-backed sorted runs and their bucketed merge for distinct-sum steps past the memory cap.
# why: Degree-n sumsets of six-leaf trees outgrow memory long before they outgrow disk.

from __future__ import annotations

import itertools
import logging
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np

logger = logging.getLogger(__name__)


class SpillArea:
    """A temporary directory created on first use and removed on close."""

    def __init__(self, parent: Path | None = None) -> None:
        self._parent = parent
        self._directory: tempfile.TemporaryDirectory | None = None
        self._names = itertools.count()

    def __enter__(self) -> "SpillArea":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    @property
    def used(self) -> bool:
        return self._directory is not None

    @property
    def path(self) -> Path:
        if self._directory is None:
            if self._parent is not None:
                self._parent.mkdir(parents=True, exist_ok=True)
            self._directory = tempfile.TemporaryDirectory(
                prefix="phylotope-spill-", dir=self._parent, ignore_cleanup_errors=True
            )
            logger.info("Spilling distinct sums under %s", self._directory.name)
        return Path(self._directory.name)

    def new_path(self, kind: str) -> Path:
        return self.path / f"{kind}-{next(self._names):06d}.npy"

    def save_run(self, values: np.ndarray) -> np.ndarray:
        """Write a sorted run and hand it back memory-mapped."""
        path = self.new_path("run")
        np.save(path, values)
        logger.debug("Spilled run of %d sums to %s", len(values), path.name)
        return np.load(path, mmap_mode="r")

    def close(self) -> None:
        if self._directory is not None:
            self._directory.cleanup()
            self._directory = None


def bucket_bounds(run: np.ndarray, packing, buckets: int, slice_rows: int) -> np.ndarray:
    """Start offsets of each bucket inside a sorted run, plus its length as the last entry."""
    edges = np.arange(buckets + 1)
    bounds = np.zeros(buckets + 1, dtype=np.int64)
    for start in range(0, len(run), slice_rows):
        ids = packing.bucket(np.asarray(run[start:start + slice_rows]), buckets)
        bounds += np.searchsorted(ids, edges, side="left")
    return bounds


def merge_runs(runs: Sequence[np.ndarray], packing, area: SpillArea, bucket_bytes: int) -> np.ndarray:
    """Union of sorted unique runs as one memory-mapped sorted array.

    Runs are cut into order-preserving buckets sized to `bucket_bytes`; each bucket is
    deduplicated in memory and appended to the output.
    """
    total_rows = sum(len(run) for run in runs)
    buckets = max(1, -(-total_rows * packing.row_bytes // bucket_bytes))
    slice_rows = max(1, bucket_bytes // (8 * max(1, packing.row_bytes)))
    bounds = [bucket_bounds(run, packing, buckets, slice_rows) for run in runs]
    merged = np.lib.format.open_memmap(
        area.new_path("merged"), mode="w+", dtype=packing.dtype, shape=(total_rows, *packing.row_shape)
    )
    filled = 0
    largest = 0
    for b in range(buckets):
        segments = [np.asarray(run[edge[b]:edge[b + 1]]) for run, edge in zip(runs, bounds) if edge[b + 1] > edge[b]]
        if not segments:
            continue
        values = packing.unique(np.concatenate(segments))
        merged[filled:filled + len(values)] = values
        filled += len(values)
        largest = max(largest, len(values))
    merged.flush()
    logger.debug(
        "Merged %d runs (%d rows) through %d buckets into %d distinct sums, largest bucket %d",
        len(runs), total_rows, buckets, filled, largest,
    )
    return merged[:filled]
