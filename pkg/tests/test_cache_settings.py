from __future__ import annotations

import json
from pathlib import Path

import pytest

from phylotope.cache import FiberTableCache
from phylotope.hilbert import fiber_table
from phylotope.report import RunReport
from phylotope.settings import RuntimeContext, RuntimeSettings


def test_defaults():
    settings = RuntimeSettings()
    assert settings.threads == 1
    assert settings.use_cache
    assert settings.cache_dir == Path(".phylotope-cache")
    assert RuntimeContext.default().cache is None


def test_environment_then_overrides():
    environ = {
        "PHYLOTOPE_THREADS": "4",
        "PHYLOTOPE_NODE_CAP": "77",
        "PHYLOTOPE_CACHE_DIR": "/tmp/tables",
        "PHYLOTOPE_SPILL_DIR": "/tmp/spill",
    }
    settings = RuntimeSettings.from_environment({"threads": 2, "cache_dir": None}, environ)
    assert settings.threads == 2
    assert settings.node_cap == 77
    assert settings.cache_dir == Path("/tmp/tables")
    assert settings.spill_dir == Path("/tmp/spill")
    assert RuntimeSettings().spill_dir is None


def test_invalid_environment_names_the_variable():
    with pytest.raises(ValueError, match="PHYLOTOPE_THREADS"):
        RuntimeSettings.from_environment(environ={"PHYLOTOPE_THREADS": "many"})
    with pytest.raises(ValueError, match="PHYLOTOPE_MEMORY_CAP"):
        RuntimeSettings.from_environment(environ={"PHYLOTOPE_MEMORY_CAP": "10"})


def test_context_builds_a_cache(tmp_path):
    context = RuntimeContext.from_settings(RuntimeSettings(cache_dir=tmp_path))
    assert isinstance(context.cache, FiberTableCache)
    assert RuntimeContext.from_settings(RuntimeSettings(use_cache=False)).cache is None


def test_tables_are_reused(cached_context, three_leaf, kimura):
    sockets = [three_leaf.root_edge]
    first = fiber_table(three_leaf, kimura, 2, sockets, cached_context)
    assert (cached_context.cache.hits, cached_context.cache.misses) == (0, 1)
    second = fiber_table(three_leaf, kimura, 2, sockets, cached_context)
    assert cached_context.cache.hits == 1
    assert second == first
    assert len(list(cached_context.cache.directory.glob("*.json"))) == 1


def test_cache_keys_separate_sockets_and_methods(cached_context, three_leaf, kimura):
    fiber_table(three_leaf, kimura, 1, [three_leaf.root_edge], cached_context)
    fiber_table(three_leaf, kimura, 1, [], cached_context)
    assert cached_context.cache.misses == 2
    cache = cached_context.cache
    assert cache.key("t", "Z2", 1, ["a"], ["e{1}"], "semigroup") != cache.key("t", "Z2", 1, ["a"], ["e{1}"], "polyhedral")


def test_unreadable_entries_are_ignored(cached_context, three_leaf, kimura):
    table = fiber_table(three_leaf, kimura, 1, [three_leaf.root_edge], cached_context)
    (entry,) = cached_context.cache.directory.glob("*.json")
    entry.write_text("{not json", encoding="utf-8")
    again = fiber_table(three_leaf, kimura, 1, [three_leaf.root_edge], cached_context)
    assert again == table
    assert cached_context.cache.hits == 0


def test_report_counts_stay_exact():
    report = RunReport(command="count")
    report.record_count("count", 69324800)
    assert report.count("count") == 69324800
    assert report.add_check("agrees", 5, 5)
    assert not report.add_check("differs", 5, 6)
    assert [check.name for check in report.failed_checks] == ["differs"]
    with report.stage("work"):
        pass

    payload = json.loads(report.to_json())
    assert payload["schema"] == 1
    assert payload["counts"] == {"count": "69324800"}
    assert "work" in payload["timings"]
    assert "timings" not in json.loads(report.to_json(include_timings=False))
    assert RunReport.from_json(report.to_json()).counts == report.counts


def test_report_rejects_non_decimal_counts():
    with pytest.raises(ValueError):
        RunReport(command="count", counts={"count": "1e6"})
