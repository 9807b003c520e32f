# where: phylotope/report.py
# what: The versioned run report every command produces (inputs, timings, exact counts, checks, verdict).
# why: Scripts and CI read one stable JSON shape; counts stay lossless as decimal strings.

from __future__ import annotations

import json
import time
from contextlib import contextmanager
from typing import Any, Iterator

from pydantic import BaseModel, ConfigDict, Field, field_validator

REPORT_SCHEMA = 1


class ReportCheck(BaseModel):
    name: str
    expected: str | None = None
    actual: str
    passed: bool


class RunReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(default=REPORT_SCHEMA, alias="schema")
    command: str
    inputs: dict[str, Any] = Field(default_factory=dict)
    timings: dict[str, float] = Field(default_factory=dict)
    counts: dict[str, str] = Field(default_factory=dict)
    cache_hits: int = 0
    cache_misses: int = 0
    checks: list[ReportCheck] = Field(default_factory=list)
    verdict: str | None = None
    details: dict[str, Any] = Field(default_factory=dict)

    @field_validator("counts")
    @classmethod
    def _decimal_counts(cls, value: dict[str, str]) -> dict[str, str]:
        for name, text in value.items():
            if not text.lstrip("-").isdigit():
                raise ValueError(f"count {name!r} must be a decimal integer string, got {text!r}")
        return value

    def record_count(self, name: str, value: int) -> str:
        text = str(int(value))
        self.counts[name] = text
        return text

    def count(self, name: str) -> int:
        return int(self.counts[name])

    def add_check(self, name: str, actual: int | str, expected: int | str | None = None) -> bool:
        passed = expected is None or str(actual) == str(expected)
        self.checks.append(
            ReportCheck(name=name, expected=None if expected is None else str(expected), actual=str(actual), passed=passed)
        )
        return passed

    @property
    def failed_checks(self) -> list[ReportCheck]:
        return [check for check in self.checks if not check.passed]

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        started = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = round(time.perf_counter() - started, 6)

    def to_json(self, include_timings: bool = True) -> str:
        payload = self.model_dump(mode="json", by_alias=True)
        if not include_timings:
            payload.pop("timings")
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls.model_validate_json(text)
