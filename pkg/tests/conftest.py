# where: tests/conftest.py
# what: Shared fixtures (groups, small trees, runtime contexts) and the slow marker.
# why: Keep individual test modules focused on behaviour.

from __future__ import annotations

import pytest

from phylotope.abelian import FiniteAbelianGroup
from phylotope.settings import RuntimeContext, RuntimeSettings
from phylotope.tree import parse_tree


def pytest_configure(config: pytest.Config) -> None:
    config.addinivalue_line("markers", "slow: six-leaf reproduction and other multi-second enumerations")


@pytest.fixture
def z2() -> FiniteAbelianGroup:
    return FiniteAbelianGroup((2,))


@pytest.fixture
def kimura() -> FiniteAbelianGroup:
    return FiniteAbelianGroup((2, 2))


@pytest.fixture
def three_leaf():
    return parse_tree("((1,2),3);", root=3)


@pytest.fixture
def quartet():
    return parse_tree("((1,2),3,4);", root=4)


@pytest.fixture
def context() -> RuntimeContext:
    return RuntimeContext.default()


@pytest.fixture
def cached_context(tmp_path) -> RuntimeContext:
    return RuntimeContext.from_settings(RuntimeSettings(cache_dir=tmp_path / "cache"))
