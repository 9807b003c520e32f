from __future__ import annotations

import pytest
from click.testing import CliRunner

from phylotope.hilbert import hilbert_value
from phylotope.plans import load_plan
from phylotope.polyhedra import polyhedral_count
from phylotope.tfp import DecompositionPlan, plan_hilbert_value
from phylotope.tree import EdgeRef, caterpillar
from tools.cli import cli

pytestmark = pytest.mark.slow


def test_caterpillar_and_snowflake_differ_at_degree_three(cached_context, kimura):
    assert plan_hilbert_value(load_plan("caterpillar6"), kimura, 3, cached_context) == 69324800
    assert plan_hilbert_value(load_plan("snowflake6"), kimura, 3, cached_context) == 69248000


@pytest.mark.parametrize("n", range(1, 9))
def test_binary_shapes_agree(z2, n):
    assert plan_hilbert_value(load_plan("caterpillar6"), z2, n) == plan_hilbert_value(load_plan("snowflake6"), z2, n)


@pytest.mark.parametrize("n", range(1, 6))
def test_split_oracle_on_a_caterpillar(z2, n):
    tree = caterpillar(5)
    plan = DecompositionPlan.from_split(tree, EdgeRef.of([1, 2]))
    assert plan_hilbert_value(plan, z2, n) == hilbert_value(tree, z2, n)


@pytest.mark.parametrize("n", range(1, 6))
def test_quartet_split_oracle(quartet, z2, kimura, n):
    plan = DecompositionPlan.from_split(quartet, EdgeRef.of([1, 2]))
    assert plan_hilbert_value(plan, z2, n) == hilbert_value(quartet, z2, n)
    assert plan_hilbert_value(plan, kimura, n) == hilbert_value(quartet, kimura, n)


def test_binary_quartet_is_normal_at_small_degrees(quartet, z2):
    for n in range(1, 4):
        assert polyhedral_count(quartet, z2, n) == hilbert_value(quartet, z2, n)


def test_kimura_three_leaf_is_normal_at_small_degrees(three_leaf, kimura):
    assert [polyhedral_count(three_leaf, kimura, n) for n in (1, 2, 3)] == [
        hilbert_value(three_leaf, kimura, n) for n in (1, 2, 3)
    ]


def test_compare_command_separates_the_shapes(tmp_path):
    result = CliRunner().invoke(cli, [
        "--cache-dir", str(tmp_path), "compare", "--plan-a", "caterpillar6.json", "--plan-b", "snowflake6.json",
        "--group", "Z2xZ2", "-n", "3",
    ])
    assert result.exit_code == 0, result.output
    assert result.output.strip().splitlines() == ["caterpillar6: 69324800", "snowflake6: 69248000", "verdict: DIFFERENT"]


def test_reproduce_command_passes(tmp_path):
    result = CliRunner().invoke(cli, ["--cache-dir", str(tmp_path), "reproduce"])
    assert result.exit_code == 0, result.output
    assert result.output.strip().endswith("verdict: PASS")
