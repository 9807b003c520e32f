from __future__ import annotations

import logging
from fractions import Fraction
from itertools import combinations_with_replacement
from math import comb

import pytest

from phylotope import hilbert
from phylotope.abelian import automorphisms
from phylotope.errors import BudgetExceededError, MismatchError, StructuralError
from phylotope.hilbert import (
    FiberCountTable,
    ehrhart_interpolate,
    ehrhart_polynomial,
    fiber_table,
    hilbert_value,
    multiset_count,
)
from phylotope.model import vertex_matrix
from phylotope.settings import RuntimeContext, RuntimeSettings
from phylotope.tree import EdgeRef, caterpillar, snowflake


def brute_force_count(tree, group, n):
    rows = [tuple(int(v) for v in row) for row in vertex_matrix(tree, group)]
    sums = set()
    for choice in combinations_with_replacement(rows, n):
        sums.add(tuple(map(sum, zip(*choice))) if choice else ())
    return len(sums)


def test_three_leaf_kimura_values(three_leaf, kimura):
    assert [hilbert_value(three_leaf, kimura, n) for n in range(3)] == [1, 16, 124]


def test_pair_sums_agree_with_brute_force(three_leaf, kimura, quartet, z2):
    assert brute_force_count(three_leaf, kimura, 2) == 124
    assert hilbert_value(quartet, z2, 3) == brute_force_count(quartet, z2, 3)
    assert hilbert_value(quartet, kimura, 2) == brute_force_count(quartet, kimura, 2)


def test_three_leaf_binary_is_a_simplex(three_leaf, z2):
    # four affinely independent vertices: every multiset gives a distinct sum
    for n in range(1, 6):
        assert hilbert_value(three_leaf, z2, n) == comb(n + 3, 3)


def test_values_increase_with_n(quartet, kimura):
    values = [hilbert_value(quartet, kimura, n) for n in range(4)]
    assert values == sorted(set(values))


def test_labeling_invariance(quartet, kimura):
    base = [hilbert_value(quartet, kimura, n) for n in range(1, 4)]
    relabeled = quartet.relabel({1: 3, 3: 1, 2: 4, 4: 2})
    assert [hilbert_value(relabeled, kimura, n) for n in range(1, 4)] == base
    for root in (1, 2, 3):
        assert [hilbert_value(quartet.reroot(root), kimura, n) for n in range(1, 4)] == base


def test_thread_count_does_not_change_counts(quartet, kimura):
    threaded = RuntimeContext(RuntimeSettings(threads=4, use_cache=False, memory_cap_bytes=1024**2))
    for n in range(1, 4):
        assert hilbert_value(quartet, kimura, n, threaded) == hilbert_value(quartet, kimura, n)


def test_multiset_cap(three_leaf, kimura):
    capped = RuntimeContext(RuntimeSettings(multiset_cap=10, use_cache=False))
    assert multiset_count(16, 2) == 136
    with pytest.raises(BudgetExceededError) as excinfo:
        hilbert_value(three_leaf, kimura, 2, capped)
    assert excinfo.value.resource == "multisets"
    assert "plan" in str(excinfo.value)


def test_dilation_range(three_leaf, kimura):
    with pytest.raises(ValueError):
        hilbert_value(three_leaf, kimura, -1)
    with pytest.raises(ValueError):
        hilbert_value(three_leaf, kimura, 256)


def test_fiber_table_totals_match_hilbert_value(three_leaf, kimura):
    table = fiber_table(three_leaf, kimura, 2, [EdgeRef.of([1]), three_leaf.root_edge])
    assert table.sockets == ("e{1}", "e{1,2}")
    assert table.total() == 124
    assert all(sum(u) == 2 for key in table.cells for u in key)


def test_root_edge_fibers_at_degree_one(three_leaf, kimura):
    table = fiber_table(three_leaf, kimura, 1, [three_leaf.root_edge])
    assert table.cells == {
        ((1, 0, 0, 0),): 4,
        ((0, 1, 0, 0),): 4,
        ((0, 0, 1, 0),): 4,
        ((0, 0, 0, 1),): 4,
    }


def test_marginal_sums_out_sockets(quartet, kimura):
    both = fiber_table(quartet, kimura, 2, [EdgeRef.of([3]), quartet.root_edge])
    single = fiber_table(quartet, kimura, 2, [quartet.root_edge])
    assert both.marginal(["e{1,2,3}"]).cells == single.cells
    assert both.marginal([]).cells == {(): hilbert_value(quartet, kimura, 2)}


def test_automorphisms_fix_fiber_tables(quartet, kimura):
    table = fiber_table(quartet, kimura, 2, [EdgeRef.of([1]), EdgeRef.of([3])])
    for permutation in automorphisms(kimura):
        assert table.permuted(permutation) == table


def test_sockets_must_be_distinct_pendant_edges(quartet, kimura):
    with pytest.raises(StructuralError):
        fiber_table(quartet, kimura, 1, [EdgeRef.of([1, 2])])
    with pytest.raises(StructuralError):
        fiber_table(quartet, kimura, 1, [EdgeRef.of([1]), EdgeRef.of([1])])


def test_table_json_keeps_exact_counts(three_leaf, kimura):
    table = fiber_table(three_leaf, kimura, 2, [three_leaf.root_edge])
    text = table.to_json()
    assert '"count": "' in text
    assert FiberCountTable.from_json(text) == table


def test_table_validation():
    with pytest.raises(MismatchError):
        FiberCountTable("t", "Z2", 2, ("a",), {((1, 0),): 3})
    with pytest.raises(MismatchError):
        FiberCountTable("t", "Z2", 1, ("a",), {((1, 0),): 0})


def test_interpolation_examples():
    assert ehrhart_interpolate([(0, 1), (1, 2), (2, 3)], 1).coefficients == (1, 1)
    square = ehrhart_interpolate([(0, 1), (1, 4), (2, 9), (3, 16)], 2)
    assert square.coefficients == (1, 2, 1)
    assert square.value(10) == 121
    assert str(square) == "1*n^2 + 2*n + 1"


def test_interpolation_errors():
    with pytest.raises(ValueError):
        ehrhart_interpolate([(0, 1), (1, 4)], 2)
    with pytest.raises(MismatchError):
        ehrhart_interpolate([(0, 1), (1, 2), (2, 4)], 1)


def test_ehrhart_polynomial_of_binary_three_leaf(three_leaf, z2):
    polynomial, values = ehrhart_polynomial(three_leaf, z2, extra_checks=2)
    assert polynomial.coefficients == (1, Fraction(11, 6), 1, Fraction(1, 6))
    assert values == [(n, comb(n + 3, 3)) for n in range(6)]


def test_shape_independence_for_binary_model(z2):
    snow = snowflake()
    for n in range(1, 4):
        assert hilbert_value(caterpillar(6), z2, n) == hilbert_value(snow, z2, n)


def test_leaf_edge_fibers_of_the_quartet(quartet, kimura):
    table = fiber_table(quartet, kimura, 1, [EdgeRef.of([1])])
    assert len(table.cells) == 4
    assert set(table.cells.values()) == {16}


SIX_OR_FEWER = [pytest.param(caterpillar(5), id="caterpillar5"), pytest.param(caterpillar(6), id="caterpillar6"),
                pytest.param(snowflake(), id="snowflake")]


@pytest.mark.parametrize("tree", SIX_OR_FEWER)
def test_automorphisms_fix_fiber_tables_up_to_six_leaves(tree, kimura):
    table = fiber_table(tree, kimura, 2, [EdgeRef.of([1]), tree.root_edge])
    assert table.total() == hilbert_value(tree, kimura, 2)
    for permutation in automorphisms(kimura):
        assert table.permuted(permutation) == table


@pytest.mark.parametrize("tree", SIX_OR_FEWER)
def test_labeling_and_rerooting_invariance_up_to_six_leaves(tree, z2, kimura):
    leaves = tree.leaves
    variants = [tree.relabel(dict(zip(leaves, reversed(leaves)))), tree.reroot(1), tree.reroot(3)]
    binary = [hilbert_value(tree, z2, n) for n in range(1, 4)]
    kimura_values = [hilbert_value(tree, kimura, n) for n in range(1, 3)]
    for variant in variants:
        assert [hilbert_value(variant, z2, n) for n in range(1, 4)] == binary
        assert [hilbert_value(variant, kimura, n) for n in range(1, 3)] == kimura_values


def test_byte_packing_matches_radix_packing(quartet, kimura, monkeypatch):
    sockets = [EdgeRef.of([1]), quartet.root_edge]
    radix = [fiber_table(quartet, kimura, n, sockets) for n in range(4)]
    monkeypatch.setattr(hilbert._RadixPacking, "fits", staticmethod(lambda layout, n: False))
    packed = [fiber_table(quartet, kimura, n, sockets) for n in range(4)]
    assert [table.total() for table in packed] == [1, 64, 1936, 35200]
    assert packed == radix


def test_sums_spill_to_disk_under_a_small_memory_cap(tmp_path, kimura, caplog):
    spill_dir = tmp_path / "spill"
    small = RuntimeContext(RuntimeSettings(use_cache=False, memory_cap_bytes=1024**2, spill_dir=spill_dir))
    tree = caterpillar(6)
    sockets = [EdgeRef.of([1]), tree.root_edge]
    with caplog.at_level(logging.INFO, logger="phylotope.hilbert"):
        spilled = fiber_table(tree, kimura, 2, sockets, small)
    assert "spilled to disk" in caplog.text
    assert spilled.total() == 396928
    assert spilled == fiber_table(tree, kimura, 2, sockets)
    assert list(spill_dir.iterdir()) == []


def test_spilled_counts_do_not_depend_on_threads(tmp_path, kimura):
    threaded = RuntimeContext(
        RuntimeSettings(use_cache=False, memory_cap_bytes=1024**2, threads=3, spill_dir=tmp_path)
    )
    assert hilbert_value(snowflake(), kimura, 2, threaded) == 396928


def test_byte_packing_spills_too(tmp_path, quartet, kimura, monkeypatch):
    expected = fiber_table(quartet, kimura, 3, [quartet.root_edge])
    monkeypatch.setattr(hilbert._RadixPacking, "fits", staticmethod(lambda layout, n: False))
    small = RuntimeContext(RuntimeSettings(use_cache=False, memory_cap_bytes=1024**2, spill_dir=tmp_path))
    assert fiber_table(quartet, kimura, 3, [quartet.root_edge], small) == expected
