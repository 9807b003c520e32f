# where: tools/count_tools.py
# what: Direct counting commands on one tree: count, fiber-table, ehrhart and normality-check.
# why: These are the desk-scale entry points; six-leaf counts go through the plan commands.

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

from phylotope.hilbert import ehrhart_polynomial, fiber_table, hilbert_value
from phylotope.model import CoordinateLayout
from phylotope.polyhedra import lattice_points, polyhedral_count, polyhedral_fiber_table, slice_counts
from phylotope.report import RunReport

from . import base, validators

logger = logging.getLogger(__name__)


class CountTool(base.BasePhylotopeTool):
    name = "count"
    action = "count lattice points"

    def _invoke(self, parameters: dict[str, Any]) -> RunReport:
        tree, group = self._tree_and_group(parameters)
        n = validators.parse_dilation(parameters.get("n"))
        method = validators.parse_method(parameters.get("method"))
        with_points = bool(parameters.get("points"))
        if with_points and method != "polyhedral":
            raise ValueError("--points lists lattice points and needs --method polyhedral")
        report = self._new_report(parameters)
        with report.stage(method):
            if with_points:
                points = lattice_points(tree, group, n, self.context)
                value = len(points)
                report.details["columns"] = CoordinateLayout(tree, group).describe()
                report.details["points"] = [list(point) for point in points]
            elif method == "semigroup":
                value = hilbert_value(tree, group, n, self.context)
            else:
                value = polyhedral_count(tree, group, n, self.context)
        report.record_count("count", value)
        report.details["tree"] = tree.canonical_form()
        return report

    def _render(self, report: RunReport) -> str:
        if "points" not in report.details:
            return super()._render(report)
        lines = [",".join(report.details["columns"])]
        lines.extend(",".join(str(value) for value in point) for point in report.details["points"])
        return "\n".join(lines)


class FiberTableTool(base.BasePhylotopeTool):
    name = "fiber-table"
    action = "build the fiber count table"

    def _invoke(self, parameters: dict[str, Any]) -> RunReport:
        tree, group = self._tree_and_group(parameters, allow_sockets=True)
        n = validators.parse_dilation(parameters.get("n"))
        method = validators.parse_method(parameters.get("method"))
        sockets = validators.parse_sockets(tree, parameters.get("sockets"))
        report = self._new_report(parameters)
        with report.stage(method):
            if method == "semigroup":
                table = fiber_table(tree, group, n, sockets, self.context)
            else:
                table = polyhedral_fiber_table(tree, group, n, sockets, self.context)
        report.record_count("total", table.total())
        report.record_count("cells", len(table.cells))
        report.details["table"] = table.to_document().model_dump(mode="json")
        output = parameters.get("output")
        if output:
            Path(output).write_text(table.to_json() + "\n", encoding="utf-8")
            logger.info("Wrote fiber table with %d cells to %s", len(table.cells), output)
        return report

    def _render(self, report: RunReport) -> str:
        return json.dumps(report.details["table"], indent=2, sort_keys=True)


class EhrhartTool(base.BasePhylotopeTool):
    name = "ehrhart"
    action = "interpolate the Ehrhart polynomial"

    def _invoke(self, parameters: dict[str, Any]) -> RunReport:
        tree, group = self._tree_and_group(parameters)
        extra = validators.parse_dilation(parameters.get("extra_checks", 2), name="-extra-checks")
        report = self._new_report(parameters)
        with report.stage("interpolate"):
            polynomial, values = ehrhart_polynomial(tree, group, self.context, extra_checks=extra)
        report.record_count("degree", polynomial.degree)
        for n, value in values:
            report.record_count(f"n={n}", value)
        report.details["polynomial"] = str(polynomial)
        report.details["coefficients"] = [str(coefficient) for coefficient in polynomial.coefficients]
        return report

    def _render(self, report: RunReport) -> str:
        return report.details["polynomial"]


class NormalityCheckTool(base.BasePhylotopeTool):
    """Semigroup counts against lattice-point counts for n = 1..N, optionally slice by slice."""

    name = "normality-check"
    action = "cross-check semigroup and polyhedral counts"

    def _invoke(self, parameters: dict[str, Any]) -> RunReport:
        tree, group = self._tree_and_group(parameters)
        top = validators.parse_dilation(parameters.get("n", 3), minimum=1)
        slice_edge = parameters.get("slices")
        edge = validators.parse_edge(tree, slice_edge) if slice_edge else None
        report = self._new_report(parameters)
        for n in range(1, top + 1):
            with report.stage(f"semigroup n={n}"):
                semigroup = hilbert_value(tree, group, n, self.context)
            with report.stage(f"polyhedral n={n}"):
                polyhedral = polyhedral_count(tree, group, n, self.context)
            report.record_count(f"semigroup n={n}", semigroup)
            report.record_count(f"polyhedral n={n}", polyhedral)
            report.add_check(f"normal at n={n}", polyhedral, semigroup)
            if edge is None:
                continue
            with report.stage(f"slices n={n}"):
                slices = slice_counts(tree, group, n, edge, self.context)
            report.add_check(f"slice partition at n={n}", sum(slices.values()), polyhedral)
            if tree.is_pendant(edge):
                table = fiber_table(tree, group, n, [edge], self.context)
                expected = {key[0]: count for key, count in table.cells.items()}
                report.add_check(f"slices match fibers at n={n}", _cells_text(slices), _cells_text(expected))
        report.verdict = "MISMATCH" if report.failed_checks else "NORMAL AT TESTED DILATIONS"
        return report

    def _render(self, report: RunReport) -> str:
        lines = [f"{check.name}: {check.actual} {'ok' if check.passed else '!= ' + str(check.expected)}" for check in report.checks]
        lines.append(f"verdict: {report.verdict}")
        return "\n".join(lines)


def _cells_text(cells: dict[tuple[int, ...], int]) -> str:
    return ";".join(f"{','.join(map(str, key))}={count}" for key, count in sorted(cells.items()))
