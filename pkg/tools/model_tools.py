# where: tools/model_tools.py
# what: The vertices and lattice commands (polytope vertices and the lattice they generate).
# why: Inspecting P_T and L_T is the first step when a count looks wrong.

from __future__ import annotations

import logging
from typing import Any

import numpy as np

from phylotope.lattice import affine_dimension, lattice_from_vertices, to_lattice_coords
from phylotope.model import CoordinateLayout, vertex_matrix
from phylotope.report import RunReport

from . import base

logger = logging.getLogger(__name__)


class VerticesTool(base.BasePhylotopeTool):
    name = "vertices"
    action = "list polytope vertices"

    def _invoke(self, parameters: dict[str, Any]) -> RunReport:
        tree, group = self._tree_and_group(parameters)
        report = self._new_report(parameters)
        with report.stage("vertices"):
            matrix = vertex_matrix(tree, group, cap=self.context.settings.vertex_cap)
        layout = CoordinateLayout(tree, group)
        report.record_count("vertices", len(matrix))
        report.add_check("distinct", len(np.unique(matrix, axis=0)), len(matrix))
        report.details["tree"] = tree.canonical_form()
        report.details["dimension"] = layout.dimension
        if parameters.get("csv"):
            report.details["columns"] = layout.describe()
            report.details["rows"] = matrix.tolist()
        return report

    def _render(self, report: RunReport) -> str:
        if "rows" not in report.details:
            return report.counts["vertices"]
        lines = [",".join(report.details["columns"])]
        lines.extend(",".join(str(value) for value in row) for row in report.details["rows"])
        return "\n".join(lines)


class LatticeTool(base.BasePhylotopeTool):
    name = "lattice"
    action = "compute the vertex lattice"

    def _invoke(self, parameters: dict[str, Any]) -> RunReport:
        tree, group = self._tree_and_group(parameters)
        report = self._new_report(parameters)
        matrix = vertex_matrix(tree, group, cap=self.context.settings.vertex_cap)
        with report.stage("hnf"):
            basis = lattice_from_vertices(matrix, f"{tree.canonical_form()} over {group}")
        members = sum(1 for row in matrix.tolist() if to_lattice_coords(basis, row) is not None)
        report.record_count("rank", basis.rank)
        report.record_count("affine_dimension", affine_dimension(matrix))
        report.add_check("vertices_in_lattice", members, len(matrix))
        report.details.update(
            tree=tree.canonical_form(), dimension=basis.dimension, pivots=list(basis.pivots),
            basis=[list(row) for row in basis.rows],
        )
        return report

    def _render(self, report: RunReport) -> str:
        lines = [
            f"rank: {report.counts['rank']}",
            f"affine_dimension: {report.counts['affine_dimension']}",
            "pivots: " + ",".join(str(col) for col in report.details["pivots"]),
        ]
        lines.extend(",".join(str(value) for value in row) for row in report.details["basis"])
        return "\n".join(lines)
