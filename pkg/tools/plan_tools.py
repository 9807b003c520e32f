# where: tools/plan_tools.py
# what: Commands that count through decomposition plans: tfp, compare and reproduce.
# why: Six-leaf counts are only feasible as toric fiber products of small fiber tables.

from __future__ import annotations

import logging
from typing import Any

from phylotope.abelian import FiniteAbelianGroup
from phylotope.hilbert import hilbert_value
from phylotope.polyhedra import polyhedral_count
from phylotope.plans import load_plan
from phylotope.report import RunReport
from phylotope.tfp import DecompositionPlan, glue, plan_hilbert_value

from . import base, validators

logger = logging.getLogger(__name__)

KIMURA = FiniteAbelianGroup((2, 2))
BINARY = FiniteAbelianGroup((2,))
# Kimura 3-parameter values for the bundled six-leaf plans
EXPECTED_KIMURA = {
    1: {"caterpillar6": 1024, "snowflake6": 1024},
    2: {"caterpillar6": 396928, "snowflake6": 396928},
    3: {"caterpillar6": 69324800, "snowflake6": 69248000},
}


class TfpTool(base.BasePhylotopeTool):
    name = "tfp"
    action = "compose fiber tables along the plan"

    def _invoke(self, parameters: dict[str, Any]) -> RunReport:
        plan = load_plan(validators.require(parameters, "plan"))
        group = validators.parse_group(parameters.get("group"))
        n = validators.parse_dilation(parameters.get("n"))
        method = validators.parse_method(parameters.get("method"))
        report = self._new_report(parameters)
        with report.stage("compose"):
            value = plan_hilbert_value(plan, group, n, self.context, method)
        report.record_count("count", value)
        glued = glue(plan)
        report.details["tree"] = glued.canonical_form()
        if parameters.get("check_direct"):
            with report.stage("direct"):
                direct = hilbert_value(glued, group, n, self.context)
            report.add_check("direct count of the glued tree", direct, value)
        return report

    def _render(self, report: RunReport) -> str:
        lines = [report.counts["count"]]
        lines.extend(f"{check.name}: {'ok' if check.passed else 'MISMATCH ' + check.actual}" for check in report.checks)
        return "\n".join(lines)


class CompareTool(base.BasePhylotopeTool):
    name = "compare"
    action = "compare two trees"

    def _side(self, parameters: dict[str, Any], suffix: str, group: FiniteAbelianGroup, n: int, method: str) -> tuple[str, int]:
        plan_source = parameters.get(f"plan_{suffix}")
        if plan_source:
            plan: DecompositionPlan = load_plan(plan_source)
            return plan.name, plan_hilbert_value(plan, group, n, self.context, method)
        tree = validators.parse_tree_option(
            parameters.get(f"tree_{suffix}"), parameters.get(f"root_{suffix}"),
            require_trivalent=self.context.settings.require_trivalent,
        )
        if method == "polyhedral":
            return tree.canonical_form(), polyhedral_count(tree, group, n, self.context)
        return tree.canonical_form(), hilbert_value(tree, group, n, self.context)

    def _invoke(self, parameters: dict[str, Any]) -> RunReport:
        group = validators.parse_group(parameters.get("group"))
        n = validators.parse_dilation(parameters.get("n"))
        method = validators.parse_method(parameters.get("method"))
        report = self._new_report(parameters)
        with report.stage("a"):
            name_a, value_a = self._side(parameters, "a", group, n, method)
        with report.stage("b"):
            name_b, value_b = self._side(parameters, "b", group, n, method)
        report.record_count("a", value_a)
        report.record_count("b", value_b)
        report.details["names"] = {"a": name_a, "b": name_b}
        report.verdict = "EQUAL" if value_a == value_b else "DIFFERENT"
        return report

    def _render(self, report: RunReport) -> str:
        names = report.details["names"]
        return "\n".join([
            f"{names['a']}: {report.counts['a']}",
            f"{names['b']}: {report.counts['b']}",
            f"verdict: {report.verdict}",
        ])


class ReproduceTool(base.BasePhylotopeTool):
    """Both bundled plans for Z2xZ2 at n = 1..3 against the published values, and for Z2 at n = 1..8."""

    name = "reproduce"
    action = "reproduce the caterpillar/snowflake comparison"

    def _invoke(self, parameters: dict[str, Any]) -> RunReport:
        kimura_top = validators.parse_dilation(parameters.get("kimura_max_n", 3), name="-kimura-max-n")
        binary_top = validators.parse_dilation(parameters.get("binary_max_n", 8), name="-binary-max-n")
        report = self._new_report(parameters)
        plans = [load_plan("caterpillar6"), load_plan("snowflake6")]
        rows = []

        for n in range(1, kimura_top + 1):
            values = self._row(report, plans, KIMURA, n)
            expected = EXPECTED_KIMURA.get(n, {})
            passed = True
            for plan in plans:
                if plan.name in expected:
                    passed &= report.add_check(f"{KIMURA} n={n} {plan.name}", values[plan.name], expected[plan.name])
            rows.append(self._row_text(KIMURA, n, values, passed))

        for n in range(1, binary_top + 1):
            values = self._row(report, plans, BINARY, n)
            a, b = (values[plan.name] for plan in plans)
            passed = report.add_check(f"{BINARY} n={n} shapes agree", b, a)
            rows.append(self._row_text(BINARY, n, values, passed))

        report.details["table"] = rows
        report.verdict = "FAIL" if report.failed_checks else "PASS"
        logger.info("Reproduction finished: %s", report.verdict)
        return report

    def _row(self, report: RunReport, plans: list[DecompositionPlan], group: FiniteAbelianGroup, n: int) -> dict[str, int]:
        values = {}
        for plan in plans:
            with report.stage(f"{group} n={n} {plan.name}"):
                values[plan.name] = plan_hilbert_value(plan, group, n, self.context)
            report.record_count(f"{group} n={n} {plan.name}", values[plan.name])
        return values

    @staticmethod
    def _row_text(group: FiniteAbelianGroup, n: int, values: dict[str, int], passed: bool) -> str:
        cells = "  ".join(f"{name}={value}" for name, value in values.items())
        return f"{group} n={n}  {cells}  {'ok' if passed else 'FAIL'}"

    def _render(self, report: RunReport) -> str:
        return "\n".join(report.details["table"] + [f"verdict: {report.verdict}"])
