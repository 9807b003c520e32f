# where: tools/base.py
# what: Shared plumbing for command tools (runtime context, report rendering, error hints, exit codes).
# why: Avoid duplicated logic across the counting, lattice, plan and reproduction commands.

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, ClassVar

from phylotope.abelian import FiniteAbelianGroup
from phylotope.errors import BudgetExceededError, InfeasibleError, MismatchError, PhylotopeError, StructuralError, TreeParseError
from phylotope.report import RunReport
from phylotope.settings import RuntimeContext
from phylotope.tree import RootedPhyloTree

from . import validators

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_MISMATCH = 4


@dataclass(slots=True)
class ToolOutcome:
    text: str
    exit_code: int = EXIT_OK
    report: RunReport | None = None


class BasePhylotopeTool:
    """Base class that takes care of context handling, rendering and error reporting."""

    name: ClassVar[str] = "command"
    action: ClassVar[str] = "run the command"

    def __init__(self, context: RuntimeContext, *, as_json: bool = False, include_timings: bool = True) -> None:
        self.context = context
        self.as_json = as_json
        self.include_timings = include_timings

    def invoke(self, parameters: dict[str, Any]) -> ToolOutcome:
        try:
            report = self._invoke(parameters)
        except Exception as error:  # noqa: BLE001 - every failure becomes a hinted exit code
            return self._handle_error(error, self.action)
        cache = self.context.cache
        if cache is not None:
            report.cache_hits = cache.hits
            report.cache_misses = cache.misses
        exit_code = EXIT_MISMATCH if report.failed_checks else EXIT_OK
        text = report.to_json(self.include_timings) if self.as_json else self._render(report)
        return ToolOutcome(text=text, exit_code=exit_code, report=report)

    def _invoke(self, parameters: dict[str, Any]) -> RunReport:
        raise NotImplementedError

    def _new_report(self, parameters: dict[str, Any]) -> RunReport:
        inputs = {key: value for key, value in sorted(parameters.items()) if value is not None}
        inputs["threads"] = self.context.settings.threads
        return RunReport(command=self.name, inputs=inputs)

    def _tree_and_group(
        self, parameters: dict[str, Any], *, allow_sockets: bool = False
    ) -> tuple[RootedPhyloTree, FiniteAbelianGroup]:
        tree = validators.parse_tree_option(
            parameters.get("tree"),
            parameters.get("root"),
            require_trivalent=self.context.settings.require_trivalent,
            allow_sockets=allow_sockets,
        )
        return tree, validators.parse_group(parameters.get("group"))

    def _render(self, report: RunReport) -> str:
        """Plain output: the single count when there is one, otherwise one "name: value" line per count."""
        if len(report.counts) == 1 and not report.checks:
            return next(iter(report.counts.values()))
        return "\n".join(f"{name}: {value}" for name, value in sorted(report.counts.items()))

    # ---- Error helpers ---------------------------------------------------

    @staticmethod
    def exit_code_for(error: Exception) -> int:
        code = getattr(error, "exit_code", None)
        if isinstance(code, int):
            return code
        if isinstance(error, (ValueError, FileNotFoundError)):
            return EXIT_USAGE
        return EXIT_UNEXPECTED

    def _handle_error(self, error: Exception, action: str) -> ToolOutcome:
        exit_code = self.exit_code_for(error)
        if exit_code == EXIT_UNEXPECTED and not isinstance(error, PhylotopeError):
            logger.exception("Failed to %s: %s", action, error)
        else:
            logger.debug("Failed to %s: %s", action, error, exc_info=True)

        hints: list[str] = []
        if isinstance(error, BudgetExceededError):
            if error.resource == "multisets":
                hints.append("count larger trees through a decomposition plan: tfp --plan caterpillar6.json")
            hints.append("caps can be raised with PHYLOTOPE_VERTEX_CAP, PHYLOTOPE_MULTISET_CAP, PHYLOTOPE_MEMORY_CAP or PHYLOTOPE_NODE_CAP")
        if isinstance(error, TreeParseError):
            hints.append('trees look like "((1,2),3);" with positive integer leaves and sockets written S<name>')
        elif isinstance(error, StructuralError) and "socket" in str(error).lower():
            hints.append("sockets are pendant edges given as e{1,2}, a leaf label, or a socket name")
        if isinstance(error, MismatchError):
            hints.append("check that every table uses the same group, degree n and socket names")
        if isinstance(error, InfeasibleError):
            hints.append("the requested slice is empty for this dilation")
        if isinstance(error, FileNotFoundError):
            hints.append("bundled plans are caterpillar6.json and snowflake6.json")

        text = f"Failed to {action}: {error}"
        if hints:
            text += "\n" + "\n".join(f"Hint: {hint}" for hint in hints)
        return ToolOutcome(text=text, exit_code=exit_code)
