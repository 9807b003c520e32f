# where: tools/cli.py
# what: The phylotope command group: global flags, logging setup and one subcommand per tool.
# why: Scripts and CI drive every count through this surface with stable stdout and exit codes.

from __future__ import annotations

import logging
import sys
from typing import Any

import click

from phylotope.settings import RuntimeContext, RuntimeSettings

from .base import EXIT_USAGE, BasePhylotopeTool
from .count_tools import CountTool, EhrhartTool, FiberTableTool, NormalityCheckTool
from .model_tools import LatticeTool, VerticesTool
from .plan_tools import CompareTool, ReproduceTool, TfpTool

logger = logging.getLogger(__name__)

_METHOD = click.Choice(["semigroup", "polyhedral"], case_sensitive=False)


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _run(ctx: click.Context, tool_class: type[BasePhylotopeTool], parameters: dict[str, Any]) -> None:
    options = ctx.obj
    try:
        context = RuntimeContext.from_settings(RuntimeSettings.from_environment(options["overrides"]))
    except ValueError as exc:
        click.echo(f"Failed to read settings: {exc}", err=True)
        ctx.exit(EXIT_USAGE)
    tool = tool_class(context, as_json=options["as_json"], include_timings=options["timings"])
    outcome = tool.invoke(parameters)
    click.echo(outcome.text, err=outcome.report is None)
    ctx.exit(outcome.exit_code)


def _tree_options(command):
    command = click.option("--root", default=None, help="Root leaf label, or a socket name for fiber-table (default: largest label).")(command)
    command = click.option("--tree", "tree", required=True, help='Newick-like tree, e.g. "((1,2),3);".')(command)
    command = click.option("--group", required=True, help="Finite abelian group, e.g. Z2 or Z2xZ2.")(command)
    return command


@click.group()
@click.option("--json", "as_json", is_flag=True, help="Print the full run report as JSON.")
@click.option("--threads", type=int, default=None, help="Worker threads for enumeration (env PHYLOTOPE_THREADS).")
@click.option("--cache-dir", type=click.Path(file_okay=False), default=None, help="Fiber table cache directory.")
@click.option("--no-cache", is_flag=True, help="Neither read nor write cached fiber tables.")
@click.option("--no-timings", is_flag=True, help="Omit the timing block from JSON reports.")
@click.option("--require-trivalent", is_flag=True, help="Reject trees with inner vertices of degree other than 3.")
@click.option("-v", "--verbose", count=True, help="-v for progress, -vv for debug logging on stderr.")
@click.pass_context
def cli(ctx: click.Context, as_json: bool, threads: int | None, cache_dir: str | None, no_cache: bool,
        no_timings: bool, require_trivalent: bool, verbose: int) -> None:
    """Exact Hilbert and Ehrhart counts of group-based phylogenetic models."""
    configure_logging(verbose)
    overrides: dict[str, Any] = {"threads": threads, "cache_dir": cache_dir}
    if no_cache:
        overrides["use_cache"] = False
    if require_trivalent:
        overrides["require_trivalent"] = True
    ctx.obj = {"overrides": overrides, "as_json": as_json, "timings": not no_timings}


@cli.command()
@_tree_options
@click.option("--csv", "csv", is_flag=True, help="Print every vertex as a CSV row.")
@click.pass_context
def vertices(ctx: click.Context, **parameters: Any) -> None:
    """Vertices of the model polytope."""
    _run(ctx, VerticesTool, parameters)


@cli.command()
@_tree_options
@click.pass_context
def lattice(ctx: click.Context, **parameters: Any) -> None:
    """HNF basis of the lattice generated by the vertices."""
    _run(ctx, LatticeTool, parameters)


@cli.command()
@_tree_options
@click.option("-n", "n", type=int, required=True, help="Dilation / degree.")
@click.option("--method", type=_METHOD, default="semigroup")
@click.option("--points", is_flag=True, help="Print every lattice point as a CSV row (polyhedral method).")
@click.pass_context
def count(ctx: click.Context, **parameters: Any) -> None:
    """Hilbert value (semigroup) or lattice-point count (polyhedral) at degree n."""
    _run(ctx, CountTool, parameters)


@cli.command("fiber-table")
@_tree_options
@click.option("-n", "n", type=int, required=True)
@click.option("--sockets", default="", help="Comma-separated pendant edges: e{1,2}, leaf labels or socket names.")
@click.option("--method", type=_METHOD, default="semigroup")
@click.option("--output", type=click.Path(dir_okay=False), default=None, help="Also write the table JSON here.")
@click.pass_context
def fiber_table_command(ctx: click.Context, **parameters: Any) -> None:
    """Fiber count table graded by socket multidegrees."""
    _run(ctx, FiberTableTool, parameters)


@cli.command()
@click.option("--plan", required=True, help="Plan JSON file or bundled name (caterpillar6, snowflake6).")
@click.option("--group", required=True)
@click.option("-n", "n", type=int, required=True)
@click.option("--method", type=_METHOD, default="semigroup")
@click.option("--check-direct", is_flag=True, help="Also count the glued tree directly (small trees only).")
@click.pass_context
def tfp(ctx: click.Context, **parameters: Any) -> None:
    """Count the glued tree as a toric fiber product of component tables."""
    _run(ctx, TfpTool, parameters)


@cli.command()
@click.option("--plan-a", default=None)
@click.option("--plan-b", default=None)
@click.option("--tree-a", default=None)
@click.option("--root-a", default=None)
@click.option("--tree-b", default=None)
@click.option("--root-b", default=None)
@click.option("--group", required=True)
@click.option("-n", "n", type=int, required=True)
@click.option("--method", type=_METHOD, default="semigroup")
@click.pass_context
def compare(ctx: click.Context, **parameters: Any) -> None:
    """Counts of two plans or trees side by side with an EQUAL/DIFFERENT verdict."""
    for side in ("a", "b"):
        if not parameters.get(f"plan_{side}") and not parameters.get(f"tree_{side}"):
            raise click.UsageError(f"give --plan-{side} or --tree-{side}")
    _run(ctx, CompareTool, parameters)


@cli.command()
@_tree_options
@click.option("--extra-checks", type=int, default=2, help="Additional dilations that must agree with the polynomial.")
@click.pass_context
def ehrhart(ctx: click.Context, **parameters: Any) -> None:
    """Ehrhart polynomial of a small tree, interpolated from exact counts."""
    _run(ctx, EhrhartTool, parameters)


@cli.command("normality-check")
@_tree_options
@click.option("-n", "n", type=int, default=3, help="Check n = 1..N.")
@click.option("--slices", default=None, help="Also compare slice counts at this edge.")
@click.pass_context
def normality_check(ctx: click.Context, **parameters: Any) -> None:
    """Compare semigroup and polyhedral counts."""
    _run(ctx, NormalityCheckTool, parameters)


@cli.command()
@click.option("--kimura-max-n", type=int, default=3)
@click.option("--binary-max-n", type=int, default=8)
@click.pass_context
def reproduce(ctx: click.Context, **parameters: Any) -> None:
    """Caterpillar versus snowflake for Z2xZ2 (n = 1..3) and Z2 (n = 1..8)."""
    _run(ctx, ReproduceTool, parameters)


def main() -> None:
    cli(prog_name="phylotope")
