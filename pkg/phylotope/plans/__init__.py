# where: phylotope/plans/__init__.py
# what: JSON plan files (components with Newick text, root and socket map) and the bundled six-leaf plans.
# why: The caterpillar/snowflake comparison runs from data, and user plans use the same loader.

from __future__ import annotations

import logging
from importlib import resources
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..errors import StructuralError
from ..tfp import DecompositionPlan, PlanComponent
from ..tree import EdgeRef, RootedPhyloTree, parse_tree

logger = logging.getLogger(__name__)

BUNDLED_PLANS = ("caterpillar6", "snowflake6")


class PlanComponentDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = Field(min_length=1)
    newick: str = Field(min_length=1)
    root: int | str | None = None
    sockets: dict[str, int | str] = Field(default_factory=dict)


class PlanDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str | None = None
    components: list[PlanComponentDocument] = Field(min_length=1)


def _socket_target(name: str, target: int | str) -> int | EdgeRef:
    if isinstance(target, int):
        return target
    text = target.strip()
    if text.isdigit():
        return int(text)
    try:
        return EdgeRef.parse(text)
    except ValueError:
        raise StructuralError(f"socket {name!r}: {target!r} is neither a leaf label nor a clade like e{{1,2}}") from None


def _component_tree(document: PlanComponentDocument) -> RootedPhyloTree:
    if not document.sockets:
        return parse_tree(document.newick, document.root)
    tree = parse_tree(document.newick)
    tree = tree.with_sockets({name: _socket_target(name, target) for name, target in document.sockets.items()})
    return tree.reroot(document.root) if document.root is not None else tree


def plan_from_document(document: PlanDocument, default_name: str = "plan") -> DecompositionPlan:
    components = tuple(PlanComponent(c.name, _component_tree(c)) for c in document.components)
    plan = DecompositionPlan(components, name=document.name or default_name)
    free = plan.free_sockets
    if free:
        raise StructuralError(f"plan file sockets must each join two components; unmatched: {list(free)}")
    return plan


def load_plan(source: str | Path) -> DecompositionPlan:
    """Load a plan from a JSON file, or by bundled name ("caterpillar6", "snowflake6.json")."""
    path = Path(source)
    if path.is_file():
        text = path.read_text(encoding="utf-8")
        default_name = path.stem
    else:
        stem = path.name.removesuffix(".json")
        if stem not in BUNDLED_PLANS:
            raise FileNotFoundError(f"plan {str(source)!r} is neither a file nor one of {list(BUNDLED_PLANS)}")
        text = resources.files(__name__).joinpath(f"{stem}.json").read_text(encoding="utf-8")
        default_name = stem
    try:
        document = PlanDocument.model_validate_json(text)
    except ValidationError as exc:
        raise StructuralError(f"invalid plan file {source}: {exc}") from exc
    plan = plan_from_document(document, default_name)
    logger.debug("Loaded plan %s with %d components", plan.name, len(plan.components))
    return plan
