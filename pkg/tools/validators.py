# where: tools/validators.py
# what: Parsing and validation of command parameters (groups, trees, sockets, dilations, methods).
# why: Keep command tools focused on orchestrating the library calls.

from __future__ import annotations

import logging
import re
from typing import Any

from phylotope.abelian import FiniteAbelianGroup
from phylotope.errors import StructuralError
from phylotope.model import MAX_DILATION
from phylotope.tree import EdgeRef, RootedPhyloTree, parse_tree

METHODS = ("semigroup", "polyhedral")
_SOCKET_TOKEN = re.compile(r"e?\{[^}]*\}|[A-Za-z_][A-Za-z0-9_]*|\d+")

logger = logging.getLogger(__name__)


def require(parameters: dict[str, Any], name: str) -> Any:
    value = parameters.get(name)
    if value is None or (isinstance(value, str) and not value.strip()):
        raise ValueError(f"--{name.replace('_', '-')} is required")
    return value


def parse_group(raw_value: str | None) -> FiniteAbelianGroup:
    text = (raw_value or "").strip()
    if not text:
        raise ValueError("--group is required, e.g. Z2 or Z2xZ2")
    return FiniteAbelianGroup.parse(text)


def parse_tree_option(
    text: str | None,
    root: str | None = None,
    *,
    require_trivalent: bool = False,
    allow_sockets: bool = False,
) -> RootedPhyloTree:
    """Sockets only make sense on decomposition components, so plain commands reject them."""
    if not text or not text.strip():
        raise ValueError("--tree is required, e.g. \"((1,2),3);\"")
    tree = parse_tree(text, root.strip() if root else None)
    if tree.sockets and not allow_sockets:
        names = ", ".join(f"S{name}" for name in tree.sockets)
        raise StructuralError(f"socket leaves ({names}) belong in plan components, not in a standalone tree")
    if require_trivalent and not tree.is_trivalent():
        raise StructuralError(f"{tree.canonical_form()} has inner vertices of degree other than 3")
    if not tree.is_trivalent():
        logger.warning("%s is not trivalent", tree.canonical_form())
    return tree


def parse_dilation(raw_value: Any, *, name: str = "n", minimum: int = 0) -> int:
    if raw_value is None:
        raise ValueError(f"-{name} is required")
    try:
        value = int(raw_value)
    except (TypeError, ValueError):
        raise ValueError(f"-{name} must be an integer, got {raw_value!r}") from None
    if not minimum <= value <= MAX_DILATION:
        raise ValueError(f"-{name} must be between {minimum} and {MAX_DILATION}")
    return value


def parse_method(raw_value: str | None) -> str:
    method = (raw_value or "semigroup").strip().lower()
    if method not in METHODS:
        raise ValueError(f"--method must be one of {', '.join(METHODS)}")
    return method


def parse_edge(tree: RootedPhyloTree, token: str) -> EdgeRef:
    """An edge given as clade syntax e{1,2}, a leaf label, or a socket name."""
    token = token.strip()
    if token.startswith("e{") or token.startswith("{"):
        edge = EdgeRef.parse(token)
        if edge not in tree.edges:
            raise StructuralError(f"{edge} is not an edge of {tree.canonical_form()}")
        return edge
    if token.isdigit():
        return tree.leaf_edge(int(token))
    name = token[1:] if token.startswith("S") and token[1:] in tree.sockets else token
    return tree.socket_edge(name)


def parse_sockets(tree: RootedPhyloTree, raw_value: str | None) -> list[EdgeRef]:
    """Comma-separated socket edges; an empty value means no sockets."""
    text = (raw_value or "").strip()
    if not text:
        return []
    tokens = _SOCKET_TOKEN.findall(text)
    leftover = _SOCKET_TOKEN.sub("", text).replace(",", "").strip()
    if leftover:
        raise ValueError(f"could not parse --sockets {raw_value!r}")
    return [parse_edge(tree, token) for token in tokens]
