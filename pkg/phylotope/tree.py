# where: phylotope/tree.py
# what: Rooted phylogenetic trees (root at a leaf, edges directed away), clade-addressed edges,
#       interior-edge splitting into T+ and T-, and a canonical Newick form.
# why: Every model, lattice and gluing computation is laid out by these edges.

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterable, Mapping

from .errors import StructuralError, TreeParseError

logger = logging.getLogger(__name__)

_TOKEN_PATTERN = re.compile(r"\s*(?:(?P<punct>[(),;@])|(?P<label>[A-Za-z0-9_]+))")
_EDGE_PATTERN = re.compile(r"^\s*e?\{\s*(\d+(?:\s*,\s*\d+)*)\s*\}\s*$")
_SOCKET_PREFIX = "S"


@dataclass(frozen=True, slots=True)
class EdgeRef:
    """An edge named by its clade: the set of non-root leaf labels below it."""

    clade: frozenset[int]

    def __post_init__(self) -> None:
        if not self.clade:
            raise StructuralError("an edge clade must be nonempty")

    @classmethod
    def of(cls, labels: Iterable[int]) -> "EdgeRef":
        return cls(frozenset(labels))

    @classmethod
    def parse(cls, text: str) -> "EdgeRef":
        """Parse clade syntax such as "e{1,2,3}"."""
        match = _EDGE_PATTERN.match(text)
        if not match:
            raise ValueError(f"invalid edge reference {text!r}; expected e.g. e{{1,2,3}}")
        return cls(frozenset(int(part) for part in match.group(1).split(",")))

    @property
    def sort_key(self) -> tuple[int, ...]:
        return tuple(sorted(self.clade))

    def __str__(self) -> str:
        return "e{" + ",".join(str(label) for label in self.sort_key) + "}"


@dataclass(slots=True)
class TreeGraph:
    """Undirected view of a tree; keys are arbitrary, leaves carry a label or a socket name."""

    adjacency: dict[Hashable, set[Hashable]]
    labels: dict[Hashable, int]
    socket_names: dict[Hashable, str]

    def connect(self, a: Hashable, b: Hashable) -> None:
        self.adjacency.setdefault(a, set()).add(b)
        self.adjacency.setdefault(b, set()).add(a)


class RootedPhyloTree:
    """Immutable rooted tree. Leaf vertices are their positive labels; inner vertices are negative.

    Socket leaves (named pendant edges used for gluing) are numbered after the ordinary
    leaves in socket-name order, so the numbering is reproducible.
    """

    def __init__(self, root: int, children: Mapping[int, tuple[int, ...]], sockets: Mapping[str, int] | None = None) -> None:
        self.root = root
        self._children = {vertex: tuple(kids) for vertex, kids in children.items() if kids}
        self._sockets = dict(sorted((sockets or {}).items()))
        self._validate()

    # ---- Construction ----------------------------------------------------

    @classmethod
    def from_graph(cls, graph: TreeGraph, root_key: Hashable) -> "RootedPhyloTree":
        """Orient an undirected tree away from a leaf, suppressing degree-2 inner vertices."""
        adjacency = {key: set(neighbors) for key, neighbors in graph.adjacency.items()}
        leaf_keys = set(graph.labels) | set(graph.socket_names)

        for key in list(adjacency):
            if key in leaf_keys or len(adjacency[key]) != 2:
                continue
            left, right = adjacency.pop(key)
            adjacency[left].discard(key)
            adjacency[right].discard(key)
            adjacency[left].add(right)
            adjacency[right].add(left)

        if root_key not in leaf_keys:
            raise StructuralError(f"root {root_key!r} is not a leaf")
        for key in leaf_keys:
            if len(adjacency.get(key, ())) != 1:
                raise StructuralError(f"leaf {graph.labels.get(key, graph.socket_names.get(key))!r} must have degree 1")

        ordinary = sorted(graph.labels.values())
        if len(set(ordinary)) != len(ordinary):
            raise StructuralError("leaf labels must be distinct")
        names = sorted(graph.socket_names.values())
        if len(set(names)) != len(names):
            raise StructuralError("socket names must be unique within a tree")
        first_socket = (max(ordinary) if ordinary else 0) + 1
        socket_label = {name: first_socket + rank for rank, name in enumerate(names)}

        vertex_id: dict[Hashable, int] = {}
        for key, label in graph.labels.items():
            vertex_id[key] = label
        for key, name in graph.socket_names.items():
            vertex_id[key] = socket_label[name]

        children: dict[int, tuple[int, ...]] = {}
        next_inner = -1
        stack: list[tuple[Hashable, Hashable | None]] = [(root_key, None)]
        seen: set[Hashable] = set()
        while stack:
            key, parent_key = stack.pop()
            if key in seen:
                raise StructuralError("tree contains a cycle")
            seen.add(key)
            if key not in vertex_id:
                vertex_id[key] = next_inner
                next_inner -= 1
            kids = [neighbor for neighbor in adjacency[key] if neighbor != parent_key]
            for kid in sorted(kids, key=repr):
                stack.append((kid, key))
            children[vertex_id[key]] = ()
            if parent_key is not None:
                parent = vertex_id[parent_key]
                children[parent] = children[parent] + (vertex_id[key],)
        if len(seen) != len(adjacency):
            raise StructuralError("tree is not connected")

        sockets = {name: socket_label[name] for name in names}
        return cls(vertex_id[root_key], children, sockets)

    def to_graph(self) -> TreeGraph:
        socket_vertices = {label: name for name, label in self._sockets.items()}
        graph = TreeGraph(adjacency={}, labels={}, socket_names={})
        for parent, kids in self._children.items():
            for kid in kids:
                graph.connect(parent, kid)
        for vertex in graph.adjacency:
            if vertex > 0:
                if vertex in socket_vertices:
                    graph.socket_names[vertex] = socket_vertices[vertex]
                else:
                    graph.labels[vertex] = vertex
        return graph

    def _validate(self) -> None:
        root_kids = self._children.get(self.root, ())
        if self.root <= 0 or len(root_kids) != 1:
            raise StructuralError("the root must be a leaf with exactly one neighbour")
        for vertex, kids in self._children.items():
            if vertex > 0 and vertex != self.root:
                raise StructuralError(f"leaf {vertex} cannot have children")
            if vertex < 0 and len(kids) < 2:
                raise StructuralError("inner vertices need at least two children")
        for vertex in self.parent:
            if vertex < 0 and vertex not in self._children:
                raise StructuralError("inner vertices need at least two children")
        for name, label in self._sockets.items():
            if label not in self.leaves:
                raise StructuralError(f"socket {name!r} does not name a pendant edge")

    # ---- Structure -------------------------------------------------------

    @cached_property
    def parent(self) -> dict[int, int]:
        return {kid: vertex for vertex, kids in self._children.items() for kid in kids}

    def children(self, vertex: int) -> tuple[int, ...]:
        return self._children.get(vertex, ())

    @cached_property
    def vertices(self) -> tuple[int, ...]:
        return tuple(sorted({self.root, *self.parent}))

    @cached_property
    def leaves(self) -> tuple[int, ...]:
        """All leaf labels, root included."""
        return tuple(sorted(vertex for vertex in {self.root, *self.parent} if vertex > 0))

    @cached_property
    def non_root_leaves(self) -> tuple[int, ...]:
        return tuple(label for label in self.leaves if label != self.root)

    @property
    def sockets(self) -> dict[str, int]:
        """Socket name -> socket leaf label (the root label when the socket is the root edge)."""
        return dict(self._sockets)

    @cached_property
    def _socket_of_label(self) -> dict[int, str]:
        return {label: name for name, label in self._sockets.items()}

    @cached_property
    def _clades(self) -> dict[int, frozenset[int]]:
        clades: dict[int, frozenset[int]] = {}
        order: list[int] = []
        stack = [self.root]
        while stack:
            vertex = stack.pop()
            order.append(vertex)
            stack.extend(self.children(vertex))
        for vertex in reversed(order):
            if vertex == self.root:
                continue
            kids = self.children(vertex)
            clades[vertex] = frozenset({vertex}) if not kids else frozenset().union(*(clades[kid] for kid in kids))
        return clades

    @cached_property
    def _edge_vertex(self) -> dict[EdgeRef, int]:
        return {EdgeRef(clade): vertex for vertex, clade in self._clades.items()}

    @cached_property
    def edges(self) -> tuple[EdgeRef, ...]:
        """Edges in canonical clade order (sorted label tuples)."""
        return tuple(sorted(self._edge_vertex, key=lambda edge: edge.sort_key))

    @property
    def root_edge(self) -> EdgeRef:
        return EdgeRef(frozenset(self.non_root_leaves))

    def leaf_edge(self, label: int) -> EdgeRef:
        if label == self.root:
            return self.root_edge
        if label not in self.non_root_leaves:
            raise StructuralError(f"unknown leaf {label}")
        return EdgeRef(frozenset({label}))

    def socket_edge(self, name: str) -> EdgeRef:
        if name not in self._sockets:
            raise StructuralError(f"unknown socket {name!r}; tree has {sorted(self._sockets)}")
        return self.leaf_edge(self._sockets[name])

    def edge_vertex(self, edge: EdgeRef) -> int:
        """The head (child end) of an edge."""
        try:
            return self._edge_vertex[edge]
        except KeyError:
            raise StructuralError(f"{edge} is not an edge of {self.canonical_form()}") from None

    def descendants(self, edge: EdgeRef) -> frozenset[int]:
        return self._clades[self.edge_vertex(edge)]

    def descendants_of_vertex(self, vertex: int) -> frozenset[int]:
        """Clade of the edge entering `vertex`."""
        return self._clades[vertex]

    def is_pendant(self, edge: EdgeRef) -> bool:
        vertex = self.edge_vertex(edge)
        return vertex > 0 or self.parent[vertex] == self.root

    def is_interior(self, edge: EdgeRef) -> bool:
        return not self.is_pendant(edge)

    @property
    def interior_edges(self) -> tuple[EdgeRef, ...]:
        return tuple(edge for edge in self.edges if self.is_interior(edge))

    @property
    def pendant_edges(self) -> tuple[EdgeRef, ...]:
        return tuple(edge for edge in self.edges if self.is_pendant(edge))

    def edge_order_leq(self, lower: EdgeRef, upper: EdgeRef) -> bool:
        """True iff a directed path runs from `upper` down to `lower` (or they are equal)."""
        return self.descendants(lower) <= self.descendants(upper)

    def is_trivalent(self) -> bool:
        return all(len(kids) == 2 for vertex, kids in self._children.items() if vertex < 0)

    # ---- Derived trees ---------------------------------------------------

    def split_at_edge(self, edge: EdgeRef, socket: str = "e") -> tuple["RootedPhyloTree", "RootedPhyloTree"]:
        """Split at an interior edge into (T_plus, T_minus), both carrying `edge` as socket `socket`.

        T_minus holds every edge at or below `edge` and is rooted at the tail of `edge`;
        T_plus holds the rest plus `edge` as a pendant edge and keeps the original root.
        """
        if socket in self._sockets:
            raise StructuralError(f"socket name {socket!r} is already used in this tree")
        if self.is_pendant(edge):
            raise StructuralError(f"{edge} is not an interior edge")
        head = self.edge_vertex(edge)
        tail = self.parent[head]
        below: set[int] = set()
        stack = [head]
        while stack:
            vertex = stack.pop()
            below.add(vertex)
            stack.extend(self.children(vertex))

        graph = self.to_graph()
        new_leaf = "split-socket"

        minus = TreeGraph(adjacency={}, labels={}, socket_names={new_leaf: socket})
        plus = TreeGraph(adjacency={}, labels={}, socket_names={new_leaf: socket})
        for vertex, neighbors in graph.adjacency.items():
            target = minus if vertex in below else plus
            for neighbor in neighbors:
                if (neighbor in below) == (vertex in below):
                    target.connect(vertex, neighbor)
            if vertex in graph.labels:
                target.labels[vertex] = graph.labels[vertex]
            if vertex in graph.socket_names:
                target.socket_names[vertex] = graph.socket_names[vertex]
        minus.connect(new_leaf, head)
        plus.connect(new_leaf, tail)

        t_plus = RootedPhyloTree.from_graph(plus, self.root)
        t_minus = RootedPhyloTree.from_graph(minus, new_leaf)
        logger.debug("Split %s at %s into %s and %s", self.canonical_form(), edge, t_plus.canonical_form(), t_minus.canonical_form())
        return t_plus, t_minus

    def relabel(self, mapping: Mapping[int, int]) -> "RootedPhyloTree":
        """Rename ordinary leaves; labels missing from `mapping` stay unchanged."""
        graph = self.to_graph()
        graph.labels = {key: mapping.get(label, label) for key, label in graph.labels.items()}
        return RootedPhyloTree.from_graph(graph, self.root)

    def reroot(self, root: int | str) -> "RootedPhyloTree":
        """Re-root at another ordinary leaf label or at a socket name."""
        graph = self.to_graph()
        key = _resolve_root(graph, root)
        return RootedPhyloTree.from_graph(graph, key)

    def with_sockets(self, assignments: Mapping[str, int | EdgeRef]) -> "RootedPhyloTree":
        """Turn ordinary pendant leaves into named sockets (by leaf label or pendant clade)."""
        graph = self.to_graph()
        root_key: Hashable = self.root
        for name, target in assignments.items():
            if isinstance(target, EdgeRef):
                if not self.is_pendant(target):
                    raise StructuralError(f"socket {name!r}: {target} is not a pendant edge")
                vertex = self.edge_vertex(target)
                label = self.root if target == self.root_edge else vertex
            else:
                label = int(target)
            if label not in graph.labels:
                raise StructuralError(f"socket {name!r}: {label} is not an ordinary leaf")
            graph.labels.pop(label)
            graph.socket_names[label] = name
        return RootedPhyloTree.from_graph(graph, root_key)

    # ---- Serialization ---------------------------------------------------

    def _token(self, leaf: int) -> str:
        name = self._socket_of_label.get(leaf)
        return f"{_SOCKET_PREFIX}{name}" if name is not None else str(leaf)

    def _leaf_key(self, leaf: int) -> tuple[int, int | str]:
        name = self._socket_of_label.get(leaf)
        return (1, name) if name is not None else (0, leaf)

    def to_newick(self) -> str:
        keys: dict[int, tuple[int, int | str]] = {}

        def min_key(vertex: int) -> tuple[int, int | str]:
            if vertex not in keys:
                kids = self.children(vertex)
                keys[vertex] = self._leaf_key(vertex) if not kids else min(min_key(kid) for kid in kids)
            return keys[vertex]

        def render(vertex: int) -> str:
            kids = self.children(vertex)
            if not kids:
                return self._token(vertex)
            return "(" + ",".join(render(kid) for kid in sorted(kids, key=min_key)) + ")"

        top = self.children(self.root)[0]
        parts = [render(kid) for kid in sorted(self.children(top), key=min_key)] if self.children(top) else [render(top)]
        return "(" + ",".join(parts + [self._token(self.root)]) + ");"

    def canonical_form(self) -> str:
        """Newick text with sorted children plus "@<root>"; invariant under child order."""
        return f"{self.to_newick()}@{self._token(self.root)}"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RootedPhyloTree):
            return NotImplemented
        return self.canonical_form() == other.canonical_form()

    def __hash__(self) -> int:
        return hash(self.canonical_form())

    def __repr__(self) -> str:
        return f"RootedPhyloTree({self.canonical_form()!r})"


def _resolve_root(graph: TreeGraph, root: int | str | None) -> Hashable:
    if root is None:
        if not graph.labels:
            raise StructuralError("a tree without ordinary leaves needs an explicit root")
        return max(graph.labels, key=graph.labels.__getitem__)
    if isinstance(root, str):
        text = root.strip()
        if text.isdigit():
            root = int(text)
        else:
            name = text[len(_SOCKET_PREFIX):] if text.startswith(_SOCKET_PREFIX) else text
            for key, socket_name in graph.socket_names.items():
                if socket_name == name:
                    return key
            raise StructuralError(f"root {root!r} is not a leaf of the tree")
    for key, label in graph.labels.items():
        if label == root:
            return key
    raise StructuralError(f"root {root!r} is not a leaf of the tree")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens: list[tuple[str, int]] = []
    position = 0
    stripped = text.rstrip()
    while position < len(stripped):
        match = _TOKEN_PATTERN.match(stripped, position)
        if not match or match.end() == position:
            raise TreeParseError("unexpected character", text, position)
        tokens.append((match.group("punct") or match.group("label"), match.start(match.lastindex or 0)))
        position = match.end()
    return tokens


class _NewickReader:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = _tokenize(text)
        self.index = 0
        self.graph = TreeGraph(adjacency={}, labels={}, socket_names={})
        self.next_key = 0

    def peek(self) -> str | None:
        return self.tokens[self.index][0] if self.index < len(self.tokens) else None

    def position(self) -> int:
        return self.tokens[self.index][1] if self.index < len(self.tokens) else len(self.text)

    def take(self, expected: str | None = None) -> str:
        token = self.peek()
        if token is None:
            raise TreeParseError("unexpected end of input", self.text, len(self.text))
        if expected is not None and token != expected:
            raise TreeParseError(f"expected {expected!r}, found {token!r}", self.text, self.position())
        self.index += 1
        return token

    def new_key(self) -> int:
        self.next_key += 1
        return self.next_key

    def node(self) -> int:
        key = self.new_key()
        if self.peek() == "(":
            self.take("(")
            while True:
                child = self.node()
                self.graph.connect(key, child)
                if self.peek() == ",":
                    self.take(",")
                    continue
                self.take(")")
                break
            self.graph.adjacency.setdefault(key, set())
            return key

        position = self.position()
        token = self.take()
        if token in "(),;@":
            raise TreeParseError(f"expected a leaf label, found {token!r}", self.text, position)
        self.graph.adjacency.setdefault(key, set())
        if token.isdigit():
            label = int(token)
            if label < 1:
                raise TreeParseError("leaf labels must be positive integers", self.text, position)
            if label in self.graph.labels.values():
                raise TreeParseError(f"duplicate leaf label {label}", self.text, position)
            self.graph.labels[key] = label
        elif token.startswith(_SOCKET_PREFIX) and len(token) > len(_SOCKET_PREFIX):
            name = token[len(_SOCKET_PREFIX):]
            if name in self.graph.socket_names.values():
                raise TreeParseError(f"duplicate socket {name!r}", self.text, position)
            self.graph.socket_names[key] = name
        else:
            raise TreeParseError(f"invalid leaf label {token!r}", self.text, position)
        return key

    def read(self) -> tuple[TreeGraph, str | None]:
        if self.peek() != "(":
            raise TreeParseError("a tree must start with '('", self.text, self.position())
        self.node()
        if self.peek() == ";":
            self.take(";")
        root_token: str | None = None
        if self.peek() == "@":
            self.take("@")
            root_token = self.take()
        if self.peek() is not None:
            raise TreeParseError(f"unexpected trailing {self.peek()!r}", self.text, self.position())
        return self.graph, root_token


def parse_tree(text: str, root: int | str | None = None) -> RootedPhyloTree:
    """Parse Newick-like text (integer leaves, "S<name>" socket leaves, optional ";" and "@<root>").

    The root defaults to an "@<root>" suffix, then to the largest ordinary leaf label.
    """
    graph, suffix_root = _NewickReader(text).read()
    chosen = root if root is not None else suffix_root
    key = _resolve_root(graph, chosen)
    return RootedPhyloTree.from_graph(graph, key)


def caterpillar(leaves: int) -> RootedPhyloTree:
    """Trivalent caterpillar with leaves 1..L in spine order, rooted at L."""
    if leaves < 3:
        raise StructuralError("a caterpillar needs at least 3 leaves")
    text = "1"
    for label in range(2, leaves - 1):
        text = f"({text},{label})"
    return parse_tree(f"({text},{leaves - 1},{leaves});", root=leaves)


def snowflake() -> RootedPhyloTree:
    """Six leaves: a centre joined to the cherries (1,2), (3,4), (5,6); rooted at 6."""
    return parse_tree("((1,2),(3,4),(5,6));", root=6)
