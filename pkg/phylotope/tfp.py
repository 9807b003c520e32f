# where: phylotope/tfp.py
# what: Decomposition plans (trees glued along named socket edges), toric fiber product composition
#       of their fiber count tables, and reconstruction of the glued tree.
# why: Six-leaf Kimura counts are out of reach directly but are sums of products of small tables.

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Hashable, Sequence

from .abelian import FiniteAbelianGroup
from .errors import MismatchError, StructuralError
from .hilbert import FiberCountTable, fiber_table
from .model import Multidegree
from .settings import RuntimeContext
from .tree import EdgeRef, RootedPhyloTree, TreeGraph

logger = logging.getLogger(__name__)

Cells = dict[tuple[Multidegree, ...], int]


@dataclass(frozen=True)
class PlanComponent:
    name: str
    tree: RootedPhyloTree

    @property
    def socket_names(self) -> tuple[str, ...]:
        return tuple(sorted(self.tree.sockets))

    def socket_edges(self) -> list[EdgeRef]:
        return [self.tree.socket_edge(name) for name in self.socket_names]


@dataclass(frozen=True)
class DecompositionPlan:
    """Components glued pairwise along shared socket names; the gluing graph must be a tree."""

    components: tuple[PlanComponent, ...]
    name: str = "plan"

    def __post_init__(self) -> None:
        if not self.components:
            raise StructuralError("a plan needs at least one component")
        names = [component.name for component in self.components]
        if len(set(names)) != len(names):
            raise StructuralError(f"component names must be distinct: {names}")
        occurrences = self.socket_occurrences()
        for socket, owners in occurrences.items():
            if len(owners) > 2:
                raise StructuralError(f"socket {socket!r} appears in {len(owners)} components; at most two may share it")

        parent = list(range(len(self.components)))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for socket, owners in sorted(occurrences.items()):
            if len(owners) != 2:
                continue
            a, b = find(owners[0]), find(owners[1])
            if a == b:
                raise StructuralError(f"gluing along socket {socket!r} closes a cycle; plans must glue as a tree")
            parent[a] = b
        roots = {find(i) for i in range(len(self.components))}
        if len(roots) != 1:
            raise StructuralError("the gluing graph of the plan is not connected")

    def socket_occurrences(self) -> dict[str, list[int]]:
        occurrences: dict[str, list[int]] = defaultdict(list)
        for index, component in enumerate(self.components):
            for socket in component.socket_names:
                occurrences[socket].append(index)
        return dict(occurrences)

    @property
    def shared_sockets(self) -> tuple[str, ...]:
        return tuple(sorted(s for s, owners in self.socket_occurrences().items() if len(owners) == 2))

    @property
    def free_sockets(self) -> tuple[str, ...]:
        return tuple(sorted(s for s, owners in self.socket_occurrences().items() if len(owners) == 1))

    @classmethod
    def from_split(cls, tree: RootedPhyloTree, edge: EdgeRef, socket: str = "e") -> "DecompositionPlan":
        t_plus, t_minus = tree.split_at_edge(edge, socket)
        return cls((PlanComponent("plus", t_plus), PlanComponent("minus", t_minus)), name=f"split-{edge}")


def _aligned_tables(
    plan: DecompositionPlan, tables: Sequence[FiberCountTable], n: int
) -> tuple[str, list[FiberCountTable]]:
    if len(tables) != len(plan.components):
        raise MismatchError(f"plan has {len(plan.components)} components but {len(tables)} tables were given")
    groups = {table.group for table in tables}
    if len(groups) != 1:
        raise MismatchError(f"tables use different groups: {sorted(groups)}")
    aligned = []
    for component, table in zip(plan.components, tables):
        if table.n != n:
            raise MismatchError(f"table for {component.name!r} has degree {table.n}, expected {n}")
        if set(table.sockets) != set(component.socket_names):
            raise MismatchError(
                f"table for {component.name!r} has sockets {list(table.sockets)}, plan expects {list(component.socket_names)}"
            )
        aligned.append(table.marginal(component.socket_names))
    return groups.pop(), aligned


def _sum_out(cells: Cells, sockets: list[str], keep: set[str]) -> tuple[Cells, list[str]]:
    positions = [i for i, socket in enumerate(sockets) if socket in keep]
    reduced: Cells = defaultdict(int)
    for key, count in cells.items():
        reduced[tuple(key[i] for i in positions)] += count
    return dict(reduced), [sockets[i] for i in positions]


def tfp_fiber_table(
    plan: DecompositionPlan,
    tables: Sequence[FiberCountTable],
    n: int,
    exposed_sockets: Sequence[str] = (),
) -> FiberCountTable:
    """Compose component tables, keeping the gradings of `exposed_sockets` and summing out the rest.

    Each shared socket contributes the fiberwise product sum_u N_a(u) * N_b(u).
    """
    group, aligned = _aligned_tables(plan, tables, n)
    free = set(plan.free_sockets)
    exposed = list(exposed_sockets)
    for socket in exposed:
        if socket not in free:
            raise MismatchError(f"exposed socket {socket!r} must appear in exactly one component")
    if len(set(exposed)) != len(exposed):
        raise MismatchError("exposed sockets must be distinct")
    shared = set(plan.shared_sockets)
    keep_sockets = shared | set(exposed)

    occurrences = plan.socket_occurrences()
    neighbours: dict[int, list[tuple[str, int]]] = defaultdict(list)
    for socket in plan.shared_sockets:
        a, b = occurrences[socket]
        neighbours[a].append((socket, b))
        neighbours[b].append((socket, a))

    cells, open_sockets = _sum_out(dict(aligned[0].cells), list(aligned[0].sockets), keep_sockets)
    joined = {0}
    frontier = [0]
    while frontier:
        current = frontier.pop(0)
        for socket, other in sorted(neighbours[current]):
            if other in joined:
                continue
            joined.add(other)
            frontier.append(other)
            other_cells, other_sockets = _sum_out(dict(aligned[other].cells), list(aligned[other].sockets), keep_sockets)
            cells, open_sockets = _join(cells, open_sockets, other_cells, other_sockets, socket)
            logger.debug("Joined %s on %s: %d cells", plan.components[other].name, socket, len(cells))

    # open sockets are now exactly the exposed ones, in join order
    order = [open_sockets.index(socket) for socket in exposed]
    result: Cells = {}
    for key, count in cells.items():
        if count:
            result[tuple(key[i] for i in order)] = count
    return FiberCountTable(f"plan:{plan.name}", group, n, tuple(exposed), result, aligned[0].method)


def _join(left: Cells, left_sockets: list[str], right: Cells, right_sockets: list[str], socket: str) -> tuple[Cells, list[str]]:
    i = left_sockets.index(socket)
    j = right_sockets.index(socket)
    by_degree: dict[Multidegree, list[tuple[tuple[Multidegree, ...], int]]] = defaultdict(list)
    for key, count in right.items():
        by_degree[key[j]].append((key[:j] + key[j + 1:], count))
    joined: Cells = defaultdict(int)
    for key, count in left.items():
        rest = key[:i] + key[i + 1:]
        for other_rest, other_count in by_degree.get(key[i], ()):
            joined[rest + other_rest] += count * other_count
    sockets = left_sockets[:i] + left_sockets[i + 1:] + right_sockets[:j] + right_sockets[j + 1:]
    return dict(joined), sockets


def tfp_compose(plan: DecompositionPlan, tables: Sequence[FiberCountTable], n: int) -> int:
    """Single-graded Hilbert value of the glued tree: sum over all socket multidegrees of the products."""
    return tfp_fiber_table(plan, tables, n, ()).total()


def plan_tables(
    plan: DecompositionPlan,
    group: FiniteAbelianGroup,
    n: int,
    context: RuntimeContext | None = None,
    method: str = "semigroup",
) -> list[FiberCountTable]:
    """One fiber table per component, graded by that component's sockets in name order."""
    context = context or RuntimeContext.default()
    if method == "semigroup":
        return [fiber_table(c.tree, group, n, c.socket_edges(), context) for c in plan.components]
    if method == "polyhedral":
        from .polyhedra import polyhedral_fiber_table

        return [polyhedral_fiber_table(c.tree, group, n, c.socket_edges(), context) for c in plan.components]
    raise ValueError(f"unknown counting method {method!r}; expected semigroup or polyhedral")


def plan_hilbert_value(
    plan: DecompositionPlan,
    group: FiniteAbelianGroup,
    n: int,
    context: RuntimeContext | None = None,
    method: str = "semigroup",
) -> int:
    tables = plan_tables(plan, group, n, context, method)
    value = tfp_compose(plan, tables, n)
    logger.info("Plan %s over %s at n=%d: %d", plan.name, group, n, value)
    return value


def glue(plan: DecompositionPlan) -> RootedPhyloTree:
    """Identify each shared socket's pendant edges and return the glued tree.

    Leaf labels are kept when they are distinct across components and renumbered by
    (component, label) otherwise. The root is the first ordinary component root, else the
    largest leaf label.
    """
    occurrences = plan.socket_occurrences()
    graph = TreeGraph(adjacency={}, labels={}, socket_names={})
    socket_leaf: dict[tuple[int, str], Hashable] = {}
    ordinary_roots: list[Hashable] = []

    for index, component in enumerate(plan.components):
        part = component.tree.to_graph()
        for vertex, neighbours in part.adjacency.items():
            for neighbour in neighbours:
                graph.connect((index, vertex), (index, neighbour))
        for vertex, label in part.labels.items():
            graph.labels[(index, vertex)] = label
        for vertex, name in part.socket_names.items():
            socket_leaf[(index, name)] = (index, vertex)
            if len(occurrences[name]) == 1:
                graph.socket_names[(index, vertex)] = name
        if component.tree.root not in component.tree.sockets.values():
            ordinary_roots.append((index, component.tree.root))

    for socket in plan.shared_sockets:
        a, b = occurrences[socket]
        leaf_a, leaf_b = socket_leaf[(a, socket)], socket_leaf[(b, socket)]
        (inner_a,) = graph.adjacency.pop(leaf_a)
        (inner_b,) = graph.adjacency.pop(leaf_b)
        graph.adjacency[inner_a].discard(leaf_a)
        graph.adjacency[inner_b].discard(leaf_b)
        graph.connect(inner_a, inner_b)

    labels = list(graph.labels.values())
    if len(set(labels)) != len(labels):
        renumbered = {key: position + 1 for position, key in enumerate(sorted(graph.labels, key=lambda k: (k[0], graph.labels[k])))}
        graph.labels = renumbered
        logger.debug("Relabelled glued leaves of plan %s", plan.name)

    if ordinary_roots:
        root_key = ordinary_roots[0]
    elif graph.labels:
        root_key = max(graph.labels, key=graph.labels.__getitem__)
    else:
        raise StructuralError("the glued tree has no ordinary leaf to root at")
    return RootedPhyloTree.from_graph(graph, root_key)
