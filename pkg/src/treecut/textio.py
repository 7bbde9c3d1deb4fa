"""Text formats: edge lists, weight sidecars, tree files, DOT, traces."""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import InputError
from .graphs import Graph, VertexWeights
from .hierarchy import TreeNode, TreeSparsifier


def parse_edge_list(text: str, require_connected: bool = True) -> Graph:
    """Parse "u v cap" lines with '#' comments into a graph.

    Vertex count is one past the largest id seen.  Diagnostics carry line
    numbers.
    """
    edges: list[tuple[int, int, int]] = []
    top = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise InputError(f"expected 'u v cap', got {raw!r}", lineno)
        try:
            u, v, cap = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError:
            raise InputError(f"non-integer field in {raw!r}", lineno) from None
        if u < 0 or v < 0:
            raise InputError("vertex ids must be non-negative", lineno)
        if u == v:
            raise InputError(f"self-loop at vertex {u}", lineno)
        if cap < 1:
            raise InputError(f"capacity must be positive, got {cap}", lineno)
        edges.append((u, v, cap))
        top = max(top, u, v)
    if not edges:
        raise InputError("edge list is empty")
    try:
        return Graph.from_edges(top + 1, edges, require_connected=require_connected)
    except Exception as exc:
        raise InputError(str(exc)) from exc


def format_edge_list(graph: Graph) -> str:
    lines = [f"{u} {v} {c}" for u, v, c in graph.edges]
    return "\n".join(lines) + "\n"


def parse_vertex_weights(text: str) -> VertexWeights:
    """Parse "v w" sidecar lines into vertex weights."""
    out: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InputError(f"expected 'v w', got {raw!r}", lineno)
        try:
            v, w = int(parts[0]), int(parts[1])
        except ValueError:
            raise InputError(f"non-integer field in {raw!r}", lineno) from None
        if v < 0 or w < 0:
            raise InputError("ids and weights must be non-negative", lineno)
        out[v] = out.get(v, 0) + w
    return VertexWeights(out)


# ---------------------------------------------------------------------------
# tree sparsifier files
# ---------------------------------------------------------------------------


def tree_to_json(tree: TreeSparsifier) -> str:
    nodes = []
    for node in tree.nodes:
        entry: dict = {"id": node.id, "parent": node.parent, "cap": node.cap}
        if node.leaf_vertex is not None:
            entry["leaf_vertex"] = node.leaf_vertex
        nodes.append(entry)
    return json.dumps({"n": tree.n, "nodes": nodes}, indent=1)


def tree_from_json(text: str) -> TreeSparsifier:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from exc
    try:
        n = int(data["n"])
        raw_nodes = data["nodes"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError("tree file needs 'n' and 'nodes'") from exc
    nodes: list[TreeNode] = []
    for entry in raw_nodes:
        parent = entry.get("parent")
        nodes.append(TreeNode(int(entry["id"]),
                              None if parent is None else int(parent),
                              int(entry["cap"]), frozenset(),
                              entry.get("leaf_vertex")))
    by_id = {node.id: node for node in nodes}
    for node in nodes:
        if node.parent is not None:
            by_id[node.parent].children.append(node.id)
    # rebuild clusters bottom-up from the leaves
    members: dict[int, set[int]] = {node.id: set() for node in nodes}
    for node in nodes:
        if node.leaf_vertex is not None:
            cursor: int | None = node.id
            while cursor is not None:
                members[cursor].add(node.leaf_vertex)
                cursor = by_id[cursor].parent
    for node in nodes:
        node.cluster = frozenset(members[node.id])
        if not node.cluster:
            raise InputError(f"tree node {node.id} spans no leaves")
    roots = [node for node in nodes if node.parent is None]
    if len(roots) != 1 or len(roots[0].cluster) != n:
        raise InputError("tree must have one root spanning all vertices")
    order = sorted(nodes, key=lambda nd: nd.id)
    return TreeSparsifier(order, n)


def tree_to_dot(tree: TreeSparsifier) -> str:
    lines = ["digraph treecut {"]
    for node in tree.nodes:
        if node.leaf_vertex is not None:
            lines.append(f'  n{node.id} [label="v{node.leaf_vertex}" shape=box];')
        else:
            lines.append(f'  n{node.id} [label="{len(node.cluster)}"];')
    for node in tree.nodes:
        if node.parent is not None:
            lines.append(f'  n{node.parent} -> n{node.id} [label="{node.cap}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# demands
# ---------------------------------------------------------------------------


def parse_demands(text: str) -> list[dict[int, int]]:
    """Demand batches as JSON: a list of demands, each a list of [vertex, value]."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise InputError("demand file must hold a list of demands")
    demands = []
    for i, entry in enumerate(data):
        demand: dict[int, int] = {}
        try:
            for v, x in entry:
                demand[int(v)] = demand.get(int(v), 0) + int(x)
        except (TypeError, ValueError) as exc:
            raise InputError(f"demand {i} must be [vertex, value] pairs") from exc
        if sum(demand.values()) != 0:
            raise InputError(f"demand {i} does not sum to zero")
        demands.append(demand)
    return demands


def format_demands(demands: Sequence[Mapping[int, int]]) -> str:
    data = [sorted([int(v), int(x)] for v, x in d.items()) for d in demands]
    return json.dumps(data)


def fraction_str(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}" if value.denominator != 1 \
        else str(value.numerator)
