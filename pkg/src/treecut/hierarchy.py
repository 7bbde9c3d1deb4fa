"""Hierarchy construction, tree cut sparsifiers, and quality certification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .cutmatch import oracle_params
from .errors import ArgumentError, InternalError
from .flow import opt_congestion
from .graphs import (Graph, Partition, boundary_capacity, boundary_degree_map,
                     check_expanding, check_laminar)
from .partition import partition_cluster


@dataclass(frozen=True)
class HierarchicalDecomposition:
    """A refinement chain of partitions, the first being the whole vertex set."""

    levels: tuple[Partition, ...]

    @property
    def n(self) -> int:
        return len(self.levels[0].ground)

    @property
    def height(self) -> int:
        return len(self.levels)

    def is_complete(self) -> bool:
        return all(len(c) == 1 for c in self.levels[-1].clusters)

    def parent_of(self, level: int, cluster: frozenset[int]) -> frozenset[int]:
        if level == 0:
            return cluster
        return self.levels[level - 1].cluster_of(min(cluster))

    def find_level(self, cluster: frozenset[int]) -> int:
        """First level at which the cluster appears."""
        for i, part in enumerate(self.levels):
            if cluster in part.clusters:
                return i
        raise ArgumentError("cluster does not appear in the decomposition")


def _loglog(n: int) -> float:
    return max(1.0, math.log2(max(math.log2(n), 1.0)))


def expansion_bound(decomposition: HierarchicalDecomposition,
                    cluster: Iterable[int], level: int | None = None) -> Fraction:
    """Per-cluster expansion bound: 1 at the root, otherwise scaled by how
    much smaller the cluster is than its parent (logs base 2)."""
    cl = frozenset(cluster)
    if level is None:
        level = decomposition.find_level(cl)
    if level == 0:
        return Fraction(1)
    parent = decomposition.parent_of(level, cl)
    n = decomposition.n
    value = 3.0 * _loglog(n) * math.log2(2 * len(parent) / len(cl))
    return Fraction(value)


def _bound_for(n: int, parent_size: int, size: int) -> Fraction:
    return Fraction(3.0 * _loglog(n) * math.log2(2 * parent_size / size))


@dataclass
class HierarchyConfig:
    round_coeff: float = 10.0
    early_stop: bool = True
    phi_cap: Fraction = Fraction(1, 4)


def construct_hierarchy(graph: Graph, config: HierarchyConfig | None = None,
                        rng=None) -> HierarchicalDecomposition:
    """Build a complete hierarchical decomposition level by level.

    Each cluster is refined by partition_cluster at an expansion target that
    shrinks with its depth; bad children split their cluster in place and are
    reprocessed.  The result is laminar with singleton leaves, and every
    cluster has at most half the vertices of its grandparent.
    """
    cfg = config or HierarchyConfig()
    if rng is None:
        rng = np.random.Generator(np.random.Philox(0))
    n = graph.n
    if n < 2:
        raise ArgumentError("hierarchy construction needs at least two vertices")
    everything = frozenset(range(n))
    level_budget = 2 * math.ceil(math.log2(n)) + 2

    root_phi = min(Fraction(1), cfg.phi_cap)  # the root's bound is 1; cap applies
    root = partition_cluster(graph, everything, Partition.singletons(everything),
                             root_phi, rng, round_coeff=cfg.round_coeff,
                             early_stop=cfg.early_stop)
    if root.bad_child:
        raise InternalError("the root cluster has no border and cannot split off a child")
    levels: list[Partition] = [Partition.trivial(everything), root.partition]

    while any(len(c) > 1 for c in levels[-1].clusters):
        if len(levels) >= level_budget:
            raise InternalError("hierarchy exceeded its level budget")
        prev = levels[-2]
        clusters = list(levels[-1].clusters)
        sub: dict[frozenset[int], Partition] = {}
        unprocessed: set[frozenset[int]] = set()
        for cl in clusters:
            if len(cl) == 1:
                sub[cl] = Partition.trivial(cl)
            else:
                sub[cl] = Partition.singletons(cl)
                unprocessed.add(cl)

        guard = 0
        while unprocessed:
            guard += 1
            if guard > 20 * n + 100:
                raise InternalError("cluster processing failed to converge")
            target = min(unprocessed, key=min)
            unprocessed.discard(target)
            parent = prev.cluster_of(min(target))
            phi = min(1 / _bound_for(n, len(parent), len(target)), cfg.phi_cap)
            before = sub[target]
            result = partition_cluster(graph, target, before, phi, rng,
                                       round_coeff=cfg.round_coeff,
                                       early_stop=cfg.early_stop)
            if not result.bad_child:
                sub[target] = result.partition
                continue

            child = result.bad_child
            rest = target - child
            rest_partition = Partition.of(
                c for c in result.partition.clusters if c != child)
            clusters.remove(target)
            clusters.extend([child, rest])
            del sub[target]
            sub[child] = Partition.trivial(child)
            sub[rest] = rest_partition
            unprocessed.add(child)
            if _balanced_split(graph, before, result.partition, child, n):
                unprocessed.add(rest)

        levels[-1] = Partition.of(clusters)
        next_level = Partition.of(
            c for cl in clusters for c in sub[cl].clusters)
        levels.append(next_level)

    decomposition = HierarchicalDecomposition(tuple(levels))
    if __debug__:
        assert check_laminar(decomposition)
        assert decomposition.is_complete()
        _assert_grandparent_halving(decomposition)
    return decomposition


def _balanced_split(graph: Graph, before: Partition, after: Partition,
                    child: frozenset[int], n: int) -> bool:
    """Did the bad child event keep the boundary weight balanced?

    When true both split parts need reprocessing; otherwise the remainder is
    already expanding against its partition and only the child recurses.
    """
    deg_after = boundary_degree_map(graph, after)
    deg_before = boundary_degree_map(graph, before)
    total_after = deg_after.total()
    if total_after < 2:
        return False
    progress = oracle_params(n, max(deg_before.total(), 2))[2]
    ground = after.ground
    cut = sum(c for u, v, c in graph.edges
              if (u in child) != (v in child) and u in ground and v in ground)
    return (Fraction(deg_after.total(child)) >= progress / 20 * total_after
            and total_after <= deg_before.total() + 2 * cut)


def _assert_grandparent_halving(decomposition: HierarchicalDecomposition):
    levels = decomposition.levels
    for i in range(2, len(levels)):
        for cluster in levels[i].clusters:
            grand = decomposition.parent_of(i - 1,
                                            decomposition.parent_of(i, cluster))
            if grand == cluster:
                continue  # a persisted singleton chain is its own ancestor
            assert 2 * len(cluster) <= len(grand), "grandparent halving violated"


# ---------------------------------------------------------------------------
# tree cut sparsifier
# ---------------------------------------------------------------------------


@dataclass
class TreeNode:
    id: int
    parent: int | None
    cap: int
    cluster: frozenset[int]
    leaf_vertex: int | None = None
    children: list[int] = field(default_factory=list)


class TreeSparsifier:
    """Rooted tree over the laminar cluster family; edges carry cut capacities."""

    def __init__(self, nodes: list[TreeNode], n: int):
        self.nodes = nodes
        self.n = n

    @property
    def root(self) -> TreeNode:
        return self.nodes[0]

    def leaves(self) -> list[TreeNode]:
        return [nd for nd in self.nodes if nd.leaf_vertex is not None]

    def predict(self, demand: Mapping[int, object]) -> Fraction:
        return predict_congestion(self, demand)


def to_tree_sparsifier(decomposition: HierarchicalDecomposition,
                       graph: Graph) -> TreeSparsifier:
    """Collapse the refinement chain into a tree with boundary capacities."""
    if not check_laminar(decomposition):
        raise ArgumentError("decomposition is not laminar")
    if not decomposition.is_complete():
        raise ArgumentError("decomposition must end in singletons")
    everything = list(range(graph.n))
    nodes: list[TreeNode] = []
    by_cluster: dict[frozenset[int], int] = {}
    for level, part in enumerate(decomposition.levels):
        for cluster in sorted(part.clusters, key=min):
            if cluster in by_cluster:
                continue
            if level == 0:
                parent_id = None
                cap = 0
            else:
                parent_id = by_cluster[decomposition.parent_of(level, cluster)]
                cap = boundary_capacity(graph, cluster, everything)
            node = TreeNode(len(nodes), parent_id, cap, cluster,
                            min(cluster) if len(cluster) == 1 else None)
            nodes.append(node)
            by_cluster[cluster] = node.id
            if parent_id is not None:
                nodes[parent_id].children.append(node.id)
    return TreeSparsifier(nodes, graph.n)


def predict_congestion(tree: TreeSparsifier, demand: Mapping[int, object]) -> Fraction:
    """Max over tree cuts of demand crossing the cut divided by its capacity."""
    values = {v: Fraction(x) for v, x in demand.items()}
    if sum(values.values(), Fraction(0)) != 0:
        raise ArgumentError("demand must sum to zero")
    best = Fraction(0)
    for node in tree.nodes:
        if node.parent is None:
            continue
        crossing = abs(sum((values.get(v, Fraction(0)) for v in node.cluster),
                           Fraction(0)))
        if crossing:
            best = max(best, crossing / node.cap)
    return best


# ---------------------------------------------------------------------------
# certification
# ---------------------------------------------------------------------------

#: clusters above this size are skipped by the exhaustive certifier
CERTIFY_SIZE_CAP = 20


def default_gamma(graph: Graph) -> Fraction:
    """The construction's expansion-quality constant for this graph."""
    quality = oracle_params(graph.n, max(2, 2 * graph.total_capacity()))[0]
    return Fraction(1.0 / (1000.0 * math.e * quality))


@dataclass
class ClusterCertificate:
    level: int
    cluster: frozenset[int]
    status: str  # "pass" | "fail" | "skipped" | "leaf"
    quality: Fraction | None = None
    witness: frozenset[int] | None = None


@dataclass
class CertifyReport:
    entries: list[ClusterCertificate]
    gamma: Fraction

    @property
    def all_pass(self) -> bool:
        return all(e.status in ("pass", "leaf") for e in self.entries)

    def worst(self) -> ClusterCertificate | None:
        failures = [e for e in self.entries if e.status == "fail"]
        return failures[0] if failures else None


def certify_well_expanding(graph: Graph, decomposition: HierarchicalDecomposition,
                           gamma) -> CertifyReport:
    """Brute-force check that every non-leaf cluster expands against its children."""
    gamma = Fraction(gamma)
    entries: list[ClusterCertificate] = []
    levels = decomposition.levels
    for level in range(len(levels) - 1):
        child_weights = boundary_degree_map(graph, levels[level + 1])
        for cluster in sorted(levels[level].clusters, key=min):
            if len(cluster) == 1:
                entries.append(ClusterCertificate(level, cluster, "leaf"))
                continue
            if len(cluster) > CERTIFY_SIZE_CAP:
                entries.append(ClusterCertificate(level, cluster, "skipped"))
                continue
            quality = gamma / expansion_bound(decomposition, cluster, level)
            weights = {v: child_weights.get(v, 0) for v in cluster}
            ok, witness = check_expanding(graph, cluster, weights, quality)
            entries.append(ClusterCertificate(
                level, cluster, "pass" if ok else "fail", quality,
                witness.vertices if witness else None))
    return CertifyReport(entries, gamma)


def quality_ratio(graph: Graph, tree: TreeSparsifier,
                  demands: Sequence[Mapping[int, object]]
                  ) -> tuple[Fraction, list[dict]]:
    """Evaluate predicted versus optimal congestion over a demand batch."""
    rows = []
    worst = Fraction(1)
    for demand in demands:
        predicted = predict_congestion(tree, demand)
        optimal = opt_congestion(graph, demand)
        if predicted > optimal:
            raise InternalError("tree prediction exceeded the exact optimum")
        ratio = optimal / predicted if predicted else Fraction(1)
        worst = max(worst, ratio)
        rows.append({"predict": predicted, "opt": optimal, "ratio": ratio})
    return worst, rows
