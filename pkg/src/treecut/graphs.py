"""Graph, weight-function, and partition primitives plus brute-force oracles.

Vertices are integers 0..n-1.  Graphs are undirected with positive integer
capacities; parallel edges are aggregated on ingestion.  All cut arithmetic
is exact (Python integers / fractions), with numpy used only to enumerate
subsets quickly inside the brute-force oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import ArgumentError, OversizeError

#: hard cap for the exponential-enumeration oracles
BRUTE_FORCE_VERTEX_CAP = 24

#: chunk size (in masks) for vectorized subset enumeration
_CHUNK = 1 << 20


class VertexWeights(dict):
    """A vertex weight function, stored sparsely as vertex -> value.

    Missing vertices weigh 0.  Values are integers for the combinatorial
    weight functions and may be fractions for flow source/target functions.
    """

    def weight(self, v: int):
        return self.get(v, 0)

    def total(self, subset: Iterable[int] | None = None):
        if subset is None:
            return sum(self.values())
        return sum(self.get(v, 0) for v in subset)

    def restrict(self, subset: Iterable[int]) -> "VertexWeights":
        """Zero out all entries outside ``subset``."""
        keep = set(subset)
        return VertexWeights({v: w for v, w in self.items() if v in keep and w != 0})

    def support(self) -> frozenset[int]:
        return frozenset(v for v, w in self.items() if w != 0)

    def is_integral(self) -> bool:
        return all(isinstance(w, int) or (isinstance(w, Fraction) and w.denominator == 1)
                   for w in self.values())

    def is_nonnegative(self) -> bool:
        return all(w >= 0 for w in self.values())

    @classmethod
    def degrees(cls, graph: "Graph", within: Iterable[int] | None = None) -> "VertexWeights":
        """Capacity-weighted degrees, optionally inside an induced subgraph."""
        if within is None:
            return cls({v: d for v, d in enumerate(graph.degree_list()) if d > 0})
        keep = set(within)
        out: dict[int, int] = {}
        for u, v, c in graph.edges:
            if u in keep and v in keep:
                out[u] = out.get(u, 0) + c
                out[v] = out.get(v, 0) + c
        return cls(out)


@dataclass(frozen=True)
class Graph:
    """Undirected capacitated graph with aggregated integer edge capacities."""

    n: int
    edges: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for idx, (u, v, _c) in enumerate(self.edges):
            adj[u].append((v, idx))
            adj[v].append((u, idx))
        object.__setattr__(self, "_adj", tuple(tuple(a) for a in adj))
        object.__setattr__(self, "_eindex", {(u, v): i for i, (u, v, _c) in enumerate(self.edges)})

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, int]],
                   require_connected: bool = True) -> "Graph":
        """Build a graph, aggregating parallel edges and validating invariants."""
        if n < 1:
            raise ArgumentError("graph needs at least one vertex")
        agg: dict[tuple[int, int], int] = {}
        for u, v, c in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ArgumentError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise ArgumentError(f"self-loop at vertex {u} is not allowed")
            if c < 1:
                raise ArgumentError(f"edge ({u},{v}) has non-positive capacity {c}")
            key = (u, v) if u < v else (v, u)
            agg[key] = agg.get(key, 0) + c
        g = cls(n, tuple(sorted((u, v, c) for (u, v), c in agg.items())))
        if require_connected and not g.is_connected():
            raise ArgumentError("graph is disconnected; expected a connected input")
        return g

    # -- basic accessors ---------------------------------------------------

    @property
    def m(self) -> int:
        return len(self.edges)

    def total_capacity(self) -> int:
        return sum(c for _u, _v, c in self.edges)

    def vertices(self) -> range:
        return range(self.n)

    def neighbors(self, v: int) -> Iterator[tuple[int, int, int]]:
        """Yield (neighbor, edge index, capacity) for edges at ``v``."""
        for w, idx in self._adj[v]:
            yield w, idx, self.edges[idx][2]

    def capacity(self, u: int, v: int) -> int:
        key = (u, v) if u < v else (v, u)
        idx = self._eindex.get(key)
        return 0 if idx is None else self.edges[idx][2]

    def edge_index(self, u: int, v: int) -> int | None:
        return self._eindex.get((u, v) if u < v else (v, u))

    def degree_list(self) -> list[int]:
        deg = [0] * self.n
        for u, v, c in self.edges:
            deg[u] += c
            deg[v] += c
        return deg

    def edges_within(self, subset: Iterable[int]) -> list[tuple[int, int, int, int]]:
        """Edges with both endpoints in ``subset`` as (edge index, u, v, cap)."""
        keep = set(subset)
        return [(i, u, v, c) for i, (u, v, c) in enumerate(self.edges)
                if u in keep and v in keep]

    # -- connectivity ------------------------------------------------------

    def components(self, within: Iterable[int] | None = None) -> list[frozenset[int]]:
        verts = set(range(self.n)) if within is None else set(within)
        seen: set[int] = set()
        comps = []
        for start in sorted(verts):
            if start in seen:
                continue
            stack, comp = [start], {start}
            seen.add(start)
            while stack:
                v = stack.pop()
                for w, _i in self._adj[v]:
                    if w in verts and w not in seen:
                        seen.add(w)
                        comp.add(w)
                        stack.append(w)
            comps.append(frozenset(comp))
        return comps

    def is_connected(self, within: Iterable[int] | None = None) -> bool:
        return len(self.components(within)) <= 1


@dataclass(frozen=True)
class Cut:
    """A vertex subset together with its boundary capacity in some ground set."""

    vertices: frozenset[int]
    capacity: int


@dataclass(frozen=True)
class Partition:
    """Disjoint cover of a ground set by non-empty clusters."""

    clusters: tuple[frozenset[int], ...]

    def __post_init__(self):
        index: dict[int, int] = {}
        for pos, cluster in enumerate(self.clusters):
            if not cluster:
                raise ArgumentError("partition clusters must be non-empty")
            for v in cluster:
                if v in index:
                    raise ArgumentError(f"vertex {v} appears in two clusters")
                index[v] = pos
        object.__setattr__(self, "_index", index)

    @classmethod
    def of(cls, clusters: Iterable[Iterable[int]]) -> "Partition":
        normalized = tuple(sorted((frozenset(c) for c in clusters), key=min))
        return cls(normalized)

    @classmethod
    def singletons(cls, vertices: Iterable[int]) -> "Partition":
        return cls(tuple(frozenset((v,)) for v in sorted(vertices)))

    @classmethod
    def trivial(cls, vertices: Iterable[int]) -> "Partition":
        return cls((frozenset(vertices),))

    @property
    def ground(self) -> frozenset[int]:
        return frozenset(self._index)

    def cluster_of(self, v: int) -> frozenset[int]:
        return self.clusters[self._index[v]]

    def cluster_id(self, v: int) -> int:
        return self._index[v]

    def __len__(self) -> int:
        return len(self.clusters)

    def max_cluster_size(self) -> int:
        return max(len(c) for c in self.clusters)


# ---------------------------------------------------------------------------
# boundary and partition operations
# ---------------------------------------------------------------------------


def boundary_capacity(graph: Graph, subset: Iterable[int], ground: Iterable[int]) -> int:
    """cap(S, ground - S): capacity of edges of G[ground] leaving ``subset``."""
    s = set(subset)
    g = set(ground)
    if not s <= g:
        raise ArgumentError("subset must be contained in the ground set")
    total = 0
    for u, v, c in graph.edges:
        if u in g and v in g and (u in s) != (v in s):
            total += c
    return total


def boundary_degree_map(graph: Graph, partition: Partition) -> VertexWeights:
    """Per-vertex capacity of boundary edges of the partition.

    An edge is a boundary edge when its endpoints lie in different clusters,
    or when exactly one endpoint lies inside the partition's ground set.
    """
    ground = partition.ground
    out: dict[int, int] = {}
    for u, v, c in graph.edges:
        u_in, v_in = u in ground, v in ground
        if u_in and v_in:
            if partition.cluster_id(u) != partition.cluster_id(v):
                out[u] = out.get(u, 0) + c
                out[v] = out.get(v, 0) + c
        elif u_in:
            out[u] = out.get(u, 0) + c
        elif v_in:
            out[v] = out.get(v, 0) + c
    return VertexWeights(out)


def partition_boundary_degree(graph: Graph, partition: Partition,
                              subset: Iterable[int]) -> int:
    """Total boundary-edge capacity incident to ``subset``."""
    s = set(subset)
    if not s <= partition.ground:
        raise ArgumentError("subset must be contained in the partition's ground set")
    return boundary_degree_map(graph, partition).total(s)


def incident_capacity(graph: Graph, sources: Iterable[int],
                      targets: Iterable[int]) -> VertexWeights:
    """For each source vertex, the capacity of its edges into ``targets``."""
    tset = set(targets)
    out: dict[int, int] = {}
    for v in sources:
        total = 0
        for w, _i, c in graph.neighbors(v):
            if w in tset:
                total += c
        if total:
            out[v] = total
    return VertexWeights(out)


def fuse(partition: Partition, merged: Iterable[int],
         graph: Graph | None = None) -> Partition:
    """Replace a partition X by (X - T) | {T}.

    Every cluster loses the vertices of T, emptied clusters vanish, and T is
    added as a cluster of its own.  When a graph is supplied the boundary
    growth bound of the fuse operation is asserted in debug mode.
    """
    t = frozenset(merged)
    if not t:
        raise ArgumentError("cannot fuse an empty set")
    ground = partition.ground
    if not t <= ground:
        raise ArgumentError("fused set must be contained in the ground set")
    new_clusters = [c - t for c in partition.clusters]
    new_clusters = [c for c in new_clusters if c]
    new_clusters.append(t)
    fused = Partition.of(new_clusters)
    if graph is not None and __debug__:
        before = boundary_degree_map(graph, partition)
        after = boundary_degree_map(graph, fused)
        rest = ground - t
        outside = set(graph.vertices()) - ground
        bound = (before.total(ground) - before.total(t)
                 + 2 * incident_capacity(graph, t, rest).total()
                 + incident_capacity(graph, t, outside).total())
        assert after.total(ground) <= bound, "fuse boundary bound violated"
    return fused


# ---------------------------------------------------------------------------
# brute-force oracles (exponential enumeration, exact arithmetic)
# ---------------------------------------------------------------------------


def _mask_tables(graph: Graph, verts: Sequence[int], weights: Mapping[int, int],
                 lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
    """Cut capacity and weight totals for all subset masks in [lo, hi).

    Bit i of a mask corresponds to verts[i].  Values fit in int64 as long as
    totals stay below 2**62, which the callers guard.
    """
    pos = {v: i for i, v in enumerate(verts)}
    masks = np.arange(lo, hi, dtype=np.int64)
    caps = np.zeros(hi - lo, dtype=np.int64)
    for u, v, c in graph.edges:
        if u in pos and v in pos:
            crossing = ((masks >> pos[u]) ^ (masks >> pos[v])) & 1
            caps += c * crossing
    wts = np.zeros(hi - lo, dtype=np.int64)
    for v, w in weights.items():
        if v in pos and w:
            wts += int(w) * ((masks >> pos[v]) & 1)
    return caps, wts


def _check_enumeration_size(verts: Sequence[int], totals: Iterable[int]):
    if len(verts) > BRUTE_FORCE_VERTEX_CAP:
        raise OversizeError(
            f"refusing exponential enumeration over {len(verts)} > "
            f"{BRUTE_FORCE_VERTEX_CAP} vertices")
    if any(t >= (1 << 62) for t in totals):
        raise OversizeError("weights too large for vectorized enumeration")


def _mask_set(mask: int, verts: Sequence[int]) -> frozenset[int]:
    return frozenset(verts[i] for i in range(len(verts)) if (mask >> i) & 1)


def brute_force_sparsest_cut(graph: Graph, pi: Mapping[int, int]) -> tuple[Cut, Fraction]:
    """Exact sparsest cut by subset enumeration.

    Minimizes cap(S, V-S) / pi(S) over all S with 0 < pi(S) <= pi(V-S);
    ties resolved toward the lexicographically smallest bitmask.
    """
    verts = list(range(graph.n))
    total_pi = sum(int(pi.get(v, 0)) for v in verts)
    if any(int(pi.get(v, 0)) < 0 for v in verts):
        raise ArgumentError("pi must be non-negative")
    if total_pi == 0:
        raise ArgumentError("pi must not be identically zero")
    if sum(1 for v in verts if pi.get(v, 0)) == 1:
        raise ArgumentError("no valid cut: all weight sits on a single vertex")
    _check_enumeration_size(verts, [total_pi, graph.total_capacity()])

    nmasks = 1 << graph.n
    best_ratio = None
    best_mask = None
    for lo in range(1, nmasks, _CHUNK):
        hi = min(lo + _CHUNK, nmasks)
        caps, wts = _mask_tables(graph, verts, pi, lo, hi)
        valid = (wts > 0) & (2 * wts <= total_pi)
        if not valid.any():
            continue
        ratios = np.where(valid, caps / np.maximum(wts, 1), np.inf)
        floor = ratios.min()
        # near-minimal candidates get exact comparison
        cand = np.nonzero(ratios <= floor * (1 + 1e-9) + 1e-12)[0]
        for off in cand:
            mask = lo + int(off)
            ratio = Fraction(int(caps[off]), int(wts[off]))
            if best_ratio is None or ratio < best_ratio or \
                    (ratio == best_ratio and mask < best_mask):
                best_ratio, best_mask = ratio, mask
    assert best_mask is not None
    subset = _mask_set(best_mask, verts)
    return Cut(subset, boundary_capacity(graph, subset, verts)), best_ratio


def check_expanding(graph: Graph, cluster: Iterable[int], pi: Mapping[int, int],
                    quality) -> tuple[bool, Cut | None]:
    """Exhaustively test whether G[cluster] is pi-expanding with the given quality.

    Every X inside the cluster with pi(X) <= pi(cluster - X) must satisfy
    cap(X, cluster - X) >= quality * pi(X); on failure the first violating
    subset (by mask order) is returned as a witness.
    """
    verts = sorted(set(cluster))
    q = Fraction(quality)
    if q < 0:
        raise ArgumentError("quality must be non-negative")
    total_pi = sum(int(pi.get(v, 0)) for v in verts)
    _check_enumeration_size(verts, [total_pi, graph.total_capacity()])
    if len(verts) <= 1 or total_pi == 0 or q == 0:
        return True, None

    qf = float(q)
    nmasks = 1 << len(verts)
    for lo in range(1, nmasks, _CHUNK):
        hi = min(lo + _CHUNK, nmasks)
        caps, wts = _mask_tables(graph, verts, pi, lo, hi)
        small_side = (wts > 0) & (2 * wts <= total_pi)
        suspect = small_side & (caps < qf * wts * (1 + 1e-9) + 1e-9)
        for off in np.nonzero(suspect)[0]:
            if int(caps[off]) * q.denominator < q.numerator * int(wts[off]):
                witness = _mask_set(lo + int(off), verts)
                return False, Cut(witness, int(caps[off]))
    return True, None


def check_laminar(decomposition) -> bool:
    """Validate a refinement chain: one root partition, each level refining it."""
    levels = getattr(decomposition, "levels", decomposition)
    levels = list(levels)
    if not levels:
        return False
    if len(levels[0].clusters) != 1:
        return False
    ground = levels[0].ground
    for prev, cur in zip(levels, levels[1:]):
        if cur.ground != ground:
            return False
        for cluster in cur.clusters:
            anchor = prev.cluster_of(min(cluster))
            if not cluster <= anchor:
                return False
    return True
