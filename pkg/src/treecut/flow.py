"""Exact max flow, fair cut/flow pairs, path decomposition, and congestion oracles.

The flow engine is a Dinic solver with capacity scaling over integer
capacities.  Rational source/target functions are handled by scaling the
whole instance to a common denominator, solving integrally, and reporting
flows in fixed-denominator units.  Flows returned by this module are always
cycle-free, so path decompositions reproduce them edge-exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import ArgumentError, ConsistencyError, InternalError
from .graphs import BRUTE_FORCE_VERTEX_CAP, Graph, _check_enumeration_size, _mask_tables

import numpy as np


# ---------------------------------------------------------------------------
# flow assignment
# ---------------------------------------------------------------------------


@dataclass
class FlowAssignment:
    """Antisymmetric per-edge flow in fixed-denominator units.

    ``nums[e]`` is the signed numerator of the flow on edge e, oriented from
    the stored lower endpoint to the higher one; the actual flow value is
    nums[e] / denom.  Absent edges carry zero flow.
    """

    graph: Graph
    denom: int = 1
    nums: dict[int, int] = field(default_factory=dict)

    def value(self, u: int, v: int) -> Fraction:
        idx = self.graph.edge_index(u, v)
        if idx is None or idx not in self.nums:
            return Fraction(0)
        num = self.nums[idx]
        eu, _ev, _c = self.graph.edges[idx]
        return Fraction(num if u == eu else -num, self.denom)

    def net_numerator(self, v: int) -> int:
        """Numerator of the net flow out of ``v``."""
        total = 0
        for _w, idx, _c in self.graph.neighbors(v):
            num = self.nums.get(idx, 0)
            eu = self.graph.edges[idx][0]
            total += num if v == eu else -num
        return total

    def net(self, v: int) -> Fraction:
        return Fraction(self.net_numerator(v), self.denom)

    def is_zero(self) -> bool:
        return all(n == 0 for n in self.nums.values())

    def serialize(self) -> str:
        """One line "u v num den" per directed edge with positive flow."""
        lines = []
        for idx in sorted(self.nums):
            num = self.nums[idx]
            if num == 0:
                continue
            u, v, _c = self.graph.edges[idx]
            if num < 0:
                u, v, num = v, u, -num
            lines.append(f"{u} {v} {num} {self.denom}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Dinic solver with capacity scaling
# ---------------------------------------------------------------------------


class _Dinic:
    """Max flow on an arc list; arcs are added in mutually-reverse pairs."""

    def __init__(self, n: int):
        self.n = n
        self.to: list[int] = []
        self.res: list[int] = []
        self.head: list[list[int]] = [[] for _ in range(n)]

    def add(self, u: int, v: int, cap_uv: int, cap_vu: int) -> int:
        idx = len(self.to)
        self.to.append(v)
        self.res.append(cap_uv)
        self.head[u].append(idx)
        self.to.append(u)
        self.res.append(cap_vu)
        self.head[v].append(idx + 1)
        return idx

    def _bfs(self, s: int, t: int, floor: int) -> list[int] | None:
        level = [-1] * self.n
        level[s] = 0
        queue = [s]
        for v in queue:
            for idx in self.head[v]:
                w = self.to[idx]
                if level[w] < 0 and self.res[idx] >= floor:
                    level[w] = level[v] + 1
                    queue.append(w)
        return level if level[t] >= 0 else None

    def _blocking(self, s: int, t: int, floor: int, level: list[int]) -> int:
        pushed_total = 0
        cursor = [0] * self.n
        path: list[int] = []
        v = s
        while True:
            if v == t:
                bottleneck = min(self.res[idx] for idx in path)
                for idx in path:
                    self.res[idx] -= bottleneck
                    self.res[idx ^ 1] += bottleneck
                pushed_total += bottleneck
                # retreat to the first saturated arc on the path
                for pos, idx in enumerate(path):
                    if self.res[idx] < floor:
                        path = path[:pos]
                        break
                v = self.to[path[-1]] if path else s
                continue
            advanced = False
            while cursor[v] < len(self.head[v]):
                idx = self.head[v][cursor[v]]
                w = self.to[idx]
                if self.res[idx] >= floor and level[w] == level[v] + 1:
                    path.append(idx)
                    v = w
                    advanced = True
                    break
                cursor[v] += 1
            if advanced:
                continue
            if v == s:
                return pushed_total
            level[v] = -1  # dead end
            last = path.pop()
            v = self.to[last ^ 1]
            cursor[v] += 1

    def solve(self, s: int, t: int) -> int:
        maxcap = max(self.res, default=0)
        if maxcap == 0:
            return 0
        flow = 0
        floor = 1 << (maxcap.bit_length() - 1)
        while floor >= 1:
            while True:
                level = self._bfs(s, t, floor)
                if level is None:
                    break
                flow += self._blocking(s, t, floor, level)
            floor //= 2
        return flow

    def reachable(self, s: int) -> frozenset[int]:
        seen = {s}
        stack = [s]
        while stack:
            v = stack.pop()
            for idx in self.head[v]:
                w = self.to[idx]
                if self.res[idx] > 0 and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return frozenset(seen)


def _cancel_cycles(vertices: Iterable[int], flow: dict[tuple[int, int], int]):
    """Remove circulations from a positive arc flow, in place.

    Net vertex flows are preserved; only cyclic components vanish.  This keeps
    every flow produced by the engine exactly path-decomposable.
    """
    adj: dict[int, list[int]] = {}
    for (u, v), x in flow.items():
        if x > 0:
            adj.setdefault(u, []).append(v)
    cursor = {v: 0 for v in adj}
    state: dict[int, int] = {}  # 1 on stack, 2 done
    for root in sorted(adj):
        if state.get(root):
            continue
        stack = [root]
        state[root] = 1
        while stack:
            v = stack[-1]
            out = adj.get(v, [])
            advanced = False
            while cursor.get(v, 0) < len(out):
                w = out[cursor[v]]
                if flow.get((v, w), 0) <= 0:
                    cursor[v] += 1
                    continue
                if state.get(w) == 1:
                    # found a cycle along the stack: cancel it
                    pos = stack.index(w)
                    cycle = stack[pos:] + [w]
                    slack = min(flow[(a, b)] for a, b in zip(cycle, cycle[1:]))
                    for a, b in zip(cycle, cycle[1:]):
                        flow[(a, b)] -= slack
                    for popped in stack[pos + 1:]:
                        state[popped] = 0
                    del stack[pos + 1:]
                    advanced = True
                    break
                if state.get(w) != 2:
                    stack.append(w)
                    state[w] = 1
                    advanced = True
                    break
                cursor[v] += 1
            if not advanced:
                state[v] = 2
                stack.pop()


def _run_max_flow(graph: Graph, supply: Mapping[int, int], demand: Mapping[int, int],
                  within: Iterable[int] | None = None, cap_scale: int = 1):
    """Integral max flow between virtual terminals.

    Returns (value, edge flow numerators, source usage, sink usage, reachable
    vertex set from the super-source in the residual graph).  ``cap_scale``
    multiplies graph edge capacities only.
    """
    verts = set(range(graph.n)) if within is None else set(within)
    s_star, t_star = graph.n, graph.n + 1
    solver = _Dinic(graph.n + 2)
    edge_arc: dict[int, int] = {}
    for idx, u, v, c in graph.edges_within(verts):
        edge_arc[idx] = solver.add(u, v, c * cap_scale, c * cap_scale)
    src_arc: dict[int, int] = {}
    for v, cap in sorted(supply.items()):
        if cap < 0:
            raise ArgumentError("supplies must be non-negative")
        if cap > 0 and v in verts:
            src_arc[v] = solver.add(s_star, v, int(cap), 0)
    snk_arc: dict[int, int] = {}
    for v, cap in sorted(demand.items()):
        if cap < 0:
            raise ArgumentError("demands must be non-negative")
        if cap > 0 and v in verts:
            snk_arc[v] = solver.add(v, t_star, int(cap), 0)

    value = solver.solve(s_star, t_star)

    arc_flow: dict[tuple[int, int], int] = {}
    for idx, arc in edge_arc.items():
        u, v, c = graph.edges[idx]
        pushed = (solver.res[arc ^ 1] - solver.res[arc]) // 2
        if pushed > 0:
            arc_flow[(u, v)] = arc_flow.get((u, v), 0) + pushed
        elif pushed < 0:
            arc_flow[(v, u)] = arc_flow.get((v, u), 0) - pushed
    _cancel_cycles(verts, arc_flow)

    nums: dict[int, int] = {}
    for idx, arc in edge_arc.items():
        u, v, _c = graph.edges[idx]
        net = arc_flow.get((u, v), 0) - arc_flow.get((v, u), 0)
        if net:
            nums[idx] = net
    src_used = {v: int(supply[v]) - solver.res[arc] for v, arc in src_arc.items()}
    snk_used = {v: int(demand[v]) - solver.res[arc] for v, arc in snk_arc.items()}
    return value, nums, src_used, snk_used, solver.reachable(s_star)


def max_flow(graph: Graph, supply: Mapping[int, int], demand: Mapping[int, int],
             within: Iterable[int] | None = None) -> tuple[int, FlowAssignment]:
    """Maximum flow from a super-source over ``supply`` to a super-sink over ``demand``."""
    value, nums, _su, _du, _reach = _run_max_flow(graph, supply, demand, within)
    return value, FlowAssignment(graph, 1, nums)


# ---------------------------------------------------------------------------
# fair cuts
# ---------------------------------------------------------------------------


@dataclass
class FairCutResult:
    cut: frozenset[int]
    flow: FlowAssignment
    alpha: Fraction


def _common_denominator(values: Iterable[Fraction]) -> int:
    d = 1
    for v in values:
        d = d * v.denominator // math.gcd(d, v.denominator)
    return d


def fair_cut(graph: Graph, source_w: Mapping[int, object], target_w: Mapping[int, object],
             alpha=1, within: Iterable[int] | None = None,
             cap_scale: int = 1) -> FairCutResult:
    """Compute a fair (s, t)-cut/flow pair via the terminal reduction.

    Net weights s(v)-t(v) become capacities of arcs from a super-source (when
    positive) or to a super-sink (when negative); an exact max flow then makes
    the pair 1-fair, which satisfies the fairness contract for every
    alpha >= 1.  The cut is the residual-reachable side minus the terminal.
    """
    alpha = Fraction(alpha)
    if alpha < 1:
        raise ArgumentError("alpha must be at least 1")
    verts = set(range(graph.n)) if within is None else set(within)
    s_map = {v: Fraction(w) for v, w in source_w.items() if v in verts}
    t_map = {v: Fraction(w) for v, w in target_w.items() if v in verts}
    if any(w < 0 for w in s_map.values()) or any(w < 0 for w in t_map.values()):
        raise ArgumentError("source and target weights must be non-negative")

    net = {v: s_map.get(v, Fraction(0)) - t_map.get(v, Fraction(0))
           for v in set(s_map) | set(t_map)}
    denom = _common_denominator(net.values())
    supply = {v: int(x * denom) for v, x in net.items() if x > 0}
    demand = {v: int(-x * denom) for v, x in net.items() if x < 0}

    _value, nums, _su, _du, reach = _run_max_flow(
        graph, supply, demand, verts, cap_scale=cap_scale * denom)
    cut = frozenset(reach - {graph.n, graph.n + 1})
    return FairCutResult(cut, FlowAssignment(graph, denom, nums), alpha)


#: verify_fair_cut property indices
FAIRNESS_PROPERTIES = {
    0: "flow feasibility",
    1: "net sources do not send too much",
    2: "net targets do not absorb too much",
    3: "net sources outside the cut are nearly saturated",
    4: "net targets inside the cut are nearly saturated",
    5: "cut edges are nearly saturated and carry no reverse flow",
    6: "cut capacity plus absorbed target weight bounded by alpha * source weight",
    7: "cut capacity plus outside source weight bounded by alpha * outside target weight",
}


def verify_fair_cut(graph: Graph, source_w: Mapping[int, object],
                    target_w: Mapping[int, object], alpha, cut: Iterable[int],
                    flow: FlowAssignment, within: Iterable[int] | None = None,
                    cap_scale: int = 1) -> tuple[bool, list[int]]:
    """Exhaustively check the fair cut/flow properties; returns violated indices."""
    alpha = Fraction(alpha)
    verts = set(range(graph.n)) if within is None else set(within)
    u_side = frozenset(cut)
    violated: set[int] = set()

    for idx, u, v, c in graph.edges_within(verts):
        if abs(flow.value(u, v)) > cap_scale * c:
            violated.add(0)

    cut_cap = 0
    for idx, u, v, c in graph.edges_within(verts):
        if (u in u_side) != (v in u_side):
            cut_cap += c
            inner, outer = (u, v) if u in u_side else (v, u)
            if flow.value(inner, outer) * alpha < Fraction(cap_scale * c):
                violated.add(5)

    s_total_u = t_total_u = Fraction(0)
    s_total_out = t_total_out = Fraction(0)
    for v in verts:
        s = Fraction(source_w.get(v, 0))
        t = Fraction(target_w.get(v, 0))
        if v in u_side:
            s_total_u += s
            t_total_u += t
        else:
            s_total_out += s
            t_total_out += t
        net = s - t
        f = flow.net(v)
        if net >= 0 and not (0 <= f <= net):
            violated.add(1)
        if net <= 0 and not (net <= f <= 0):
            violated.add(2)
        if net >= 0 and v not in u_side and f * alpha < net:
            violated.add(3)
        if net <= 0 and v in u_side and f * alpha > net:
            violated.add(4)

    if Fraction(cut_cap * cap_scale) + t_total_u > alpha * s_total_u:
        violated.add(6)
    if Fraction(cut_cap * cap_scale) + s_total_out > alpha * t_total_out:
        violated.add(7)
    return not violated, sorted(violated)


# ---------------------------------------------------------------------------
# path decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathFlow:
    start: int
    end: int
    vertices: tuple[int, ...]
    weight: int  # in numerator units of the decomposed assignment


@dataclass
class PathDecomposition:
    paths: tuple[PathFlow, ...]
    denom: int

    def accumulate(self, graph: Graph) -> FlowAssignment:
        """Re-sum the paths into a flow assignment (round-trip check helper)."""
        nums: dict[int, int] = {}
        for p in self.paths:
            for a, b in zip(p.vertices, p.vertices[1:]):
                idx = graph.edge_index(a, b)
                sign = 1 if a == graph.edges[idx][0] else -1
                nums[idx] = nums.get(idx, 0) + sign * p.weight
        return FlowAssignment(graph, self.denom, {k: v for k, v in nums.items() if v})


def path_decomposition(graph: Graph, flow: FlowAssignment,
                       sources: Iterable[int] | None = None,
                       sinks: Iterable[int] | None = None) -> PathDecomposition:
    """Peel a cycle-free flow into weighted paths from excess to deficit vertices.

    Per-edge path weights sum to the flow exactly.  Vertices with nonzero net
    flow outside the declared source/sink sets raise a consistency error, as
    does any leftover circulation.
    """
    excess = {}
    for v in graph.vertices():
        num = flow.net_numerator(v)
        if num:
            excess[v] = num
    src_ok = set(sources) if sources is not None else None
    snk_ok = set(sinks) if sinks is not None else None
    for v, num in excess.items():
        if num > 0 and src_ok is not None and v not in src_ok:
            raise ConsistencyError(f"undeclared excess at vertex {v}")
        if num < 0 and snk_ok is not None and v not in snk_ok:
            raise ConsistencyError(f"undeclared deficit at vertex {v}")

    # outgoing remaining flow per vertex
    out: dict[int, list[list[int]]] = {}
    for idx, num in flow.nums.items():
        if num == 0:
            continue
        u, v, _c = graph.edges[idx]
        a, b = (u, v) if num > 0 else (v, u)
        out.setdefault(a, []).append([b, abs(num)])
    cursor = {v: 0 for v in out}

    paths: list[PathFlow] = []
    for start in sorted(v for v, e in excess.items() if e > 0):
        while excess.get(start, 0) > 0:
            walk = [start]
            arcs: list[list[int]] = []
            v = start
            for _hop in range(graph.n + 1):
                if v != start and excess.get(v, 0) < 0:
                    break
                lst = out.get(v, [])
                while cursor.get(v, 0) < len(lst) and lst[cursor[v]][1] == 0:
                    cursor[v] += 1
                if cursor.get(v, 0) >= len(lst):
                    raise ConsistencyError(f"flow is not conservative at vertex {v}")
                arc = lst[cursor[v]]
                arcs.append(arc)
                v = arc[0]
                walk.append(v)
            else:
                raise ConsistencyError("flow contains a directed cycle")
            bottleneck = min(excess[start], -excess[v], min(a[1] for a in arcs))
            for arc in arcs:
                arc[1] -= bottleneck
            excess[start] -= bottleneck
            excess[v] += bottleneck
            paths.append(PathFlow(start, v, tuple(walk), bottleneck))

    if any(arc[1] for lst in out.values() for arc in lst):
        raise ConsistencyError("flow contains a circulation not covered by paths")
    if len(paths) > graph.m + graph.n:
        raise InternalError("path decomposition exceeded the m + n path bound")
    return PathDecomposition(tuple(paths), flow.denom)


# ---------------------------------------------------------------------------
# optimal congestion for a single-commodity demand
# ---------------------------------------------------------------------------


def _demand_parts(demand: Mapping[int, object]):
    d = {v: Fraction(x) for v, x in demand.items() if x}
    if sum(d.values(), Fraction(0)) != 0:
        raise ArgumentError("demand must sum to zero")
    if any(x.denominator != 1 for x in d.values()):
        raise ArgumentError("demand values must be integral")
    pos = {v: int(x) for v, x in d.items() if x > 0}
    neg = {v: int(-x) for v, x in d.items() if x < 0}
    return pos, neg


def _routable(graph: Graph, pos: Mapping[int, int], neg: Mapping[int, int],
              lam: Fraction) -> bool:
    """Can the demand be routed with congestion at most ``lam``?  Exact."""
    total = sum(pos.values())
    supply = {v: x * lam.denominator for v, x in pos.items()}
    sink = {v: x * lam.denominator for v, x in neg.items()}
    value, _n, _s, _d, _r = _run_max_flow(graph, supply, sink,
                                          cap_scale=lam.numerator)
    return value == total * lam.denominator


def opt_congestion(graph: Graph, demand: Mapping[int, object]) -> Fraction:
    """Exact optimal congestion for routing a balanced single-commodity demand.

    Found as the smallest lambda for which scaled capacities admit a
    saturating flow, via binary search down to the spacing of candidate
    cut ratios followed by exact rational recovery.
    """
    pos, neg = _demand_parts(demand)
    if not pos:
        return Fraction(0)
    if not graph.is_connected():
        raise ArgumentError("optimal congestion requires a connected graph")

    total = sum(pos.values())
    cap_bound = graph.total_capacity()  # any cut capacity lies in [1, cap_bound]
    lo, hi = Fraction(0), Fraction(total)
    if not _routable(graph, pos, neg, hi):
        raise InternalError("congestion upper bound failed; unreachable for valid input")
    gap = Fraction(1, cap_bound * cap_bound)
    while hi - lo > gap:
        mid = (lo + hi) / 2
        if _routable(graph, pos, neg, mid):
            hi = mid
        else:
            lo = mid
    candidate = Fraction((lo + hi) / 2).limit_denominator(cap_bound)
    if lo < candidate <= hi and _routable(graph, pos, neg, candidate):
        return candidate
    # breakpoint recovery failed; fall back to enumeration when small enough
    if graph.n <= BRUTE_FORCE_VERTEX_CAP:
        return brute_force_opt_congestion(graph, demand)
    raise InternalError("exact congestion recovery failed on an oversize graph")


def brute_force_opt_congestion(graph: Graph, demand: Mapping[int, object]) -> Fraction:
    """Independent oracle: max over all cuts of |d(S)| / cap(S, V-S)."""
    pos, neg = _demand_parts(demand)
    if not pos:
        return Fraction(0)
    verts = list(range(graph.n))
    dmap = {v: int(Fraction(x)) for v, x in demand.items() if x}
    _check_enumeration_size(verts, [graph.total_capacity(),
                                    sum(abs(x) for x in dmap.values())])
    best = Fraction(0)
    nmasks = 1 << (graph.n - 1)  # fix the top vertex outside S
    for lo in range(1, nmasks, 1 << 20):
        hi = min(lo + (1 << 20), nmasks)
        caps, dS = _mask_tables(graph, verts, dmap, lo, hi)
        absd = np.abs(dS)
        with np.errstate(divide="ignore"):
            ratios = np.where(absd > 0, absd / np.maximum(caps, 1), 0.0)
        cand = np.nonzero(ratios >= ratios.max() * (1 - 1e-9) - 1e-12)[0]
        for off in cand:
            if caps[off] == 0:
                if absd[off] > 0:
                    raise ArgumentError("demand crosses a zero-capacity cut")
                continue
            ratio = Fraction(int(absd[off]), int(caps[off]))
            if ratio > best:
                best = ratio
    return best
