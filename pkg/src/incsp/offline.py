"""Recursion tree over an insertion timeline.

The timeline [0, m] is halved recursively; a node covering [lo, hi] owns
the midpoint time mid = (lo + hi) / 2.  A vertex is *alive* at mid when it
is alive at both interval ends and its estimates there differ; everything
else is *dead* and silently keeps the estimate of its nearest alive
ancestor.  Distances at mid come from one Dijkstra over a patch graph:
alive edges between alive vertices are copied, and alive edges whose tail
is dead are folded into source edges weighted by the tail's settled
estimate plus the edge weight.  Results are rounded up onto the fine grid,
so a vertex can only be alive where its rounded estimate actually moves,
which keeps the total alive work near-linear.

Anchors: time m stores exact distances over the full timeline, time 0 is
implicit (0 at the source, unreachable elsewhere).  Both ends of every
interval are midpoints of shallower nodes or anchors, so estimate lookups
resolve along the ancestor chain, whose alive flags are monotone.

Query tables: while solving, each vertex records the earliest time its
estimate entered each coarse grid cell.  After a fill-and-floor pass the
rows are non-increasing, and a query binary-searches the row.

An OfflineStructure is immutable after build as far as queries are
concerned; the online engine mutates it only through resolve_subtree and
recompute_base.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from heapq import heappop, heappush

from .bucketing import BucketTable, derive_internal_epsilon, make_table
from .model import UNREACHABLE, EdgeInsert, ProblemInstance


def shallowest_midpoint(a: int, b: int) -> int:
    """The unique time in [a, b] with maximal 2-adic valuation.

    This is the midpoint of the shallowest recursion node whose interval
    contains [a, b]; the node's interval strictly encloses [a, b].
    """
    if not 1 <= a <= b:
        raise ValueError("empty or invalid midpoint range")
    for k in range(b.bit_length(), -1, -1):
        step = 1 << k
        candidate = (a + step - 1) >> k << k
        if candidate <= b and candidate >= step:
            return candidate
    raise AssertionError("unreachable: k=0 always yields a candidate")


def time_ancestors(t: int, m: int) -> list[int]:
    """Midpoints of the strict ancestors of the node owning time t, root first."""
    out = []
    half = m // 2
    while half:
        anchor = (t // (2 * half)) * (2 * half) + half
        if anchor == t:
            break
        out.append(anchor)
        half //= 2
    return out


def tree_level(t: int, m: int) -> int:
    """Depth of the node owning midpoint t; the root is level 1."""
    if not 0 < t < m:
        raise ValueError("internal midpoints lie strictly inside the timeline")
    v2 = (t & -t).bit_length() - 1
    return m.bit_length() - 1 - v2


@dataclass
class RecursionNode:
    lo: int
    hi: int
    mid: int
    level: int
    alive_estimates: dict[int, float]
    alive_edges: list[int]


class BuildStats:
    """Work counters for one full build."""

    def __init__(self, n: int, m: int):
        self.alive_edges_per_node = [0] * m  # indexed by midpoint
        self.alive_nodes_per_vertex = [0] * n
        self.total_alive_edges = 0
        self.scan_work = 0
        self.nodes_solved = 0

    def node_solved(self, mid, scanned, alive_edge_count, alive_vertices):
        self.alive_edges_per_node[mid] = alive_edge_count
        for v in alive_vertices:
            self.alive_nodes_per_vertex[v] += 1
        self.total_alive_edges += alive_edge_count
        self.scan_work += scanned
        self.nodes_solved += 1


def _dijkstra_adj(adj, source):
    """Plain heap Dijkstra over a dict-of-lists adjacency; returns a dist dict."""
    dist = {source: 0}
    heap = [(0, source)]
    while heap:
        d, u = heappop(heap)
        if d > dist.get(u, UNREACHABLE):
            continue
        for v, w in adj.get(u, ()):
            nd = d + w
            if nd < dist.get(v, UNREACHABLE):
                dist[v] = nd
                heappush(heap, (nd, v))
    return dist


def exact_prefix_distances(edges, n: int, source: int):
    """Exact distances over the given edges; integer arithmetic throughout."""
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for e in edges:
        adj[e.tail].append((e.head, e.weight))
    dist: list[float] = [UNREACHABLE] * n
    dist[source] = 0
    heap = [(0, source)]
    while heap:
        d, u = heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heappush(heap, (nd, v))
    return dist


class OfflineStructure:
    """Recursion tree plus query tables for one source."""

    def __init__(self, instance: ProblemInstance, table: BucketTable, with_entry_times: bool):
        m = instance.m
        if m < 2 or m & (m - 1):
            raise ValueError("build requires a power-of-two timeline of length >= 2")
        self.n = instance.n
        self.W = instance.W
        self.m = m
        self.source = instance.source
        self.epsilon_input = instance.epsilon
        self.table = table
        self.seq = instance.sigma  # any object with position_of() and ids()
        self.edges_by_id: dict[int, EdgeInsert] = {e.edge_id: e for e in instance.sigma}
        self.nodes: list[RecursionNode | None] = [None] * m
        self.base_m: list[float] = []
        self.unset = m + 1  # sentinel above every valid time
        self.entry_times: list[list[int]] | None = None
        if with_entry_times:
            cells = len(table.coarse)
            self.entry_times = [[self.unset] * cells for _ in range(self.n)]
        self.stats = BuildStats(self.n, m)

    # -- estimate resolution -------------------------------------------------

    def _anchor_estimate(self, v: int, t: int) -> float:
        if t == 0:
            return 0 if v == self.source else UNREACHABLE
        return self.base_m[v]

    def _resolve_above(self, v: int, t: int) -> float:
        """Estimate of v at time t for v dead at the node owning t.

        Alive flags are monotone along the ancestor chain, so binary search
        locates the deepest alive ancestor; when none exists the estimates
        at both timeline ends agree and the anchor value is returned.
        """
        chain = time_ancestors(t, self.m)
        lo, hi = 0, len(chain)
        while lo < hi:
            mid = (lo + hi) // 2
            if v in self.nodes[chain[mid]].alive_estimates:
                lo = mid + 1
            else:
                hi = mid
        if lo == 0:
            return self.base_m[v]
        return self.nodes[chain[lo - 1]].alive_estimates[v]

    def estimate_at(self, v: int, t: int) -> float:
        """The rounded estimate the structure holds for v at time t."""
        if not 0 <= t <= self.m:
            raise ValueError("time out of range")
        if not 0 <= v < self.n:
            raise ValueError("vertex id out of range")
        if t == 0 or t == self.m:
            return self._anchor_estimate(v, t)
        node = self.nodes[t]
        est = node.alive_estimates.get(v)
        if est is not None:
            return est
        return self._resolve_above(v, t)

    # -- solving -------------------------------------------------------------

    def _endpoint(self, v: int, t: int, node: RecursionNode | None) -> tuple[bool, float]:
        """(alive, estimate) of v at an interval end; ends are anchors or ancestors."""
        if node is None:
            return True, self._anchor_estimate(v, t)
        est = node.alive_estimates.get(v)
        if est is not None:
            return True, est
        return False, self._resolve_above(v, t)

    def _solve(self, lo: int, hi: int, edges_hi: list[int], sink, update_entry: bool) -> None:
        """Solve the node covering [lo, hi] and recurse into its children.

        edges_hi lists the alive edges at time hi; alive edges here are a
        subset of those, and the right child filters from the same list.
        """
        mid = (lo + hi) // 2
        node_lo = self.nodes[lo] if lo > 0 else None
        node_hi = self.nodes[hi] if hi < self.m else None
        pos = self.seq.position_of
        edges_of = self.edges_by_id

        alive: dict[int, bool] = {}
        alive_edges: list[int] = []
        for eid in edges_hi:
            v = edges_of[eid].head
            state = alive.get(v)
            if state is None:
                alive_lo, est_lo = self._endpoint(v, lo, node_lo)
                if alive_lo:
                    alive_hi, est_hi = self._endpoint(v, hi, node_hi)
                    state = alive_hi and est_lo != est_hi
                else:
                    state = False
                alive[v] = state
            if state and pos(eid) <= mid:
                alive_edges.append(eid)
        alive_set = {v for v, a in alive.items() if a}

        # Patch graph: alive tails copy their edge, dead tails fold into the
        # source using their settled estimate at mid (resolved strictly above
        # this node; the node itself is being recomputed).
        src = self.source
        adj: dict[int, list[tuple[int, float]]] = {v: [] for v in alive_set}
        adj.setdefault(src, [])
        best_from_source: dict[int, float] = {}
        dead_tail_cache: dict[int, float] = {}
        for eid in alive_edges:
            e = edges_of[eid]
            u = e.tail
            if u in alive_set:
                adj[u].append((e.head, e.weight))
                continue
            du = dead_tail_cache.get(u)
            if du is None:
                du = 0 if u == src else self._resolve_above(u, mid)
                dead_tail_cache[u] = du
            if du == UNREACHABLE:
                continue
            length = du + e.weight
            v = e.head
            if length < best_from_source.get(v, UNREACHABLE):
                best_from_source[v] = length
        for v, length in best_from_source.items():
            adj[src].append((v, length))

        dist = _dijkstra_adj(adj, src)
        table = self.table
        estimates: dict[int, float] = {}
        rows = self.entry_times
        for v in alive_set:
            value = table.round_up_value(dist.get(v, UNREACHABLE))
            estimates[v] = value
            if update_entry and value != UNREACHABLE:
                row = rows[v]
                cell = table.coarse_cell_of_value(value)
                if mid < row[cell]:
                    row[cell] = mid
        self.nodes[mid] = RecursionNode(
            lo=lo,
            hi=hi,
            mid=mid,
            level=tree_level(mid, self.m),
            alive_estimates=estimates,
            alive_edges=alive_edges,
        )
        sink.node_solved(mid, len(edges_hi), len(alive_edges), alive_set)
        if hi - lo > 2:
            self._solve(lo, mid, alive_edges, sink, update_entry)
            self._solve(mid, hi, edges_hi, sink, update_entry)

    def resolve_subtree(self, lo: int, hi: int, sink, update_entry: bool = False) -> None:
        """(Re)solve the node covering [lo, hi] and all of its descendants."""
        if hi == self.m:
            edges_hi = self.seq.ids()
        else:
            edges_hi = self.nodes[hi].alive_edges
        self._solve(lo, hi, edges_hi, sink, update_entry)

    def recompute_base(self) -> bool:
        """Refresh the exact distances at time m; True when anything moved."""
        edges = [self.edges_by_id[eid] for eid in self.seq.ids()]
        new = exact_prefix_distances(edges, self.n, self.source)
        changed = new != self.base_m
        self.base_m = new
        return changed

    # -- query tables ----------------------------------------------------------

    def _record_anchor_entries(self) -> None:
        rows = self.entry_times
        table = self.table
        rows[self.source][0] = 0  # estimate 0 before anything arrives
        for v, value in enumerate(self.base_m):
            if value != UNREACHABLE:
                cell = table.coarse_cell_of_value(value)
                if self.m < rows[v][cell]:
                    rows[v][cell] = self.m

    def _finalize_entry_times(self) -> None:
        # One ascending pass both fills gaps from the last recorded entry and
        # floors the row into non-increasing shape; every surviving value is a
        # genuine witness time for its cell or a smaller one.
        for row in self.entry_times:
            carry = self.unset
            for i, value in enumerate(row):
                if value < carry:
                    carry = value
                row[i] = carry

    def query(self, v: int, t: int) -> float:
        return self.query_with_cost(v, t)[0]

    def query_with_cost(self, v: int, t: int) -> tuple[float, int]:
        """Approximate distance at time t plus the comparison count spent."""
        if self.entry_times is None:
            raise ValueError("structure was built without query tables")
        if not 0 <= v < self.n:
            raise ValueError("vertex id out of range")
        if not 0 <= t <= self.m:
            raise ValueError("time out of range")
        if v == self.source:
            return 0.0, 0
        row = self.entry_times[v]
        lo, hi = 0, len(row)
        comparisons = 0
        while lo < hi:
            mid = (lo + hi) // 2
            comparisons += 1
            if row[mid] <= t:
                hi = mid
            else:
                lo = mid + 1
        if lo == len(row):
            return UNREACHABLE, comparisons
        return self.table.coarse[lo], comparisons


def build_offline(
    instance: ProblemInstance,
    table: BucketTable | None = None,
    with_entry_times: bool = True,
) -> OfflineStructure:
    """Build the full structure for a padded instance.

    A shared BucketTable may be passed in (the all-pairs engine builds n
    structures against one table); it must match the instance parameters.
    """
    eps_internal = derive_internal_epsilon(instance.epsilon)
    if table is None:
        table = make_table(eps_internal, instance.m, instance.n, instance.W)
    elif (
        table.epsilon_internal != eps_internal
        or table.delta != eps_internal / math.log2(instance.m)
        or table.fine[-1] < instance.n * instance.W
    ):
        raise ValueError("bucket table does not match the instance")
    structure = OfflineStructure(instance, table, with_entry_times)
    structure.base_m = exact_prefix_distances(list(instance.sigma), instance.n, instance.source)
    if with_entry_times:
        structure._record_anchor_entries()
    structure.resolve_subtree(0, structure.m, structure.stats, update_entry=with_entry_times)
    if with_entry_times:
        structure._finalize_entry_times()
    return structure


def structures_equal(a: OfflineStructure, b: OfflineStructure) -> bool:
    """Node-for-node equality: anchors, alive estimates and alive edge sets."""
    if a.m != b.m or a.n != b.n or a.source != b.source:
        return False
    if a.base_m != b.base_m:
        return False
    for mid in range(1, a.m):
        na, nb = a.nodes[mid], b.nodes[mid]
        if na.alive_estimates != nb.alive_estimates:
            return False
        if set(na.alive_edges) != set(nb.alive_edges):
            return False
    return True
