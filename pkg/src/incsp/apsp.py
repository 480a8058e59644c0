"""All-pairs layer over the single-source machinery.

Offline: one per-source structure per vertex, all sharing one bucket table
so estimates are mutually consistent.  Online: predictions must permute the
true edge set; arrivals advance a frontier through the predicted order, and
queries run Dijkstra on a small patch whose size is bounded by the count of
arrived-but-not-yet-frontier-covered edges (at most the maximum
displacement of the permutation).
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import replace

from .bucketing import derive_internal_epsilon, make_table
from .model import UNREACHABLE, EdgeInsert, ProblemInstance, align_prediction, prepare_for_build
from .offline import OfflineStructure, _dijkstra_adj, build_offline


class ApspStructure:
    """Per-source structures sharing one table; query(i, j, t) in O(log log)."""

    def __init__(self, per_source: list[OfflineStructure], table):
        self.per_source = per_source
        self.table = table
        self.n = len(per_source)
        self.m = per_source[0].m if per_source else 0

    def query(self, i: int, j: int, t: int) -> float:
        if not 0 <= i < self.n:
            raise ValueError("vertex id out of range")
        return self.per_source[i].query(j, t)

    def query_with_cost(self, i: int, j: int, t: int) -> tuple[float, int]:
        if not 0 <= i < self.n:
            raise ValueError("vertex id out of range")
        return self.per_source[i].query_with_cost(j, t)


def build_apsp(instance: ProblemInstance, with_entry_times: bool = True) -> ApspStructure:
    """n single-source builds over the same timeline and bucket table.

    Padding self-loops sit at the instance's nominal source; a self-loop
    never relaxes any distance, so every per-source build may share them.
    """
    padded = prepare_for_build(instance)
    table = make_table(derive_internal_epsilon(padded.epsilon), padded.m, padded.n, padded.W)
    per_source = [
        build_offline(replace(padded, source=s), table=table, with_entry_times=with_entry_times)
        for s in range(padded.n)
    ]
    return ApspStructure(per_source, table)


class OnlineApsp:
    """Arrival tracking and patched queries over a predicted permutation."""

    def __init__(self, instance: ProblemInstance, prediction_edges: list[EdgeInsert]):
        padded = prepare_for_build(instance)
        aligned = align_prediction(prediction_edges, padded)
        if set(aligned.ids()) != set(padded.sigma.ids()):
            raise ValueError("prediction not a permutation")
        self.instance = padded
        self.prediction = aligned
        self.n = padded.n
        self.m = padded.m
        self.apsp = build_apsp(replace(padded, sigma=aligned))
        self.t = 0
        self.frontier = 0  # all predicted positions 1..frontier have arrived
        self._arrived_flags = [False] * (self.m + 2)
        self._arrived_positions: list[int] = []  # sorted predicted positions
        self._arrived_ids: set[int] = set()
        self.frontier_advances = 0
        self.insert_comparisons = 0
        self.last_patch_vertices = 0

    def insert(self, edge: EdgeInsert) -> None:
        if self.t >= self.m:
            raise ValueError("more than m insertions")
        if edge.edge_id in self._arrived_ids:
            raise ValueError("duplicate insertion")
        p = self.prediction.position_of(edge.edge_id)
        if p > self.m:
            raise ValueError("arriving edge is not part of the predicted permutation")
        self._arrived_ids.add(edge.edge_id)
        self._arrived_flags[p] = True
        # Hand-rolled insertion point search so the comparison count is
        # observable; the list insert itself is the keyed-store write.
        positions = self._arrived_positions
        lo, hi = 0, len(positions)
        while lo < hi:
            mid = (lo + hi) // 2
            self.insert_comparisons += 1
            if positions[mid] < p:
                lo = mid + 1
            else:
                hi = mid
        positions.insert(lo, p)
        while self.frontier < self.m and self._arrived_flags[self.frontier + 1]:
            self.frontier += 1
            self.frontier_advances += 1
        self.t += 1

    def pending_edges(self) -> list[EdgeInsert]:
        """Arrived edges beyond the frontier (the patch material)."""
        i = bisect_right(self._arrived_positions, self.frontier)
        return [self.prediction[p - 1] for p in self._arrived_positions[i:]]

    def query(self, i: int, j: int) -> float:
        """Approximate i-to-j distance over exactly the arrived edges."""
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise ValueError("vertex id out of range")
        if i == j:
            self.last_patch_vertices = 1
            return 0.0
        extras = self.pending_edges()
        verts = {i, j}
        direct: dict[tuple[int, int], int] = {}
        for e in extras:
            verts.add(e.tail)
            verts.add(e.head)
            key = (e.tail, e.head)
            if e.weight < direct.get(key, UNREACHABLE):
                direct[key] = e.weight
        self.last_patch_vertices = len(verts)
        t_prime = self.frontier
        ordered = sorted(verts)
        adj: dict[int, list[tuple[int, float]]] = {u: [] for u in ordered}
        for u in ordered:
            source_structure = self.apsp.per_source[u]
            for v in ordered:
                if u == v:
                    continue
                w = source_structure.query(v, t_prime)
                dw = direct.get((u, v))
                if dw is not None and dw < w:
                    w = dw
                if w != UNREACHABLE:
                    adj[u].append((v, w))
        dist = _dijkstra_adj(adj, i)
        return dist.get(j, UNREACHABLE)
