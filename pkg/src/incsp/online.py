"""Warm-started online maintenance of the recursion tree.

The engine builds the offline structure on a predicted timeline, then
consumes true arrivals one at a time.  Each arrival is reconciled with the
prediction: a correctly predicted edge costs nothing, a mispredicted one is
pulled forward to its true position (shifting the displaced block right),
and an unpredicted one is spliced in while the prediction's last slot is
truncated.  Only the subtree rooted at the shallowest node whose midpoint
falls in the displaced span is re-solved, so repair cost tracks prediction
quality rather than instance size.

A live distance array D is kept in sync after every arrival by replaying
the alive-vertex estimate sets of the rebuilt time span in ascending order;
vertices untouched by the pass are provably unchanged since estimates are
constant across spans where a vertex is dead.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .model import UNREACHABLE, EdgeInsert, InsertSequence, ProblemInstance, align_prediction, prepare_for_build
from .offline import OfflineStructure, build_offline, shallowest_midpoint, structures_equal


class PredictionTimeline:
    """Mutable positional edge sequence with 1-based lookup.

    Supports exactly the two corrections the engine needs: pulling an edge
    forward (with a right shift of the displaced block) and inserting a new
    edge while truncating the final slot.  Absent edges report position
    ``len + 1``.  Shift cost is linear in the displaced span, which the
    rebuild accounting already pays for.
    """

    def __init__(self, edges):
        self._edges: list[EdgeInsert] = list(edges)
        self._pos: dict[int, int] = {}
        for i, e in enumerate(self._edges):
            if e.edge_id in self._pos:
                raise ValueError("duplicate edge id within a sequence")
            self._pos[e.edge_id] = i + 1

    def __len__(self) -> int:
        return len(self._edges)

    def __iter__(self):
        return iter(self._edges)

    def __getitem__(self, i: int) -> EdgeInsert:
        return self._edges[i]

    def position_of(self, edge_id: int) -> int:
        return self._pos.get(edge_id, len(self._edges) + 1)

    def ids(self) -> list[int]:
        return [e.edge_id for e in self._edges]

    def _reindex(self, lo_pos: int, hi_pos: int) -> None:
        for i in range(lo_pos - 1, hi_pos):
            self._pos[self._edges[i].edge_id] = i + 1

    def move_forward(self, edge_id: int, t: int) -> None:
        """Move the edge to position t <= its current position."""
        t_prime = self._pos[edge_id]
        if t > t_prime:
            raise ValueError("can only move an edge toward the front")
        e = self._edges.pop(t_prime - 1)
        self._edges.insert(t - 1, e)
        self._reindex(t, t_prime)

    def insert_truncating(self, edge: EdgeInsert, t: int) -> EdgeInsert:
        """Insert at position t, drop the last element, and return it."""
        if edge.edge_id in self._pos:
            raise ValueError("edge already present in the timeline")
        self._edges.insert(t - 1, edge)
        dropped = self._edges.pop()
        del self._pos[dropped.edge_id]
        self._reindex(t, len(self._edges))
        return dropped


def jumped_midpoint_range(t: int, t_prime: int, m: int) -> tuple[int, int] | None:
    """Midpoints whose prefix changes when the arrival at t was predicted at t_prime.

    None when the prediction was exact or no internal midpoint is touched.
    """
    if t_prime < t:
        raise ValueError("an arrival is never predicted earlier than its own position")
    lo, hi = max(1, t), min(t_prime - 1, m - 1)
    if lo > hi:
        return None
    return lo, hi


class RebuildSink:
    """Per-node re-solve counters; fed by the structure's solver."""

    def __init__(self, m: int):
        self.rebuilds_per_node = [0] * m  # indexed by midpoint
        self.nodes_rebuilt = 0
        self.alive_edge_work = 0
        self.scan_work = 0

    def node_solved(self, mid, scanned, alive_edge_count, alive_vertices):
        self.rebuilds_per_node[mid] += 1
        self.nodes_rebuilt += 1
        self.alive_edge_work += alive_edge_count
        self.scan_work += scanned


class RunCounters:
    def __init__(self, m: int):
        self.jumps_per_position = [0] * (m + 2)  # 1-based positions 1..m
        self.total_jumps = 0
        self.sink = RebuildSink(m)
        self.full_rebuilds = 0
        self.case_counts = {"match": 0, "moved": 0, "absent": 0}
        self.d_writes = 0

    @property
    def nodes_rebuilt(self) -> int:
        return self.sink.nodes_rebuilt

    @property
    def alive_edge_work(self) -> int:
        return self.sink.alive_edge_work


@dataclass(frozen=True)
class InsertReport:
    t: int
    edge_id: int
    case: str
    predicted_position: int
    jumped_positions: tuple[int, int] | None
    rebuilt_interval: tuple[int, int] | None
    nodes_rebuilt: int
    full_rebuild: bool
    d_writes: int


class OnlineEngine:
    """Single-source estimates maintained across a run of true arrivals.

    ``instance`` carries the true timeline only for its parameters; the
    arrivals themselves are fed through insert() so a caller may stream
    them.  ``prediction`` must already have the instance's padded length.
    """

    def __init__(self, instance: ProblemInstance, prediction, table=None):
        self.instance = instance
        self.m = instance.m
        self.n = instance.n
        self.source = instance.source
        self.timeline = PredictionTimeline(prediction)
        if len(self.timeline) != self.m:
            raise ValueError("prediction length must match the padded timeline")
        pred_instance = replace(instance, sigma=self.timeline)
        self.structure = build_offline(pred_instance, table=table, with_entry_times=False)
        self.t = 0
        self.D: list[float] = [UNREACHABLE] * self.n
        self.D[self.source] = 0.0
        self.counters = RunCounters(self.m)
        self._arrived: set[int] = set()

    def current_distance(self, v: int) -> float:
        if not 0 <= v < self.n:
            raise ValueError("vertex id out of range")
        return self.D[v]

    def insert(self, edge: EdgeInsert) -> InsertReport:
        if self.t >= self.m:
            raise ValueError("more than m insertions")
        if edge.edge_id in self._arrived:
            raise ValueError("duplicate insertion")
        known = self.structure.edges_by_id.get(edge.edge_id)
        if known is not None and known.triple != edge.triple:
            raise ValueError("arriving edge conflicts with its predicted description")

        t = self.t + 1
        m = self.m
        t_prime = self.timeline.position_of(edge.edge_id)
        # Positions 1..t-1 hold exactly the arrived edges, so an unarrived
        # edge can never sit at a position below t.
        assert t_prime >= t

        if t_prime == t:
            case = "match"
        elif t_prime <= m:
            case = "moved"
            self.timeline.move_forward(edge.edge_id, t)
        else:
            case = "absent"
            self.timeline.insert_truncating(edge, t)
            self.structure.edges_by_id[edge.edge_id] = edge
        self.counters.case_counts[case] += 1

        if t_prime > t:
            hi_pos = min(t_prime - 1, m)
            for p in range(t, hi_pos + 1):
                self.counters.jumps_per_position[p] += 1
            self.counters.total_jumps += hi_pos - t + 1
            jumped_positions = (t, hi_pos)
        else:
            jumped_positions = None

        sink = self.counters.sink
        rebuilt_before = sink.nodes_rebuilt
        full_rebuild = False
        rebuilt_interval = None
        if case == "absent" and self.structure.recompute_base():
            # The exact anchor at time m moved, which invalidates every node
            # whose resolution chain bottoms out there; rebuild from the root.
            full_rebuild = True
            rebuilt_interval = (0, m)
            self.structure.resolve_subtree(0, m, sink)
            self.counters.full_rebuilds += 1
        else:
            midrange = jumped_midpoint_range(t, t_prime, m)
            if midrange is not None:
                x = shallowest_midpoint(midrange[0], midrange[1])
                span = x & -x
                rebuilt_interval = (x - span, x + span)
                self.structure.resolve_subtree(x - span, x + span, sink)

        self.t = t
        self._arrived.add(edge.edge_id)
        d_writes = self._refresh_estimates(rebuilt_interval, t)
        self.counters.d_writes += d_writes
        return InsertReport(
            t=t,
            edge_id=edge.edge_id,
            case=case,
            predicted_position=t_prime,
            jumped_positions=jumped_positions,
            rebuilt_interval=rebuilt_interval,
            nodes_rebuilt=sink.nodes_rebuilt - rebuilt_before,
            full_rebuild=full_rebuild,
            d_writes=d_writes,
        )

    def _refresh_estimates(self, rebuilt_interval: tuple[int, int] | None, t: int) -> int:
        """Replay estimate sets over the rebuilt span (ascending, capped at t).

        Vertices no pass touches are dead across the whole span, and a dead
        vertex's estimate is constant over its span, so the stale entry is
        still the current value.
        """
        if rebuilt_interval is None:
            times = range(t, t + 1)
        else:
            lo, hi = rebuilt_interval
            times = range(lo, min(hi, t) + 1)
        D = self.D
        writes = 0
        for tt in times:
            if tt == 0:
                for v in range(self.n):
                    D[v] = UNREACHABLE
                D[self.source] = 0.0
                writes += self.n
            elif tt == self.m:
                base = self.structure.base_m
                for v in range(self.n):
                    D[v] = base[v]
                writes += self.n
            else:
                for v, est in self.structure.nodes[tt].alive_estimates.items():
                    D[v] = est
                    writes += 1
        return writes

    def fresh_rebuild(self) -> OfflineStructure:
        """From-scratch build on the current corrected timeline (test hook)."""
        snapshot = InsertSequence(list(self.timeline))
        pred_instance = replace(self.instance, sigma=snapshot)
        return build_offline(pred_instance, table=self.structure.table, with_entry_times=False)

    def matches_fresh_build(self) -> bool:
        return structures_equal(self.structure, self.fresh_rebuild())


def start_online(instance: ProblemInstance, prediction_edges: list[EdgeInsert] | None = None) -> OnlineEngine:
    """Pad the instance, align the prediction, and return a ready engine.

    ``prediction_edges`` of None means a perfect prediction (the padded
    true timeline itself).
    """
    padded = prepare_for_build(instance)
    if prediction_edges is None:
        aligned = InsertSequence(list(padded.sigma))
    else:
        aligned = align_prediction(prediction_edges, padded)
    return OnlineEngine(padded, aligned)
