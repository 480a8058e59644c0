"""Edge-insertion timelines and their on-disk formats.

An instance is a directed graph on ``n`` vertices revealed edge by edge.
Positions are 1-based: "time t" means the graph holding the first ``t``
edges of the timeline.

File formats (whitespace separated decimals):

* instance file:   header ``n m W epsilon source`` followed by ``m`` lines
  ``tail head weight`` in arrival order,
* prediction file: lines ``tail head weight`` only,
* query file:      lines ``v t`` (single source), ``i j t`` (all pairs,
  offline) or ``i j`` (all pairs, online).

Vertex ids are dense and 0-based; weights are integers in ``[1, W]``.
Engines require the timeline length to be a power of two; short timelines
are padded with weight-1 self-loops at the source, which can never relax
a distance.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, replace
from typing import Iterable, Iterator

UNREACHABLE = math.inf


@dataclass(frozen=True)
class EdgeInsert:
    """One directed weighted edge together with its timeline identity."""

    edge_id: int
    tail: int
    head: int
    weight: int

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.tail, self.head, self.weight)


class InsertSequence:
    """An ordered edge timeline with 1-based positional lookup.

    ``real_len`` marks where padding starts: edges at indices >= real_len
    are synthetic self-loops appended to reach a power-of-two length.
    """

    def __init__(self, edges: Iterable[EdgeInsert], real_len: int | None = None):
        self.edges: tuple[EdgeInsert, ...] = tuple(edges)
        self.real_len = len(self.edges) if real_len is None else real_len
        self._pos = {e.edge_id: i + 1 for i, e in enumerate(self.edges)}
        if len(self._pos) != len(self.edges):
            raise ValueError("duplicate edge id within a sequence")

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self) -> Iterator[EdgeInsert]:
        return iter(self.edges)

    def __getitem__(self, i: int) -> EdgeInsert:
        return self.edges[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, InsertSequence):
            return NotImplemented
        return self.edges == other.edges and self.real_len == other.real_len

    def __repr__(self) -> str:
        return f"InsertSequence({len(self.edges)} edges, real_len={self.real_len})"

    def position_of(self, edge_id: int) -> int:
        """1-based position of the edge, or ``len(self) + 1`` when absent."""
        return self._pos.get(edge_id, len(self.edges) + 1)

    def ids(self) -> list[int]:
        return [e.edge_id for e in self.edges]

    def max_edge_id(self) -> int:
        return max((e.edge_id for e in self.edges), default=-1)


@dataclass(frozen=True)
class ProblemInstance:
    n: int
    W: int
    epsilon: float
    source: int
    sigma: InsertSequence

    @property
    def m(self) -> int:
        return len(self.sigma)


def _read_text(source) -> str:
    if hasattr(source, "read"):
        return source.read()
    return source


def _content_lines(text: str) -> list[tuple[int, str]]:
    out = []
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line:
            out.append((i, line))
    return out


def parse_instance(source) -> ProblemInstance:
    """Parse an instance file; raises ValueError with the offending line."""
    lines = _content_lines(_read_text(source))
    if not lines:
        raise ValueError("empty instance file")
    lineno, header = lines[0]
    tokens = header.split()
    if len(tokens) != 5:
        raise ValueError(f"line {lineno}: malformed header, expected 'n m W epsilon source'")
    try:
        n, m, W = int(tokens[0]), int(tokens[1]), int(tokens[2])
        epsilon = float(tokens[3])
        src = int(tokens[4])
    except ValueError:
        raise ValueError(f"line {lineno}: malformed header") from None
    if n < 1:
        raise ValueError("vertex count must be positive")
    if m < 0:
        raise ValueError("edge count must be nonnegative")
    if W < 1:
        raise ValueError("weight bound must be positive")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if not 0 <= src < n:
        raise ValueError("source out of range")
    body = lines[1:]
    if len(body) != m:
        raise ValueError(f"expected {m} edge lines, found {len(body)}")
    edges = []
    seen: set[tuple[int, int, int]] = set()
    for edge_id, (lineno, line) in enumerate(body):
        tokens = line.split()
        if len(tokens) != 3:
            raise ValueError(f"line {lineno}: malformed line, expected 'tail head weight'")
        try:
            tail, head, weight = int(tokens[0]), int(tokens[1]), int(tokens[2])
        except ValueError:
            raise ValueError(f"line {lineno}: malformed line") from None
        if not (0 <= tail < n and 0 <= head < n):
            raise ValueError(f"line {lineno}: vertex id out of range")
        if not 1 <= weight <= W:
            raise ValueError(f"line {lineno}: weight out of range")
        triple = (tail, head, weight)
        if triple in seen:
            raise ValueError(f"line {lineno}: duplicate edge {triple}")
        seen.add(triple)
        edges.append(EdgeInsert(edge_id, tail, head, weight))
    return ProblemInstance(n=n, W=W, epsilon=epsilon, source=src, sigma=InsertSequence(edges))


def serialize_instance(instance: ProblemInstance) -> str:
    out = [f"{instance.n} {instance.m} {instance.W} {instance.epsilon!r} {instance.source}"]
    out.extend(f"{e.tail} {e.head} {e.weight}" for e in instance.sigma)
    return "\n".join(out) + "\n"


def _next_power_of_two(x: int) -> int:
    if x <= 1:
        return 1
    return 1 << (x - 1).bit_length()


def pad_to_power_of_two(seq: InsertSequence, source: int, minimum: int = 1) -> InsertSequence:
    """Append weight-1 self-loops at the source until the length is a power of two."""
    target = _next_power_of_two(max(len(seq), minimum))
    if target == len(seq):
        return seq
    next_id = seq.max_edge_id() + 1
    dummies = [EdgeInsert(next_id + i, source, source, 1) for i in range(target - len(seq))]
    return InsertSequence(list(seq.edges) + dummies, real_len=seq.real_len)


def prepare_for_build(instance: ProblemInstance) -> ProblemInstance:
    """Instance with its timeline padded to a power of two of at least 2.

    The grids degenerate at length 1, hence the floor of 2.
    """
    seq = pad_to_power_of_two(instance.sigma, instance.source, minimum=2)
    if seq is instance.sigma:
        return instance
    return replace(instance, sigma=seq)


def parse_prediction(source, instance: ProblemInstance) -> list[EdgeInsert]:
    """Parse a prediction file against an instance.

    Triples found in the instance timeline adopt that edge's id; unknown
    triples get fresh ids (they are predicted edges that may never arrive).
    A triple may repeat only as often as the timeline itself holds copies,
    which only happens for padding self-loops.
    """
    lines = _content_lines(_read_text(source))
    queues: dict[tuple[int, int, int], deque[EdgeInsert]] = {}
    for e in instance.sigma:
        queues.setdefault(e.triple, deque()).append(e)
    phantom_triples: set[tuple[int, int, int]] = set()
    next_id = instance.sigma.max_edge_id() + 1
    out: list[EdgeInsert] = []
    for lineno, line in lines:
        tokens = line.split()
        if len(tokens) != 3:
            raise ValueError(f"line {lineno}: malformed line, expected 'tail head weight'")
        try:
            tail, head, weight = int(tokens[0]), int(tokens[1]), int(tokens[2])
        except ValueError:
            raise ValueError(f"line {lineno}: malformed line") from None
        if not (0 <= tail < instance.n and 0 <= head < instance.n):
            raise ValueError(f"line {lineno}: vertex id out of range")
        if not 1 <= weight <= instance.W:
            raise ValueError(f"line {lineno}: weight out of range")
        triple = (tail, head, weight)
        queue = queues.get(triple)
        if queue:
            out.append(queue.popleft())
        elif queue is not None or triple in phantom_triples:
            raise ValueError(f"line {lineno}: duplicate edge {triple}")
        else:
            phantom_triples.add(triple)
            out.append(EdgeInsert(next_id, tail, head, weight))
            next_id += 1
    return out


def serialize_prediction(edges: Iterable[EdgeInsert]) -> str:
    lines = [f"{e.tail} {e.head} {e.weight}" for e in edges]
    return "\n".join(lines) + ("\n" if lines else "")


def align_prediction(pred_edges: list[EdgeInsert], instance: ProblemInstance) -> InsertSequence:
    """Normalize a prediction to the instance's (padded) length.

    Overlong predictions are truncated.  Short ones first reuse the
    instance's own padding edges, so a prediction that matched the raw
    timeline stays position-for-position identical after padding, then
    fall back to fresh self-loops that will never arrive.
    """
    m = instance.m
    out = list(pred_edges[:m])
    present = {e.edge_id for e in out}
    if len(present) != len(out):
        raise ValueError("duplicate edge id within a prediction")
    for dummy in instance.sigma.edges[instance.sigma.real_len:]:
        if len(out) >= m:
            break
        if dummy.edge_id not in present:
            out.append(dummy)
            present.add(dummy.edge_id)
    next_id = max(instance.sigma.max_edge_id(), max((e.edge_id for e in out), default=-1)) + 1
    while len(out) < m:
        out.append(EdgeInsert(next_id, instance.source, instance.source, 1))
        next_id += 1
    return InsertSequence(out)


def graph_at_time(seq: InsertSequence, t: int, n: int) -> list[list[tuple[int, int]]]:
    """Adjacency list (head, weight) of the graph holding the first t edges."""
    if not 0 <= t <= len(seq):
        raise ValueError("time out of range")
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for e in seq.edges[:t]:
        adj[e.tail].append((e.head, e.weight))
    return adj


def parse_query_file(source, arity: int) -> list[tuple[int, ...]]:
    """Parse a query file whose lines hold ``arity`` integers each."""
    out = []
    for lineno, line in _content_lines(_read_text(source)):
        tokens = line.split()
        if len(tokens) != arity:
            raise ValueError(f"line {lineno}: expected {arity} integers")
        try:
            out.append(tuple(int(tok) for tok in tokens))
        except ValueError:
            raise ValueError(f"line {lineno}: malformed line") from None
    return out
