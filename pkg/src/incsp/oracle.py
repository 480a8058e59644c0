"""Ground truth and verification.

Everything here recomputes answers from first principles, separately from
the structures under test: per-prefix distances come from a standalone
Dijkstra (cross-checkable against an equally standalone Bellman-Ford), and
edit distance from the classic quadratic DP.  Each prefix is computed from
scratch; independence is worth more than speed at verification scale.
"""

from __future__ import annotations

from heapq import heappop, heappush

from .metrics import compute_profile, min_threshold_objective
from .model import UNREACHABLE, EdgeInsert, ProblemInstance, align_prediction, prepare_for_build
from .online import OnlineEngine

DEFAULT_ORACLE_BUDGET = 200_000_000


def _ids(seq) -> list[int]:
    if hasattr(seq, "ids"):
        return seq.ids()
    return [e.edge_id for e in seq]


def dijkstra_exact(edges: list[EdgeInsert], n: int, source: int) -> list[float]:
    """Exact integer distances from source over the given edges."""
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for e in edges:
        adj[e.tail].append((e.head, e.weight))
    dist: list[float] = [UNREACHABLE] * n
    dist[source] = 0
    heap: list[tuple[int, int]] = [(0, source)]
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


def bellman_ford(edges: list[EdgeInsert], n: int, source: int) -> list[float]:
    """Same answer by a different route; used to cross-check the oracle itself."""
    dist: list[float] = [UNREACHABLE] * n
    dist[source] = 0
    for _ in range(max(1, n - 1)):
        changed = False
        for e in edges:
            du = dist[e.tail]
            if du == UNREACHABLE:
                continue
            nd = du + e.weight
            if nd < dist[e.head]:
                dist[e.head] = nd
                changed = True
        if not changed:
            break
    return dist


def _check_budget(work: int, budget: int) -> None:
    if work > budget:
        raise ValueError(f"oracle budget exceeded (estimated work {work} > {budget})")


def exact_distance_table(instance: ProblemInstance, budget: int = DEFAULT_ORACLE_BUDGET) -> list[list[float]]:
    """rows[t][v] = exact distance from the source in the first-t-edges graph."""
    m, n = instance.m, instance.n
    _check_budget((m + 1) * (n + m + 1), budget)
    edges = list(instance.sigma)
    return [dijkstra_exact(edges[:t], n, instance.source) for t in range(m + 1)]


def exact_apsp_table(instance: ProblemInstance, budget: int = DEFAULT_ORACLE_BUDGET) -> list[list[list[float]]]:
    """rows[t][s][v] = exact distance from s in the first-t-edges graph."""
    m, n = instance.m, instance.n
    _check_budget((m + 1) * n * (n + m + 1), budget)
    edges = list(instance.sigma)
    return [
        [dijkstra_exact(edges[:t], n, s) for s in range(n)]
        for t in range(m + 1)
    ]


def oracle_self_check(instance: ProblemInstance, stride: int = 1) -> bool:
    """Dijkstra / Bellman-Ford agreement on every stride-th prefix."""
    edges = list(instance.sigma)
    for t in range(0, instance.m + 1, max(1, stride)):
        if dijkstra_exact(edges[:t], instance.n, instance.source) != bellman_ford(
            edges[:t], instance.n, instance.source
        ):
            return False
    return True


def brute_edit_distance(sigma, sigma_hat) -> int:
    """Insert/delete-only edit distance by the classic DP; quadratic, for small inputs."""
    a, b = _ids(sigma), _ids(sigma_hat)
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, y in enumerate(b, start=1):
            if x == y:
                cur[j] = prev[j - 1]
            else:
                cur[j] = 1 + min(prev[j], cur[j - 1])
        prev = cur
    return prev[len(b)]


# Relative headroom on the upper bound comparisons below: the structures
# carry float grid values whose construction error is many orders below the
# approximation margin, but equality-boundary cases should not flap.
FLOAT_SLACK = 1e-9


def _sandwich_violation(exact: float, answer: float, epsilon: float) -> str | None:
    if exact == UNREACHABLE:
        if answer != UNREACHABLE:
            return "finite answer for an unreachable vertex"
        return None
    if answer == UNREACHABLE:
        return "unreachable answer for a reachable vertex"
    if answer < exact * (1 - FLOAT_SLACK):
        return "answer below the exact distance"
    if answer > exact * (1 + epsilon) * (1 + FLOAT_SLACK):
        return "answer above the approximation bound"
    return None


def verify_offline(structure, rows: list[list[float]], epsilon: float) -> list[dict]:
    """Check every (v, t) query against the exact table; returns violations."""
    violations = []
    for t in range(structure.m + 1):
        row = rows[t]
        for v in range(structure.n):
            answer = structure.query(v, t)
            problem = _sandwich_violation(row[v], answer, epsilon)
            if problem:
                violations.append(
                    {"kind": "query", "v": v, "t": t, "exact": row[v], "answer": answer, "problem": problem}
                )
    return violations


def verify_online_run(
    instance: ProblemInstance,
    prediction_edges: list[EdgeInsert] | None,
    rows: list[list[float]] | None = None,
    fresh_build_limit: int = 64,
    budget: int = DEFAULT_ORACLE_BUDGET,
) -> dict:
    """Replay the true timeline through the online engine and audit every step.

    Checks, per insertion: the live estimate array against the exact row,
    and (on small timelines) node-level equality with a from-scratch build
    on the corrected prediction.  After the run: the per-position jump bound
    and the per-node rebuild bound implied by the prediction's displacement
    profile.
    """
    padded = prepare_for_build(instance)
    if prediction_edges is None:
        aligned = list(padded.sigma)
    else:
        aligned = align_prediction(prediction_edges, padded)
    if rows is None:
        rows = exact_distance_table(padded, budget)
    engine = OnlineEngine(padded, aligned)
    profile = compute_profile(padded.sigma, aligned)
    _, jump_budget = min_threshold_objective(profile.eta_per_edge, padded.m, weight=2)

    violations: list[dict] = []
    check_fresh = padded.m <= fresh_build_limit
    for step, edge in enumerate(padded.sigma, start=1):
        engine.insert(edge)
        row = rows[step]
        for v in range(padded.n):
            problem = _sandwich_violation(row[v], engine.D[v], padded.epsilon)
            if problem:
                violations.append(
                    {"kind": "live", "v": v, "t": step, "exact": row[v], "answer": engine.D[v], "problem": problem}
                )
        if check_fresh and not engine.matches_fresh_build():
            violations.append({"kind": "structure", "t": step, "problem": "diverged from a fresh build"})

    counters = engine.counters
    worst_jumps = max(counters.jumps_per_position)
    if worst_jumps > jump_budget:
        violations.append(
            {"kind": "jump-bound", "observed": worst_jumps, "bound": jump_budget, "problem": "position jumped too often"}
        )
    log_m = padded.m.bit_length() - 1
    rebuild_budget = log_m * jump_budget
    worst_rebuilds = max(counters.sink.rebuilds_per_node)
    if worst_rebuilds > rebuild_budget:
        violations.append(
            {"kind": "rebuild-bound", "observed": worst_rebuilds, "bound": rebuild_budget, "problem": "node rebuilt too often"}
        )

    return {
        "ok": not violations,
        "violations": violations,
        "profile": profile,
        "jump_budget": jump_budget,
        "rebuild_budget": rebuild_budget,
        "worst_jumps": worst_jumps,
        "worst_rebuilds": worst_rebuilds,
        "nodes_rebuilt": counters.nodes_rebuilt,
        "alive_edge_work": counters.alive_edge_work,
        "full_rebuilds": counters.full_rebuilds,
        "fresh_build_checked": check_fresh,
    }


def verify_apsp_offline(structure, rows: list[list[list[float]]], epsilon: float) -> list[dict]:
    """Check every (i, j, t) against the exact all-pairs table."""
    violations = []
    for t in range(structure.m + 1):
        for i in range(structure.n):
            row = rows[t][i]
            for j in range(structure.n):
                answer = structure.query(i, j, t)
                problem = _sandwich_violation(row[j], answer, epsilon)
                if problem:
                    violations.append(
                        {
                            "kind": "apsp",
                            "i": i,
                            "j": j,
                            "t": t,
                            "exact": row[j],
                            "answer": answer,
                            "problem": problem,
                        }
                    )
    return violations
