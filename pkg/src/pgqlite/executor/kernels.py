"""Join, fixpoint and traversal kernels shared by both backends."""

from __future__ import annotations

from collections import deque
from typing import Callable, Iterable, Iterator, Sequence

from ..errors import NodeOutOfRange
from ..graphcat.graph import Csr
from .result import FixpointState, PathBinding, ResultTable, row_sort_key


def join_key(values: tuple) -> tuple | None:
    """Hashable join key; None when any part is Null.

    Booleans are tagged so that TRUE does not meet the integer 1.
    """
    out = []
    for v in values:
        if v is None:
            return None
        out.append(("b", v) if isinstance(v, bool) else v)
    return tuple(out)


def hash_join(left: ResultTable, right: ResultTable,
              keys: Sequence[str] | Sequence[tuple[str, str]]) -> ResultTable:
    """Inner equi-join, building the hash table on the smaller input.

    ``keys`` holds column names present on both sides or explicit
    ``(left_column, right_column)`` pairs. Output is left columns then right columns.
    """
    pairs = [(k, k) if isinstance(k, str) else k for k in keys]
    li = [left.index_of(lc) for lc, _ in pairs]
    ri = [right.index_of(rc) for _, rc in pairs]
    columns = left.columns + right.columns
    out: list[tuple] = []
    if len(right.rows) <= len(left.rows):
        index: dict[tuple, list[tuple]] = {}
        for row in right.rows:
            k = join_key(tuple(row[i] for i in ri))
            if k is not None:
                index.setdefault(k, []).append(row)
        for row in left.rows:
            k = join_key(tuple(row[i] for i in li))
            for match in index.get(k, ()) if k is not None else ():
                out.append(row + match)
    else:
        index = {}
        for row in left.rows:
            k = join_key(tuple(row[i] for i in li))
            if k is not None:
                index.setdefault(k, []).append(row)
        for row in right.rows:
            k = join_key(tuple(row[i] for i in ri))
            for match in index.get(k, ()) if k is not None else ():
                out.append(match + row)
    return ResultTable(columns, out)


# -- recursive fixpoint ------------------------------------------------------------

CyclePredicate = Callable[[object, object, int, object], bool]


def closes_cycle(start: object, current: object, depth: int, to: object) -> bool:
    """``t.a_to = p.a_start AND p.depth >= 2``."""
    return to == start and depth >= 2


def iterate_fixpoint(base: Iterable[tuple], step: Iterable[tuple], depth_limit: int,
                     dedupe: str = "row") -> Iterator[FixpointState]:
    """Semi-naive evaluation of ``paths(start, current, depth)``.

    Each round joins only the previous frontier with the step relation
    ``(from, to)``. ``dedupe="row"`` keeps distinct full rows; ``"pair"`` keeps
    one row per (start, current) with its minimum depth.
    """
    succ: dict[object, list[object]] = {}
    for a, b in step:
        succ.setdefault(a, []).append(b)
    frontier: set[tuple] = set()
    seen_pairs: set[tuple] = set()
    for row in base:
        if row[2] > depth_limit:
            continue
        if dedupe == "pair":
            if (row[0], row[1]) in seen_pairs:
                continue
            seen_pairs.add((row[0], row[1]))
        frontier.add(tuple(row))
    accumulated = set(frontier)
    depth = min((r[2] for r in frontier), default=0)
    yield FixpointState(frontier, accumulated, depth)
    while frontier:
        new: set[tuple] = set()
        for start, current, d in frontier:
            if d >= depth_limit:
                continue
            for nxt in succ.get(current, ()):
                if dedupe == "pair":
                    if (start, nxt) in seen_pairs:
                        continue
                    seen_pairs.add((start, nxt))
                row = (start, nxt, d + 1)
                if row not in accumulated:
                    new.add(row)
        accumulated |= new
        frontier = new
        depth += 1
        if frontier:
            yield FixpointState(frontier, accumulated, depth)


def recursive_fixpoint(base: ResultTable, step: ResultTable, depth_limit: int = 2000,
                       cycle_predicate: CyclePredicate | None = None, dedupe: str = "row") -> ResultTable:
    """Depth-limited recursion over ``paths(a_start, a_current, depth)``.

    Without a predicate the accumulated relation is returned. With one, the
    result is the distinct ``a_start`` values of rows that have a step edge
    satisfying it, as the cycle-detection listing emits.
    """
    if depth_limit < 1:
        raise ValueError("depth_limit must be at least 1")
    state = None
    for state in iterate_fixpoint(base.rows, step.rows, depth_limit, dedupe):
        pass
    accumulated = state.accumulated if state is not None else set()
    if cycle_predicate is None:
        return ResultTable(("a_start", "a_current", "depth"), sorted(accumulated, key=row_sort_key))
    succ: dict[object, list[object]] = {}
    for a, b in step.rows:
        succ.setdefault(a, []).append(b)
    starts = {
        start
        for start, current, depth in accumulated
        if any(cycle_predicate(start, current, depth, to) for to in succ.get(current, ()))
    }
    return ResultTable(("account_in_cycle",), sorted(((s,) for s in starts), key=row_sort_key))


# -- traversal -----------------------------------------------------------------------


def _check_nodes(csr: Csr, nodes: Iterable[int]) -> list[int]:
    out = []
    n = csr.node_count
    for v in nodes:
        if not 0 <= v < n:
            raise NodeOutOfRange(f"node {v} outside 0..{n - 1}")
        out.append(v)
    return out


def bfs_reach(csr: Csr, sources: Iterable[int], min_hops: int = 1,
              max_hops: int | None = None) -> dict[int, int]:
    """Minimum hop count from the source set to every node reachable by a walk of at least ``min_hops``.

    The first ``min_hops`` rounds advance exact-length frontiers, so a source
    that lies on a cycle is reported with the cycle length rather than dropped.
    """
    offsets, targets, _ = csr.lists
    frontier = set(_check_nodes(csr, sources))
    for _ in range(min_hops):
        frontier = {targets[i] for v in frontier for i in range(offsets[v], offsets[v + 1])}
    dist = {v: min_hops for v in frontier}
    queue = deque(sorted(frontier))
    while queue:
        v = queue.popleft()
        d = dist[v]
        if max_hops is not None and d >= max_hops:
            continue
        for i in range(offsets[v], offsets[v + 1]):
            w = targets[i]
            if w not in dist:
                dist[w] = d + 1
                queue.append(w)
    if max_hops is not None:
        dist = {v: d for v, d in dist.items() if d <= max_hops}
    return dist


def ms_bfs(csr: Csr, sources: Sequence[int], max_hops: int | None = None) -> dict[int, dict[int, int]]:
    """Multi-source BFS with one bit per source; reports walks of one or more hops.

    Returns ``{source: {node: hops}}`` with minimum hop counts.
    """
    sources = list(dict.fromkeys(_check_nodes(csr, sources)))
    offsets, targets, _ = csr.lists
    result: dict[int, dict[int, int]] = {s: {} for s in sources}
    seen: dict[int, int] = {}
    visit: dict[int, int] = {}
    for i, s in enumerate(sources):
        visit[s] = visit.get(s, 0) | (1 << i)
    depth = 0
    while visit and (max_hops is None or depth < max_hops):
        depth += 1
        nxt: dict[int, int] = {}
        for v, bits in visit.items():
            for j in range(offsets[v], offsets[v + 1]):
                w = targets[j]
                fresh = bits & ~seen.get(w, 0)
                if fresh:
                    nxt[w] = nxt.get(w, 0) | fresh
        for w, bits in nxt.items():
            seen[w] = seen.get(w, 0) | bits
            while bits:
                low = bits & -bits
                result[sources[low.bit_length() - 1]][w] = depth
                bits ^= low
        visit = nxt
    return result


def distances_to(backward: Csr, target: int, max_hops: int | None = None) -> dict[int, int]:
    """Hop distance from every node to ``target`` (zero-length walk included)."""
    offsets, sources, _ = backward.lists
    dist = {target: 0}
    queue = deque([target])
    while queue:
        v = queue.popleft()
        d = dist[v]
        if max_hops is not None and d >= max_hops:
            continue
        for i in range(offsets[v], offsets[v + 1]):
            w = sources[i]
            if w not in dist:
                dist[w] = d + 1
                queue.append(w)
    return dist


def shortest_closing_path(forward: Csr, dist_to_target: dict[int, int], source: int, target: int,
                          depth_limit: int | None = None) -> PathBinding | None:
    """Minimum-hop walk of one or more edges from ``source`` to ``target``.

    Among equally short paths the one whose (node-id, edge-id) step sequence is
    lexicographically smallest wins. A shortest such walk never repeats an edge.
    """
    offsets, targets, eids = forward.lists
    best = None
    for i in range(offsets[source], offsets[source + 1]):
        d = dist_to_target.get(targets[i])
        if d is not None and (best is None or d < best):
            best = d
    if best is None:
        return None
    length = best + 1
    if depth_limit is not None and length > depth_limit:
        return None
    nodes, edges = [source], []
    current, remaining = source, length
    while remaining:
        pick = None
        for i in range(offsets[current], offsets[current + 1]):
            w = targets[i]
            if dist_to_target.get(w) == remaining - 1 and (remaining > 1 or w == target):
                cand = (w, eids[i])
                if pick is None or cand < pick:
                    pick = cand
        assert pick is not None
        current = pick[0]
        nodes.append(current)
        edges.append(pick[1])
        remaining -= 1
    return PathBinding(tuple(nodes), tuple(edges))


def any_shortest_cycle(forward: Csr, backward: Csr, anchors: Iterable[tuple[int, int]],
                       depth_limit: int | None = 2000,
                       keep: Callable[[int, int], bool] | None = None) -> ResultTable:
    """One shortest closing path per distinct (source, target) anchor binding.

    ``keep`` is an optional filter over the anchor pair, applied before any
    search. Rows are ``(source, target, hops, nodes, edges)``; unreachable
    anchors produce no row.
    """
    cache: dict[int, dict[int, int]] = {}
    rows = []
    for source, target in dict.fromkeys(anchors):
        if keep is not None and not keep(source, target):
            continue
        _check_nodes(forward, (source, target))
        dist = cache.get(target)
        if dist is None:
            dist = cache[target] = distances_to(backward, target, depth_limit)
        path = shortest_closing_path(forward, dist, source, target, depth_limit)
        if path is not None:
            rows.append((source, target, path.hops, path.nodes, path.edges))
    return ResultTable(("source", "target", "hops", "nodes", "edges"), rows)
