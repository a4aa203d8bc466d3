"""Delay-metric shortest paths, greedy delay/progress forwarding and
closest-aggregator lookup."""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import DomainError, LocalMinimumError, RoutingError, UnreachableError
from .grid import GridNetwork, Node, Vec, det, lattice_points_with_coords, norm2, sub
from .schedule import Schedule, one_hop_delay, route_delay


@dataclass(frozen=True)
class Route:
    nodes: tuple[Node, ...]
    route_delay: int
    per_hop: tuple[int, ...]

    @property
    def hops(self) -> int:
        return max(0, len(self.nodes) - 1)

    @property
    def elapsed(self) -> int:
        return self.route_delay + 1

    def to_text(self, schedule: Schedule | None = None) -> str:
        doc = {"nodes": [list(n) for n in self.nodes], "route_delay": self.route_delay, "per_hop": list(self.per_hop)}
        if schedule is not None:
            doc["slots"] = [schedule.slot(n) for n in self.nodes]
        return json.dumps(doc)


def make_route(path: Sequence[Node], schedule: Schedule, net: GridNetwork) -> Route:
    path = tuple(path)
    if len(path) < 2:
        return Route(path, 0, ())
    rep = route_delay(path, schedule, net.R)
    return Route(path, rep.route_delay, rep.per_hop)


def shortest_delay_path(net: GridNetwork, schedule: Schedule, src: Node, dst: Node) -> Route:
    """Path minimizing the summed one-hop delay; the hop into ``dst`` is free.

    Labels are ``(delay, hops)`` pairs, so among minimum-delay paths the one
    with fewest hops wins; remaining ties go to the lexicographically smallest
    predecessor when the path is read back from ``dst``.
    """
    for n in (src, dst):
        if n not in net:
            raise DomainError(f"node {n} is not in the network")
    if src == dst:
        return Route((src,), 0, ())
    S = schedule.S
    slot = schedule.slot
    best = {src: (0, 0)}
    done = set()
    heap = [(0, 0, src)]
    while heap:
        d, k, n = heapq.heappop(heap)
        if n in done:
            continue
        done.add(n)
        if n == dst:
            break
        sn = slot(n)
        for m in net.neighbors(n):
            if m in done:
                continue
            w = 0 if m == dst else one_hop_delay(sn, slot(m), S)
            lab = (d + w, k + 1)
            if m not in best or lab < best[m]:
                best[m] = lab
                heapq.heappush(heap, (lab[0], lab[1], m))
    if dst not in done:
        raise UnreachableError(f"{dst} is not reachable from {src}")
    # read the path back, choosing the smallest predecessor consistent with the labels
    path = [dst]
    cur = dst
    while cur != src:
        d, k = best[cur]
        preds = []
        for p in net.neighbors(cur):
            if p not in best or p == dst:
                continue
            w = 0 if cur == dst else one_hop_delay(slot(p), slot(cur), S)
            if best[p] == (d - w, k - 1):
                preds.append(p)
        cur = min(preds)
        path.append(cur)
    path.reverse()
    return make_route(path, schedule, net)


def delay_graph(net: GridNetwork, slots: np.ndarray, S: int, exclude: int | None = None) -> csr_matrix:
    """Sparse matrix of one-hop delays, ``M[i, j]`` for the hop ``i -> j``.

    ``slots`` holds the slot of every node by index. Edges touching ``exclude``
    are left out.
    """
    src, dst = net.edge_arrays()
    if exclude is not None:
        keep = (src != exclude) & (dst != exclude)
        src, dst = src[keep], dst[keep]
    w = np.mod(slots[dst] - slots[src], S)
    if np.any(w == 0):
        raise DomainError("neighboring nodes share a slot")
    n = len(net)
    return csr_matrix((w.astype(float), (src, dst)), shape=(n, n))


def delays_to_sink(net: GridNetwork, schedule: Schedule, dst: Node) -> np.ndarray:
    """Minimum route delay from every node to ``dst``, indexed like ``net.nodes``.

    The hop into ``dst`` costs nothing, so this is a multi-source search from
    the neighbors of ``dst`` over reversed edges with ``dst`` removed.
    Unreachable nodes get ``inf``; ``dst`` itself gets 0.
    """
    slots = node_slots(net, schedule)
    j = net.index[dst]
    M = delay_graph(net, slots, schedule.S, exclude=j)
    sources = [net.index[m] for m in net.neighbors(dst)]
    if not sources:
        out = np.full(len(net), np.inf)
        out[j] = 0
        return out
    dist = dijkstra(M.T.tocsr(), directed=True, indices=sources, min_only=True)
    dist[j] = 0
    return dist


def node_slots(net: GridNetwork, schedule: Schedule) -> np.ndarray:
    colors = getattr(schedule.color_of, "__self__", None)
    if colors is not None and hasattr(colors, "colors_of"):
        c = colors.colors_of(net.coords())
        return schedule.slot_map.slots_array()[c]
    return np.asarray([schedule.slot(n) for n in net.nodes], dtype=np.int64)


def _progress(n: Node, m: Node, dst: Node) -> float:
    return math.sqrt(norm2(sub(n, dst))) - math.sqrt(norm2(sub(m, dst)))


def greedy_next_hop(n: Node, dst: Node, net: GridNetwork, schedule: Schedule) -> Node:
    """Neighbor with the lowest delay/progress ratio toward ``dst``.

    Only neighbors strictly closer to ``dst`` qualify. Ties go to the larger
    progress, then to the smaller node.
    """
    if n == dst:
        raise DomainError("already at the destination")
    S = schedule.S
    sn = schedule.slot(n)
    best_key, best = None, None
    for m in net.neighbors(n):
        p = _progress(n, m, dst)
        if p <= 0:
            continue
        key = (one_hop_delay(sn, schedule.slot(m), S) / p, -p, m)
        if best_key is None or key < best_key:
            best_key, best = key, m
    if best is None:
        raise LocalMinimumError(f"no neighbor of {n} makes progress toward {dst}", partial=(n,))
    return best


def greedy_route(src: Node, dst: Node, net: GridNetwork, schedule: Schedule, max_steps: int | None = None) -> Route:
    if src == dst:
        return Route((src,), 0, ())
    if max_steps is None:
        max_steps = 4 * len(net) + 4
    path = [src]
    cur = src
    for _ in range(max_steps):
        try:
            cur = greedy_next_hop(cur, dst, net, schedule)
        except LocalMinimumError as e:
            raise LocalMinimumError(str(e), partial=path) from None
        path.append(cur)
        if cur == dst:
            return make_route(path, schedule, net)
    raise RoutingError(f"step budget {max_steps} exhausted", partial=path)


def closest_aggregator(n: Node, basis) -> Node:
    """Lattice point nearest to ``n``; ties by lattice coordinates ``(a, b)``."""
    u1, u2 = basis.u1, basis.u2
    d = det(u1, u2)
    if d == 0:
        raise DomainError("degenerate basis")
    # rounded lattice coordinates give a starting point p0; the nearest point
    # lies within |n - p0| of n, hence within 2|n - p0| of p0
    a0 = round(det(n, u2) / d)
    b0 = round(det(u1, n) / d)
    p0 = (a0 * u1[0] + b0 * u2[0], a0 * u1[1] + b0 * u2[1])
    r = math.sqrt(norm2(sub(n, p0)))
    best = None
    for w, (a, b) in lattice_points_with_coords(u1, u2, 2 * r + 1e-9):
        q = (p0[0] + w[0], p0[1] + w[1])
        key = (norm2(sub(q, n)), a + a0, b + b0)
        if best is None or key < best[0]:
            best = (key, q)
    return best[1]


def lattice_neighbors(A: Node, basis) -> list[tuple[str, Node]]:
    u, v = basis.u1, basis.u2
    return [
        ("+u", (A[0] + u[0], A[1] + u[1])),
        ("-u", (A[0] - u[0], A[1] - u[1])),
        ("+v", (A[0] + v[0], A[1] + v[1])),
        ("-v", (A[0] - v[0], A[1] - v[1])),
    ]


def lattice_distance(p: Vec, basis) -> int:
    """``max(|a|, |b|)`` for ``p = a*u1 + b*u2``."""
    a, b = basis.lattice_coords(p)
    return max(abs(a), abs(b))
