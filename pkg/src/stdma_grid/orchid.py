"""Network-wide assembly: translated trees, highways, the global cycle and
hierarchical forwarding (sensor -> aggregator over a tree, then aggregator ->
aggregator over highways)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

from .coloring import VcmBasis
from .domtree import CoRoutesOrder, DominatingTree, coverage_offsets, template_for
from .errors import CoverageError, DomainError, RoutingError
from .grid import GridNetwork, Node, norm2, sub
from .highways import DIRECTIONS, Highway, build_highways, compute_lambda
from .routing import lattice_neighbors
from .schedule import CyclePlan, Schedule, build_cycle_plan


@dataclass
class Orchid:
    net: GridNetwork
    basis: VcmBasis
    sink: Node
    optimize: bool = True
    max_distance: float | None = None
    tree: DominatingTree = field(init=False)
    order: CoRoutesOrder = field(init=False)
    highways: list[Highway] = field(init=False)

    def __post_init__(self):
        if self.sink not in self.net:
            raise DomainError(f"sink {self.sink} is not in the network")
        if not self.basis.is_lattice_point(self.sink):
            raise DomainError("the sink must sit on an aggregator")
        self.tree, self.order = template_for(self.basis)
        self.highways = build_highways((0, 0), self.basis)
        if self.max_distance is None:
            self.max_distance = max(math.sqrt(norm2(sub(n, self.sink))) for n in self.net.nodes)

    @property
    def schedule(self) -> Schedule:
        """Routes-period schedule (colors in CO-Routes transmission order)."""
        return Schedule(self.basis.color_of, self.order.slot_map)

    @cached_property
    def lam(self) -> int:
        return compute_lambda(self.basis, self.max_distance)

    @cached_property
    def plan(self) -> CyclePlan:
        return build_cycle_plan(self.order.slot_map, self.highways, self.lam, self.optimize)

    @cached_property
    def aggregators(self) -> list[Node]:
        return [n for n in self.net.nodes if self.basis.is_lattice_point(n)]

    @cached_property
    def _offsets(self) -> list[Node]:
        return coverage_offsets(self.tree, self.order)

    def highway(self, A: Node, direction: str) -> Highway:
        hw = self.highways[DIRECTIONS.index(direction)]
        return hw.translated(A)

    def chain(self, n: Node, A: Node) -> list[Node]:
        """Path from ``n`` up the tree rooted at ``A``."""
        t = (n[0] - A[0], n[1] - A[1])
        return [(m[0] + A[0], m[1] + A[1]) for m in self.tree.chain(t)]

    def reachable(self, n: Node) -> list[Node]:
        """Aggregators reached from ``n`` in one cycle with the whole chain in the network."""
        out = []
        for t in self._offsets:
            A = (n[0] - t[0], n[1] - t[1])
            if A not in self.net or not self.basis.is_lattice_point(A):
                continue
            if all(m in self.net for m in self.chain(n, A)):
                out.append(A)
        return sorted(out)

    def choose_aggregator(self, n: Node, sink: Node | None = None) -> Node:
        """Reachable aggregator closest to the sink; ties by coordinates."""
        sink = self.sink if sink is None else sink
        cand = self.reachable(n)
        if not cand:
            raise CoverageError(f"{n} is not covered by any tree")
        return min(cand, key=lambda A: (norm2(sub(A, sink)), A))

    def next_aggregator(self, A: Node, sink: Node | None = None) -> tuple[str, Node]:
        """Lattice neighbor of ``A`` closest to the sink; ties by direction order."""
        sink = self.sink if sink is None else sink
        here = norm2(sub(A, sink))
        best = None
        for i, (d, B) in enumerate(lattice_neighbors(A, self.basis)):
            if B not in self.net:
                continue
            if any(m not in self.net for m in self.highway(A, d).path):
                continue
            key = (norm2(sub(B, sink)), i)
            if best is None or key < best[0]:
                best = (key, d, B)
        if best is None or best[0][0] >= here:
            raise RoutingError(f"no neighboring aggregator of {A} is closer to {sink}", partial=(A,))
        return best[1], best[2]


def hierarchical_next_hop(n: Node, sink: Node, orchid: Orchid, aggregator: Node | None = None) -> Node | None:
    """Next node for a packet at ``n`` headed for ``sink``.

    At the sink: ``None``. At an aggregator: the first node of the highway
    toward the neighboring aggregator closest to the sink. Elsewhere: the
    parent or dominator in the tree of ``aggregator`` (by default the
    reachable aggregator closest to the sink).
    """
    if n == sink:
        return None
    if orchid.basis.is_lattice_point(n) and (aggregator is None or aggregator == n):
        d, _ = orchid.next_aggregator(n, sink)
        return orchid.highway(n, d).path[1]
    A = orchid.choose_aggregator(n, sink) if aggregator is None else aggregator
    ch = orchid.chain(n, A)
    return ch[1]


@dataclass(frozen=True)
class HierarchicalRoute:
    nodes: tuple[Node, ...]
    aggregator: Node
    sensor_phase: tuple[Node, ...]
    highway_legs: tuple[tuple[str, tuple[Node, ...]], ...]


def hierarchical_route(src: Node, sink: Node, orchid: Orchid, max_legs: int | None = None) -> HierarchicalRoute:
    """Whole path: tree chain to the chosen aggregator, then highway legs to the sink."""
    if src not in orchid.net:
        raise DomainError(f"{src} is not in the network")
    if orchid.basis.is_lattice_point(src):
        A = src
        sensor = (src,)
    else:
        A = orchid.choose_aggregator(src, sink)
        sensor = tuple(orchid.chain(src, A))
    nodes = list(sensor)
    legs = []
    cur = A
    limit = max_legs if max_legs is not None else 4 * len(orchid.aggregators) + 4
    while cur != sink:
        if len(legs) >= limit:
            raise RoutingError("highway leg budget exhausted", partial=nodes)
        try:
            d, B = orchid.next_aggregator(cur, sink)
        except RoutingError as e:
            raise RoutingError(str(e), partial=nodes) from None
        path = orchid.highway(cur, d).path
        legs.append((d, path))
        nodes.extend(path[1:])
        cur = B
    return HierarchicalRoute(tuple(nodes), A, sensor, tuple(legs))
