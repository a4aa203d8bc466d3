"""Highways: short node-disjoint paths from an aggregator to its four lattice
neighbors, their color order, and the repetition count lambda."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

from .coloring import VcmBasis
from .errors import ConstructionError, DomainError
from .grid import GridNetwork, Node, Vec, as_fraction, det, hop_field, norm2

DIRECTIONS = ("+u", "-u", "+v", "-v")


def direction_vector(basis: VcmBasis, d: str) -> Vec:
    u, v = basis.u1, basis.u2
    return {"+u": u, "-u": (-u[0], -u[1]), "+v": v, "-v": (-v[0], -v[1])}[d]


@dataclass(frozen=True)
class Highway:
    direction: str
    path: tuple[Node, ...]
    colors: tuple[int, ...]
    relaxed: bool = False

    @property
    def hops(self) -> int:
        return len(self.path) - 1

    @property
    def intermediates(self) -> tuple[Node, ...]:
        return self.path[1:-1]

    def translated(self, A: Node) -> "Highway":
        """Copy starting at aggregator ``A`` (colors are lattice periodic)."""
        o = self.path[0]
        dx, dy = A[0] - o[0], A[1] - o[1]
        return Highway(self.direction, tuple((x + dx, y + dy) for x, y in self.path), self.colors, self.relaxed)

    def to_record(self) -> dict:
        return {
            "direction": self.direction,
            "nodes": [list(n) for n in self.path],
            "colors": list(self.colors),
            "slots": list(range(1, len(self.colors) + 1)),
            "relaxed": self.relaxed,
        }


def _hop(f, hw, p: Vec) -> int:
    return int(f[p[0] + hw, p[1] + hw])


def _best_path(T: Vec, m: int, used: set, R2: Fraction, f, hw: int):
    """Cheapest simple path of exactly ``m`` hops from the origin to ``T`` avoiding ``used``.

    Cost is the summed squared cross product with ``T`` (squared distance to
    the segment, up to the factor ``|T|^2``); ties go to the lexicographically
    smallest node sequence.
    """
    r = math.isqrt(math.floor(R2))
    offs = [(dx, dy) for dx in range(-r, r + 1) for dy in range(-r, r + 1) if 0 < dx * dx + dy * dy <= R2]
    cost = lambda p: det(p, T) ** 2
    # layer i holds nodes reachable from 0 in <= i hops that reach T in <= m - i hops
    layers = [{(0, 0): (0, ((0, 0),))}]
    for i in range(1, m + 1):
        nxt = {}
        for p, (c, path) in layers[-1].items():
            for dx, dy in offs:
                q = (p[0] + dx, p[1] + dy)
                if i < m and (q in used or q == T):
                    continue
                if i == m and q != T:
                    continue
                if _hop(f, hw, q) > i or _hop(f, hw, (T[0] - q[0], T[1] - q[1])) > m - i:
                    continue
                if q in path:
                    continue
                cand = (c + cost(q), path + (q,))
                if q not in nxt or cand < nxt[q]:
                    nxt[q] = cand
        layers.append(nxt)
        if not nxt:
            return None
    return layers[-1].get(T, (None, None))[1]


def build_highways(A0: Node, basis: VcmBasis, net: GridNetwork | None = None) -> list[Highway]:
    """The four highways of ``A0`` built in the order +u, -u, +v, -v.

    Each is a minimum-hop path to the neighboring aggregator that avoids the
    intermediate nodes of the highways built before it. If none exists the
    search accepts one extra hop (``relaxed``); beyond that it fails.
    """
    if not basis.is_lattice_point(A0):
        raise DomainError(f"{A0} is not an aggregator")
    R = basis.R
    R2 = R * R
    reach = max(math.hypot(*basis.u1), math.hypot(*basis.u2))
    f = hop_field(R, math.ceil(reach) + 4 * math.ceil(R) + 4)
    hw = f.shape[0] // 2
    used: set = set()
    out = []
    for d in DIRECTIONS:
        T = direction_vector(basis, d)
        k = _hop(f, hw, T)
        path, relaxed = _best_path(T, k, used, R2, f, hw), False
        if path is None:
            path, relaxed = _best_path(T, k + 1, used, R2, f, hw), True
        if path is None:
            raise ConstructionError(f"no disjoint path toward {d} within {k + 1} hops")
        used.update(path[1:-1])
        colors = tuple(basis.color_of(p) for p in path[:-1])
        out.append(Highway(d, path, colors, relaxed).translated(A0))
    if net is not None:
        for hw_ in out:
            if hw_.path[-1] not in net or A0 not in net:
                raise DomainError(f"aggregator {A0} lacks a neighbor toward {hw_.direction} in the network")
    for hw_ in out:
        co_highways_order(hw_)
    return out


def co_highways_order(hw: Highway) -> tuple[int, ...]:
    """Slot ``i`` of the sub-period goes to the color of the ``i``-th transmitting node."""
    if len(hw.path) < 2:
        raise ConstructionError("a highway needs at least two nodes")
    if len(set(hw.colors)) != len(hw.colors):
        raise ConstructionError(f"highway {hw.direction} repeats a color")
    return tuple(hw.colors)


def compute_lambda(basis: VcmBasis, max_distance) -> int:
    """Highway cycle repetitions needed to cover ``max_distance``.

    Every full cycle makes at least ``min(|u1|, |u2|) sin(angle)`` =
    ``|det| / max(|u1|, |u2|)`` of progress along a lattice direction, so an
    aggregator at distance ``rho`` is at most ``floor(rho * max|u| / |det|)``
    lattice steps away along each direction. At least one cycle is kept.
    """
    u, v = basis.u1, basis.u2
    d = abs(det(u, v))
    if d == 0:
        raise DomainError("degenerate basis")
    md = as_fraction(max_distance)
    if md <= 0:
        raise DomainError("max_distance must be positive")
    # floor(md * sqrt(m2) / d) with exact arithmetic: largest k with k*d <= md*sqrt(m2)
    m2 = max(norm2(u), norm2(v))
    x2 = md * md * m2
    k = math.isqrt(math.floor(x2 / (d * d)))
    while Fraction((k + 1) * d) ** 2 <= x2:
        k += 1
    while k > 0 and Fraction(k * d) ** 2 > x2:
        k -= 1
    return max(1, k)


def worst_progress(basis: VcmBasis) -> float:
    return min(math.hypot(*basis.u1), math.hypot(*basis.u2)) * math.sin(basis.angle)


def aggregator_cycles_needed(basis: VcmBasis, aggregators, sink: Node) -> int:
    """Largest ``max(|a|, |b|)`` over aggregators at lattice offset ``a*u + b*v`` from the sink."""
    best = 0
    for A in aggregators:
        a, b = basis.lattice_coords((A[0] - sink[0], A[1] - sink[1]))
        best = max(best, abs(a), abs(b))
    return best


def dumps(highways) -> str:
    return json.dumps([h.to_record() for h in highways], indent=1) + "\n"
