"""Slot maps, delays and the global cycle layout."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConflictError, DomainError, PathError
from .grid import Node, as_fraction, norm2, sub


@dataclass(frozen=True)
class SlotMap:
    """Bijection color -> slot in ``1..S``; ``order[k]`` is the color of slot ``k + 1``."""

    order: tuple[int, ...]
    _slot: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        order = tuple(int(c) for c in self.order)
        if sorted(order) != list(range(len(order))):
            raise DomainError("slot order must be a permutation of 0..S-1")
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "_slot", {c: k + 1 for k, c in enumerate(order)})

    @classmethod
    def from_order(cls, colors: Sequence[int]) -> "SlotMap":
        return cls(tuple(colors))

    @classmethod
    def from_slots(cls, slots: dict[int, int]) -> "SlotMap":
        order = [None] * len(slots)
        for c, s in slots.items():
            if not 1 <= s <= len(slots) or order[s - 1] is not None:
                raise DomainError("slots must be a bijection onto 1..S")
            order[s - 1] = c
        return cls(tuple(order))

    @classmethod
    def identity(cls, n: int) -> "SlotMap":
        return cls(tuple(range(n)))

    @property
    def S(self) -> int:
        return len(self.order)

    def __len__(self) -> int:
        return len(self.order)

    def slot(self, color: int) -> int:
        return self._slot[color]

    def slots_array(self) -> np.ndarray:
        """``arr[c]`` is the slot of color ``c``."""
        arr = np.empty(self.S, dtype=np.int64)
        arr[list(self.order)] = np.arange(1, self.S + 1)
        return arr


@dataclass(frozen=True)
class Schedule:
    """A node coloring together with the color -> slot map."""

    color_of: Callable[[Node], int]
    slot_map: SlotMap

    @property
    def S(self) -> int:
        return self.slot_map.S

    def slot(self, n: Node) -> int:
        return self.slot_map.slot(self.color_of(n))


def one_hop_delay(s_i: int, s_j: int, S: int) -> int:
    """Slots waited by a packet sent in slot ``s_i`` until the relay's slot ``s_j``."""
    if not (1 <= s_i <= S and 1 <= s_j <= S):
        raise DomainError(f"slots must lie in 1..{S}")
    if s_i == s_j:
        raise ConflictError(f"sender and relay share slot {s_i}")
    return s_j - s_i if s_j > s_i else S + s_j - s_i


@dataclass(frozen=True)
class DelayReport:
    route_delay: int
    per_hop: tuple[int, ...]

    @property
    def elapsed(self) -> int:
        return self.route_delay + 1


def route_delay(path: Sequence[Node], schedule: Schedule, R=None, adjacent=None) -> DelayReport:
    """Delay of a path: sum of one-hop delays between successive relays.

    The destination does not relay, so a path of k nodes contributes the
    k - 2 delays ``D(v1, v2) ... D(v_{k-2}, v_{k-1})``. Adjacency is checked
    with range ``R`` or with the ``adjacent(a, b)`` predicate.
    """
    if len(path) < 2:
        raise PathError("a route needs at least two nodes")
    if adjacent is None:
        if R is None:
            raise DomainError("route_delay needs R or an adjacency predicate")
        R2 = as_fraction(R) ** 2

        def adjacent(a, b):
            return 0 < norm2(sub(a, b)) <= R2

    for a, b in zip(path, path[1:]):
        if not adjacent(a, b):
            raise PathError(f"{a} and {b} are not neighbors")
    S = schedule.S
    slots = [schedule.slot(n) for n in path[:-1]]
    per_hop = tuple(one_hop_delay(a, b, S) for a, b in zip(slots, slots[1:]))
    return DelayReport(sum(per_hop), per_hop)


def normalized_delay_per_range(report: DelayReport | int, src: Node, dst: Node, R) -> float:
    d = math.sqrt(norm2(sub(src, dst)))
    if d == 0:
        raise DomainError("source and destination coincide")
    delay = report.route_delay if isinstance(report, DelayReport) else report
    return delay / (d / float(as_fraction(R)))


def irco_order(n_colors: int, seed) -> SlotMap:
    """Uniformly random color order from a seeded generator."""
    if n_colors < 1:
        raise DomainError("need at least one color")
    rng = np.random.default_rng(seed)
    return SlotMap(tuple(int(c) for c in rng.permutation(n_colors)))


DIRECTIONS = ("+u", "-u", "+v", "-v")


@dataclass(frozen=True)
class CyclePlan:
    """Routes period followed by ``lam`` repetitions of the highway sub-periods.

    ``highway_subperiods`` holds ``(direction, colors)`` pairs in transmission
    order; each entry of ``colors`` is one slot.
    """

    routes_period: tuple[int, ...]
    highway_subperiods: tuple[tuple[str, tuple[int, ...]], ...]
    lam: int
    optimized: bool

    @property
    def routes_slots(self) -> int:
        return len(self.routes_period)

    @property
    def highway_slots(self) -> int:
        return sum(len(c) for _, c in self.highway_subperiods)

    @property
    def total_slots(self) -> int:
        return self.routes_slots + self.lam * self.highway_slots

    def layout(self) -> list[tuple[str, int]]:
        """Flat ``(period, color)`` list of the whole cycle."""
        out = [("routes", c) for c in self.routes_period]
        for _ in range(self.lam):
            for d, cs in self.highway_subperiods:
                out.extend((d, c) for c in cs)
        return out

    def to_text(self) -> str:
        doc = {
            "routes_period": list(self.routes_period),
            "highway_subperiods": [{"direction": d, "colors": list(c)} for d, c in self.highway_subperiods],
            "lambda": self.lam,
            "optimized": self.optimized,
            "total_slots": self.total_slots,
        }
        return json.dumps(doc, indent=1) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CyclePlan":
        doc = json.loads(text)
        plan = cls(
            tuple(doc["routes_period"]),
            tuple((s["direction"], tuple(s["colors"])) for s in doc["highway_subperiods"]),
            int(doc["lambda"]),
            bool(doc["optimized"]),
        )
        if "total_slots" in doc and doc["total_slots"] != plan.total_slots:
            raise DomainError("total_slots does not match the listed periods")
        return plan


def build_cycle_plan(routes_order: SlotMap, highways, lam: int, optimize: bool = True) -> CyclePlan:
    """Assemble the global cycle.

    ``highways`` maps direction -> color sequence of the highway's transmitting
    nodes (aggregator first), or is a sequence of objects with ``direction`` and
    ``colors``. Sub-periods run in the order +u, -u, +v, -v. With ``optimize``,
    the aggregator lead slot of +u, -u and -v is dropped: +u follows the Routes
    period whose last slot is the aggregator's, and -u / -v follow a highway
    that ended at the aggregator. +v keeps its lead slot.
    """
    if lam < 1:
        raise DomainError("lambda must be >= 1")
    if not isinstance(highways, dict):
        highways = {hw.direction: tuple(hw.colors) for hw in highways}
    subs = []
    for d in DIRECTIONS:
        if d not in highways:
            continue
        cs = tuple(highways[d])
        if optimize and d != "+v":
            cs = cs[1:]
        subs.append((d, cs))
    return CyclePlan(tuple(routes_order.order), tuple(subs), int(lam), bool(optimize))
