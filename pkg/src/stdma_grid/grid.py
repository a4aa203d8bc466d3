"""Integer lattice geometry: grid networks, unit-disk neighborhoods, hop
distances, lattice enumeration and parallelogram membership.

Nodes and vectors are plain ``(x, y)`` integer tuples. Radio ranges are held
as :class:`fractions.Fraction` so that ``|m - n| <= R`` is decided exactly
through ``norm2 <= R**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy import ndimage

from .errors import DomainError

Node = tuple[int, int]
Vec = tuple[int, int]


def as_fraction(value) -> Fraction:
    """Exact rational for a range or radius given as int, float, str or Fraction.

    Floats go through their shortest decimal repr, so ``2.1`` becomes 21/10.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DomainError("boolean is not a range")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise DomainError(f"non-finite value {value!r}")
        return Fraction(repr(value))
    return Fraction(str(value))


def add(p: Vec, q: Vec) -> Vec:
    return (p[0] + q[0], p[1] + q[1])


def sub(p: Vec, q: Vec) -> Vec:
    return (p[0] - q[0], p[1] - q[1])


def scale(k: int, p: Vec) -> Vec:
    return (k * p[0], k * p[1])


def det(u: Vec, v: Vec) -> int:
    return u[0] * v[1] - u[1] * v[0]


def dot(u: Vec, v: Vec) -> int:
    return u[0] * v[0] + u[1] * v[1]


def norm2(u: Vec) -> int:
    return u[0] * u[0] + u[1] * u[1]


def norm(u: Vec) -> float:
    return math.hypot(u[0], u[1])


def half(u: Vec) -> Vec:
    """Componentwise floor of ``u / 2``."""
    return (u[0] // 2, u[1] // 2)


@lru_cache(maxsize=None)
def _offsets(R2: Fraction) -> tuple[Vec, ...]:
    r = math.isqrt(math.floor(R2))
    out = []
    for dx in range(-r, r + 1):
        for dy in range(-r, r + 1):
            if (dx or dy) and dx * dx + dy * dy <= R2:
                out.append((dx, dy))
    return tuple(out)


def neighbor_offsets(R) -> tuple[Vec, ...]:
    """All nonzero integer vectors of Euclidean norm at most ``R``."""
    R = as_fraction(R)
    return _offsets(R * R)


class GridNetwork:
    """Integer grid nodes inside a disk, a square, or an explicit node set.

    ``shape`` is ``"disk"`` (``radius``), ``"square"`` (``side``; nodes with
    ``|x|, |y| <= side / 2``) or ``"custom"`` (``nodes``). Communication follows
    the unit disk model with range ``R``.
    """

    def __init__(self, R, *, shape="disk", radius=None, side=None, nodes=None):
        self.R = as_fraction(R)
        if self.R < 1:
            raise DomainError(f"radio range must be >= 1, got {self.R}")
        self.R2 = self.R * self.R
        self.shape = shape
        if shape == "disk":
            if radius is None:
                raise DomainError("disk network needs a radius")
            self.radius = as_fraction(radius)
            rad2 = self.radius * self.radius
            r = math.isqrt(math.floor(rad2))
            pts = [(x, y) for x in range(-r, r + 1) for y in range(-r, r + 1) if x * x + y * y <= rad2]
        elif shape == "square":
            if side is None:
                raise DomainError("square network needs a side")
            self.side = int(side)
            h = Fraction(self.side, 2)
            r = math.floor(h)
            pts = [(x, y) for x in range(-r, r + 1) for y in range(-r, r + 1)]
        elif shape == "custom":
            if nodes is None:
                raise DomainError("custom network needs a node list")
            pts = sorted({(int(x), int(y)) for x, y in nodes})
        else:
            raise DomainError(f"unknown shape {shape!r}")
        self.nodes: list[Node] = sorted(pts)
        self.index: dict[Node, int] = {n: i for i, n in enumerate(self.nodes)}
        self.offsets = _offsets(self.R2)
        self._nbrs: dict[Node, tuple[Node, ...]] = {}

    @classmethod
    def disk(cls, radius, R) -> "GridNetwork":
        return cls(R, shape="disk", radius=radius)

    @classmethod
    def square(cls, side, R) -> "GridNetwork":
        return cls(R, shape="square", side=side)

    @classmethod
    def from_nodes(cls, nodes: Iterable[Node], R) -> "GridNetwork":
        return cls(R, shape="custom", nodes=list(nodes))

    def __contains__(self, n) -> bool:
        return n in self.index

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self) -> Iterator[Node]:
        return iter(self.nodes)

    def __repr__(self) -> str:
        return f"GridNetwork(shape={self.shape!r}, n={len(self.nodes)}, R={self.R})"

    def in_range(self, p: Node, q: Node) -> bool:
        d = sub(p, q)
        return 0 < norm2(d) <= self.R2

    def neighbors(self, n: Node) -> tuple[Node, ...]:
        try:
            return self._nbrs[n]
        except KeyError:
            pass
        if n not in self.index:
            raise DomainError(f"node {n} is not in the network")
        idx = self.index
        x, y = n
        out = tuple(m for m in ((x + dx, y + dy) for dx, dy in self.offsets) if m in idx)
        self._nbrs[n] = out
        return out

    def coords(self) -> np.ndarray:
        return np.asarray(self.nodes, dtype=np.int64).reshape(-1, 2)

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Directed edge list ``(src_index, dst_index)`` over all neighbor pairs."""
        xy = self.coords()
        if len(xy) == 0:
            return np.zeros(0, np.int64), np.zeros(0, np.int64)
        lo = xy.min(axis=0)
        r = math.isqrt(math.floor(self.R2))
        span = xy.max(axis=0) - lo + 1 + 2 * r
        table = np.full((span[0], span[1]), -1, dtype=np.int64)
        table[xy[:, 0] - lo[0] + r, xy[:, 1] - lo[1] + r] = np.arange(len(xy))
        srcs, dsts = [], []
        for dx, dy in self.offsets:
            tgt = table[xy[:, 0] - lo[0] + r + dx, xy[:, 1] - lo[1] + r + dy]
            ok = tgt >= 0
            srcs.append(np.nonzero(ok)[0])
            dsts.append(tgt[ok])
        return np.concatenate(srcs), np.concatenate(dsts)

    def hops_from(self, src: Node) -> dict[Node, int]:
        """Breadth-first hop counts from ``src`` inside the network."""
        if src not in self.index:
            raise DomainError(f"node {src} is not in the network")
        dist = {src: 0}
        frontier = [src]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for n in frontier:
                for m in self.neighbors(n):
                    if m not in dist:
                        dist[m] = d
                        nxt.append(m)
            frontier = nxt
        return dist


def neighbors(net: GridNetwork, n: Node) -> set[Node]:
    return set(net.neighbors(n))


def _disk_kernel(R2: Fraction) -> np.ndarray:
    r = math.isqrt(math.floor(R2))
    k = np.zeros((2 * r + 1, 2 * r + 1), dtype=bool)
    k[r, r] = True
    for dx, dy in _offsets(R2):
        k[dx + r, dy + r] = True
    return k


@lru_cache(maxsize=64)
def _hop_field(R2: Fraction, half_width: int) -> np.ndarray:
    size = 2 * half_width + 1
    dist = np.full((size, size), -1, dtype=np.int32)
    reached = np.zeros((size, size), dtype=bool)
    reached[half_width, half_width] = True
    dist[half_width, half_width] = 0
    kernel = _disk_kernel(R2)
    k = 0
    while True:
        k += 1
        grown = ndimage.binary_dilation(reached, structure=kernel)
        new = grown & ~reached
        if not new.any():
            break
        dist[new] = k
        reached = grown
    dist.setflags(write=False)
    return dist


def hop_field(R, half_width: int) -> np.ndarray:
    """Hop distances from the origin to every point of ``[-hw, hw]^2``.

    Indexed ``field[x + hw, y + hw]``. Paths are confined to the same box, so
    callers should keep a margin of a few ranges around the points they read.
    """
    R = as_fraction(R)
    if R < 1:
        raise DomainError("hop distance needs R >= 1")
    hw = max(8, 1 << max(0, int(half_width) - 1).bit_length())
    return _hop_field(R * R, hw)


def hop_distance(w: Vec, R) -> int:
    """Minimum number of steps of norm <= R summing to ``w``."""
    if w == (0, 0):
        return 0
    R = as_fraction(R)
    margin = 2 * math.ceil(R) + 2
    need = max(abs(w[0]), abs(w[1])) + margin
    f = hop_field(R, need)
    hw = f.shape[0] // 2
    return int(f[w[0] + hw, w[1] + hw])


def lattice_points_in_disk(u1: Vec, u2: Vec, radius) -> list[Vec]:
    """Points ``a*u1 + b*u2`` with norm <= radius, sorted by (norm2, a, b)."""
    return [p for p, _ in lattice_points_with_coords(u1, u2, radius)]


def lattice_points_with_coords(u1: Vec, u2: Vec, radius) -> list[tuple[Vec, tuple[int, int]]]:
    d = det(u1, u2)
    if d == 0:
        raise DomainError(f"degenerate basis {u1}, {u2}")
    rad = as_fraction(radius)
    if rad < 0:
        raise DomainError("negative radius")
    rad2 = rad * rad
    # Cramer: |a| = |det(p, u2)| / |d| <= radius * |u2| / |d|
    amax = math.floor(float(rad) * norm(u2) / abs(d)) + 1
    bmax = math.floor(float(rad) * norm(u1) / abs(d)) + 1
    out = []
    for a in range(-amax, amax + 1):
        for b in range(-bmax, bmax + 1):
            p = (a * u1[0] + b * u2[0], a * u1[1] + b * u2[1])
            n2 = norm2(p)
            if n2 <= rad2:
                out.append((n2, a, b, p))
    out.sort()
    return [(p, (a, b)) for _, a, b, p in out]


def lattice_coords(p: Vec, u1: Vec, u2: Vec) -> tuple[Fraction, Fraction]:
    """Rational coordinates ``(s, t)`` with ``p = s*u1 + t*u2``."""
    d = det(u1, u2)
    if d == 0:
        raise DomainError(f"degenerate basis {u1}, {u2}")
    return Fraction(det(p, u2), d), Fraction(det(u1, p), d)


def in_lattice(p: Vec, u1: Vec, u2: Vec) -> bool:
    d = det(u1, u2)
    if d == 0:
        raise DomainError(f"degenerate basis {u1}, {u2}")
    return det(p, u2) % d == 0 and det(u1, p) % d == 0


@dataclass(frozen=True)
class Parallelogram:
    """Half-open cell ``{s*u + t*v : 0 <= s, t < 1}`` shifted to be centred on ``anchor``.

    The shift is ``-(floor(u/2) + floor(v/2))`` taken componentwise.
    """

    anchor: Node
    u: Vec
    v: Vec

    def __post_init__(self):
        if det(self.u, self.v) == 0:
            raise DomainError(f"degenerate basis {self.u}, {self.v}")

    @property
    def offset(self) -> Vec:
        return add(half(self.u), half(self.v))

    def __contains__(self, p) -> bool:
        q = add(sub(p, self.anchor), self.offset)
        d = det(self.u, self.v)
        s = det(q, self.v)
        t = det(self.u, q)
        if d > 0:
            return 0 <= s < d and 0 <= t < d
        return d < s <= 0 and d < t <= 0

    def nodes(self) -> list[Node]:
        """Integer points of the cell in row-major ``(y, x)`` order."""
        u, v = self.u, self.v
        corners = [(0, 0), u, v, add(u, v)]
        xs = [c[0] for c in corners]
        ys = [c[1] for c in corners]
        off = self.offset
        out = []
        for y in range(min(ys), max(ys) + 1):
            for x in range(min(xs), max(xs) + 1):
                p = add(sub((x, y), off), self.anchor)
                if p in self:
                    out.append(p)
        return out


def in_parallelogram(p: Node, para: Parallelogram) -> bool:
    return p in para


def nodes_within(points: Sequence[Node], center: Node, radius) -> list[Node]:
    rad = as_fraction(radius)
    rad2 = rad * rad
    return [p for p in points if norm2(sub(p, center)) <= rad2]
