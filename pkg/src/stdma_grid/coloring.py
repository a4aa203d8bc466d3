"""Periodic lattice colorings of the grid.

A basis ``(u1, u2)`` generates the lattice ``L(u1, u2)``; nodes that differ by
a lattice vector share a color, so there are ``|det(u1, u2)|`` colors. The
coloring is an h-hop coloring when every nonzero lattice vector needs more
than ``h`` radio hops.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import BoundExhaustedError, DomainError
from .grid import (
    Node,
    Vec,
    as_fraction,
    det,
    dot,
    hop_field,
    lattice_points_in_disk,
    norm,
    norm2,
)


def theta(h: int) -> float:
    """Asymptotic color density constant: colors ~ theta * R**2."""
    return math.sqrt(3) / 2 * h * h


def reduce_basis(u: Vec, v: Vec) -> tuple[Vec, Vec]:
    """Lagrange-Gauss reduction: returns a basis with |u| <= |v| and |2 u.v| <= |u|^2."""
    if det(u, v) == 0:
        raise DomainError(f"degenerate basis {u}, {v}")
    if norm2(u) > norm2(v):
        u, v = v, u
    while True:
        n = norm2(u)
        # nearest integer to (u.v)/|u|^2, ties toward zero
        q = dot(u, v)
        k = (2 * q + n) // (2 * n) if q >= 0 else -((-2 * q + n) // (2 * n))
        v = (v[0] - k * u[0], v[1] - k * u[1])
        if norm2(v) >= norm2(u):
            return u, v
        u, v = v, u


def _hop_table(h: int, R: Fraction):
    reach = float((h + 1) * R) + 2
    margin = 2 * math.ceil(R) + 2
    f = hop_field(R, math.ceil(reach) + margin)
    return reach, f, f.shape[0] // 2


def _valid(u1: Vec, u2: Vec, h: int, R: Fraction, table=None) -> bool:
    reach, f, hw = table or _hop_table(h, R)
    for w in lattice_points_in_disk(u1, u2, reach):
        if w == (0, 0):
            continue
        if f[w[0] + hw, w[1] + hw] <= h:
            return False
    return True


def is_valid_basis(u1: Vec, u2: Vec, h: int, R) -> bool:
    """True when no nonzero lattice vector is within ``h`` hops at range ``R``."""
    if det(u1, u2) == 0:
        raise DomainError(f"degenerate basis {u1}, {u2}")
    if h < 1:
        raise DomainError("h must be a positive integer")
    return _valid(tuple(u1), tuple(u2), int(h), as_fraction(R))


@dataclass(frozen=True)
class VcmBasis:
    u1: Vec
    u2: Vec
    h: int
    R: Fraction = field(compare=True)

    def __post_init__(self):
        object.__setattr__(self, "u1", (int(self.u1[0]), int(self.u1[1])))
        object.__setattr__(self, "u2", (int(self.u2[0]), int(self.u2[1])))
        object.__setattr__(self, "R", as_fraction(self.R))
        if det(self.u1, self.u2) == 0:
            raise DomainError(f"degenerate basis {self.u1}, {self.u2}")

    @property
    def det(self) -> int:
        return det(self.u1, self.u2)

    @property
    def n_colors(self) -> int:
        return abs(self.det)

    @property
    def angle(self) -> float:
        c = dot(self.u1, self.u2) / (norm(self.u1) * norm(self.u2))
        return math.acos(max(-1.0, min(1.0, c)))

    @property
    def theta(self) -> float:
        return theta(self.h)

    def is_valid(self) -> bool:
        return _valid(self.u1, self.u2, self.h, self.R)

    def lattice_coords(self, p: Vec) -> tuple[int, int]:
        """Integer ``(a, b)`` with ``p = a*u1 + b*u2``; raises if p is off the lattice."""
        d = self.det
        s, t = det(p, self.u2), det(self.u1, p)
        if s % d or t % d:
            raise DomainError(f"{p} is not on the lattice")
        return s // d, t // d

    def is_lattice_point(self, p: Vec) -> bool:
        d = self.det
        return det(p, self.u2) % d == 0 and det(self.u1, p) % d == 0

    def point(self, a: int, b: int) -> Node:
        return (a * self.u1[0] + b * self.u2[0], a * self.u1[1] + b * self.u2[1])

    def reduce(self, p: Vec) -> Vec:
        """Representative of ``p`` in the half-open cell ``{s*u1 + t*u2 : 0 <= s, t < 1}``."""
        d = self.det
        a = det(p, self.u2) // d
        b = det(self.u1, p) // d
        return (p[0] - a * self.u1[0] - b * self.u2[0], p[1] - a * self.u1[1] - b * self.u2[1])

    @cached_property
    def residues(self) -> tuple[Vec, ...]:
        """Integer points of the origin cell in row-major ``(y, x)`` order."""
        u, v = self.u1, self.u2
        xs = [0, u[0], v[0], u[0] + v[0]]
        ys = [0, u[1], v[1], u[1] + v[1]]
        out = []
        for y in range(min(ys), max(ys) + 1):
            for x in range(min(xs), max(xs) + 1):
                if self.reduce((x, y)) == (x, y):
                    out.append((x, y))
        assert len(out) == self.n_colors
        return tuple(out)

    @cached_property
    def _residue_index(self) -> dict[Vec, int]:
        return {r: i for i, r in enumerate(self.residues)}

    @cached_property
    def _residue_table(self):
        rs = np.asarray(self.residues, dtype=np.int64)
        lo = rs.min(axis=0)
        span = rs.max(axis=0) - lo + 1
        table = np.full(tuple(span), -1, dtype=np.int64)
        table[rs[:, 0] - lo[0], rs[:, 1] - lo[1]] = np.arange(len(rs))
        return lo, table

    def color_of(self, p: Node) -> int:
        return self._residue_index[self.reduce(p)]

    def colors_of(self, pts) -> np.ndarray:
        """Vectorized :meth:`color_of` over an ``(n, 2)`` integer array."""
        pts = np.asarray(pts, dtype=np.int64).reshape(-1, 2)
        d = self.det
        u1 = np.asarray(self.u1, dtype=np.int64)
        u2 = np.asarray(self.u2, dtype=np.int64)
        a = (pts[:, 0] * u2[1] - pts[:, 1] * u2[0]) // d
        b = (u1[0] * pts[:, 1] - u1[1] * pts[:, 0]) // d
        r = pts - a[:, None] * u1 - b[:, None] * u2
        lo, table = self._residue_table
        return table[r[:, 0] - lo[0], r[:, 1] - lo[1]]

    def residue_of_color(self, c: int) -> Vec:
        return self.residues[c]

    def to_record(self) -> dict:
        R = self.R
        return {
            "u1": list(self.u1),
            "u2": list(self.u2),
            "h": self.h,
            "R": int(R) if R.denominator == 1 else str(R),
            "n_colors": self.n_colors,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "VcmBasis":
        b = cls(tuple(rec["u1"]), tuple(rec["u2"]), int(rec["h"]), as_fraction(rec["R"]))
        if "n_colors" in rec and int(rec["n_colors"]) != b.n_colors:
            raise DomainError(f"record n_colors {rec['n_colors']} != |det| {b.n_colors}")
        return b

    def dumps(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "VcmBasis":
        return cls.from_record(json.loads(text))


def color_of(p: Node, basis: VcmBasis) -> int:
    return basis.color_of(p)


def hnf_lattices(d: int):
    """Every sublattice of Z^2 of index ``d`` as a basis ``((a, 0), (b, c))``."""
    for a in range(1, d + 1):
        if d % a:
            continue
        c = d // a
        for b in range(a):
            yield (a, 0), (b, c)


def canonical_basis(u1: Vec, u2: Vec, bound: int | None = None) -> tuple[Vec, Vec] | None:
    """Shortest basis of ``L(u1, u2)`` in a fixed normal form.

    Among bases minimizing ``|u1|^2 + |u2|^2`` with positive determinant and
    ``u1`` in the right half plane, the lexicographically smallest ``(u1, u2)``.
    With ``bound``, only bases whose components fit in ``[-bound, bound]``;
    ``None`` if there is none.
    """
    r1, r2 = reduce_basis(u1, u2)
    d = abs(det(r1, r2))
    short = [w for w in lattice_points_in_disk(r1, r2, math.isqrt(norm2(r2)) + 1)
             if w != (0, 0) and norm2(w) <= norm2(r2)]
    best = None
    for a in short:
        if not (a[0] > 0 or (a[0] == 0 and a[1] > 0)):
            continue
        for b in short:
            if det(a, b) != d:
                continue
            if bound is not None and max(abs(a[0]), abs(a[1]), abs(b[0]), abs(b[1])) > bound:
                continue
            key = (norm2(a) + norm2(b), a, b)
            if best is None or key < best:
                best = key
    return None if best is None else (best[1], best[2])


def search_basis(h: int, R, det_bound: int) -> VcmBasis:
    """Valid basis with the fewest colors.

    Sublattices of Z^2 are enumerated by increasing index; the first index with
    a valid lattice wins. Bases must fit in the box ``ceil((h+1)R) + 1``; ties go
    to the smaller ``|u1|^2 + |u2|^2``, then the lexicographically smaller pair.
    """
    if det_bound < 1:
        raise DomainError("det_bound must be >= 1")
    if h < 1:
        raise DomainError("h must be a positive integer")
    R = as_fraction(R)
    box = math.ceil((h + 1) * R) + 1
    table = _hop_table(h, R)
    _, f, hw = table
    for d in range(1, det_bound + 1):
        found = []
        for g1, g2 in hnf_lattices(d):
            r1, _ = reduce_basis(g1, g2)
            if max(abs(r1[0]), abs(r1[1])) <= hw and f[r1[0] + hw, r1[1] + hw] <= h:
                continue
            if not _valid(g1, g2, h, R, table):
                continue
            cb = canonical_basis(g1, g2, box)
            if cb is not None:
                found.append((norm2(cb[0]) + norm2(cb[1]), cb))
        if found:
            found.sort()
            u1, u2 = found[0][1]
            return VcmBasis(u1, u2, h, R)
    raise BoundExhaustedError(f"no valid basis with |det| <= {det_bound} for h={h}, R={R}")


# Bases listed in the published comparison table, h = 3.
PUBLISHED_BASES = {
    2: ((4, 3), (-3, 4), 25),
    3: ((5, 7), (-4, 8), 68),
    4: ((8, 8), (-3, 11), 112),
    5: ((15, 3), (4, 14), 198),
}


def published_basis(R: int) -> VcmBasis:
    u1, u2, _ = PUBLISHED_BASES[int(R)]
    return VcmBasis(u1, u2, 3, R)


def conflict_free(basis: VcmBasis, window: int | None = None) -> bool:
    """Exhaustive check that equal-colored nodes in a square window are more than h hops apart.

    Default window side is ``2 (h+1) R``. Pairs are compared through their
    difference vectors, so the scan is over the differences that occur.
    """
    h, R = basis.h, basis.R
    side = window if window is not None else math.ceil(2 * (h + 1) * R)
    xs = np.arange(side)
    grid = np.stack(np.meshgrid(xs, xs, indexing="ij"), axis=-1).reshape(-1, 2)
    colors = basis.colors_of(grid)
    margin = 2 * math.ceil(R) + 2
    f = hop_field(R, side + margin)
    hw = f.shape[0] // 2
    bad = 0
    for c in np.unique(colors):
        pts = grid[colors == c]
        diff = (pts[:, None, :] - pts[None, :, :]).reshape(-1, 2)
        diff = diff[np.any(diff != 0, axis=1)]
        if len(diff) == 0:
            continue
        hops = f[diff[:, 0] + hw, diff[:, 1] + hw]
        bad += int(np.count_nonzero(hops <= h))
    return bad == 0
