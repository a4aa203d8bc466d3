"""Mapping an arbitrary point cloud onto a cell grid so the grid coloring can
be reused: one super-slot per cell color, split into sub-slots for the points
sharing a cell."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .coloring import VcmBasis
from .errors import DomainError, IngestionError
from .grid import Node

Point = tuple[float, float]


@dataclass
class CellGridMapping:
    points: list[Point]
    width: float = 1.0
    origin: Point = (0.0, 0.0)
    require_full: bool = True
    cells: dict[Node, list[int]] = field(init=False)

    def __post_init__(self):
        if self.width <= 0:
            raise DomainError("cell width must be positive")
        if not self.points:
            raise IngestionError("no points to map")
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or not np.isfinite(pts).all():
            raise IngestionError("points must be finite (x, y) pairs")
        ij = np.floor((pts - np.asarray(self.origin)) / self.width).astype(np.int64)
        cells = defaultdict(list)
        for k, (i, j) in enumerate(ij):
            cells[(int(i), int(j))].append(k)
        # points in a cell, nearest to its center first (ties by input order)
        for c, ks in cells.items():
            ctr = self.center(c)
            ks.sort(key=lambda k: ((pts[k, 0] - ctr[0]) ** 2 + (pts[k, 1] - ctr[1]) ** 2, k))
        self.cells = dict(sorted(cells.items()))
        if self.require_full:
            lo = ij.min(axis=0)
            hi = ij.max(axis=0)
            for i in range(lo[0], hi[0] + 1):
                for j in range(lo[1], hi[1] + 1):
                    if (i, j) not in self.cells:
                        raise IngestionError(f"cell {(i, j)} contains no point")

    def center(self, cell: Node) -> Point:
        return (
            self.origin[0] + (cell[0] + 0.5) * self.width,
            self.origin[1] + (cell[1] + 0.5) * self.width,
        )

    def cell_of(self, k: int) -> Node:
        x, y = self.points[k]
        return (math.floor((x - self.origin[0]) / self.width), math.floor((y - self.origin[1]) / self.width))

    def representative(self, cell: Node) -> int:
        """Index of the point nearest the cell center."""
        return self.cells[cell][0]

    def population(self, cell: Node) -> int:
        return len(self.cells.get(cell, ()))

    def sub_slots(self, basis: VcmBasis) -> dict[int, int]:
        """Sub-slots per cell color: the largest population among cells of that color.

        Colors that no occupied cell carries get 0 sub-slots.
        """
        out = {c: 0 for c in range(basis.n_colors)}
        for cell, ks in self.cells.items():
            c = basis.color_of(cell)
            out[c] = max(out[c], len(ks))
        return out

    def cycle_length(self, basis: VcmBasis) -> int:
        return sum(self.sub_slots(basis).values())

    def point_slots(self, basis: VcmBasis, order: Sequence[int] | None = None) -> list[int]:
        """Slot (1-based) of every point in the super-slot cycle.

        Super-slots follow ``order`` (default: color order); inside a cell the
        k-th point nearest the center takes the k-th sub-slot.
        """
        subs = self.sub_slots(basis)
        order = list(range(basis.n_colors)) if order is None else list(order)
        if sorted(order) != list(range(basis.n_colors)):
            raise DomainError("order must be a permutation of the colors")
        start, t = {}, 0
        for c in order:
            start[c] = t
            t += subs[c]
        slots = [0] * len(self.points)
        for cell, ks in self.cells.items():
            base = start[basis.color_of(cell)]
            for r, k in enumerate(ks):
                slots[k] = base + r + 1
        return slots


def read_points(path) -> list[Point]:
    """``x,y`` rows from a CSV file; a non-numeric first row is taken as a header."""
    pts = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or all(not s.strip() for s in row):
                continue
            try:
                x, y = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                if lineno == 1:
                    continue
                raise IngestionError(f"{path}:{lineno}: expected two numbers, got {row!r}") from None
            pts.append((x, y))
    return pts


def ingest_general_graph(
    source: str | Path | Iterable[Point],
    width: float = 1.0,
    transmission_range: float | None = None,
    require_full: bool = True,
) -> CellGridMapping:
    """Cell-grid mapping of a point file (or an iterable of points).

    Cells are half-open squares of side ``width`` anchored at the origin. The
    width may not exceed the transmission range.
    """
    if transmission_range is not None and width > transmission_range:
        raise DomainError(f"cell width {width} exceeds the transmission range {transmission_range}")
    if isinstance(source, (str, Path)):
        pts = read_points(source)
    else:
        pts = [(float(x), float(y)) for x, y in source]
    return CellGridMapping(pts, float(width), require_full=require_full)
