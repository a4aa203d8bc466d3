"""Cell coloring under the physical (SINR) interference model.

Cells are unit squares ``c(w) = w + [0, 1]^2``. All cells on the lattice
``L(u1, u2)`` transmit together; a receiver cell ``c(v)`` hears ``c(0)`` when
the worst-case SINR stays above ``beta``. Worst cases over squares are taken at
corners (nearest point via clamping for interferers).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .coloring import VcmBasis, canonical_basis, hnf_lattices
from .errors import DivergentSumError, DomainError, InfeasibleError
from .grid import Vec, det, norm2

DEFAULT_TRUNCATION = 100


@dataclass(frozen=True)
class SinrParams:
    P: float = 1.0
    N: float = 1e-3
    alpha: float = 4.0
    beta: float = 5.0

    def __post_init__(self):
        if not self.P > 0:
            raise DomainError("transmit power must be positive")
        if self.N < 0:
            raise DomainError("noise power must be nonnegative")
        if not self.beta > 0:
            raise DomainError("beta must be positive")
        if not self.alpha > 2:
            raise DivergentSumError(f"path loss exponent {self.alpha} <= 2: interference sum diverges")


def _check(params: SinrParams):
    # dataclass validation can be bypassed with object.__setattr__; recheck the exponent
    if not params.alpha > 2:
        raise DivergentSumError(f"path loss exponent {params.alpha} <= 2: interference sum diverges")


@lru_cache(maxsize=256)
def _lattice_array(u1: Vec, u2: Vec, trunc: float) -> np.ndarray:
    d = abs(det(u1, u2))
    amax = math.floor(trunc * math.hypot(*u2) / d) + 1
    bmax = math.floor(trunc * math.hypot(*u1) / d) + 1
    a, b = np.meshgrid(np.arange(-amax, amax + 1), np.arange(-bmax, bmax + 1), indexing="ij")
    pts = a.reshape(-1, 1) * np.asarray(u1) + b.reshape(-1, 1) * np.asarray(u2)
    n2 = (pts ** 2).sum(axis=1)
    keep = (n2 <= trunc * trunc) & (n2 > 0)
    return pts[keep].astype(float)


def interference(z, u1: Vec, u2: Vec, params: SinrParams, trunc: float = DEFAULT_TRUNCATION) -> float:
    """Worst-case interference at point ``z`` from every lattice cell but ``c(0)``.

    Each interfering cell contributes from its point nearest to ``z``. Lattice
    points farther than ``trunc`` are dropped; see :func:`tail_bound`.
    """
    _check(params)
    w = _lattice_array(tuple(u1), tuple(u2), float(trunc))
    if len(w) == 0:
        return 0.0
    z = np.asarray(z, dtype=float)
    nearest = np.clip(z, w, w + 1.0)
    d2 = ((nearest - z) ** 2).sum(axis=1)
    if np.any(d2 == 0):
        return math.inf
    return float(params.P * np.sum(d2 ** (-params.alpha / 2)))


def tail_bound(u1: Vec, u2: Vec, params: SinrParams, trunc: float = DEFAULT_TRUNCATION, reach: float = 0.0) -> float:
    """Upper estimate of the interference dropped by truncation.

    Lattice points beyond ``trunc`` each own a cell of area ``|det|``; cells of
    points at distance r lie beyond ``r - reach - 2*sqrt(2)`` from a receiver at
    distance ``reach`` from the origin, giving
    ``2 pi P / (|det| (alpha - 2)) * (trunc - reach - diam)^(2 - alpha)``
    times a factor that absorbs the shell offset.
    """
    _check(params)
    diam = 2 * math.sqrt(2) + math.sqrt(abs(det(u1, u2))) * 2
    gap = trunc - reach - diam
    if gap <= 1:
        return math.inf
    a = params.alpha
    return 2 * math.pi * params.P / (abs(det(u1, u2)) * (a - 2)) * gap ** (2 - a) * (trunc / gap) ** 2


def max_corner_distance(v: Vec) -> float:
    """Largest distance between a point of ``c(0)`` and a point of ``c(v)``."""
    return math.hypot(abs(v[0]) + 1, abs(v[1]) + 1)


def sinr_min(v: Vec, basis, params: SinrParams, trunc: float = DEFAULT_TRUNCATION) -> float:
    """Worst-case SINR at cell ``c(v)`` for a transmission from ``c(0)``."""
    _check(params)
    v = (int(v[0]), int(v[1]))
    if v == (0, 0):
        raise DomainError("receiver cell must differ from the transmitter cell")
    u1, u2 = (basis.u1, basis.u2) if isinstance(basis, VcmBasis) else basis
    if det(u1, u2) == 0:
        raise DomainError(f"degenerate basis {u1}, {u2}")
    signal = params.P * max_corner_distance(v) ** (-params.alpha)
    noise = interference(v, u1, u2, params, trunc) + params.N
    if noise == 0:
        return math.inf
    return signal / noise


def _norm_groups(limit2: int):
    """Nonzero integer vectors grouped by norm^2, up to ``limit2``."""
    r = math.isqrt(limit2)
    by = {}
    for x in range(-r, r + 1):
        for y in range(-r, r + 1):
            n2 = x * x + y * y
            if 0 < n2 <= limit2:
                by.setdefault(n2, []).append((x, y))
    return [(k, sorted(by[k])) for k in sorted(by)]


def coverage_radius2(u1: Vec, u2: Vec, params: SinrParams, trunc: float = DEFAULT_TRUNCATION) -> int:
    """``D^2``: the largest ``|v|^2`` such that every cell ``w`` with
    ``0 < |w| <= |v|`` satisfies ``S_min(w) >= beta``. Zero when the nearest
    ring already fails.

    The walk stops at the first failing ring; it cannot pass the lattice
    itself, where the receiver cell overlaps an interferer.
    """
    r1, _ = (u1, u2) if norm2(u1) <= norm2(u2) else (u2, u1)
    limit2 = norm2(r1) + 4 * math.isqrt(norm2(r1)) + 8
    best = 0
    for n2, ring in _norm_groups(limit2):
        if all(sinr_min(w, (u1, u2), params, trunc) >= params.beta for w in ring):
            best = n2
        else:
            return best
    return best


@dataclass(frozen=True)
class VcmppResult:
    basis: tuple[Vec, Vec]
    D2: int
    n_colors: int
    score: float

    @property
    def D(self) -> float:
        return math.sqrt(self.D2)


def vcmpp_search(params: SinrParams, det_bound: int, box: int = 6, trunc: float = DEFAULT_TRUNCATION) -> VcmppResult:
    """Basis maximizing ``pi D^2 / |det|`` over lattices with a basis in ``[-box, box]^2``.

    Ties go to fewer colors, then the shorter basis, then the lexicographically
    smaller pair. Raises :class:`InfeasibleError` when no lattice reaches ``D >= 1``.
    """
    _check(params)
    if det_bound < 1:
        raise DomainError("det_bound must be >= 1")
    best_key, best = None, None
    for d in range(1, det_bound + 1):
        for g1, g2 in hnf_lattices(d):
            cb = _boxed_basis(g1, g2, box)
            if cb is None:
                continue
            D2 = coverage_radius2(cb[0], cb[1], params, trunc)
            if D2 < 1:
                continue
            key = (-Fraction(D2, d), d, norm2(cb[0]) + norm2(cb[1]), cb)
            if best_key is None or key < best_key:
                best_key, best = key, VcmppResult(cb, D2, d, math.pi * D2 / d)
    if best is None:
        raise InfeasibleError(f"no basis with |det| <= {det_bound} reaches D >= 1")
    return best


def _boxed_basis(g1: Vec, g2: Vec, box: int):
    """Canonical basis of the lattice if some basis fits the box, else None.

    The reduced basis is tried first; lattices whose short vectors exceed the
    box cannot have any basis inside it except through longer vectors, which
    the fallback scan over box vectors handles.
    """
    cb = canonical_basis(g1, g2, box)
    if cb is not None:
        return cb
    d = abs(det(g1, g2))
    inbox = [(x, y) for x in range(-box, box + 1) for y in range(-box, box + 1)
             if (x, y) != (0, 0) and det((x, y), g2) % d == 0 and det(g1, (x, y)) % d == 0]
    best = None
    for a in inbox:
        if not (a[0] > 0 or (a[0] == 0 and a[1] > 0)):
            continue
        for b in inbox:
            if det(a, b) == d:
                key = (norm2(a) + norm2(b), a, b)
                if best is None or key < best:
                    best = key
    return None if best is None else (best[1], best[2])
