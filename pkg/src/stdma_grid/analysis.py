"""Stochastic delay model under random color ordering, the cycle-length
estimate, and energy accounting (closed form and simulated)."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .coloring import VcmBasis, theta
from .errors import DomainError
from .grid import GridNetwork, Node
from .routing import delays_to_sink, node_slots
from .schedule import CyclePlan, Schedule, SlotMap, irco_order


@dataclass(frozen=True)
class NdrModelParams:
    """One forwarding step at range ``n`` with i.i.d. colors uniform on ``[alpha_c, beta_c]``."""

    n: int
    alpha_c: float
    beta_c: float
    h: int = 3

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be >= 1")
        if not (0 <= self.alpha_c <= self.beta_c):
            raise DomainError("need 0 <= alpha_c <= beta_c")

    @classmethod
    def bind_vcm(cls, n: int, h: int = 3, alpha_c: float = 1.0) -> "NdrModelParams":
        """Colors spread over a VCM cycle of ``theta(h) * n**2`` slots."""
        return cls(n, alpha_c, theta(h) * n * n, h)

    @property
    def width(self) -> float:
        return self.beta_c - self.alpha_c

    @property
    def shift(self) -> float:
        return 3 * self.alpha_c * math.pi / 4

    @property
    def rate(self) -> float:
        """Rate of the exponential part, ``2 n^2 / (3 (beta - alpha))``."""
        if self.width == 0:
            return math.inf
        return 2 * self.n**2 / (3 * self.width)


def ndr_closed_form(p: NdrModelParams) -> float:
    """Asymptotic mean of the normalized delay per range: shift + 1/rate."""
    return p.shift + 3 * p.width / (2 * p.n**2)


def ndr_closed_cdf(p: NdrModelParams, x) -> np.ndarray:
    """Shifted exponential CDF matching :func:`ndr_closed_form`."""
    x = np.asarray(x, dtype=float)
    if p.width == 0:
        return (x >= p.shift).astype(float)
    return np.where(x < p.shift, 0.0, -np.expm1(-p.rate * (x - p.shift)))


def column_sizes(n: int) -> np.ndarray:
    """Neighbors per column ``u = 1..n``: ``2 floor(sqrt(n^2 - u^2)) + 1``."""
    return np.array([2 * math.isqrt(n * n - u * u) + 1 for u in range(1, n + 1)], dtype=np.int64)


@dataclass(frozen=True)
class NdrSample:
    params: NdrModelParams
    values: np.ndarray  # sorted draws of Z

    @property
    def mean(self) -> float:
        return float(self.values.mean())

    def cdf(self, x) -> np.ndarray:
        return np.searchsorted(self.values, np.asarray(x, dtype=float), side="right") / len(self.values)

    def quantiles(self, q) -> np.ndarray:
        return np.quantile(self.values, q)

    def log_survival(self, x) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log1p(-self.cdf(x))


def _draw_block(p: NdrModelParams, m: np.ndarray, rows: int, seed, integer: bool) -> np.ndarray:
    rng = np.random.default_rng(seed)
    n = p.n
    scale = n / np.arange(1, n + 1, dtype=float)
    V = 1.0 - rng.random((rows, n))  # (0, 1]
    W = -np.expm1(np.log(V) / m)  # min of m uniforms per column
    if integer:
        lo = math.ceil(p.alpha_c)
        K = math.floor(p.beta_c) - lo + 1
        c = lo + np.floor(K * W)
    else:
        c = p.alpha_c + p.width * W
    return (c * scale).min(axis=1)


def ndr_monte_carlo(
    p: NdrModelParams,
    draws: int,
    seed,
    *,
    integer: bool = False,
    workers: int = 1,
    block_elems: int = 1 << 22,
) -> NdrSample:
    """Simulate the one-step model ``draws`` times.

    Column ``u`` holds ``2 y(u) + 1`` neighbors whose best color is drawn
    directly as the minimum of that many uniforms. ``Z`` is the minimum of
    ``color * n / u`` over all columns. Draws are split into fixed blocks with
    their own spawned streams, so the result does not depend on ``workers``.
    """
    if draws < 1:
        raise DomainError("draws must be >= 1")
    if integer and math.floor(p.beta_c) < math.ceil(p.alpha_c):
        raise DomainError("no integer color in [alpha_c, beta_c]")
    m = column_sizes(p.n).astype(float)
    rows = max(1, block_elems // p.n)
    sizes = [rows] * (draws // rows) + ([draws % rows] if draws % rows else [])
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(p, m, k, s, integer) for k, s in zip(sizes, seeds)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda a: _draw_block(*a), jobs))
    else:
        parts = [_draw_block(*a) for a in jobs]
    return NdrSample(p, np.sort(np.concatenate(parts)))


def ndr_survival(p: NdrModelParams, x) -> np.ndarray:
    """Exact ``P(Z > x)`` of the one-step model, clamping included."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = p.n
    m = column_sizes(n).astype(float)
    u = np.arange(1, n + 1, dtype=float)
    out = np.empty_like(x)
    step = max(1, (1 << 21) // n)
    for i in range(0, len(x), step):
        xx = x[i : i + step, None]
        if p.width == 0:
            a = (xx * u / n > p.alpha_c).astype(float)
        else:
            a = np.clip((xx * u / n - p.alpha_c) / p.width, 0.0, 1.0)
        with np.errstate(divide="ignore"):
            out[i : i + step] = np.exp((m * np.log1p(-a)).sum(axis=1))
    return out


def ndr_exact_mean(p: NdrModelParams, points: int = 100_001) -> float:
    """``E[Z]`` by quadrature of the exact survival function.

    ``Z`` is at least ``alpha_c`` and at most ``beta_c``; the exponential tail
    is integrated out to 60 mean lengths past the shift.
    """
    from scipy.integrate import simpson

    hi = min(p.beta_c, p.shift + 60 / p.rate + 1) if p.width else p.alpha_c
    lo = p.alpha_c
    if hi <= lo:
        return float(lo)
    x = np.linspace(lo, hi, points)
    return float(lo + simpson(ndr_survival(p, x), x=x))


def exponential_fit(sample: NdrSample, lo: float = 0.01, hi: float = 0.99) -> tuple[float, float]:
    """Least-squares line through ``(x, log(1 - F(x)))`` over the central mass.

    Returns ``(slope, intercept)``; the model predicts ``slope = -rate``.
    """
    v = sample.values
    k = len(v)
    i0, i1 = int(lo * k), int(hi * k)
    x = v[i0:i1]
    F = np.arange(i0 + 1, i1 + 1) / k
    slope, icpt = np.polyfit(x, np.log1p(-F), 1)
    return float(slope), float(icpt)


def cdf_gap(sample: NdrSample, lo: float = 0.01, hi: float = 0.99) -> float:
    """Largest ``|F_hat - F|`` over the central mass of the sample."""
    v = sample.values
    x = v[int(lo * len(v)) : int(hi * len(v))]
    return float(np.max(np.abs(sample.cdf(x) - ndr_closed_cdf(sample.params, x))))


def convergence_series(ns, draws: int, seed, h: int = 3, alpha_c: float = 1.0) -> list[tuple[int, float, float]]:
    """``(n, simulated mean, closed form)`` for each range in ``ns``."""
    out = []
    for k, n in enumerate(ns):
        p = NdrModelParams.bind_vcm(int(n), h, alpha_c)
        s = ndr_monte_carlo(p, draws, [seed, k])
        out.append((int(n), s.mean, ndr_closed_form(p)))
    return out


def cycle_length_estimate(h: int, R, L) -> float:
    """Routes colors ``theta R^2`` plus ``lambda`` highway cycles of ``4 (h + 1)`` slots.

    ``L`` is the disk radius in radio ranges; the repetition count
    ``4 sqrt(3) L / (3 h)`` covers a sink-to-node distance of up to ``2 L``
    ranges (the sink anywhere in the disk). No highway optimization.
    """
    if h <= 0 or R <= 0 or L < 0:
        raise DomainError("h and R must be positive, L nonnegative")
    R = float(R)
    return theta(h) * R * R + 4 * (h + 1) * 4 * math.sqrt(3) * L / (3 * h)


@dataclass(frozen=True)
class EnergyReport:
    E_irco: float
    E_orchid: float
    ratio: float
    asymptotic_ratio: float


def energy_models(h: int, R, L) -> EnergyReport:
    """Closed-form energies in units of one active node-slot.

    IRCO repeats the VCM cycle long enough to cross ``2L`` ranges at the
    model's normalized delay; ORCHID runs one Routes cycle then its highway
    repetitions. ``asymptotic_ratio`` is the ``L -> inf`` limit of the ratio,
    which decays as ``1 / R^2``.
    """
    if h <= 0 or R <= 0 or L <= 0:
        raise DomainError("h, R and L must be positive")
    R = float(R)
    pi, s3 = math.pi, math.sqrt(3)
    th = theta(h)
    e_irco = pi**2 * s3 * (pi + h * h * s3) * R**2 * L**3 / h**2
    hw = 32 * pi * s3 * (h + 1) / (3 * h * th)
    e_orchid = pi**2 * R**4 * L**2 + hw * L**3
    asym = hw / (pi**2 * s3 * (pi + h * h * s3) * R**2 / h**2)
    return EnergyReport(e_irco, e_orchid, e_orchid / e_irco, asym)


def routes_energy(net: GridNetwork) -> int:
    """One Routes cycle: every node listens in each neighbor's slot and uses its own."""
    src, _ = net.edge_arrays()
    return len(net) + len(src)


def _copies(net: GridNetwork, basis: VcmBasis, offset: Node) -> int:
    """Nodes ``A + offset`` in the network over all lattice points ``A``."""
    pts = net.coords() - np.asarray(offset)
    return int(np.count_nonzero(basis.colors_of(pts) == basis.color_of((0, 0))))


def highway_cycle_energy(plan: CyclePlan, net: GridNetwork, basis: VcmBasis, highways) -> int:
    """Energy of one pass over the highway sub-periods.

    In each slot the transmitting highway node and its next hop are awake, in
    every lattice translate that lies in the network. Sub-periods shortened by
    the optimization keep their trailing hops; the dropped lead hop happens in
    the aggregator's earlier slot and is already paid for.
    """
    by_dir = {hw.direction: hw for hw in highways}
    total = 0
    for d, cs in plan.highway_subperiods:
        path = by_dir[d].translated((0, 0)).path
        first = len(path) - 1 - len(cs)
        for k in range(first, len(path) - 1):
            total += _copies(net, basis, path[k]) + _copies(net, basis, path[k + 1])
    return total


def simulated_energy(plan: CyclePlan, net: GridNetwork, basis: VcmBasis, highways, irco_cycles: float) -> EnergyReport:
    """ORCHID cycle energy against ``irco_cycles`` repetitions of the VCM cycle.

    ``asymptotic_ratio`` keeps only the highway repetitions on the ORCHID side,
    the regime reached when the disk grows and highways dominate.
    """
    if irco_cycles <= 0:
        raise DomainError("irco_cycles must be positive")
    routes = routes_energy(net)
    hw = plan.lam * highway_cycle_energy(plan, net, basis, highways)
    e_irco = irco_cycles * routes
    e_orchid = routes + hw
    return EnergyReport(float(e_irco), float(e_orchid), e_orchid / e_irco, hw / e_irco)


def cycles_to_sink(net: GridNetwork, schedule: Schedule, sink: Node) -> int:
    """VCM cycles until every node's packet has reached ``sink``.

    A node sends in its own slot ``s`` of the first cycle; the last relay
    transmits ``D`` slots later, so ``ceil((s + D) / S)`` cycles are used.
    """
    D = delays_to_sink(net, schedule, sink)
    slots = node_slots(net, schedule)
    keep = np.ones(len(net), dtype=bool)
    keep[net.index[sink]] = False
    if not keep.any():
        return 1
    if np.isinf(D[keep]).any():
        raise DomainError("some node cannot reach the sink")
    need = (slots[keep] + D[keep]) / schedule.S
    return int(np.ceil(need.max() - 1e-9))


def irco_cycles(net: GridNetwork, basis: VcmBasis, sink: Node, seeds) -> list[int]:
    """Cycles needed by IRCO toward ``sink`` for each seeded random order."""
    out = []
    for s in seeds:
        order: SlotMap = irco_order(basis.n_colors, s)
        out.append(cycles_to_sink(net, Schedule(basis.color_of, order), sink))
    return out
