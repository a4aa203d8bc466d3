"""Dominating trees rooted at aggregators and the CO-Routes color order.

Trees are built once around an aggregator at the origin of an unbounded grid
(in practice a window grown until the tree no longer feels its border) and
copied to every other aggregator by translation. A packet follows its
dominator, then parent links, up to the root.

Linking ranks grow from the root outward. Data flows the other way, so the
transmission order of the Routes period is the linking order reversed: the
root color owns the last Routes slot and every node transmits before its
parent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .coloring import VcmBasis
from .errors import DomainError
from .grid import GridNetwork, Node, Parallelogram, hop_field, norm2, sub
from .schedule import SlotMap


@dataclass
class DominatingTree:
    root: Node
    basis: VcmBasis
    parent: dict[Node, Node | None]
    dominator_of: dict[Node, Node]
    linking_order: tuple[int, ...]

    @property
    def members(self) -> set[Node]:
        return set(self.parent)

    @property
    def covered(self) -> set[Node]:
        """Members plus every node with a dominator."""
        return set(self.parent) | set(self.dominator_of)

    @property
    def tree_colors(self) -> tuple[int, ...]:
        return self.linking_order

    @property
    def linking_rank(self) -> dict[int, int]:
        return {c: i + 1 for i, c in enumerate(self.linking_order)}

    def next_hop(self, n: Node) -> Node | None:
        if n in self.parent:
            return self.parent[n]
        return self.dominator_of.get(n)

    def chain(self, n: Node) -> list[Node]:
        """``n`` followed by its dominator and ancestors up to the root."""
        if n not in self.parent and n not in self.dominator_of:
            raise DomainError(f"{n} is not covered by the tree at {self.root}")
        out = [n]
        while out[-1] != self.root:
            out.append(self.next_hop(out[-1]))
        return out

    def children(self) -> dict[Node, list[Node]]:
        ch = {m: [] for m in self.parent}
        for m, p in self.parent.items():
            if p is not None:
                ch[p].append(m)
        for v in ch.values():
            v.sort()
        return ch

    def depth(self) -> dict[Node, int]:
        d = {self.root: 0}
        stack = [self.root]
        ch = self.children()
        while stack:
            m = stack.pop()
            for c in ch[m]:
                d[c] = d[m] + 1
                stack.append(c)
        return d

    def branches(self) -> list[list[Node]]:
        """Root-to-leaf member paths."""
        ch = self.children()
        out = []
        stack = [[self.root]]
        while stack:
            path = stack.pop()
            kids = ch[path[-1]]
            if not kids:
                out.append(path)
            for c in reversed(kids):
                stack.append(path + [c])
        return out

    def color(self, n: Node) -> int:
        return self.basis.color_of(n)

    def dump(self, order: "CoRoutesOrder | None" = None) -> list[dict]:
        """Per-node records ``{node, parent, dominator, color, slot}``, sorted by node."""
        out = []
        for n in sorted(self.covered):
            rec = {"node": list(n), "color": self.color(n)}
            if n in self.parent:
                p = self.parent[n]
                rec["parent"] = None if p is None else list(p)
            else:
                rec["dominator"] = list(self.dominator_of[n])
            if order is not None:
                rec["slot"] = order.slot(rec["color"])
            out.append(rec)
        return out

    def dumps(self, order: "CoRoutesOrder | None" = None) -> str:
        return "\n".join(json.dumps(r, sort_keys=True) for r in self.dump(order)) + "\n"


@dataclass(frozen=True)
class CoRoutesOrder:
    """Color order of the Routes period.

    ``rank`` numbers colors in linking order (root = 1, then tree colors, then
    the remaining colors). ``slot_map`` is the transmission order, the
    reverse of ``rank``.
    """

    rank: dict[int, int]
    slot_map: SlotMap = field(init=False)

    def __post_init__(self):
        S = len(self.rank)
        if sorted(self.rank.values()) != list(range(1, S + 1)):
            raise DomainError("ranks must be a bijection onto 1..S")
        object.__setattr__(self, "slot_map", SlotMap.from_slots({c: S + 1 - r for c, r in self.rank.items()}))

    @property
    def S(self) -> int:
        return len(self.rank)

    def slot(self, color: int) -> int:
        return self.slot_map.slot(color)

    def reversed(self) -> "CoRoutesOrder":
        S = self.S
        return CoRoutesOrder({c: S + 1 - r for c, r in self.rank.items()})


def _order_key(n: Node, hops) -> tuple:
    return (hops(n), norm2(n), n)


class _Builder:
    """One run of the three cooperating procedures on a finite window around the origin.

    Nodes are handled by index. ``gain[c]`` tracks the priority of color ``c``:
    the undominated nodes, with colors not yet in the tree, adjacent to some
    dominated non-member of color ``c``. For h >= 2 a node has at most one
    neighbor of each color, so the count is kept incrementally; for h = 1 it
    is recomputed from scratch.
    """

    def __init__(self, basis: VcmBasis, radius: int, self_check: bool = False):
        self.basis = basis
        self.self_check = self_check
        net = GridNetwork.disk(radius, basis.R)
        self.net = net
        self.radius = radius
        self.nodes = net.nodes
        n = len(net.nodes)
        xy = net.coords()
        margin = 2 * math.ceil(basis.R) + 2
        f = hop_field(basis.R, radius + margin)
        hw = f.shape[0] // 2
        self.hops = f[xy[:, 0] + hw, xy[:, 1] + hw].tolist()
        self.norm = (xy[:, 0] ** 2 + xy[:, 1] ** 2).tolist()
        self.color = basis.colors_of(xy).tolist()
        para = set(Parallelogram((0, 0), basis.u1, basis.u2).nodes())
        self.inside = [p in para for p in net.nodes]
        # index lookup table with a border of -1 wide enough for any offset
        r = math.isqrt(math.floor(basis.R ** 2))
        self.pad = radius + r
        size = 2 * self.pad + 1
        table = np.full((size, size), -1, dtype=np.int64)
        table[xy[:, 0] + self.pad, xy[:, 1] + self.pad] = np.arange(n)
        self.table = table.tolist()
        self.offsets = net.offsets
        self.xs = xy[:, 0].tolist()
        self.ys = xy[:, 1].tolist()
        self.incremental = basis.h >= 2

        self.parent = [-2] * n  # -2: not in the tree, -1: root
        self.dominator = [-1] * n
        self.dominated = [False] * n
        self.tree_colors = [False] * basis.n_colors
        self.linking: list[int] = []
        self.by_color: dict[int, list[int]] = {}
        self.gain = [0] * basis.n_colors
        self.undominated_by_color: dict[int, list[int]] = {}
        for i, c in enumerate(self.color):
            self.undominated_by_color.setdefault(c, []).append(i)

    def neighbors(self, i: int) -> list[int]:
        x, y = self.xs[i] + self.pad, self.ys[i] + self.pad
        t = self.table
        out = []
        for dx, dy in self.offsets:
            j = t[x + dx][y + dy]
            if j >= 0:
                out.append(j)
        return out

    def _eligible(self, j: int) -> bool:
        return not self.dominated[j] and not self.tree_colors[self.color[j]]

    def _mark(self, i: int, dom: int):
        was_eligible = self._eligible(i)
        self.dominated[i] = True
        self.dominator[i] = dom
        if self.parent[i] != -2:
            return
        self.by_color.setdefault(self.color[i], []).append(i)
        if not self.incremental:
            return
        c = self.color[i]
        for j in self.neighbors(i):
            if was_eligible and self.dominated[j] and self.parent[j] == -2:
                # i no longer counts toward the color of its dominated neighbor j
                self.gain[self.color[j]] -= 1
            if self._eligible(j):
                self.gain[c] += 1

    def _add_tree_color(self, c: int):
        self.tree_colors[c] = True
        self.linking.append(c)
        if not self.incremental:
            return
        for j in self.undominated_by_color.get(c, ()):
            if self.dominated[j]:
                continue
            for k in self.neighbors(j):
                if self.dominated[k] and self.parent[k] == -2:
                    self.gain[self.color[k]] -= 1

    def priority(self, c: int) -> int:
        if self.incremental and not self.self_check:
            return self.gain[c]
        gained = set()
        for x in self.by_color.get(c, ()):
            if self.parent[x] != -2:
                continue
            for y in self.neighbors(x):
                if self._eligible(y):
                    gained.add(y)
        if self.incremental:
            assert len(gained) == self.gain[c], (c, len(gained), self.gain[c])
        return len(gained)

    def dominate_node(self, i: int, inside_phase: bool) -> int:
        if self.parent[i] != -2 or self.dominated[i] or self.tree_colors[self.color[i]]:
            return -1
        nb = self.neighbors(i)
        if self.self_check and inside_phase:
            assert any(self.dominated[m] for m in nb), f"{self.nodes[i]} has no dominated neighbor"
        possible = [
            m for m in nb
            if (not inside_phase or self.inside[m])
            and self.parent[m] == -2 and self.dominated[m] and not self.tree_colors[self.color[m]]
        ]
        if not possible:
            return -1
        prio = {}
        for m in possible:
            c = self.color[m]
            if c not in prio:
                prio[c] = self.priority(c)
        dom = min(possible, key=lambda m: (-prio[self.color[m]], self.norm[m], self.nodes[m]))
        self.parent[dom] = self.dominator[dom]
        self._add_tree_color(self.color[dom])
        # the chosen dominator takes i directly; add_nodes handles its other neighbors
        self._mark(i, dom)
        return dom

    def add_nodes(self, dom: int):
        c = self.color[dom]
        same = set(self.by_color.pop(c, ()))
        same.add(dom)
        for x in sorted(same, key=self._key):
            if not self.dominated[x]:
                continue
            has_dominated = False
            for y in self.neighbors(x):
                if self._eligible(y):
                    has_dominated = True
                    self._mark(y, x)
            if has_dominated and self.parent[x] == -2:
                self.parent[x] = self.dominator[x]

    def _key(self, i: int):
        return (self.hops[i], self.norm[i], self.nodes[i])

    def run(self):
        root = self.net.index[(0, 0)]
        self.parent[root] = -1
        self.dominated[root] = True
        self._add_tree_color(self.color[root])
        for m in self.neighbors(root):
            self._mark(m, root)
        order = sorted(range(len(self.nodes)), key=self._key)
        for phase in (True, False):
            for i in order:
                if self.inside[i] != phase:
                    continue
                dom = self.dominate_node(i, phase)
                if dom >= 0:
                    self.add_nodes(dom)
        return self

    def reach(self) -> float:
        return math.sqrt(max(self.norm[i] for i, d in enumerate(self.dominated) if d))

    def result(self):
        nodes = self.nodes
        parent = {nodes[i]: (None if p == -1 else nodes[p]) for i, p in enumerate(self.parent) if p != -2}
        dom = {nodes[i]: nodes[d] for i, d in enumerate(self.dominator) if d >= 0}
        return parent, dom


def build_template(basis: VcmBasis, radius: int | None = None, self_check: bool = False):
    """Tree and color order around an aggregator at the origin of an unbounded grid.

    The window grows until every dominated node stays ``2R + 2`` inside it, so
    the window border never influences the construction.
    """
    R = float(basis.R)
    margin = 2 * R + 2
    if radius is None:
        radius = math.ceil(2.5 * max(math.hypot(*basis.u1), math.hypot(*basis.u2)) + 2 * margin)
    while True:
        b = _Builder(basis, radius, self_check).run()
        if b.reach() + margin <= radius:
            break
        radius = math.ceil(radius * 1.5)
    parent, dom = b.result()
    tree = DominatingTree((0, 0), basis, parent, dom, tuple(b.linking))
    rank = {c: i + 1 for i, c in enumerate(b.linking)}
    nxt = len(rank) + 1
    for i in sorted((i for i, p in enumerate(b.parent) if p == -2), key=b._key):
        c = b.color[i]
        if c not in rank:
            rank[c] = nxt
            nxt += 1
    if len(rank) != basis.n_colors:
        raise DomainError("window too small to see every color")
    return tree, CoRoutesOrder(rank)


_TEMPLATES: dict = {}


def template_for(basis: VcmBasis):
    key = (basis.u1, basis.u2, basis.h, basis.R)
    if key not in _TEMPLATES:
        _TEMPLATES[key] = build_template(basis)
    return _TEMPLATES[key]


def build_dominating_tree(net: GridNetwork | None, A: Node, basis: VcmBasis):
    """Dominating tree rooted at aggregator ``A`` and the CO-Routes order.

    The tree is the unbounded-grid construction moved to ``A``; with a finite
    ``net``, nodes outside it are pruned together with their subtrees.
    """
    if not basis.is_lattice_point(A):
        raise DomainError(f"{A} is not an aggregator")
    tree, order = template_for(basis)
    return translate_tree(tree, (0, 0), A, net), order


def translate_tree(tree: DominatingTree, A1: Node, A2: Node, net: GridNetwork | None = None) -> DominatingTree:
    """Copy of ``tree`` moved by ``A2 - A1``, pruned to ``net`` if given."""
    dx, dy = A2[0] - A1[0], A2[1] - A1[1]
    mv = lambda n: None if n is None else (n[0] + dx, n[1] + dy)
    parent = {mv(m): mv(p) for m, p in tree.parent.items()}
    dom = {mv(n): mv(d) for n, d in tree.dominator_of.items()}
    root = mv(tree.root)
    if net is not None:
        if root not in net:
            parent, dom = {}, {}
        else:
            keep = {}
            # members in order of depth so parents are decided first
            depth = {}
            for m in parent:
                k, cur = 0, m
                while cur != root:
                    cur = parent[cur]
                    k += 1
                depth[m] = k
            for m in sorted(parent, key=lambda m: depth[m]):
                p = parent[m]
                if m in net and (p is None or p in keep):
                    keep[m] = p
            parent = keep
            dom = {n: d for n, d in dom.items() if n in net and d in parent}
    return DominatingTree(root, tree.basis, parent, dom, tree.linking_order)


def one_cycle_delivery_check(tree: DominatingTree, order: CoRoutesOrder) -> bool:
    """True when every covered node's slot chain up to the root strictly increases."""
    return not one_cycle_violations(tree, order)


def one_cycle_violations(tree: DominatingTree, order: CoRoutesOrder) -> list[Node]:
    slot = lambda n: order.slot(tree.color(n))
    ok = {tree.root: True}

    def good(n):
        if n in ok:
            return ok[n]
        chain = [n]
        while chain[-1] not in ok:
            chain.append(tree.next_hop(chain[-1]))
        for a in reversed(chain[:-1]):
            b = tree.next_hop(a)
            ok[a] = ok[b] and slot(a) < slot(b)
        return ok[n]

    return sorted(n for n in tree.covered if not good(n))


def color_violations(tree: DominatingTree) -> tuple[list, list]:
    """Branches repeating a color (C1) and color pairs met in both orders (C2)."""
    c1, before = [], {}
    for br in tree.branches():
        cols = [tree.color(m) for m in br]
        if len(set(cols)) != len(cols):
            c1.append(br)
        for i, a in enumerate(cols):
            for b in cols[i + 1:]:
                before.setdefault((a, b), True)
    c2 = sorted((a, b) for (a, b) in before if a < b and (b, a) in before)
    return c1, c2


def is_tree(tree: DominatingTree) -> bool:
    """Parent links form one tree: connected, acyclic, root-terminated, neighbor edges."""
    R2 = tree.basis.R ** 2
    if tree.parent.get(tree.root, 0) is not None:
        return False
    for m, p in tree.parent.items():
        if m == tree.root:
            continue
        if p not in tree.parent or not 0 < norm2(sub(m, p)) <= R2:
            return False
    seen = {tree.root}
    for m in tree.parent:
        path = []
        cur = m
        while cur not in seen:
            if cur in path:
                return False
            path.append(cur)
            cur = tree.parent[cur]
        seen.update(path)
    for n, d in tree.dominator_of.items():
        if d not in tree.parent or not 0 < norm2(sub(n, d)) <= R2:
            return False
    return True


def undominated_in_parallelogram(tree: DominatingTree) -> list[Node]:
    para = Parallelogram(tree.root, tree.basis.u1, tree.basis.u2)
    cov = tree.covered
    return [n for n in para.nodes() if n not in cov]


def coverage_offsets(tree: DominatingTree, order: CoRoutesOrder) -> list[Node]:
    """Template offsets ``t`` (relative to the root) from which the root is reached in one cycle."""
    bad = set(one_cycle_violations(tree, order))
    r = tree.root
    return sorted((n[0] - r[0], n[1] - r[1]) for n in tree.covered if n not in bad)


def reachable_aggregators(n: Node, tree: DominatingTree, order: CoRoutesOrder, net: GridNetwork | None = None) -> int:
    """Aggregators whose translated tree covers ``n`` with an increasing slot chain.

    ``tree`` is any copy (usually the template). With ``net``, the whole chain
    from ``n`` to the aggregator must lie in the network.
    """
    return len(reachable_aggregator_list(n, tree, order, net))


def reachable_aggregator_list(n: Node, tree: DominatingTree, order: CoRoutesOrder, net: GridNetwork | None = None) -> list[Node]:
    ok = set(coverage_offsets(tree, order))
    basis = tree.basis
    r = tree.root
    out = []
    for t in ok:
        A = (n[0] - t[0], n[1] - t[1])
        if not basis.is_lattice_point(A):
            continue
        if net is not None:
            if A not in net:
                continue
            chain = tree.chain((t[0] + r[0], t[1] + r[1]))
            if any((m[0] - r[0] + A[0], m[1] - r[1] + A[1]) not in net for m in chain):
                continue
        out.append(A)
    return sorted(out)


def average_reachable(net: GridNetwork, tree: DominatingTree, order: CoRoutesOrder) -> float:
    """Mean over the nodes of ``net`` of :func:`reachable_aggregators`.

    Each aggregator in the network contributes its translated coverage;
    a covered node counts when its whole chain stays inside the network.
    Liveness is propagated from the root outward over the template.
    """
    return float(reachable_counts(net, tree, order).mean())


def reachable_counts(net: GridNetwork, tree: DominatingTree, order: CoRoutesOrder) -> np.ndarray:
    basis = tree.basis
    r = tree.root
    bad = set(one_cycle_violations(tree, order))
    # template nodes relative to the root, parents listed before children
    rel = lambda m: (m[0] - r[0], m[1] - r[1])
    depth = tree.depth()
    members = sorted(tree.parent, key=lambda m: (depth[m], m))
    idx = {m: i for i, m in enumerate(members)}
    others = sorted(n for n in tree.dominator_of if n not in tree.parent)
    # aggregators of the network
    xy = net.coords()
    aggs = xy[np.asarray([basis.is_lattice_point((int(x), int(y))) for x, y in xy], dtype=bool)]
    counts = np.zeros(len(net), dtype=np.int64)
    if len(aggs) == 0:
        return counts
    lo = xy.min(axis=0)
    span = xy.max(axis=0) - lo + 1
    table = np.full(tuple(span), -1, dtype=np.int64)
    table[xy[:, 0] - lo[0], xy[:, 1] - lo[1]] = np.arange(len(xy))

    def lookup(t):
        p = aggs + np.asarray(t)
        q = p - lo
        inside = np.all((q >= 0) & (q < span), axis=1)
        out = np.full(len(aggs), -1, dtype=np.int64)
        out[inside] = table[q[inside, 0], q[inside, 1]]
        return out

    alive = np.zeros((len(members), len(aggs)), dtype=bool)
    for i, m in enumerate(members):
        at = lookup(rel(m))
        here = at >= 0
        p = tree.parent[m]
        if p is not None:
            here &= alive[idx[p]]
        alive[i] = here
        if m not in bad:
            np.add.at(counts, at[here], 1)
    for n in others:
        if n in bad:
            continue
        at = lookup(rel(n))
        here = (at >= 0) & alive[idx[tree.dominator_of[n]]]
        np.add.at(counts, at[here], 1)
    return counts
