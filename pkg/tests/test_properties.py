"""Randomized invariants."""

import math

from hypothesis import given, settings
from hypothesis import strategies as st

from stdma_grid.coloring import published_basis, reduce_basis
from stdma_grid.grid import GridNetwork, Parallelogram, add, det, hop_distance, norm2, sub
from stdma_grid.routing import closest_aggregator, greedy_route, shortest_delay_path
from stdma_grid.schedule import Schedule, SlotMap, irco_order, one_hop_delay, route_delay

vecs = st.tuples(st.integers(-25, 25), st.integers(-25, 25))
radii = st.sampled_from([1, 1.5, 2, 2.5, 3, 4])
bases = st.sampled_from([published_basis(R) for R in (2, 3, 4, 5)])


@given(vecs, vecs, radii)
def test_hop_triangle_inequality(a, b, R):
    assert hop_distance(add(a, b), R) <= hop_distance(a, R) + hop_distance(b, R)
    assert hop_distance(a, R) == hop_distance((-a[0], a[1]), R) == hop_distance((a[1], a[0]), R)
    assert hop_distance(a, R) >= math.ceil(math.sqrt(norm2(a)) / R)


@given(vecs, bases, st.integers(-5, 5), st.integers(-5, 5))
def test_color_is_lattice_periodic(p, b, i, j):
    q = add(p, b.point(i, j))
    assert b.color_of(p) == b.color_of(q)
    assert 0 <= b.color_of(p) < b.n_colors


@given(bases, vecs)
def test_same_color_nodes_differ_by_lattice_vector(b, p):
    r = b.reduce(p)
    assert b.color_of(r) == b.color_of(p)
    assert b.is_lattice_point(sub(p, r))


@given(st.integers(2, 60), st.data())
def test_one_hop_delay_range(S, data):
    s = data.draw(st.integers(1, S))
    t = data.draw(st.integers(1, S).filter(lambda x: x != s))
    d = one_hop_delay(s, t, S)
    assert 1 <= d <= S - 1
    assert (s + d - t) % S == 0
    assert d + one_hop_delay(t, s, S) == S


@given(bases, vecs)
def test_parallelogram_tiles_the_plane(b, p):
    P = Parallelogram((0, 0), b.u1, b.u2)
    hits = [(i, j) for i in range(-12, 13) for j in range(-12, 13) if sub(p, b.point(i, j)) in P]
    assert len(hits) == 1
    assert len(P.nodes()) == b.n_colors


@given(vecs, vecs)
def test_reduction_keeps_lattice(u, v):
    if det(u, v) == 0:
        return
    a, c = reduce_basis(u, v)
    assert abs(det(a, c)) == abs(det(u, v))
    assert norm2(a) <= norm2(c) and abs(2 * (a[0] * c[0] + a[1] * c[1])) <= norm2(a)


@given(bases, vecs)
def test_closest_aggregator_is_closest(b, n):
    A = closest_aggregator(n, b)
    d = norm2(sub(A, n))
    for i in range(-1, 2):
        for j in range(-1, 2):
            assert d <= norm2(sub(add(A, b.point(i, j)), n))


NET = GridNetwork.square(9, 2)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(NET.nodes))
def test_shortest_path_never_worse_than_greedy(seed, src):
    b = published_basis(2)
    sch = Schedule(b.color_of, irco_order(b.n_colors, seed))
    sp = shortest_delay_path(NET, sch, src, (0, 0))
    if src != (0, 0):
        assert route_delay(sp.nodes, sch, 2).route_delay == sp.route_delay
    g = greedy_route(src, (0, 0), NET, sch)
    assert sp.route_delay <= g.route_delay


@given(st.permutations(range(6)))
def test_slot_map_permutation_roundtrip(order):
    m = SlotMap.from_order(order)
    assert sorted(m.slot(c) for c in range(6)) == list(range(1, 7))
    assert SlotMap.from_slots({c: m.slot(c) for c in range(6)}) == m
