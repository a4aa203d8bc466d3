import json
from fractions import Fraction

import pytest

from stdma_grid.coloring import VcmBasis, published_basis
from stdma_grid.errors import ConstructionError, DomainError
from stdma_grid.grid import GridNetwork, hop_distance, norm2, sub
from stdma_grid.highways import (
    DIRECTIONS,
    Highway,
    aggregator_cycles_needed,
    build_highways,
    co_highways_order,
    compute_lambda,
    direction_vector,
    dumps,
    worst_progress,
)


@pytest.mark.parametrize("R", [2, 3, 4, 5])
def test_highways_are_disjoint_minimum_hop_paths(R):
    b = published_basis(R)
    hws = build_highways((0, 0), b)
    assert [h.direction for h in hws] == list(DIRECTIONS)
    seen = set()
    for h in hws:
        T = direction_vector(b, h.direction)
        assert h.path[0] == (0, 0) and h.path[-1] == T
        assert h.hops == hop_distance(T, R) == 4
        for a, c in zip(h.path, h.path[1:]):
            assert 0 < norm2(sub(a, c)) <= R * R
        assert not seen & set(h.intermediates)
        seen |= set(h.intermediates)
        assert co_highways_order(h) == h.colors


def test_highways_translate():
    b = published_basis(2)
    A = b.point(2, -1)
    moved = build_highways(A, b)
    base = build_highways((0, 0), b)
    for m, h in zip(moved, base):
        assert m.path == h.translated(A).path
        assert m.colors == h.colors


def test_off_lattice_start_rejected():
    with pytest.raises(DomainError):
        build_highways((1, 0), published_basis(2))


def test_missing_neighbor_in_network():
    net = GridNetwork.disk(4, 2)
    with pytest.raises(DomainError):
        build_highways((0, 0), published_basis(2), net)


def test_repeated_color_rejected():
    with pytest.raises(ConstructionError):
        co_highways_order(Highway("+u", ((0, 0), (1, 0), (2, 0)), (3, 3)))
    with pytest.raises(ConstructionError):
        co_highways_order(Highway("+u", ((0, 0),), ()))


@pytest.mark.parametrize("R,lam", [(2, 60), (3, 39), (4, 30), (5, 23)])
def test_lambda_radius_300(R, lam):
    assert compute_lambda(published_basis(R), 300) == lam


def test_lambda_floor_is_exact():
    b = published_basis(2)  # progress per cycle is exactly 5
    assert compute_lambda(b, 300) == 60
    assert compute_lambda(b, Fraction(2999, 10)) == 59
    assert compute_lambda(b, 1) == 1
    with pytest.raises(DomainError):
        compute_lambda(b, 0)


def test_worst_progress():
    assert worst_progress(published_basis(2)) == pytest.approx(5.0)


def test_aggregator_cycles_needed():
    b = published_basis(2)
    aggs = [b.point(a, k) for a in range(-3, 4) for k in range(-2, 3)]
    assert aggregator_cycles_needed(b, aggs, (0, 0)) == 3


def test_dumps_records_slots():
    doc = json.loads(dumps(build_highways((0, 0), published_basis(3))))
    assert len(doc) == 4
    assert doc[0]["slots"] == [1, 2, 3, 4]
