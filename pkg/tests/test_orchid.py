import pytest

from stdma_grid.coloring import published_basis
from stdma_grid.errors import CoverageError, DomainError
from stdma_grid.grid import GridNetwork, norm2, sub
from stdma_grid.orchid import Orchid, hierarchical_next_hop, hierarchical_route
from stdma_grid.schedule import route_delay


@pytest.fixture(scope="module")
def orch():
    return Orchid(GridNetwork.disk(30, 2), published_basis(2), (0, 0))


def test_plan_accounting(orch):
    assert orch.lam == 6  # floor(30 * 5 / 25)
    assert orch.plan.routes_slots == 25
    assert orch.plan.highway_slots == 13
    assert orch.plan.total_slots == 25 + 6 * 13


def test_sink_checks():
    net = GridNetwork.disk(10, 2)
    with pytest.raises(DomainError):
        Orchid(net, published_basis(2), (1, 0))
    with pytest.raises(DomainError):
        Orchid(net, published_basis(2), (40, 30))


def test_sensor_phase_is_one_cycle(orch):
    sch = orch.schedule
    for n in orch.net.nodes[::23]:
        try:
            A = orch.choose_aggregator(n)
        except CoverageError:
            continue
        ch = orch.chain(n, A)
        slots = [sch.slot(m) for m in ch]
        assert slots == sorted(slots) and len(set(slots)) == len(slots)


def test_routes_reach_the_sink(orch):
    done = 0
    for n in orch.net.nodes[::11]:
        try:
            r = hierarchical_route(n, (0, 0), orch)
        except CoverageError:
            continue
        assert r.nodes[0] == n and r.nodes[-1] == (0, 0)
        for a, b in zip(r.nodes, r.nodes[1:]):
            assert 0 < norm2(sub(a, b)) <= 4
        # aggregator phase needs at most lambda legs per lattice direction pair
        assert len(r.highway_legs) <= 2 * orch.lam
        done += 1
    assert done > 0.9 * len(orch.net.nodes[::11])


def test_next_hop_consistent_with_route(orch):
    n = (7, -5)
    r = hierarchical_route(n, (0, 0), orch)
    assert hierarchical_next_hop(n, (0, 0), orch) == r.nodes[1]
    assert hierarchical_next_hop((0, 0), (0, 0), orch) is None


def test_aggregator_start(orch):
    A = published_basis(2).point(2, 1)
    r = hierarchical_route(A, (0, 0), orch)
    assert r.aggregator == A and r.sensor_phase == (A,)
