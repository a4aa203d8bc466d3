import pytest

from stdma_grid.errors import ConflictError, DomainError, PathError
from stdma_grid.schedule import (
    CyclePlan,
    Schedule,
    SlotMap,
    build_cycle_plan,
    irco_order,
    normalized_delay_per_range,
    one_hop_delay,
    route_delay,
)

LINE = [(x, 0) for x in range(6)]  # A..F
LINE_COLORS = {n: i % 3 for i, n in enumerate(LINE)}  # g, o, p, g, o, p


def line_schedule(order):
    return Schedule(LINE_COLORS.__getitem__, SlotMap.from_order(order))


def test_one_hop_delay_wraps():
    assert one_hop_delay(1, 2, 3) == 1
    assert one_hop_delay(3, 1, 3) == 1
    assert one_hop_delay(2, 1, 5) == 4
    with pytest.raises(ConflictError):
        one_hop_delay(2, 2, 5)
    with pytest.raises(DomainError):
        one_hop_delay(0, 2, 5)


def test_line_good_order():
    rep = route_delay(LINE, line_schedule([0, 1, 2]), R=1)
    assert rep.route_delay == 4
    assert rep.elapsed == 5
    assert rep.per_hop == (1, 1, 1, 1)


def test_line_bad_order():
    rep = route_delay(LINE, line_schedule([0, 2, 1]), R=1)
    assert rep.route_delay == 8
    assert rep.elapsed == 9


def test_route_needs_two_nodes_and_adjacency():
    s = line_schedule([0, 1, 2])
    with pytest.raises(PathError):
        route_delay(LINE[:1], s, R=1)
    with pytest.raises(PathError):
        route_delay([(0, 0), (2, 0)], s, R=1)


def test_two_node_route_has_zero_delay():
    assert route_delay(LINE[:2], line_schedule([0, 1, 2]), R=1).route_delay == 0


def test_normalized_delay():
    rep = route_delay(LINE, line_schedule([0, 1, 2]), R=1)
    assert normalized_delay_per_range(rep, LINE[0], LINE[-1], 1) == pytest.approx(0.8)
    with pytest.raises(DomainError):
        normalized_delay_per_range(rep, LINE[0], LINE[0], 1)


def test_slot_map_roundtrip():
    m = SlotMap.from_order([2, 0, 1])
    assert [m.slot(c) for c in range(3)] == [2, 3, 1]
    assert SlotMap.from_slots({0: 2, 1: 3, 2: 1}) == m
    assert list(m.slots_array()) == [2, 3, 1]
    with pytest.raises(DomainError):
        SlotMap.from_order([0, 0, 1])
    with pytest.raises(DomainError):
        SlotMap.from_slots({0: 1, 1: 1})


def test_irco_order_is_seeded_permutation():
    a = irco_order(25, 7)
    assert a == irco_order(25, 7)
    assert sorted(a.order) == list(range(25))
    assert a != irco_order(25, 8)
    with pytest.raises(DomainError):
        irco_order(0, 1)


def test_cycle_plan_optimization_drops_lead_slots():
    hw = {"+u": (1, 2, 3, 4), "-u": (1, 5, 6, 7), "+v": (1, 8, 9, 10), "-v": (1, 11, 12, 13)}
    order = SlotMap.identity(20)
    opt = build_cycle_plan(order, hw, 3, optimize=True)
    raw = build_cycle_plan(order, hw, 3, optimize=False)
    assert opt.highway_slots == 13 and raw.highway_slots == 16
    assert opt.total_slots == 20 + 3 * 13
    assert len(opt.layout()) == opt.total_slots
    assert dict(opt.highway_subperiods)["+v"] == (1, 8, 9, 10)


def test_cycle_plan_text_roundtrip():
    plan = build_cycle_plan(SlotMap.identity(4), {"+u": (0, 1)}, 2)
    assert CyclePlan.from_text(plan.to_text()) == plan
    with pytest.raises(DomainError):
        build_cycle_plan(SlotMap.identity(4), {"+u": (0, 1)}, 0)


def test_irco_first_slot_is_uniform():
    hits = [0] * 5
    for s in range(10_000):
        hits[irco_order(5, s).order[0]] += 1
    assert all(abs(h / 10_000 - 0.2) <= 0.02 for h in hits)
