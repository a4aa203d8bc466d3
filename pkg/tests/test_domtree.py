import json

import pytest

from stdma_grid.coloring import published_basis
from stdma_grid.domtree import (
    CoRoutesOrder,
    average_reachable,
    build_dominating_tree,
    build_template,
    color_violations,
    coverage_offsets,
    is_tree,
    one_cycle_delivery_check,
    one_cycle_violations,
    reachable_aggregator_list,
    reachable_aggregators,
    reachable_counts,
    template_for,
    translate_tree,
    undominated_in_parallelogram,
)
from stdma_grid.errors import DomainError
from stdma_grid.grid import GridNetwork, norm2, sub


@pytest.fixture(scope="module")
def t2():
    return template_for(published_basis(2))


def test_tree_structure(t2):
    tree, order = t2
    assert tree.root == (0, 0)
    assert tree.parent[(0, 0)] is None
    assert is_tree(tree)
    assert tree.covered >= tree.members


def test_color_conditions(t2):
    c1, c2 = color_violations(t2[0])
    assert c1 == [] and c2 == []


def test_parallelogram_dominated(t2):
    assert undominated_in_parallelogram(t2[0]) == []


def test_one_cycle_and_reversal(t2):
    tree, order = t2
    assert one_cycle_delivery_check(tree, order)
    assert one_cycle_violations(tree, order.reversed())


def test_order_ranks(t2):
    tree, order = t2
    root_color = tree.color(tree.root)
    assert order.rank[root_color] == 1
    assert order.slot(root_color) == order.S == 25
    assert sorted(order.rank.values()) == list(range(1, 26))
    # tree colors come first in the ranking, in linking order
    assert [order.rank[c] for c in tree.linking_order] == list(range(1, len(tree.linking_order) + 1))


def test_bad_rank_rejected():
    with pytest.raises(DomainError):
        CoRoutesOrder({0: 1, 1: 1})


def test_self_check_mode_agrees():
    b = published_basis(2)
    tree, order = build_template(b, self_check=True)
    ref, ref_order = template_for(b)
    assert tree.parent == ref.parent and tree.dominator_of == ref.dominator_of
    assert order == ref_order


def test_chain_goes_to_root(t2):
    tree, _ = t2
    for n in sorted(tree.covered)[:50]:
        ch = tree.chain(n)
        assert ch[0] == n and ch[-1] == tree.root
        for a, b in zip(ch, ch[1:]):
            assert 0 < norm2(sub(a, b)) <= 4
    with pytest.raises(DomainError):
        tree.chain((1000, 1000))


def test_translation_and_pruning():
    b = published_basis(2)
    net = GridNetwork.disk(12, 2)
    tree, order = build_dominating_tree(net, (4, 3), b)
    assert tree.root == (4, 3)
    assert all(m in net for m in tree.covered)
    assert is_tree(tree)
    with pytest.raises(DomainError):
        build_dominating_tree(net, (1, 0), b)
    base, _ = template_for(b)
    moved = translate_tree(base, (0, 0), (8, 6))
    assert len(moved.covered) == len(base.covered)


def test_dump_is_json_lines(t2):
    tree, order = t2
    lines = tree.dumps(order).splitlines()
    assert len(lines) == len(tree.covered)
    rec = json.loads(lines[0])
    assert {"node", "color", "slot"} <= set(rec)


def test_reachable_counts_match_per_node(t2):
    tree, order = t2
    net = GridNetwork.disk(14, 2)
    counts = reachable_counts(net, tree, order)
    for i in range(0, len(net), 37):
        n = net.nodes[i]
        assert counts[i] == reachable_aggregators(n, tree, order, net)
        assert counts[i] == len(reachable_aggregator_list(n, tree, order, net))
    assert average_reachable(net, tree, order) == pytest.approx(counts.mean())


def test_every_offset_in_parallelogram_is_reachable(t2):
    tree, order = t2
    offs = set(coverage_offsets(tree, order))
    from stdma_grid.grid import Parallelogram

    P = Parallelogram((0, 0), tree.basis.u1, tree.basis.u2)
    assert all(p in offs for p in P.nodes())
