import json

import numpy as np
import pytest

from stdma_grid.coloring import (
    PUBLISHED_BASES,
    VcmBasis,
    canonical_basis,
    color_of,
    conflict_free,
    hnf_lattices,
    is_valid_basis,
    published_basis,
    reduce_basis,
    search_basis,
    theta,
)
from stdma_grid.errors import BoundExhaustedError, DomainError
from stdma_grid.grid import det, hop_distance


def test_theta():
    assert theta(3) == pytest.approx(7.794228634)


@pytest.mark.parametrize("R", [2, 3, 4, 5])
def test_published_bases_are_valid(R):
    u1, u2, n = PUBLISHED_BASES[R]
    b = published_basis(R)
    assert b.is_valid()
    assert b.n_colors == n == abs(det(u1, u2))


def test_generators_need_four_hops():
    for R, (u1, u2, _) in PUBLISHED_BASES.items():
        assert hop_distance(u1, R) >= 4
        assert hop_distance(u2, R) >= 4


def test_invalid_basis_detected():
    # (2, 0) is one hop at R = 2
    assert not is_valid_basis((2, 0), (0, 13), 3, 2)
    assert not VcmBasis((3, 2), (-2, 3), 3, 2).is_valid()


def test_degenerate_basis_rejected():
    with pytest.raises(DomainError):
        VcmBasis((1, 2), (2, 4), 3, 2)


def test_colors_are_a_bijection_on_the_cell():
    b = published_basis(3)
    cols = {b.color_of(r) for r in b.residues}
    assert cols == set(range(b.n_colors))


def test_color_is_lattice_periodic():
    b = published_basis(2)
    for p in [(0, 0), (1, 2), (-5, 7)]:
        c = color_of(p, b)
        for a, k in [(1, 0), (0, 1), (-2, 3)]:
            q = b.point(a, k)
            assert b.color_of((p[0] + q[0], p[1] + q[1])) == c


def test_colors_of_vectorized_agrees():
    b = published_basis(4)
    pts = np.array([(x, y) for x in range(-12, 13) for y in range(-12, 13)])
    assert list(b.colors_of(pts)) == [b.color_of(tuple(p)) for p in pts]


def test_lattice_coords_and_reduce():
    b = published_basis(2)
    assert b.lattice_coords((1, 7)) == (1, 1)
    with pytest.raises(DomainError):
        b.lattice_coords((1, 0))
    r = b.reduce((11, 13))
    assert b.is_lattice_point((11 - r[0], 13 - r[1]))


def test_record_roundtrip():
    b = published_basis(5)
    again = VcmBasis.loads(b.dumps())
    assert again == b
    assert json.loads(b.dumps())["n_colors"] == 198


def test_reduce_basis_is_reduced():
    u, v = reduce_basis((4, 3), (1, 7))
    assert abs(det(u, v)) == 25
    assert u[0] ** 2 + u[1] ** 2 <= v[0] ** 2 + v[1] ** 2
    assert abs(2 * (u[0] * v[0] + u[1] * v[1])) <= u[0] ** 2 + u[1] ** 2


def test_hnf_lattices_count():
    # number of index-d sublattices of Z^2 is sigma(d)
    assert len(list(hnf_lattices(6))) == 1 + 2 + 3 + 6
    assert len(list(hnf_lattices(7))) == 8


def test_canonical_basis_same_lattice():
    cb = canonical_basis((4, 3), (1, 7))
    assert cb is not None
    assert abs(det(*cb)) == 25
    assert det(*cb) > 0


@pytest.mark.parametrize("R,expected", [(2, 25), (3, 68), (4, 112)])
def test_search_matches_published_count(R, expected):
    b = search_basis(3, R, 400)
    assert b.n_colors == expected
    assert b.is_valid()


def test_search_exhausts():
    with pytest.raises(BoundExhaustedError):
        search_basis(3, 3, 10)


def test_conflict_free_detects_bad_basis():
    assert conflict_free(published_basis(2))
    assert not conflict_free(VcmBasis((3, 2), (-2, 3), 3, 2))
