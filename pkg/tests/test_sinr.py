import math

import pytest

from stdma_grid.errors import DivergentSumError, DomainError, InfeasibleError
from stdma_grid.sinr import (
    SinrParams,
    coverage_radius2,
    interference,
    max_corner_distance,
    sinr_min,
    tail_bound,
    vcmpp_search,
)


def brute_sinr(v, u1, u2, p, radius=60):
    """Direct double loop over lattice cells; nearest-point distance by clamping."""
    I = 0.0
    k = radius + 5
    for a in range(-k, k + 1):
        for b in range(-k, k + 1):
            w = (a * u1[0] + b * u2[0], a * u1[1] + b * u2[1])
            if w == (0, 0) or w[0] ** 2 + w[1] ** 2 > radius * radius:
                continue
            nx = min(max(v[0], w[0]), w[0] + 1)
            ny = min(max(v[1], w[1]), w[1] + 1)
            I += p.P / ((nx - v[0]) ** 2 + (ny - v[1]) ** 2) ** (p.alpha / 2)
    far = math.hypot(abs(v[0]) + 1, abs(v[1]) + 1)
    return p.P * far ** -p.alpha / (I + p.N)


P1 = SinrParams(1.0, 1e-4, 4.0, 1.0)
B1 = ((4, -4), (5, 5))


@pytest.mark.parametrize("v", [(1, 0), (0, 1), (1, 1), (2, -1), (0, 2)])
def test_sinr_matches_brute_force(v):
    got = sinr_min(v, B1, P1, trunc=60)
    assert got == pytest.approx(brute_sinr(v, *B1, P1, radius=60), rel=1e-9)


def test_truncation_tail_is_bounded():
    near = interference((1, 1), *B1, P1, trunc=100)
    far = interference((1, 1), *B1, P1, trunc=400)
    assert 0 < far - near <= tail_bound(*B1, P1, trunc=100, reach=2)
    full = sinr_min((1, 1), B1, P1, trunc=400)
    assert abs(sinr_min((1, 1), B1, P1) - full) / full < 2e-3


def test_interference_infinite_on_interferer():
    assert interference((4, -4), *B1, P1) == math.inf
    assert sinr_min((4, -4), B1, P1) == 0.0


def test_corner_distance():
    assert max_corner_distance((1, 0)) == pytest.approx(math.sqrt(5))
    assert max_corner_distance((-2, 3)) == pytest.approx(5.0)


def test_param_validation():
    with pytest.raises(DivergentSumError):
        SinrParams(alpha=2.0)
    with pytest.raises(DomainError):
        SinrParams(P=0)
    with pytest.raises(DomainError):
        SinrParams(beta=0)
    with pytest.raises(DomainError):
        sinr_min((0, 0), B1, P1)


def test_coverage_radius_is_a_ring_prefix():
    D2 = coverage_radius2(*B1, P1)
    assert D2 == 4
    ok = [(x, y) for x in range(-3, 4) for y in range(-3, 4) if 0 < x * x + y * y <= D2]
    assert all(sinr_min(w, B1, P1) >= P1.beta for w in ok)
    # the next ring holds a failing cell
    ring = [(x, y) for x in range(-3, 4) for y in range(-3, 4) if x * x + y * y == 5]
    assert any(sinr_min(w, B1, P1) < P1.beta for w in ring)


def test_vcmpp_search_known_optimum():
    res = vcmpp_search(P1, det_bound=80, box=6)
    assert res.basis == B1
    assert res.D2 == 4 and res.n_colors == 40
    assert res.score == pytest.approx(math.pi * 4 / 40)


def test_huge_beta_infeasible():
    with pytest.raises(InfeasibleError):
        vcmpp_search(SinrParams(1.0, 1e-3, 4.0, 1e9), det_bound=20, box=4)
