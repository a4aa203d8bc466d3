import math

import numpy as np
import pytest

from stdma_grid.analysis import (
    NdrModelParams,
    column_sizes,
    cycle_length_estimate,
    cycles_to_sink,
    energy_models,
    exponential_fit,
    ndr_closed_cdf,
    ndr_closed_form,
    ndr_exact_mean,
    ndr_monte_carlo,
    ndr_survival,
    routes_energy,
    simulated_energy,
)
from stdma_grid.coloring import published_basis
from stdma_grid.errors import DomainError
from stdma_grid.grid import GridNetwork
from stdma_grid.highways import build_highways
from stdma_grid.schedule import Schedule, SlotMap, build_cycle_plan


def test_closed_form_spot_value():
    p = NdrModelParams.bind_vcm(1000)
    th = math.sqrt(3) / 2 * 9
    assert ndr_closed_form(p) == pytest.approx(3 * math.pi / 4 + 1.5 * (th * 1e6 - 1) / 1e6)
    assert ndr_closed_form(p) == pytest.approx(14.047, abs=1e-3)
    assert p.rate == pytest.approx(2e6 / (3 * (th * 1e6 - 1)))


def test_params_validation():
    with pytest.raises(DomainError):
        NdrModelParams(0, 1, 2)
    with pytest.raises(DomainError):
        NdrModelParams(5, 3, 2)


def test_column_sizes():
    assert list(column_sizes(3)) == [5, 5, 1]
    assert 2 * column_sizes(100).sum() + 2 * 100 + 1 == sum(
        1 for x in range(-100, 101) for y in range(-100, 101) if x * x + y * y <= 10000
    )


def test_degenerate_width():
    p = NdrModelParams(20, 2.0, 2.0)
    s = ndr_monte_carlo(p, 1000, 0)
    assert np.all(s.values == 2.0)
    assert ndr_exact_mean(p) == 2.0
    assert list(ndr_closed_cdf(p, [p.shift - 1, p.shift])) == [0.0, 1.0]


def test_monte_carlo_matches_exact_survival():
    p = NdrModelParams.bind_vcm(40)
    s = ndr_monte_carlo(p, 40000, 3)
    assert s.mean == pytest.approx(ndr_exact_mean(p), rel=0.01)
    x = s.quantiles([0.25, 0.5, 0.75])
    assert np.allclose(1 - s.cdf(x), ndr_survival(p, x), atol=0.01)


def test_monte_carlo_is_deterministic_and_worker_independent():
    p = NdrModelParams.bind_vcm(30)
    a = ndr_monte_carlo(p, 5000, 11, block_elems=3000)
    b = ndr_monte_carlo(p, 5000, 11, block_elems=3000, workers=3)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, ndr_monte_carlo(p, 5000, 12).values)


def test_integer_colors():
    p = NdrModelParams.bind_vcm(30)
    s = ndr_monte_carlo(p, 5000, 0, integer=True)
    assert s.values.min() >= 1.0
    with pytest.raises(DomainError):
        ndr_monte_carlo(NdrModelParams(5, 1.2, 1.7), 10, 0, integer=True)


def test_exponential_fit_recovers_rate():
    p = NdrModelParams.bind_vcm(200)
    slope, _ = exponential_fit(ndr_monte_carlo(p, 50000, 1))
    assert slope == pytest.approx(-p.rate, rel=0.05)


def test_cycle_length_estimate():
    th = math.sqrt(3) / 2 * 9
    assert cycle_length_estimate(3, 4, 0) == pytest.approx(th * 16)
    assert cycle_length_estimate(3, 2, 10) == pytest.approx(th * 4 + 16 * 4 * math.sqrt(3) * 10 / 9)
    with pytest.raises(DomainError):
        cycle_length_estimate(3, 0, 1)


def test_energy_closed_forms():
    for h, R, L in [(3, 2, 10), (3, 5, 300), (2, 3, 50)]:
        rep = energy_models(h, R, L)
        s3 = math.sqrt(3)
        theta = s3 * h * h / 2
        assert rep.E_irco == pytest.approx(math.pi**2 * s3 * (math.pi + h * h * s3) * R**2 * L**3 / h**2)
        # highway slots over the cycle, each waking ~ 2 pi L^2 / theta lattice copies
        hw = 4 * (h + 1) * 4 * s3 * L / (3 * h)
        assert rep.E_orchid == pytest.approx(math.pi**2 * R**4 * L**2 + hw * 2 * math.pi * L**2 / theta)
        assert rep.ratio == pytest.approx(rep.E_orchid / rep.E_irco)
    a = energy_models(3, 4, 100)
    b = energy_models(3, 4, 200)
    assert b.E_irco == pytest.approx(8 * a.E_irco)
    # ratio * R^2 tends to a constant as L grows
    r = [energy_models(3, R, 1e9).ratio * R * R for R in (2, 4, 8)]
    assert max(r) / min(r) < 1.01
    with pytest.raises(DomainError):
        energy_models(3, 2, 0)


def test_single_node_energy():
    net = GridNetwork.from_nodes([(0, 0)], 1)
    assert routes_energy(net) == 1


def test_simulated_energy_accounting():
    b = published_basis(2)
    net = GridNetwork.disk(12, 2)
    hws = build_highways((0, 0), b)
    plan = build_cycle_plan(SlotMap.identity(25), {h.direction: h.colors for h in hws}, 2)
    rep = simulated_energy(plan, net, b, hws, 5)
    assert rep.E_irco == 5 * routes_energy(net)
    assert rep.ratio == pytest.approx(rep.E_orchid / rep.E_irco)
    assert rep.E_orchid > routes_energy(net)
    with pytest.raises(DomainError):
        simulated_energy(plan, net, b, hws, 0)


def test_cycles_to_sink_line():
    net = GridNetwork.from_nodes([(x, 0) for x in range(4)], 1)
    good = Schedule(lambda n: 3 - n[0], SlotMap.identity(4))
    assert cycles_to_sink(net, good, (0, 0)) == 1
    bad = Schedule(lambda n: n[0], SlotMap.identity(4))
    # (3,0) sends in slot 4, then relays in slots 3 and 2 of the next two cycles
    assert cycles_to_sink(net, bad, (0, 0)) == 3


@pytest.mark.parametrize("R", [2, 3, 4, 5])
def test_cycle_estimate_tracks_built_plan(R):
    from stdma_grid.experiments import basis_for, orchid_plan

    # the estimate's repetition count spans 2L ranges: a sink anywhere in the disk
    raw, _ = orchid_plan(basis_for(R), 600, optimize=False)
    est = cycle_length_estimate(3, R, 300 / R)
    assert abs(est - raw.total_slots) / raw.total_slots < 0.35
