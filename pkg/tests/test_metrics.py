import numpy as np
import pytest

from interference_pricing.equilibria import duopoly, monopoly_pd
from interference_pricing.errors import BoundViolated, DegenerateDuopoly
from interference_pricing.market import Market
from interference_pricing.metrics import (
    efficiency,
    pocp,
    pocp_closed_form,
    pocs,
    pocs_closed_form,
    symmetric_market,
    verify_bounds,
    welfare,
)


def test_welfare_zero_flow():
    wb = welfare(Market.two_ap(1, 1, 0.2, 0.2), [0.3, 0.3], [0, 0])
    assert wb.gross_utility == wb.congestion_cost == wb.consumer_surplus == wb.total_profit == 0
    assert wb.social_welfare == 0


def test_welfare_spot_values():
    m = Market.two_ap(1, 1, 0, 0, gain_floor=0.0)
    me, de = monopoly_pd(m), duopoly(m)
    assert welfare(m, me.prices, me.flows).social_welfare == pytest.approx(2 / 9, abs=1e-12)
    assert welfare(m, de.prices, de.flows).social_welfare == pytest.approx(20 / 81, abs=1e-12)


def test_welfare_accounting_identity():
    # at a user equilibrium, consumer surplus + profit + congestion = gross utility
    m = Market.two_ap(1.4, 0.8, 0.3, 0.5)
    de = duopoly(m)
    wb = welfare(m, de.prices, de.flows)
    assert wb.consumer_surplus + wb.total_profit + wb.congestion_cost == pytest.approx(wb.gross_utility, abs=1e-10)


def test_pocs_pocp_spot_values():
    m = Market.two_ap(1, 1, 0, 0, gain_floor=0.0)
    assert pocs(m) == pytest.approx(0.9, abs=1e-12)
    assert pocp(m) == pytest.approx(1.125, abs=1e-12)
    assert pocs_closed_form(1, 0) == pytest.approx(0.9)
    assert pocp_closed_form(1, 0) == pytest.approx(9 / 8)


def test_pocs_closed_form_s10():
    assert pocs_closed_form(10, 0) == pytest.approx(31 * 144 / (4 * 11 * 131))
    assert pocs_closed_form(10, 0) > 0.75


def test_limits():
    assert pocs(symmetric_market(1e6, 0.5)) == pytest.approx(0.75, abs=1e-3)
    assert pocs(symmetric_market(1e-3, 0.999)) > 10
    assert pocp(symmetric_market(1e-6, 1e-6)) == pytest.approx(1.0, abs=1e-3)
    assert pocp(symmetric_market(1, 0.999)) > 10


def test_definitional_matches_closed_form():
    for s in (0.1, 1.0, 10.0):
        for a in (0.0, 0.3, 0.8):
            m = efficiency(symmetric_market(s, a, gain_floor=0.0))
            assert m.symmetric_closed_form_used
            assert m.pocs == pytest.approx(pocs_closed_form(s, a), rel=1e-10)
            assert m.pocp == pytest.approx(pocp_closed_form(s, a), rel=1e-10)


def test_asymmetric_market_is_definitional_only():
    m = efficiency(Market.two_ap(1, 1, 0.3, 0.6))
    assert not m.symmetric_closed_form_used
    assert m.pocs > 0 and m.pocp >= 1


def test_pocs_crosses_one_near_0_7():
    assert pocs_closed_form(1, 0.6) < 1 < pocs_closed_form(1, 0.8)


def test_verify_bounds_grid():
    rep = verify_bounds([0.1, 1, 10], np.round(np.arange(0, 1, 0.1), 1))
    assert rep.points == 30
    assert rep.min_pocs >= 0.75 and rep.min_pocp >= 1
    assert rep.min_pocs_at[0] == 10


def test_verify_bounds_definitional_agrees():
    a = [0.0, 0.5, 0.9]
    c = verify_bounds([0.1, 10], a)
    d = verify_bounds([0.1, 10], a, method="definitional")
    assert c.min_pocs == pytest.approx(d.min_pocs, abs=1e-8)


def test_verify_bounds_raises_on_violation(monkeypatch):
    import interference_pricing.metrics as metrics

    monkeypatch.setattr(metrics, "pocs_closed_form", lambda s, a: 0.5)
    with pytest.raises(BoundViolated):
        metrics.verify_bounds([1.0], [0.0])


def test_degenerate_duopoly_raises(monkeypatch):
    import interference_pricing.metrics as metrics

    m = Market.two_ap(1, 1, 0.2, 0.2)
    real = duopoly(m)
    fake = type(real)(real.kind, real.prices * 0, real.flows, real.case_tag)
    monkeypatch.setattr(metrics, "duopoly", lambda market: fake)
    with pytest.raises(DegenerateDuopoly):
        metrics.efficiency(m)
