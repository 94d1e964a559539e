import numpy as np
from hypothesis import given, settings, strategies as st

from oracles import fixed_d_patterns
from interference_pricing.equilibria import duopoly, monopoly_pd, monopoly_uniform
from interference_pricing.experiments import _fmt
from interference_pricing.lcp import assemble_lcp, is_p_matrix, solve_lcp_enumerate, solve_lcp_lemke
from interference_pricing.market import DemandCurve, Market, build_market
from interference_pricing.metrics import pocp_closed_form, pocs_closed_form
from interference_pricing.wardrop import total_demand, wardrop_equilibrium, wardrop_residual

unit = st.floats(0.0, 1.0, allow_nan=False)


@st.composite
def weak_markets(draw, max_n=5):
    n = draw(st.integers(1, max_n))
    raw = np.array(draw(st.lists(unit, min_size=n * n, max_size=n * n))).reshape(n, n)
    np.fill_diagonal(raw, 0.0)
    cross = (raw + raw.T).sum(axis=1).max()
    scale = draw(st.floats(0.01, 0.99))
    g = raw * (2 * scale / cross) if cross > 0 else raw
    g = np.maximum(g, 1e-6)
    np.fill_diagonal(g, 1.0)
    w = draw(st.floats(0.2, 5.0))
    s = draw(st.floats(0.01, 10.0))
    prices = np.array(draw(st.lists(st.floats(0.0, 1.5), min_size=n, max_size=n))) * w
    return build_market(DemandCurve(w, s), g), prices


@settings(max_examples=150, deadline=None)
@given(weak_markets())
def test_weak_markets_have_unique_equilibrium(case):
    market, prices = case
    inst = assemble_lcp(market, prices)
    assert is_p_matrix(inst.m)
    sols = solve_lcp_enumerate(inst)
    assert len(sols) == 1
    assert np.max(np.abs(solve_lcp_lemke(inst).x - sols[0].x)) <= 1e-8
    res = wardrop_equilibrium(market, prices)
    assert wardrop_residual(market, prices, res.flows) <= 1e-8


@settings(max_examples=60, deadline=None)
@given(weak_markets(max_n=4), st.randoms(use_true_random=False))
def test_relabeling_aps_permutes_flows(case, rnd):
    market, prices = case
    perm = list(range(market.n))
    rnd.shuffle(perm)
    g = market.G[np.ix_(perm, perm)]
    other = build_market(market.demand, g)
    x = wardrop_equilibrium(market, prices).flows
    y = wardrop_equilibrium(other, prices[perm]).flows
    assert np.allclose(x[perm], y, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.05, 5.0), unit, unit)
def test_provider_reports_are_consistent(w, s, a2, b1):
    market = Market.two_ap(w, s, a2, b1 * (1.99 - a2) if a2 + b1 >= 1.99 else b1)
    for rep in (monopoly_pd(market), monopoly_uniform(market), duopoly(market)):
        assert np.array_equal(rep.profits, rep.prices * rep.flows)
        assert np.allclose(rep.flows, wardrop_equilibrium(market, rep.prices).flows, atol=1e-8)
    assert monopoly_pd(market).total_profit >= duopoly(market).total_profit - 1e-12
    assert monopoly_pd(market).total_profit >= monopoly_uniform(market).total_profit - 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 1e6), st.floats(0.0, 0.999))
def test_closed_form_bounds(s, a):
    assert pocs_closed_form(s, a) >= 0.75 - 1e-12
    assert pocp_closed_form(s, a) >= 1 - 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.floats(0.0, 0.9), st.floats(0.01, 0.5), st.floats(0.0, 1.0))
def test_total_demand_matches_fixed_d_patterns(a2, b1, p1, gap, frac):
    p2 = min(p1 + gap, 0.95)
    if p2 <= p1 or min(abs(1 - a2 * b1), abs(1 - a2), abs(1 - b1)) < 1e-3:
        return
    d = p1 + frac * (1.0 - p1)
    got = total_demand(a2, b1, p1, p2, d, 1.0)
    want = fixed_d_patterns(a2, b1, p1, p2, d) if d > p1 else [0.0]
    near = [(p2 - b1 * p1) / (1 - b1), (p1 - a2 * p2) / (1 - a2), p2, 1.0]
    if min(abs(d - b) for b in near) < 1e-7:
        return
    assert len(got) == len(want)
    assert np.allclose(got, want, atol=1e-8)
    assert all(v >= 0 for v in got)


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_csv_number_format_round_trips(v):
    assert float(_fmt(v)) == v
