"""Acceptance criteria, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line (also collected into the
pytest terminal summary).  Run directly with ``python3 tests/test_acceptance.py``
to get just those lines.
"""

import time
import warnings

import numpy as np
from scipy.optimize import brentq

from conftest import ACCEPTANCE_LINES
from oracles import brute_lcp, fixed_d_patterns, grid_refine_argmax2, profit_two_ap, random_weak_gains
from interference_pricing import (
    DemandCurve,
    Market,
    assemble_lcp,
    br_iterate,
    build_market,
    duopoly,
    efficiency,
    is_p_matrix,
    monopoly_pd,
    solve_lcp_enumerate,
    solve_lcp_lemke,
    total_demand,
    weak_interference_check,
)
from interference_pricing.experiments import parse_config, run_fig4, run_regions, FIG4_DEFAULTS, REGIONS_DEFAULTS
from interference_pricing.metrics import pocs_closed_form, pocp_closed_form, welfare
from interference_pricing.wardrop import demand_crossings, switch_off_point, switch_on_point


def report(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def _random_lcp_markets(count, seed):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(1, 9))
        g = random_weak_gains(rng, n)
        market = build_market(DemandCurve(rng.uniform(0.5, 2.0), rng.uniform(0.05, 5.0)), g)
        prices = rng.uniform(0.0, 1.2 * market.w, n)
        yield market, prices


def test_c1_lemke_matches_enumeration():
    start = time.perf_counter()
    worst = worst_res = 0.0
    bad_count = 0
    cases = 0
    for market, prices in _random_lcp_markets(1000, seed=11):
        inst = assemble_lcp(market, prices)
        sols = solve_lcp_enumerate(inst)
        lem = solve_lcp_lemke(inst)
        bad_count += len(sols) != 1
        if sols:
            worst = max(worst, float(np.max(np.abs(sols[0].x - lem.x))))
        x = np.asarray(lem.x)
        worst_res = max(worst_res, abs(float(x @ (inst.m @ x + inst.q))), float(np.max(-(inst.m @ x + inst.q), initial=0)))
        cases += 1
    elapsed = time.perf_counter() - start
    ok = cases >= 1000 and worst <= 1e-8 and bad_count == 0 and worst_res <= 1e-10 and elapsed < 30
    report(1, ok, f"{cases} markets, max |lemke-enum| = {worst:.2e}, non-unique = {bad_count}, "
                  f"residual = {worst_res:.2e}, {elapsed:.1f}s")
    assert ok


def test_c2_weak_interference_gives_p_matrix():
    counter = 0
    cases = 0
    for market, prices in _random_lcp_markets(1000, seed=11):
        assert weak_interference_check(market.G)
        if not is_p_matrix(assemble_lcp(market, prices).m):
            counter += 1
        cases += 1
    ok = counter == 0
    report(2, ok, f"{cases} weak markets, P-matrix counterexamples = {counter}")
    assert ok


def test_c3_closed_forms_match_numeric():
    rng = np.random.default_rng(23)
    start = time.perf_counter()
    me_err = de_err = dev_gain = 0.0
    not_conv = 0
    for _ in range(200):
        w, s = rng.uniform(0.5, 2.0), rng.uniform(0.1, 3.0)
        a2, b1 = rng.uniform(0.0, 1.0, 2)
        market = Market.two_ap(w, s, a2, b1)
        ga2, gb1 = market.a2, market.b1

        me = monopoly_pd(market)
        ref = grid_refine_argmax2(lambda P: profit_two_ap(ga2, gb1, w, s, P).sum(axis=1), 0.0, w)
        me_err = max(me_err, float(np.max(np.abs(me.prices - ref))))

        de = duopoly(market)
        it = br_iterate(market)
        not_conv += not it.converged
        de_err = max(de_err, float(np.max(np.abs(de.prices - it.prices))))

        base = profit_two_ap(ga2, gb1, w, s, de.prices)[0]
        for i in (0, 1):
            for delta in (-1e-3, 1e-3):
                p = np.array(de.prices, dtype=float)
                p[i] = max(p[i] + delta, 0.0)
                dev_gain = max(dev_gain, float(profit_two_ap(ga2, gb1, w, s, p)[0, i] - base[i]))
    elapsed = time.perf_counter() - start
    ok = me_err <= 1e-4 and de_err <= 1e-5 and dev_gain <= 1e-8 and not_conv == 0 and elapsed < 120
    report(3, ok, f"200 markets, ME-PD vs grid = {me_err:.2e}, DE vs BR = {de_err:.2e}, "
                  f"best deviation gain = {dev_gain:.2e}, unconverged = {not_conv}, {elapsed:.1f}s")
    assert ok


def test_c4_spot_values():
    market = Market.two_ap(1.0, 1.0, 0.0, 0.0)
    me, de = monopoly_pd(market), duopoly(market)
    eff = efficiency(market)
    checks = {
        "p_me": np.max(np.abs(me.prices - 0.5)),
        "x_me": np.max(np.abs(me.flows - 1 / 6)),
        "p_de": np.max(np.abs(de.prices - 1 / 3)),
        "x_de": np.max(np.abs(de.flows - 2 / 9)),
        "sw_me": abs(welfare(market, me.prices, me.flows).social_welfare - 2 / 9),
        "sw_de": abs(welfare(market, de.prices, de.flows).social_welfare - 20 / 81),
        "pocs": abs(eff.pocs - 0.9),
        "pocp": abs(eff.pocp - 1.125),
    }
    worst = max(checks, key=checks.get)
    ok = all(v <= 1e-9 for v in checks.values())
    report(4, ok, f"max error {checks[worst]:.2e} ({worst})")
    assert ok


def test_c5_efficiency_bounds():
    s_grid = [10.0 ** k for k in range(-3, 7)]
    a_grid = np.round(np.arange(0.0, 1.0, 0.01), 2)
    min_pocs = min_pocp = np.inf
    for s in s_grid:
        for a in a_grid:
            m = efficiency(Market.two_ap(1.0, s, a, a))
            min_pocs, min_pocp = min(min_pocs, m.pocs), min(min_pocp, m.pocp)
            min_pocs = min(min_pocs, pocs_closed_form(s, a))
            min_pocp = min(min_pocp, pocp_closed_form(s, a))
    tight_s = max(abs(efficiency(Market.two_ap(1.0, 1e6, a, a)).pocs - 0.75) for a in a_grid)
    tight_p = abs(efficiency(Market.two_ap(1.0, 1e-6, 1e-6, 1e-6)).pocp - 1.0)
    big_s = efficiency(Market.two_ap(1.0, 1e-3, 0.999, 0.999)).pocs
    big_p = efficiency(Market.two_ap(1.0, 1.0, 0.999, 0.999)).pocp
    ok = (min_pocs >= 0.75 - 1e-9 and min_pocp >= 1 - 1e-9 and tight_s <= 1e-3 and tight_p <= 1e-3
          and big_s > 10 and big_p > 10)
    report(5, ok, f"min PoCS = {min_pocs:.9f}, min PoCP = {min_pocp:.9f}, |PoCS(1e6)-3/4| <= {tight_s:.1e}, "
                  f"|PoCP(1e-6)-1| = {tight_p:.1e}, PoCS(1e-3,.999) = {big_s:.1f}, PoCP(1,.999) = {big_p:.1f}")
    assert ok


def test_c6_pocs_crosses_one_once():
    a_grid = np.round(np.arange(0.0, 1.0, 0.01), 2)
    vals = np.array([efficiency(Market.two_ap(1.0, 1.0, a, a)).pocs for a in a_grid]) - 1.0
    signs = np.sign(vals)
    changes = int(np.count_nonzero(signs[1:] != signs[:-1]))
    k = int(np.flatnonzero(signs[1:] != signs[:-1])[0]) if changes else 0
    root = brentq(lambda a: efficiency(Market.two_ap(1.0, 1.0, a, a)).pocs - 1.0, a_grid[k], a_grid[k + 1]) \
        if changes else float("nan")
    ok = changes == 1 and 0.6 <= root <= 0.8
    report(6, ok, f"{changes} sign change(s), PoCS = 1 at a2 = {root:.6f}")
    assert ok


def test_c7_fig4_shape():
    table = run_fig4(parse_config("", **FIG4_DEFAULTS))
    col = {c: np.array(table.column(c), dtype=float) for c in table.columns if c not in ("de_case_tag", "me_method")}
    price_ok = bool(np.all(col["p1_me"] >= col["p1_de"] - 1e-12) and np.all(col["p2_me"] >= col["p2_de"] - 1e-12))
    interior = (col["x1_me"] > 1e-9) & (col["x2_me"] > 1e-9)
    equal_me = float(np.max(np.abs(col["x1_me"] - col["x2_me"])[interior]))
    both = interior & (col["x1_de"] > 1e-9) & (col["x2_de"] > 1e-9)
    trend = np.abs(col["x1_me"] - col["x2_me"]) <= np.abs(col["x1_de"] - col["x2_de"]) + 1e-12
    share = float(trend[both].mean())
    sym = Market.two_ap(1.0, 1.0, 0.3, 0.3)
    sym_gap = float(abs(np.subtract(*monopoly_pd(sym).flows)))
    ok = len(table) == 85 and price_ok and equal_me <= 1e-6 and sym_gap <= 1e-6 and share >= 0.9
    report(7, ok, f"{len(table)} rows, ME >= DE prices: {price_ok}, max |x1-x2| at ME = {equal_me:.1e}, "
                  f"symmetric gap = {sym_gap:.1e}, equalization share = {share:.2f}")
    assert ok


def test_c8_multiplicity_witness():
    table = run_regions(parse_config("", **REGIONS_DEFAULTS))
    rows = [dict(zip(table.columns, r)) for r in table.rows]
    witnesses = [r for r in rows if r["a2"] + r["b1"] > 2 and r["n_equilibria"] >= 2]
    worst = 0.0
    for r in witnesses:
        crossings = demand_crossings(r["a2"], r["b1"], r["p1"], r["p2"], 1.0, 1.0)
        for d in (float(v) for v in r["d_star_list"].split(";")):
            worst = max(worst, min(abs(d - c) for c in crossings))
        # the WE count must also agree with an independent enumeration
        m = np.array([[1 + 1.0, r["a2"] + 1.0], [r["b1"] + 1.0, 1 + 1.0]])
        assert len(brute_lcp(m, np.array([r["p1"] - 1.0, r["p2"] - 1.0]))) == r["n_equilibria"]
    ok = bool(witnesses) and worst <= 1e-6
    report(8, ok, f"{len(witnesses)} witnesses with a2+b1 > 2 and >= 2 WEs, max crossing gap = {worst:.1e}")
    assert ok


def test_c9_piecewise_demand():
    rng = np.random.default_rng(9)
    w = 1.0
    mismatches = cont_bad = checked = 0
    for _ in range(500):
        while True:
            a2, b1 = rng.uniform(0.0, 3.0, 2)
            p1, p2 = np.sort(rng.uniform(0.0, 0.95 * w, 2))
            # keep away from the degenerate lines where a breakpoint formula divides by ~0
            if min(abs(1 - a2 * b1), abs(1 - a2), abs(1 - b1), p2 - p1) > 1e-3:
                break
        bps = [switch_on_point(b1, p1, p2), switch_off_point(a2, p1, p2)]
        for d in rng.uniform(p1, w, 8):
            if min(abs(d - b) for b in bps + [p2, w]) < 1e-6:
                continue
            got = total_demand(a2, b1, p1, p2, d, w)
            want = fixed_d_patterns(a2, b1, p1, p2, d)
            checked += 1
            if len(got) != len(want) or np.max(np.abs(np.subtract(got, want))) > 1e-8:
                mismatches += 1
        # both-AP formula meets the single-AP formulas at the breakpoints
        det = 1 - a2 * b1
        f_both = lambda d: ((2 - a2 - b1) * d + (a2 - 1) * p2 + (b1 - 1) * p1) / det
        on, off = bps
        cont_bad += abs(f_both(on) - (on - p1)) > 1e-8 * max(1, abs(on))
        cont_bad += abs(f_both(off) - (off - p2)) > 1e-8 * max(1, abs(off))
        # and where only one formula is active the curve has no jump there
        for bp in bps:
            if p2 < bp < w - 1e-6:
                left, right = total_demand(a2, b1, p1, p2, bp - 1e-7, w), total_demand(a2, b1, p1, p2, bp + 1e-7, w)
                if len(left) == len(right) == 1:
                    cont_bad += abs(left[0] - right[0]) > 1e-5
    ok = mismatches == 0 and cont_bad == 0 and checked > 3000
    report(9, ok, f"500 parameter draws, {checked} sampled d, mismatches = {mismatches}, discontinuities = {cont_bad}")
    assert ok


if __name__ == "__main__":
    warnings.simplefilter("ignore")
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_c"):
            try:
                fn()
            except AssertionError:
                failed += 1
    raise SystemExit(1 if failed else 0)
