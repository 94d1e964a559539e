"""Welfare accounting and the monopoly-versus-duopoly efficiency ratios.

PoCS is social welfare at the monopoly outcome divided by welfare at the
duopoly outcome; PoCP is the same ratio for total provider profit.  Both use
monopoly with price differentiation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .equilibria import EquilibriumReport, duopoly, monopoly_pd
from .errors import BoundViolated, DegenerateDuopoly
from .market import Market, as_flows, as_prices

SYMMETRY_TOL = 1e-12
AGREEMENT_TOL = 1e-8
POCS_BOUND = 0.75
POCP_BOUND = 1.0


@dataclass(frozen=True)
class WelfareBreakdown:
    gross_utility: float
    congestion_cost: float
    consumer_surplus: float
    total_profit: float

    @property
    def social_welfare(self) -> float:
        return self.gross_utility - self.congestion_cost


def welfare(market: Market, prices, flows) -> WelfareBreakdown:
    """Welfare terms at a flow profile.

    Social welfare is the area under the inverse demand up to the total flow
    minus the congestion each AP imposes on its own users.  The consumer
    surplus term is ``s X^2 / 2``, which is the surplus only when ``flows``
    is the Wardrop equilibrium for ``prices``.
    """
    p = as_prices(prices, market.n)
    x = as_flows(flows, market.n)
    total = float(x.sum())
    w, s = market.w, market.s
    return WelfareBreakdown(
        gross_utility=w * total - 0.5 * s * total ** 2,
        congestion_cost=float(x @ (market.G.T @ x)),
        consumer_surplus=0.5 * s * total ** 2,
        total_profit=float(p @ x),
    )


def report_welfare(market: Market, rep: EquilibriumReport) -> WelfareBreakdown:
    return welfare(market, rep.prices, rep.flows)


def pocs_closed_form(s: float, a: float) -> float:
    """PoCS for symmetric cross gains ``a2 = b1 = a < 1``."""
    return (3 * s + 1 + a) * (s + 2 - a) ** 2 / (4 * (s + 1) * (s * s + 3 * s + 1 - 2 * a * s - a * a))


def pocp_closed_form(s: float, a: float) -> float:
    """PoCP for symmetric cross gains ``a2 = b1 = a < 1``."""
    return (s - a + 2) ** 2 / (4 * (1 - a) * (s + 1))


def is_symmetric_duo(market: Market) -> bool:
    return market.n == 2 and abs(market.a2 - market.b1) <= SYMMETRY_TOL and market.a2 < 1


@dataclass(frozen=True)
class EfficiencyMetrics:
    pocs: float
    pocp: float
    symmetric_closed_form_used: bool
    monopoly: EquilibriumReport
    duopoly: EquilibriumReport
    sw_me: float
    sw_de: float


def _agree(value: float, reference: float, what: str):
    if abs(value - reference) > AGREEMENT_TOL * max(1.0, abs(reference)):
        raise BoundViolated(f"{what}: definitional {value!r} disagrees with closed form {reference!r}")


def efficiency(market: Market, check: bool = True) -> EfficiencyMetrics:
    """PoCS and PoCP from their definitions.

    For symmetric markets the closed forms are evaluated too and, with
    ``check``, required to agree to ``1e-8`` (relative once above one).
    """
    me = monopoly_pd(market)
    de = duopoly(market)
    sw_me = report_welfare(market, me).social_welfare
    sw_de = report_welfare(market, de).social_welfare
    if sw_de <= 0:
        raise DegenerateDuopoly(f"duopoly social welfare is {sw_de}")
    if de.total_profit <= 0:
        raise DegenerateDuopoly(f"duopoly profit is {de.total_profit}")
    pocs = sw_me / sw_de
    pocp = me.total_profit / de.total_profit
    sym = is_symmetric_duo(market)
    if sym and check:
        _agree(pocs, pocs_closed_form(market.s, market.a2), "PoCS")
        _agree(pocp, pocp_closed_form(market.s, market.a2), "PoCP")
    return EfficiencyMetrics(pocs, pocp, sym, me, de, sw_me, sw_de)


def pocs(market: Market, check: bool = True) -> float:
    return efficiency(market, check).pocs


def pocp(market: Market, check: bool = True) -> float:
    return efficiency(market, check).pocp


@dataclass(frozen=True)
class BoundsReport:
    points: int
    min_pocs: float
    min_pocs_at: tuple
    min_pocp: float
    min_pocp_at: tuple


def verify_bounds(s_values, a_values, method: str = "closed_form", tol: float = 1e-9) -> BoundsReport:
    """Check ``PoCS >= 3/4`` and ``PoCP >= 1`` over a grid of symmetric markets.

    ``method='definitional'`` solves every market instead of evaluating the
    closed forms.  Raises :class:`BoundViolated` at the first failure.
    """
    best_s = (np.inf, None)
    best_p = (np.inf, None)
    count = 0
    for s in s_values:
        for a in a_values:
            if method == "closed_form":
                vs, vp = pocs_closed_form(s, a), pocp_closed_form(s, a)
            elif method == "definitional":
                m = efficiency(Market.two_ap(1.0, s, a, a), check=False)
                vs, vp = m.pocs, m.pocp
            else:
                raise ValueError(f"unknown method {method!r}")
            if not vs >= POCS_BOUND - tol:
                raise BoundViolated(f"PoCS = {vs} < 3/4 at s={s}, a={a}")
            if not vp >= POCP_BOUND - tol:
                raise BoundViolated(f"PoCP = {vp} < 1 at s={s}, a={a}")
            count += 1
            if vs < best_s[0]:
                best_s = (float(vs), (float(s), float(a)))
            if vp < best_p[0]:
                best_p = (float(vp), (float(s), float(a)))
    return BoundsReport(count, best_s[0], best_s[1], best_p[0], best_p[1])


def symmetric_market(s: float, a: float, w: float = 1.0, **kw) -> Market:
    return Market.two_ap(w, s, a, a, **kw)


__all__ = [
    "BoundsReport",
    "EfficiencyMetrics",
    "WelfareBreakdown",
    "efficiency",
    "pocp",
    "pocp_closed_form",
    "pocs",
    "pocs_closed_form",
    "report_welfare",
    "symmetric_market",
    "verify_bounds",
    "welfare",
]
