"""User-side (Wardrop) equilibria and the two-AP demand geometry.

For two APs the scalar functions below take ``a2`` (gain of AP 2's users on
AP 1), ``b1`` (gain of AP 1's users on AP 2), prices ``p1 <= p2`` and the
choke price ``u0 = u(0)``.  Callers with ``p1 > p2`` relabel the APs first,
which swaps ``a2`` with ``b1``; :func:`normalize_order` does that.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BadPriceOrder
from .lcp import TAU_DET, assemble_lcp, solve_lcp, solve_lcp_enumerate
from .market import Market, as_prices

TAU_WE = 1e-8


@dataclass(frozen=True)
class WardropResult:
    """Equilibrium flows at fixed prices.

    ``disutility`` is ``u(sum(x))`` when some flow is carried and ``None``
    when nobody buys access.  ``flows`` is the first equilibrium in basis
    order; ``all_equilibria`` holds every one found.
    """

    flows: np.ndarray
    disutility: float | None
    unique: bool
    all_equilibria: tuple

    @property
    def total(self) -> float:
        return float(self.flows.sum())

    @property
    def n_equilibria(self) -> int:
        return len(self.all_equilibria)


def market_disutility(market: Market, flows) -> float | None:
    total = float(np.sum(flows))
    return float(market.demand.u(total)) if total > 0 else None


def wardrop_equilibrium(market: Market, prices) -> WardropResult:
    """Wardrop equilibrium at the given prices.

    Under weak interference the equilibrium is unique and comes from Lemke's
    method (with enumeration as a fallback).  Otherwise every equilibrium is
    enumerated.
    """
    inst = assemble_lcp(market, prices)
    if market.weak:
        sols = [solve_lcp(inst)]
    else:
        sols = solve_lcp_enumerate(inst)
    flows = tuple(np.asarray(sol.x) for sol in sols)
    return WardropResult(flows[0], market_disutility(market, flows[0]), len(flows) == 1, flows)


def wardrop_residual(market: Market, prices, flows) -> float:
    """Largest violation of the Wardrop conditions by ``flows``.

    Used APs must sit exactly at ``u(sum(x))``; unused ones must not be
    cheaper.  Negative flows count as violations too.
    """
    p = as_prices(prices, market.n)
    x = np.asarray(flows, dtype=float)
    d = p + market.G.T @ x
    u = float(market.demand.u(x.sum()))
    used = x > TAU_WE
    viol = [np.max(-x, initial=0.0)]
    if used.any():
        viol.append(np.max(np.abs(d[used] - u)))
    if (~used).any():
        viol.append(np.max(u - d[~used], initial=0.0))
    return float(max(viol))


def count_equilibria(market: Market, prices, cross_check: bool = True) -> int:
    """Number of distinct Wardrop equilibria, by enumeration.

    For two APs the count is compared with the number of crossings of the
    piecewise total demand with ``(w - d) / s``; a disagreement is reported
    as a ``RuntimeWarning``.
    """
    p = as_prices(prices, market.n)
    count = len(solve_lcp_enumerate(assemble_lcp(market, p)))
    if cross_check and market.n == 2:
        analytic = len(demand_crossings(market.a2, market.b1, p[0], p[1], market.w, market.s))
        if analytic != count:
            warnings.warn(
                f"enumeration found {count} equilibria but the demand curve crosses {analytic} times",
                RuntimeWarning,
                stacklevel=2,
            )
    return count


# ---------------------------------------------------------------------------
# two-AP geometry


def normalize_order(a2, b1, p1, p2):
    """Relabel so the cheaper AP is AP 1; returns ``(a2, b1, p1, p2, swapped)``."""
    if p1 > p2:
        return b1, a2, p2, p1, True
    return a2, b1, p1, p2, False


def _ratio(num: float, den: float) -> float:
    # degenerate denominators: the breakpoint recedes to +inf (or -inf for a negative numerator)
    if abs(den) <= TAU_DET:
        return -math.inf if num < 0 else math.inf
    return num / den


def _check_order(p1, p2, u0):
    if not (0 <= p1 <= p2 <= u0):
        raise BadPriceOrder(f"need 0 <= p1 <= p2 <= u0, got p1={p1}, p2={p2}, u0={u0}")


def thresholds(p1: float, p2: float, u0: float) -> tuple[float, float]:
    """Corner of the coarse partition evaluated at ``d = u0``.

    Returns ``((u0 - p1)/(u0 - p2), (u0 - p2)/(u0 - p1))``; with ``p1 == p2``
    both equal one (the limit), with ``p2 == u0`` the first is infinite.
    """
    if p1 == p2:
        return 1.0, 1.0
    return _ratio(u0 - p1, u0 - p2), _ratio(u0 - p2, u0 - p1)


def switch_on_point(b1: float, p1: float, p2: float) -> float:
    """Disutility above which AP 2 carries flow alongside AP 1: ``(p2 - b1 p1)/(1 - b1)``."""
    return _ratio(p2 - b1 * p1, 1.0 - b1)


def switch_off_point(a2: float, p1: float, p2: float) -> float:
    """Disutility at which AP 1 is squeezed out by AP 2: ``(p1 - a2 p2)/(1 - a2)``."""
    return _ratio(p1 - a2 * p2, 1.0 - a2)


def classify_region(a2: float, b1: float, p1: float, p2: float, u0: float) -> str:
    """Fine region label ``'a'`` to ``'e'`` of the cross-gain plane at fixed prices.

    The label fixes which support patterns appear as the market disutility
    sweeps ``(p2, u0)``.  Boundary points are assigned to the neighbour whose
    demand formula stays finite: ``a2 * b1 == 1`` goes to ``'b'`` (its
    two-AP interval is then empty), ``b1`` on its threshold with small ``a2``
    goes to ``'a'``, ``a2`` on its threshold with large ``b1`` goes to ``'e'``.
    """
    _check_order(p1, p2, u0)
    ta, tb = thresholds(p1, p2, u0)
    if a2 < ta:
        return "a" if b1 <= tb and b1 < 1 else "e"
    if b1 <= tb:
        return "b" if a2 * b1 <= 1 else "c"
    return "d" if a2 > ta else "e"


def coarse_region(a2: float, b1: float, p1: float, p2: float, d: float) -> str:
    """Region ``'I'`` to ``'IV'`` of the cross-gain plane at a fixed disutility ``d > p2``.

    I: both APs used; II: only AP 2; III: three patterns coexist; IV: only AP 1.
    """
    if not p1 <= p2 < d:
        raise BadPriceOrder(f"need p1 <= p2 < d, got p1={p1}, p2={p2}, d={d}")
    ta = math.inf if d == p2 else (d - p1) / (d - p2)
    tb = (d - p2) / (d - p1)
    if a2 < ta:
        return "I" if b1 < tb else "IV"
    return "II" if b1 < tb else "III"


@dataclass(frozen=True)
class Affine:
    """One branch formula ``f(d) = slope * d + intercept``."""

    label: str
    slope: float
    intercept: float

    def __call__(self, d):
        return self.slope * d + self.intercept


def _formulas(a2, b1, p1, p2):
    one = Affine("d-p1", 1.0, -p1)
    two = Affine("d-p2", 1.0, -p2)
    det = 1.0 - a2 * b1
    both = None
    if abs(det) > TAU_DET:
        both = Affine("both", (2.0 - a2 - b1) / det, ((a2 - 1.0) * p2 + (b1 - 1.0) * p1) / det)
    return one, two, both


@dataclass(frozen=True)
class DemandBranch:
    """Total demand on the half-open interval ``(lo, hi]``.

    ``expressions`` holds one formula, or three where the equilibrium flow
    pattern is not determined by ``d``.  ``monotone`` is true when every
    formula on the interval increases with ``d``.
    """

    lo: float
    hi: float
    expressions: tuple

    @property
    def slopes(self) -> tuple:
        return tuple(e.slope for e in self.expressions)

    @property
    def monotone(self) -> bool:
        return all(sl > 0 for sl in self.slopes)

    def values(self, d) -> tuple:
        return tuple(e(d) for e in self.expressions)


def demand_branches(a2: float, b1: float, p1: float, p2: float, u0: float) -> list[DemandBranch]:
    """Piecewise description of the total demand ``f(d)`` on ``(p1, u0)``.

    Below ``p1`` nobody buys, so that stretch is omitted.  Adjacent intervals
    with the same single formula are merged and empty ones dropped.
    """
    _check_order(p1, p2, u0)
    one, two, both = _formulas(a2, b1, p1, p2)
    on = switch_on_point(b1, p1, p2)
    off = switch_off_point(a2, p1, p2)
    pieces = [(p1, p2, (one,))]
    region = classify_region(a2, b1, p1, p2, u0)
    if region == "a":
        pieces += [(p2, on, (one,)), (on, u0, (both,))]
    elif region == "b":
        pieces += [(p2, on, (one,))]
        if both is not None:
            pieces += [(on, off, (both,))]
        pieces += [(off, u0, (two,))]
    elif region == "c":
        pieces += [(p2, off, (one,)), (off, on, (both, one, two)), (on, u0, (two,))]
    elif region == "d":
        pieces += [(p2, off, (one,)), (off, u0, (both, one, two))]
    else:
        pieces += [(p2, u0, (one,))]

    out: list[DemandBranch] = []
    lo_prev = p1
    for lo, hi, exprs in pieces:
        exprs = tuple(e for e in exprs if e is not None)
        lo = max(lo, lo_prev)
        hi = min(hi, u0)
        if hi <= lo:
            continue
        if out and len(exprs) == 1 and out[-1].expressions == exprs:
            out[-1] = DemandBranch(out[-1].lo, hi, exprs)
        else:
            out.append(DemandBranch(lo, hi, exprs))
        lo_prev = hi
    return out


def total_demand(a2: float, b1: float, p1: float, p2: float, d: float, u0: float) -> tuple:
    """Distinct values of the total equilibrium flow compatible with disutility ``d``.

    Returns a sorted tuple; it has three entries where the flow pattern is
    ambiguous (regions c and d) and one entry elsewhere.
    """
    _check_order(p1, p2, u0)
    if d <= p1:
        return (0.0,)
    for br in demand_branches(a2, b1, p1, p2, u0):
        if br.lo < d <= br.hi:
            return tuple(sorted(set(br.values(d))))
    # d == u0 falls just past the last open interval
    last = demand_branches(a2, b1, p1, p2, u0)[-1]
    return tuple(sorted(set(last.values(d))))


def _branch_flows(e: Affine, a2, b1, p1, p2, d) -> np.ndarray:
    if e.label == "d-p1":
        return np.array([d - p1, 0.0])
    if e.label == "d-p2":
        return np.array([0.0, d - p2])
    # both used: d = p1 + x1 + a2 x2 = p2 + b1 x1 + x2
    return np.linalg.solve([[1.0, a2], [b1, 1.0]], [d - p1, d - p2])


def demand_crossings(a2: float, b1: float, p1: float, p2: float, w: float, s: float,
                     tol: float = 1e-12) -> list[float | None]:
    """Market disutilities at which ``f(d)`` meets the demand ``(w - d) / s``.

    Each entry is one Wardrop equilibrium; crossings are merged only when they
    imply the same flows, so a value can repeat when two flow patterns share a
    disutility.  When both prices are at or above the choke price ``w`` the
    only equilibrium carries no flow and is reported as ``None``.
    """
    a2, b1, p1, p2, _ = normalize_order(a2, b1, p1, p2)
    if p1 >= w:
        return [None]
    hi_price = min(p2, w)
    found: list[tuple[float, np.ndarray]] = []
    for br in demand_branches(a2, b1, p1, hi_price, w):
        for e in br.expressions:
            k = e.slope + 1.0 / s
            if abs(k) <= TAU_DET:
                continue
            d = (w / s - e.intercept) / k
            if not br.lo - tol <= d <= br.hi + tol:
                continue
            x = _branch_flows(e, a2, b1, p1, hi_price, d)
            if not any(np.max(np.abs(x - y)) <= 1e-9 for _, y in found):
                found.append((d, x))
    return sorted(d for d, _ in found)
