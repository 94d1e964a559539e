"""Provider-side price equilibria: monopoly (with and without price
differentiation), duopoly, and a numeric best-response engine."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import DimensionMismatch, HypothesisViolated, NoImprovement
from .lcp import BatchEnumerator, assemble_lcp
from .market import Market, as_prices
from .wardrop import wardrop_equilibrium

BR_GRID = 1024
GOLDEN_TOL = 1e-10
INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class EquilibriumReport:
    """Prices, the induced Wardrop flows and per-AP profits.

    ``kind`` is ``'ME_PD'``, ``'ME_UNIFORM'`` or ``'DE'`` (``'OE'`` for more
    than two providers).  ``case_tag`` names the branch that produced the
    prices and ``method`` whether they came from a closed form or a search.
    """

    kind: str
    prices: np.ndarray
    flows: np.ndarray
    case_tag: str
    method: str = "closed_form"
    converged: bool = True
    iterations: int = 0

    @property
    def profits(self) -> np.ndarray:
        return self.prices * self.flows

    @property
    def total_profit(self) -> float:
        return float(self.profits.sum())

    def as_row(self) -> dict:
        row = {"kind": self.kind, "case_tag": self.case_tag}
        n = self.prices.shape[0]
        row.update({f"p_{i + 1}": float(self.prices[i]) for i in range(n)})
        row.update({f"x_{i + 1}": float(self.flows[i]) for i in range(n)})
        row.update({f"profit_{i + 1}": float(self.profits[i]) for i in range(n)})
        row["converged"] = self.converged
        return row


def _report(market: Market, kind: str, prices, case_tag: str, **kw) -> EquilibriumReport:
    p = np.array(as_prices(prices, market.n))
    x = np.array(wardrop_equilibrium(market, p).flows)
    p.setflags(write=False)
    x.setflags(write=False)
    return EquilibriumReport(kind, p, x, case_tag, **kw)


def _require_weak_duo(market: Market, what: str):
    if market.n != 2:
        raise DimensionMismatch(f"{what} closed form needs two APs, market has {market.n}")
    if not market.weak:
        raise HypothesisViolated(
            f"{what} closed form needs weak interference (a2 + b1 < 2), "
            f"got a2 + b1 = {market.a2 + market.b1}; use the numeric path"
        )


class ProfitOracle:
    """Evaluates ``p_i * x_i`` (or total profit) on batches of price vectors."""

    def __init__(self, market: Market):
        self.market = market
        self._enum = BatchEnumerator(assemble_lcp(market, np.zeros(market.n)).m)

    def flows(self, P) -> np.ndarray:
        P = np.atleast_2d(np.asarray(P, dtype=float))
        X, _ = self._enum.solve(P - self.market.w)
        return X

    def profit(self, P, i: int | None = None) -> np.ndarray:
        P = np.atleast_2d(np.asarray(P, dtype=float))
        X = self.flows(P)
        if i is None:
            return np.einsum("ij,ij->i", P, X)
        return P[:, i] * X[:, i]


# ---------------------------------------------------------------------------
# monopoly


def monopoly_pd_closed_form(market: Market) -> tuple[np.ndarray, np.ndarray]:
    """Interior profit maximizer ``p = (A + A^T)^{-1} A w``, ``x = A (w - p)``, ``A = M^{-1}``."""
    m = assemble_lcp(market, np.zeros(market.n)).m
    a = np.linalg.inv(m)
    wv = np.full(market.n, market.w)
    p = np.linalg.solve(a + a.T, a @ wv)
    return p, a @ (wv - p)


def monopoly_pd(market: Market) -> EquilibriumReport:
    """Monopoly prices with price differentiation.

    Two APs under weak interference use the closed form; any other AP count
    goes through :func:`monopoly_search`.  The closed-form prices are checked
    against the Wardrop solver and the search takes over if the interior
    candidate is not the equilibrium outcome.
    """
    if market.n != 2:
        return monopoly_search(market)
    _require_weak_duo(market, "ME-PD")
    p, x = monopoly_pd_closed_form(market)
    rep = _report(market, "ME_PD", p, "interior")
    if np.all(x > 0) and np.max(np.abs(rep.flows - x)) <= 1e-8 * max(1.0, market.w):
        return rep
    return monopoly_search(market)


def _zoom_grid_argmax(fn, lo, hi, n: int, first: int = 65, pts: int = 21, xtol: float = 1e-10):
    """Maximize ``fn`` over a box by repeatedly refining a tensor grid around the best point."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    axes = [np.linspace(lo[k], hi[k], first) for k in range(n)]
    step = (hi - lo) / (first - 1)
    while True:
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        vals = fn(grid)
        best = grid[int(np.nanargmax(vals))]
        if np.all(step <= xtol):
            return best, float(np.nanmax(vals))
        half = 2.0 * step
        a = np.maximum(best - half, lo)
        b = np.minimum(best + half, hi)
        axes = [np.linspace(a[k], b[k], pts) for k in range(n)]
        step = (b - a) / (pts - 1)


def monopoly_search(market: Market, xtol: float = 1e-10) -> EquilibriumReport:
    """Numeric monopoly prices maximizing total profit over ``[0, w]^n``.

    Up to two APs use a refining grid search.  Larger markets run bounded
    Powell searches from the interior candidate and the uniform price.
    """
    oracle = ProfitOracle(market)
    n, w = market.n, market.w
    if n <= 2:
        p, _ = _zoom_grid_argmax(lambda P: oracle.profit(P), np.zeros(n), np.full(n, w), n, xtol=xtol)
        return _report(market, "ME_PD", p, "search", method="grid")
    starts = [np.full(n, w / 2)]
    try:
        cand, _ = monopoly_pd_closed_form(market)
        starts.append(np.clip(cand, 0.0, w))
    except np.linalg.LinAlgError:
        pass
    best = None
    for x0 in starts:
        res = optimize.minimize(
            lambda p: -oracle.profit(p)[0], x0, method="Powell",
            bounds=[(0.0, w)] * n, options={"xtol": xtol, "ftol": 1e-15, "maxiter": 20000},
        )
        if best is None or res.fun < best.fun:
            best = res
    return _report(market, "ME_PD", best.x, "search", method="powell")


def monopoly_uniform(market: Market) -> EquilibriumReport:
    """Monopoly with a single price on every AP: ``p = w / 2``.

    With equal prices the equilibrium flows scale with ``w - p`` while the
    support pattern stays fixed, so the optimum is ``w / 2`` whatever the
    interference; flows come from the Wardrop solver, which honours the
    zero-flow patterns of strongly asymmetric gains.
    """
    if not market.weak:
        raise HypothesisViolated("uniform monopoly price needs weak interference")
    return _report(market, "ME_UNIFORM", np.full(market.n, market.w / 2), "uniform")


# ---------------------------------------------------------------------------
# duopoly


def duopoly_interior(market: Market) -> tuple[np.ndarray, np.ndarray]:
    """Intersection of the two linear best responses and the flows it implies."""
    w, s, a2, b1 = market.w, market.s, market.a2, market.b1
    den = 4 * (1 + s) ** 2 - (s + a2) * (s + b1)
    p1 = w * ((a2 + s) * (1 - b1) + 2 * (1 - a2) * (1 + s)) / den
    p2 = w * ((b1 + s) * (1 - a2) + 2 * (1 - b1) * (1 + s)) / den
    det = (1 + s) ** 2 - (s + a2) * (s + b1)
    x1 = ((w - p1) * (1 + s) - (w - p2) * (a2 + s)) / det
    x2 = ((w - p2) * (1 + s) - (w - p1) * (b1 + s)) / det
    return np.array([p1, p2]), np.array([x1, x2])


def expel_price(w: float, s: float, gain: float) -> float:
    """Highest price at which the stronger AP keeps its rival's flow at zero."""
    return (gain - 1) * w / (s + gain)


def expel_profit(w: float, s: float, gain: float) -> float:
    return (gain - 1) * w ** 2 / (s + gain) ** 2


def duopoly(market: Market) -> EquilibriumReport:
    """Duopoly price equilibrium for two APs under weak interference.

    Both cross gains at most one: the interior equilibrium.  One gain above
    one: the strong AP compares its interior profit with the profit of
    pricing its rival out and expels on a tie.  An expelled AP's price is
    not pinned down; it is reported as 0 with zero flow.
    """
    _require_weak_duo(market, "DE")
    w, s, a2, b1 = market.w, market.s, market.a2, market.b1
    p_star, x_star = duopoly_interior(market)
    if a2 <= 1 and b1 <= 1:
        return _report(market, "DE", p_star, "1")
    if a2 > 1:
        strong, gain, tag = 1, a2, "2"
    else:
        strong, gain, tag = 0, b1, "3"
    if p_star[strong] * x_star[strong] > expel_profit(w, s, gain):
        return _report(market, "DE", p_star, f"{tag}-coexist")
    p = np.zeros(2)
    p[strong] = expel_price(w, s, gain)
    return _report(market, "DE", p, f"{tag}-expel")


# ---------------------------------------------------------------------------
# best responses


def _full_prices(n: int, i: int, p_other) -> np.ndarray:
    p_other = np.asarray(p_other, dtype=float).reshape(-1)
    if p_other.shape[0] != n - 1:
        raise DimensionMismatch(f"expected {n - 1} rival prices, got {p_other.shape[0]}")
    return np.insert(p_other, i, 0.0)


def best_response_analytic(market: Market, i: int, p_other) -> float:
    """Clipped-linear best response of a two-AP provider.

    ``BR_1(p2) = clip(((a2 + s) p2 + w (1 - a2)) / (2 (1 + s)), 0, u(0))`` and
    the mirror image for AP 2.  Exact while both APs carry flow.
    """
    if market.n != 2:
        raise DimensionMismatch("analytic best response is defined for two APs")
    w, s = market.w, market.s
    gain = market.a2 if i == 0 else market.b1
    rival = float(np.asarray(p_other, dtype=float).reshape(-1)[0])
    lin = ((gain + s) * rival + w * (1 - gain)) / (2 * (1 + s))
    return float(min(max(lin, 0.0), w))


def golden_max(fn, a: float, b: float, tol: float = GOLDEN_TOL) -> float:
    """Golden-section search for the maximizer of a unimodal ``fn`` on ``[a, b]``."""
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def best_response_numeric(market: Market, i: int, p_other, oracle: ProfitOracle | None = None,
                          grid: int = BR_GRID, tol: float = GOLDEN_TOL) -> float:
    """Profit-maximizing own price on ``[0, w]`` given the rivals' prices.

    A coarse grid locates the best cell and golden-section search refines it.
    When every candidate earns nothing a :class:`NoImprovement` warning is
    issued and 0 returned.
    """
    oracle = oracle or ProfitOracle(market)
    base = _full_prices(market.n, i, p_other)
    ps = np.linspace(0.0, market.w, grid)
    P = np.repeat(base[None, :], grid, axis=0)
    P[:, i] = ps
    vals = oracle.profit(P, i)
    k = int(np.nanargmax(vals))
    if not vals[k] > 0:
        warnings.warn(f"AP {i + 1} earns zero profit at every price", NoImprovement, stacklevel=2)
        return 0.0
    lo, hi = ps[max(k - 1, 0)], ps[min(k + 1, grid - 1)]

    def own(p):
        q = base.copy()
        q[i] = p
        return float(oracle.profit(q, i)[0])

    return golden_max(own, lo, hi, tol)


def best_response(market: Market, i: int, p_other, method: str = "numeric",
                  oracle: ProfitOracle | None = None) -> float:
    if method == "analytic":
        return best_response_analytic(market, i, p_other)
    if method == "numeric":
        return best_response_numeric(market, i, p_other, oracle=oracle)
    raise ValueError(f"unknown best-response method {method!r}")


def br_iterate(market: Market, init=None, max_iters: int = 500, tol: float = 1e-7,
               method: str = "numeric") -> EquilibriumReport:
    """Synchronous best-response sweeps until prices move less than ``tol``.

    A golden-section argmax of a smooth profit curve is only good to about
    the square root of machine precision, so ``tol`` much below 1e-8 will
    not be met by the numeric method.  Non-convergence is reported through
    ``converged=False`` rather than raised.
    """
    n = market.n
    p = np.zeros(n) if init is None else np.array(as_prices(init, n))
    oracle = ProfitOracle(market) if method == "numeric" else None
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        new = np.array([
            best_response(market, i, np.delete(p, i), method=method, oracle=oracle) for i in range(n)
        ])
        step = np.max(np.abs(new - p))
        p = new
        if step < tol:
            converged = True
            break
    kind = "DE" if n == 2 else "OE"
    return _report(market, kind, p, "br-iterate", method=f"br-{method}", converged=converged, iterations=it)


def own_profit(market: Market, i: int, prices) -> float:
    p = as_prices(prices, market.n)
    return float(p[i] * wardrop_equilibrium(market, p).flows[i])


def unilateral_gain(market: Market, prices, delta: float) -> float:
    """Largest profit gain any provider gets by moving its own price by ``+-delta``."""
    p = as_prices(prices, market.n)
    gain = -math.inf
    for i in range(market.n):
        base = own_profit(market, i, p)
        for sign in (-1.0, 1.0):
            q = p.copy()
            q[i] = max(q[i] + sign * delta, 0.0)
            gain = max(gain, own_profit(market, i, q) - base)
    return gain
