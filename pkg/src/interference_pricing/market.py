"""Market environment: linear demand, normalized interference, prices and flows.

Indexing convention: ``gains[i, j]`` holds the normalized gain from the users
of AP ``i`` into AP ``j``, so the congestion at AP ``j`` is
``sum_i gains[i, j] * x[i]`` (``l = G.T @ x``).  For two APs the scalar
shorthand is ``a2 = gains[1, 0]`` (interference of AP 2 on AP 1) and
``b1 = gains[0, 1]`` (interference of AP 1 on AP 2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadDiagonal,
    DimensionMismatch,
    GainFloorWarning,
    NonPositiveGain,
)

GAIN_FLOOR = 1e-9
DIAG_TOL = 1e-9
SUM_TOL = 1e-12


@dataclass(frozen=True)
class DemandCurve:
    """Linear inverse demand ``u(x) = w - s * x``."""

    w: float
    s: float

    def __post_init__(self):
        if not (np.isfinite(self.w) and self.w > 0):
            raise ValueError(f"demand intercept w must be positive, got {self.w}")
        if not (np.isfinite(self.s) and self.s > 0):
            raise ValueError(f"demand slope s must be positive, got {self.s}")

    def u(self, x):
        return self.w - self.s * np.asarray(x, dtype=float)

    def inverse(self, d):
        """Total flow at which the marginal willingness-to-pay equals ``d``."""
        return (self.w - np.asarray(d, dtype=float)) / self.s

    @property
    def choke_price(self) -> float:
        return self.w


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class InterferenceMatrix:
    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "g", _readonly(self.g))

    @property
    def n(self) -> int:
        return self.g.shape[0]

    @classmethod
    def validated(cls, gains, gain_floor: float = GAIN_FLOOR, diag_tol: float = DIAG_TOL):
        """Check and normalize a user supplied gain matrix.

        Entries in ``[0, gain_floor)`` are raised to ``gain_floor`` with a
        :class:`GainFloorWarning`; negative entries raise
        :class:`NonPositiveGain`.  Diagonal entries within ``diag_tol`` of one
        are snapped to exactly one, anything further away raises
        :class:`BadDiagonal` (use :func:`from_sinr` to normalize raw gains).
        """
        g = np.array(gains, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] < 1:
            raise DimensionMismatch(f"gain matrix must be square and non-empty, got shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise NonPositiveGain("gain matrix contains non-finite entries")
        if np.any(g < 0):
            raise NonPositiveGain("interference gains must be positive")
        diag = np.diag(g)
        if np.any(np.abs(diag - 1.0) > diag_tol):
            raise BadDiagonal(f"diagonal must be 1 within {diag_tol}, got {diag}")
        np.fill_diagonal(g, 1.0)
        tiny = g < gain_floor
        if np.any(tiny):
            warnings.warn(
                f"{int(tiny.sum())} gain(s) below {gain_floor} raised to the floor",
                GainFloorWarning,
                stacklevel=3,
            )
            g[tiny] = gain_floor
        return cls(g)


@dataclass(frozen=True)
class RawChannelModel:
    """Average channel gains ``raw_gains[j, i] = g_{j,i}`` from AP j's users to AP i.

    Transmit power, noise and user counts drop out in the large-population,
    low-SINR limit, so only the gains (and the per-user payload, which merely
    rescales flows) are kept.
    """

    raw_gains: np.ndarray
    payload_bits: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "raw_gains", _readonly(self.raw_gains))


def weak_interference_check(gains) -> bool:
    """True iff ``sum_{j != i} (g_ij + g_ji) < 2`` for every AP ``i``."""
    g = gains.g if isinstance(gains, InterferenceMatrix) else np.asarray(gains, dtype=float)
    off = g + g.T
    cross = off.sum(axis=1) - np.diag(off)
    return bool(np.all(cross < 2.0 * np.diag(g)))


@dataclass(frozen=True)
class Market:
    demand: DemandCurve
    gains: InterferenceMatrix
    weak: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "weak", weak_interference_check(self.gains))

    @property
    def n(self) -> int:
        return self.gains.n

    @property
    def w(self) -> float:
        return self.demand.w

    @property
    def s(self) -> float:
        return self.demand.s

    @property
    def G(self) -> np.ndarray:
        return self.gains.g

    @property
    def a2(self) -> float:
        self._require_two()
        return float(self.G[1, 0])

    @property
    def b1(self) -> float:
        self._require_two()
        return float(self.G[0, 1])

    def _require_two(self):
        if self.n != 2:
            raise DimensionMismatch(f"two-AP shorthand needs n == 2, market has n == {self.n}")

    @classmethod
    def two_ap(cls, w: float, s: float, a2: float, b1: float, **kw) -> "Market":
        """Two-AP market from the scalar cross gains ``a2`` and ``b1``."""
        return build_market(DemandCurve(w, s), [[1.0, b1], [a2, 1.0]], **kw)

    def with_gains(self, gains, **kw) -> "Market":
        return build_market(self.demand, gains, **kw)


def build_market(demand: DemandCurve, gains, gain_floor: float = GAIN_FLOOR,
                 diag_tol: float = DIAG_TOL) -> Market:
    if not isinstance(gains, InterferenceMatrix):
        gains = InterferenceMatrix.validated(gains, gain_floor=gain_floor, diag_tol=diag_tol)
    return Market(demand, gains)


def from_sinr(raw: RawChannelModel, gain_floor: float = GAIN_FLOOR) -> InterferenceMatrix:
    """Normalize raw channel gains: ``G[j, i] = g_{j,i} / g_{i,i}``."""
    g = np.array(raw.raw_gains, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DimensionMismatch(f"raw gains must be square, got shape {g.shape}")
    if not np.all(np.isfinite(g)) or np.any(g < 0) or np.any(np.diag(g) <= 0):
        raise NonPositiveGain("raw channel gains must be strictly positive")
    # column i is divided by the direct gain of AP i
    return InterferenceMatrix.validated(g / np.diag(g)[None, :], gain_floor=gain_floor)


def as_prices(prices, n: int) -> np.ndarray:
    p = np.asarray(prices, dtype=float).reshape(-1)
    if p.shape != (n,):
        raise DimensionMismatch(f"expected {n} prices, got {p.shape[0]}")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValueError(f"prices must be finite and non-negative, got {p}")
    return p


def as_flows(flows, n: int) -> np.ndarray:
    x = np.asarray(flows, dtype=float).reshape(-1)
    if x.shape != (n,):
        raise DimensionMismatch(f"expected {n} flows, got {x.shape[0]}")
    if not np.all(np.isfinite(x)) or np.any(x < 0):
        raise ValueError(f"flows must be finite and non-negative, got {x}")
    return x


def congestion(market: Market, flows) -> np.ndarray:
    """Congestion delay at every AP, ``l_i = sum_j G[j, i] x_j``."""
    x = as_flows(flows, market.n)
    return market.G.T @ x


def disutility(market: Market, prices, flows) -> np.ndarray:
    p = as_prices(prices, market.n)
    return p + congestion(market, flows)
