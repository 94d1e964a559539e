"""Linear complementarity formulation of the user equilibrium.

Find ``x >= 0`` with ``M x + q >= 0`` and ``x . (M x + q) = 0`` where
``M = G.T + s * ones`` and ``q = p - w``.  Two solvers are provided:
exhaustive enumeration of complementary bases (every solution, small n) and
Lemke's complementary pivot method (one solution, fast).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numpy as np

from .errors import DimensionMismatch, MaxPivots, RayTermination, TooLarge
from .market import Market, as_prices

TAU_COMP = 1e-10
TAU_FEAS = 1e-9
TAU_X = 1e-12
TAU_DET = 1e-12
TAU_DUP = 1e-8
N_ENUM_MAX = 12


@dataclass(frozen=True)
class LcpInstance:
    m: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        q = np.array(self.q, dtype=float).reshape(-1)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != q.shape[0]:
            raise DimensionMismatch(f"LCP needs square M matching q, got {m.shape} and {q.shape}")
        m.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "q", q)

    @property
    def n(self) -> int:
        return self.q.shape[0]


@dataclass(frozen=True)
class LcpSolution:
    x: np.ndarray
    residual: float
    basis: tuple
    method: str
    pivots: int = 0
    skipped_singular: int = 0


def assemble_lcp(market: Market, prices) -> LcpInstance:
    p = as_prices(prices, market.n)
    m = market.G.T + market.s * np.ones((market.n, market.n))
    return LcpInstance(m, p - market.w)


def _subsets(n: int):
    for k in range(n + 1):
        yield from combinations(range(n), k)


def is_p_matrix(m, tol: float = TAU_DET, n_max: int = N_ENUM_MAX) -> bool:
    """True iff every principal minor of ``m`` exceeds ``tol``."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if n > n_max:
        raise TooLarge(f"principal-minor test limited to n <= {n_max}, got {n}")
    for k in range(1, n + 1):
        for idx in combinations(range(n), k):
            if np.linalg.det(m[np.ix_(idx, idx)]) <= tol:
                return False
    return True


def _finish(inst: LcpInstance, x: np.ndarray, method: str, **meta) -> LcpSolution:
    x = np.where(x < 0, 0.0, x)
    slack = inst.m @ x + inst.q
    basis = tuple(int(i) for i in np.flatnonzero(x > TAU_X))
    x.setflags(write=False)
    return LcpSolution(x, float(abs(x @ slack)), basis, method, **meta)


def _is_valid(inst: LcpInstance, x: np.ndarray) -> bool:
    if np.any(x < -TAU_X):
        return False
    xc = np.maximum(x, 0.0)
    slack = inst.m @ xc + inst.q
    return bool(np.all(slack >= -TAU_FEAS) and abs(xc @ slack) <= TAU_COMP * max(1.0, np.abs(inst.q).max()))


def _solve_on_basis(inst: LcpInstance, basis) -> np.ndarray | None:
    x = np.zeros(inst.n)
    if basis:
        idx = list(basis)
        sub = inst.m[np.ix_(idx, idx)]
        if abs(np.linalg.det(sub)) <= TAU_DET:
            return None
        x[idx] = np.linalg.solve(sub, -inst.q[idx])
    return x


def solve_lcp_enumerate(inst: LcpInstance, n_max: int = N_ENUM_MAX) -> list[LcpSolution]:
    """Every solution of the LCP, by trying all ``2**n`` complementary bases.

    Singular basis submatrices are skipped and counted.  Solutions closer than
    ``TAU_DUP`` in the max norm are merged.  The result is sorted by basis.
    """
    if inst.n > n_max:
        raise TooLarge(f"enumeration limited to n <= {n_max}, got {inst.n}")
    found: list[np.ndarray] = []
    skipped = 0
    for basis in _subsets(inst.n):
        x = _solve_on_basis(inst, basis)
        if x is None:
            skipped += 1
            continue
        if not _is_valid(inst, x):
            continue
        x = np.maximum(x, 0.0)
        if any(np.max(np.abs(x - y)) <= TAU_DUP for y in found):
            continue
        found.append(x)
    sols = [_finish(inst, x, "enumerate", skipped_singular=skipped) for x in found]
    return sorted(sols, key=lambda sol: sol.basis)


class BatchEnumerator:
    """Enumeration for one fixed ``M`` and many right-hand sides ``q``.

    The inverse of every nonsingular principal submatrix is computed once, so
    evaluating a grid of prices costs a handful of small matrix products.
    Rows of ``Q`` with several solutions report the first in basis order.
    """

    def __init__(self, m, n_max: int = N_ENUM_MAX):
        self.m = np.asarray(m, dtype=float)
        self.n = self.m.shape[0]
        if self.n > n_max:
            raise TooLarge(f"enumeration limited to n <= {n_max}, got {self.n}")

    @cached_property
    def _bases(self):
        out = []
        for basis in _subsets(self.n):
            idx = np.array(basis, dtype=int)
            if idx.size == 0:
                out.append((idx, np.zeros((0, 0))))
                continue
            sub = self.m[np.ix_(idx, idx)]
            if abs(np.linalg.det(sub)) <= TAU_DET:
                continue
            out.append((idx, np.linalg.inv(sub)))
        return out

    def solve(self, Q) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(X, count)``: one solution per row of ``Q`` and the number of valid bases."""
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        k = Q.shape[0]
        X = np.full((k, self.n), np.nan)
        count = np.zeros(k, dtype=int)
        scale = np.maximum(1.0, np.abs(Q).max(axis=1))
        for idx, inv in self._bases:
            cand = np.zeros((k, self.n))
            if idx.size:
                cand[:, idx] = -Q[:, idx] @ inv.T
            ok = np.all(cand >= -TAU_X, axis=1)
            cand = np.maximum(cand, 0.0)
            slack = cand @ self.m.T + Q
            ok &= np.all(slack >= -TAU_FEAS, axis=1)
            ok &= np.abs(np.einsum("ij,ij->i", cand, slack)) <= TAU_COMP * scale
            fresh = ok & np.isnan(X[:, 0])
            X[fresh] = cand[fresh]
            count += ok
        return X, count


def _lex_min_row(rows, col, rhs, binv):
    """Lexicographic minimum ratio test; guards Lemke against cycling."""
    ratios = [(rhs[i] / col[i], i) for i in rows]
    best = min(r for r, _ in ratios)
    ties = [i for r, i in ratios if r <= best + 1e-12 * max(1.0, abs(best))]
    for j in range(binv.shape[1]):
        if len(ties) == 1:
            break
        vals = [binv[i, j] / col[i] for i in ties]
        lo = min(vals)
        ties = [i for i, v in zip(ties, vals) if v <= lo + 1e-12]
    return ties[0]


def solve_lcp_lemke(inst: LcpInstance, max_pivots: int | None = None, tol: float = 1e-13) -> LcpSolution:
    """One solution of the LCP by Lemke's method with covering vector of ones.

    Guaranteed to terminate with a solution when ``M`` is a P-matrix.  The
    support found by the pivot path is re-solved directly to polish the result.
    """
    n = inst.n
    q = inst.q
    if np.all(q >= 0):
        return _finish(inst, np.zeros(n), "lemke", pivots=0)
    if max_pivots is None:
        max_pivots = 50 * (n + 1) ** 2
    # columns: w_0..w_{n-1}, z_0..z_{n-1}, z0 ; tableau rows hold B^{-1}[I, -M, -e | q]
    z0 = 2 * n
    T = np.hstack([np.eye(n), -inst.m, -np.ones((n, 1)), q.reshape(-1, 1)])
    basis = list(range(n))

    def pivot(r, c):
        T[r] /= T[r, c]
        for i in range(n):
            if i != r and T[i, c] != 0.0:
                T[i] -= T[i, c] * T[r]
        leaving = basis[r]
        basis[r] = c
        return leaving

    r = int(np.argmin(q))
    leaving = pivot(r, z0)
    pivots = 1
    while True:
        entering = leaving + n if leaving < n else leaving - n
        col = T[:, entering]
        rows = [i for i in range(n) if col[i] > tol]
        if not rows:
            raise RayTermination(f"ray termination after {pivots} pivots")
        z0_rows = [i for i in rows if basis[i] == z0]
        rhs = T[:, -1]
        r = _lex_min_row(rows, col, rhs, T[:, :n])
        if z0_rows:
            i0 = z0_rows[0]
            if rhs[i0] / col[i0] <= rhs[r] / col[r] + 1e-12 * max(1.0, abs(rhs[r] / col[r])):
                r = i0
        leaving = pivot(r, entering)
        pivots += 1
        if leaving == z0:
            break
        if pivots >= max_pivots:
            raise MaxPivots(f"no solution after {pivots} pivots")

    x = np.zeros(n)
    for i, var in enumerate(basis):
        if n <= var < 2 * n:
            x[var - n] = T[i, -1]
    support = tuple(int(i) for i in np.flatnonzero(x > TAU_X))
    polished = _solve_on_basis(inst, support)
    if polished is not None and _is_valid(inst, polished):
        x = polished
    return _finish(inst, x, "lemke", pivots=pivots)


def solve_lcp(inst: LcpInstance) -> LcpSolution:
    """Lemke first; falls back to enumeration when the pivot path fails."""
    try:
        sol = solve_lcp_lemke(inst)
        if _is_valid(inst, np.asarray(sol.x)):
            return sol
    except (RayTermination, MaxPivots):
        pass
    sols = solve_lcp_enumerate(inst)
    if not sols:
        raise RayTermination("Lemke failed and enumeration found no solution")
    return sols[0]
