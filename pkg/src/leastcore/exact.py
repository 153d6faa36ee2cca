"""Exact small-instance oracles.

A dense two-phase tableau simplex, the least-core LP over every coalition,
the sampled-constraint LP baseline and exact Shapley values.

The least-core LP has one row per coalition but only ``n + 1`` columns, so
it is solved through its dual (``n + 1`` rows); the primal solution is read
off the dual's multipliers and then checked against the primal constraints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CharacteristicOracle, all_coalitions_matrix, normalize, sample_coalition_matrix
from .errors import (
    ConfigError,
    CycleLimitExceeded,
    NumericalBreakdown,
    TooManyPlayers,
)

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"
SENSES = ("<=", ">=", "=")

PIVOT_TOL = 1e-11
PERTURB = 1e-7  # relative right-hand-side relaxation against degenerate stalling
COST_TOL = 1e-10


@dataclass
class DenseLP:
    """``min c^T x`` subject to ``A_i x (sense_i) b_i`` and ``x_j >= lb_j``
    with ``lb_j`` either 0 or ``-inf``."""

    c: np.ndarray
    A: np.ndarray
    senses: list
    b: np.ndarray
    lb: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = np.asarray(self.b, dtype=float)
        self.senses = list(self.senses)
        m, nv = self.A.shape
        if self.lb is None:
            self.lb = np.zeros(nv)
        self.lb = np.asarray(self.lb, dtype=float)
        if self.c.shape != (nv,) or self.b.shape != (m,) or len(self.senses) != m or self.lb.shape != (nv,):
            raise ConfigError("inconsistent LP dimensions")
        if any(s not in SENSES for s in self.senses):
            raise ConfigError(f"row senses must be among {SENSES}")
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.b)) and np.all(np.isfinite(self.c))):
            raise ConfigError("LP data must be finite")
        if not np.all((self.lb == 0) | np.isneginf(self.lb)):
            raise ConfigError("variable lower bounds must be 0 or -inf")


@dataclass
class LPSolution:
    status: str
    value: float = math.nan
    x: np.ndarray | None = None
    duals: np.ndarray | None = None  # d(value)/d(b_i)
    pivots: int = 0


class _Tableau:
    def __init__(self, A, b, basis):
        m, N = A.shape
        self.T = np.zeros((m + 1, N + 1))
        self.T[:m, :N] = A
        self.T[:m, N] = b
        self.basis = list(basis)
        self.pivots = 0
        self.degenerate = 0
        self.bland = False

    @property
    def m(self):
        return self.T.shape[0] - 1

    @property
    def N(self):
        return self.T.shape[1] - 1

    def set_costs(self, cost):
        m, N = self.m, self.N
        cb = cost[self.basis]
        self.T[m, :N] = cost - cb @ self.T[:m, :N]
        self.T[m, N] = -cb @ self.T[:m, N]

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        self.basis[r] = j
        self.pivots += 1

    def run(self, max_pivots, cols=None):
        """Primal simplex on the current tableau; returns OPTIMAL or UNBOUNDED."""
        m, N = self.m, self.N
        T = self.T
        switch_at = 10 * (m + N)
        allowed = np.ones(N, dtype=bool) if cols is None else cols
        while True:
            d = np.where(allowed, T[m, :N], 0.0)
            scale = 1.0 + np.abs(T[m, N])
            cand = np.flatnonzero(d < -COST_TOL * scale)
            if cand.size == 0:
                return OPTIMAL
            if self.pivots >= max_pivots:
                raise CycleLimitExceeded(f"no optimum after {self.pivots} pivots")
            j = int(cand[0]) if self.bland else int(cand[np.argmin(d[cand])])
            a = T[:m, j]
            pos = a > PIVOT_TOL
            if not pos.any():
                if np.any(a > PIVOT_TOL * 1e-3):
                    raise NumericalBreakdown(f"only tiny pivots (max {a.max():.3g}) in column {j}")
                return UNBOUNDED
            rows = np.flatnonzero(pos)
            ratios = T[rows, N] / a[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
            if self.bland:
                r = int(min(ties, key=lambda i: self.basis[i]))
            else:
                r = int(ties[np.argmax(a[ties])])
            if best <= 1e-12:
                self.degenerate += 1
                if self.degenerate > switch_at:
                    self.bland = True
            else:
                self.degenerate = 0
            self.pivot(r, j)


def simplex_solve(lp: DenseLP, max_pivots: int | None = None, perturb: float = PERTURB) -> LPSolution:
    """Dense two-phase simplex with Dantzig pricing.

    Each right-hand side is first relaxed by a tiny deterministic amount so
    that degenerate vertices, which make Dantzig pricing stall, all but
    vanish; the final basis is then re-solved against the exact right-hand
    side.  Reduced costs do not depend on it, so that basis stays optimal
    whenever it stays feasible; otherwise the solve is repeated without the
    perturbation.  Bland's rule takes over after ``10 * (rows + cols)``
    consecutive degenerate pivots.  Optimal answers are re-checked against
    the original constraints before they are returned.
    """
    A0, b0, c0, lb = lp.A, lp.b, lp.c, lp.lb
    m0, nv = A0.shape
    free = np.isneginf(lb)
    A = np.hstack([A0, -A0[:, free]])
    c = np.concatenate([c0, -c0[free]])
    nstruct = A.shape[1]

    # rows: split equalities, make the right-hand side nonnegative
    rows, rhs, senses, origin, sign = [], [], [], [], []
    for i in range(m0):
        parts = ["<=", ">="] if lp.senses[i] == "=" else [lp.senses[i]]
        for s in parts:
            a, bi, si = A[i], b0[i], 1.0
            if bi < 0 or (bi == 0 and s == ">="):
                a, bi, si = -a, -bi, -1.0
                s = "<=" if s == ">=" else ">="
            rows.append(a)
            rhs.append(bi)
            senses.append(s)
            origin.append(i)
            sign.append(si)
    m = len(rows)
    rows = np.array(rows).reshape(m, nstruct)
    rhs = np.array(rhs)
    n_slack = m
    ge = np.array([s == ">=" for s in senses], dtype=bool)
    n_art = int(ge.sum())
    N = nstruct + n_slack + n_art
    Astd = np.zeros((m, N))
    Astd[:, :nstruct] = rows
    Astd[np.arange(m), nstruct + np.arange(m)] = np.where(ge, -1.0, 1.0)
    art_cols = nstruct + n_slack + np.arange(n_art)
    Astd[np.flatnonzero(ge), art_cols] = 1.0
    basis = np.where(ge, 0, nstruct + np.arange(m))
    basis[np.flatnonzero(ge)] = art_cols
    if max_pivots is None:
        max_pivots = 50 * (m + N) + 1000

    if perturb > 0:
        # relax every row: <= rows move up, >= rows (rhs > 0 here) move down
        u = 1.0 + np.random.default_rng(m * 7919 + N).random(m)
        delta = perturb * (1.0 + np.abs(rhs).max()) * u
        delta = np.where(ge, -np.minimum(delta, 0.5 * rhs), delta)
        rhs_run = rhs + delta
    else:
        rhs_run = rhs
    tab = _Tableau(Astd, rhs_run, basis)
    if n_art:
        cost1 = np.zeros(N)
        cost1[art_cols] = 1.0
        tab.set_costs(cost1)
        tab.run(max_pivots)
        if -tab.T[tab.m, tab.N] > 1e-9 * (1.0 + np.abs(rhs).max()):
            if perturb > 0:
                return simplex_solve(lp, max_pivots, perturb=0.0)
            return LPSolution(INFEASIBLE, pivots=tab.pivots)
        # drive zero-level artificials out of the basis, dropping redundant rows
        is_art = np.zeros(N, dtype=bool)
        is_art[art_cols] = True
        r = 0
        while r < tab.m:
            if is_art[tab.basis[r]]:
                row = tab.T[r, :N]
                cand = np.flatnonzero(~is_art & (np.abs(row) > 1e-9))
                if cand.size:
                    tab.pivot(r, int(cand[np.argmax(np.abs(row[cand]))]))
                else:
                    tab.T = np.delete(tab.T, r, axis=0)
                    del tab.basis[r]
                    origin.pop(r)
                    sign.pop(r)
                    Astd = np.delete(Astd, r, axis=0)
                    rhs = np.delete(rhs, r)
                    continue
            r += 1
        keep = ~is_art
        remap = -np.ones(N, dtype=int)
        remap[keep] = np.arange(keep.sum())
        tab.T = np.hstack([tab.T[:, :N][:, keep], tab.T[:, N:]])
        tab.basis = [int(remap[j]) for j in tab.basis]
        Astd = Astd[:, keep]
        N = int(keep.sum())
        tab.degenerate = 0

    cost2 = np.zeros(N)
    cost2[:nstruct] = c
    tab.set_costs(cost2)
    status = tab.run(max_pivots)
    if status == UNBOUNDED:
        # unboundedness is a property of the columns, not of the rhs
        return LPSolution(UNBOUNDED, pivots=tab.pivots)

    B = Astd[:, tab.basis]
    if perturb > 0:
        try:
            xb = np.linalg.solve(B, rhs)
        except np.linalg.LinAlgError:
            return simplex_solve(lp, max_pivots, perturb=0.0)
        if xb.min() < -1e-9 * (1.0 + np.abs(rhs).max()):
            return simplex_solve(lp, max_pivots, perturb=0.0)
        xb = np.maximum(xb, 0.0)
    else:
        xb = tab.T[: tab.m, tab.N]
    xs = np.zeros(N)
    xs[tab.basis] = xb
    x = xs[:nv].copy()
    x[free] -= xs[nv:nstruct]
    try:
        ystd = np.linalg.solve(B.T, cost2[tab.basis])
    except np.linalg.LinAlgError:
        raise NumericalBreakdown("singular final basis")
    duals = np.zeros(m0)
    for k, i in enumerate(origin):
        duals[i] += sign[k] * ystd[k]
    sol = LPSolution(OPTIMAL, float(c0 @ x), x, duals, tab.pivots)
    verify(lp, sol)
    return sol


def verify(lp: DenseLP, sol: LPSolution, tol: float = 1e-8, cs_tol: float = 1e-6) -> None:
    """Raise :class:`NumericalBreakdown` unless ``sol`` is feasible and
    complementary with its multipliers."""
    x = sol.x
    r = lp.A @ x - lp.b
    scale = 1.0 + np.abs(lp.b)
    s = np.array(lp.senses)
    bad = ((s == "<=") & (r > tol * scale)) | ((s == ">=") & (r < -tol * scale)) | ((s == "=") & (np.abs(r) > tol * scale))
    if bad.any() or np.any(x < lp.lb - tol):
        raise NumericalBreakdown(f"solution violates {int(bad.sum())} constraints")
    if sol.duals is not None:
        inactive = s != "="
        if np.any(np.abs(sol.duals[inactive] * r[inactive]) > cs_tol):
            raise NumericalBreakdown("complementary slackness check failed")


def dual_lp(lp: DenseLP):
    """Dual of ``lp`` written again as a minimization ``DenseLP``.

    Returns the dual and the sign applied to each dual variable, so that the
    multiplier of original row ``i`` is ``sign[i] * u[i]``.
    """
    m, nv = lp.A.shape
    sign = np.array([-1.0 if s == "<=" else 1.0 for s in lp.senses])
    D = (lp.A * sign[:, None]).T
    senses = ["=" if np.isneginf(l) else "<=" for l in lp.lb]
    lb = np.array([-np.inf if s == "=" else 0.0 for s in lp.senses])
    return DenseLP(-lp.b * sign, D, senses, lp.c.copy(), lb), sign


def solve_lp(lp: DenseLP, method: str = "auto") -> LPSolution:
    """Solve ``lp`` directly or through its dual (``auto`` picks the dual when
    rows outnumber columns)."""
    m, nv = lp.A.shape
    if method == "auto":
        method = "dual" if m > nv else "primal"
    if method == "primal":
        return simplex_solve(lp)
    dlp, sign = dual_lp(lp)
    dsol = simplex_solve(dlp)
    if dsol.status == UNBOUNDED:
        return LPSolution(INFEASIBLE, pivots=dsol.pivots)
    if dsol.status == INFEASIBLE:
        # primal is unbounded or infeasible; settle it directly
        return simplex_solve(lp)
    x = -dsol.duals
    x[lp.lb == 0] = np.maximum(x[lp.lb == 0], 0.0)
    sol = LPSolution(OPTIMAL, float(lp.c @ x), x, sign * dsol.x, dsol.pivots)
    verify(lp, sol)
    return sol


# least core

def least_core_lp(X, v) -> DenseLP:
    """``min eps`` s.t. ``p(C) + eps >= v(C)`` for each row, ``sum p = 1``,
    ``p >= 0``, ``eps >= 0``.  Variables are ``[p, eps]``."""
    X = np.asarray(X, dtype=float)
    B, n = X.shape
    A = np.vstack([np.hstack([X, np.ones((B, 1))]), np.r_[np.ones(n), 0.0][None, :]])
    b = np.r_[np.asarray(v, dtype=float), 1.0]
    c = np.zeros(n + 1)
    c[n] = 1.0
    return DenseLP(c, A, [">="] * B + ["="], b)


def least_core_from_rows(X, v):
    sol = solve_lp(least_core_lp(X, v))
    if sol.status != OPTIMAL:
        raise NumericalBreakdown(f"least-core LP reported {sol.status}")
    n = np.asarray(X).shape[1]
    p = np.maximum(sol.x[:n], 0.0)
    return float(sol.x[n]), p / p.sum()


MAX_EXACT_PLAYERS = 16


def least_core_exact(game: CharacteristicOracle):
    """Least-core value and a witness imputation over all ``2^n - 1`` coalitions."""
    if game.n > MAX_EXACT_PLAYERS:
        raise TooManyPlayers(f"exact least core is limited to {MAX_EXACT_PLAYERS} players, got {game.n}")
    game = normalize(game)
    X = all_coalitions_matrix(game.n)
    return least_core_from_rows(X, game.values(X))


def sampled_lp_least_core(game: CharacteristicOracle, k: int, rng: np.random.Generator):
    """Same LP restricted to ``k`` sampled coalitions plus the grand coalition."""
    if k < 1:
        raise ConfigError("need at least one sampled coalition")
    game = normalize(game)
    X = np.vstack([sample_coalition_matrix(game.n, k, rng), np.ones((1, game.n), dtype=bool)])
    return least_core_from_rows(X, game.values(X))


# Shapley

MAX_SHAPLEY_PLAYERS = 12


def shapley_exact(game: CharacteristicOracle) -> np.ndarray:
    """Weighted sum of marginal contributions over all coalitions."""
    n = game.n
    if n > MAX_SHAPLEY_PLAYERS:
        raise TooManyPlayers(f"exact Shapley is limited to {MAX_SHAPLEY_PLAYERS} players, got {n}")
    masks = np.arange(1 << n, dtype=np.int64)
    X = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    values = np.zeros(1 << n)
    values[1:] = game.values(X[1:])
    size = X.sum(axis=1)
    weight = np.array([math.factorial(s) * math.factorial(n - 1 - s) / math.factorial(n) for s in range(n)])
    phi = np.zeros(n)
    for i in range(n):
        without = masks[~X[:, i]]
        phi[i] = np.sum(weight[size[without]] * (values[without | (1 << i)] - values[without]))
    return phi
