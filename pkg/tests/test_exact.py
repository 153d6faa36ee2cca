import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from leastcore.core import all_coalitions_matrix, normalize
from leastcore.errors import ConfigError, TooManyPlayers
from leastcore.exact import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    DenseLP,
    dual_lp,
    least_core_exact,
    least_core_lp,
    sampled_lp_least_core,
    shapley_exact,
    simplex_solve,
    solve_lp,
)
from leastcore.games import TabularGame, majority_game, singleton_win_game, unanimity_game

from conftest import random_tabular


def _scipy(lp: DenseLP):
    ub = [i for i, s in enumerate(lp.senses) if s != "="]
    eq = [i for i, s in enumerate(lp.senses) if s == "="]
    sign = np.array([1.0 if lp.senses[i] == "<=" else -1.0 for i in ub])
    res = linprog(
        lp.c,
        A_ub=lp.A[ub] * sign[:, None] if ub else None, b_ub=lp.b[ub] * sign if ub else None,
        A_eq=lp.A[eq] if eq else None, b_eq=lp.b[eq] if eq else None,
        bounds=[(None if np.isneginf(l) else 0, None) for l in lp.lb], method="highs",
    )
    return res


@st.composite
def random_lps(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    m, nv = draw(st.integers(1, 8)), draw(st.integers(1, 6))
    A = rng.integers(-4, 5, size=(m, nv)).astype(float)
    b = rng.integers(-5, 6, size=m).astype(float)
    c = rng.integers(-3, 4, size=nv).astype(float)
    senses = list(rng.choice(["<=", ">=", "="], size=m, p=[0.45, 0.45, 0.1]))
    lb = np.where(rng.random(nv) < 0.2, -np.inf, 0.0)
    return DenseLP(c, A, senses, b, lb)


@given(random_lps())
def test_simplex_agrees_with_highs(lp):
    ref = _scipy(lp)
    for method in ("primal", "dual"):
        sol = solve_lp(lp, method)
        if ref.status == 0:
            assert sol.status == OPTIMAL
            assert sol.value == pytest.approx(ref.fun, abs=1e-7)
        elif ref.status == 2:
            assert sol.status == INFEASIBLE
        elif ref.status == 3:
            assert sol.status in (UNBOUNDED, INFEASIBLE) if method == "dual" else sol.status == UNBOUNDED


@given(random_lps())
def test_duals_are_sensitivities(lp):
    sol = simplex_solve(lp)
    if sol.status != OPTIMAL:
        return
    # strong duality: b^T y equals the optimum
    assert lp.b @ sol.duals == pytest.approx(sol.value, abs=1e-7)


def test_detects_infeasible_and_unbounded():
    assert simplex_solve(DenseLP([1.0], [[1.0], [1.0]], ["<=", ">="], [1.0, 2.0])).status == INFEASIBLE
    assert simplex_solve(DenseLP([-1.0], [[1.0]], [">="], [1.0])).status == UNBOUNDED


def test_dual_of_dual_value():
    lp = DenseLP([1.0, 2.0], [[1.0, 1.0], [1.0, -1.0]], [">=", "<="], [1.0, 0.5])
    d, _ = dual_lp(lp)
    assert -simplex_solve(d).value == pytest.approx(simplex_solve(lp).value)


def test_lp_validation():
    with pytest.raises(ConfigError):
        DenseLP([1.0], [[1.0]], ["<"], [1.0])
    with pytest.raises(ConfigError):
        DenseLP([1.0], [[np.inf]], ["<="], [1.0])
    with pytest.raises(ConfigError):
        DenseLP([1.0], [[1.0]], ["<="], [1.0], lb=[2.0])


def _lcv_scipy(game):
    game = normalize(game)
    X = all_coalitions_matrix(game.n)
    return _scipy(least_core_lp(X, game.values(X))).fun


@pytest.mark.parametrize("n", [2, 4, 7, 10])
def test_least_core_matches_highs(n):
    for seed in range(5):
        g = random_tabular(n, np.random.default_rng([n, seed]), positive_grand=True)
        eps, p = least_core_exact(g)
        assert eps == pytest.approx(_lcv_scipy(g), abs=1e-9)
        X = all_coalitions_matrix(n)
        v = normalize(g).values(X)
        assert np.all(X @ p + eps >= v - 1e-9)


def test_majority_grid_cross_check():
    # brute-force the three-player majority game on a simplex grid
    X = all_coalitions_matrix(3)
    v = majority_game(3).values(X)
    grid = [np.array([a, b, 60 - a - b]) / 60 for a in range(61) for b in range(61 - a)]
    best = min(grid, key=lambda p: np.max(v - X @ p))
    assert np.max(v - X @ best) == pytest.approx(1 / 3)
    eps, p = least_core_exact(majority_game(3))
    assert eps == pytest.approx(1 / 3, abs=1e-8) and np.allclose(p, 1 / 3, atol=1e-8)


@pytest.mark.parametrize("game,lcv", [(unanimity_game(5), 0.0), (singleton_win_game(3), 2 / 3),
                                      (singleton_win_game(5), 0.8), (singleton_win_game(10), 0.9)])
def test_known_values(game, lcv):
    assert least_core_exact(game)[0] == pytest.approx(lcv, abs=1e-8)


def test_sampled_lp_relaxes():
    g = random_tabular(8, np.random.default_rng(0), positive_grand=True)
    lcv, _ = least_core_exact(g)
    for k in (1, 10, 100):
        eps, _ = sampled_lp_least_core(g, k, np.random.default_rng(k))
        assert eps <= lcv + 1e-8
    with pytest.raises(ConfigError):
        sampled_lp_least_core(g, 0, np.random.default_rng(0))


def test_exact_player_limits():
    with pytest.raises(TooManyPlayers):
        least_core_exact(singleton_win_game(17))
    with pytest.raises(TooManyPlayers):
        shapley_exact(singleton_win_game(13))


def _shapley_by_permutations(game):
    n = game.n
    phi = np.zeros(n)
    for perm in itertools.permutations(range(n)):
        seen = np.zeros(n, bool)
        prev = 0.0
        for i in perm:
            seen[i] = True
            cur = game.values(seen[None, :])[0]
            phi[i] += cur - prev
            prev = cur
    return phi / math.factorial(n)


@pytest.mark.parametrize("n", [1, 3, 5])
def test_shapley_exact_matches_permutation_average(n):
    g = random_tabular(n, np.random.default_rng(n))
    assert np.allclose(shapley_exact(g), _shapley_by_permutations(g))


def test_shapley_axioms():
    # glove game: player 0 holds the left glove, players 1 and 2 hold right gloves
    g = TabularGame.from_function(3, lambda s: float(0 in s and len(s) >= 2))
    phi = shapley_exact(g)
    assert np.allclose(phi, [2 / 3, 1 / 6, 1 / 6])
    # a null player gets zero
    g = TabularGame.from_function(3, lambda s: float({0, 1} <= set(s)))
    assert np.allclose(shapley_exact(g), [0.5, 0.5, 0.0])
