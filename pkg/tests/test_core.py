import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from leastcore.core import (
    Coalition,
    all_coalitions_matrix,
    coalition_loss,
    deficit,
    enumerate_coalitions,
    epsilon_hat,
    is_imputation,
    masks_to_matrix,
    matrix_to_masks,
    normalize,
    sample_coalition_matrix,
)
from leastcore.errors import BudgetExhausted, EmptyCoalition, EmptySample, NonPositiveGrandValue, TooManyPlayers
from leastcore.games import TabularGame, majority_game

from conftest import tabular_games


@given(st.integers(0, 40), st.data())
def test_coalition_roundtrip(n, data):
    mask = data.draw(st.integers(0, (1 << n) - 1))
    c = Coalition(mask, n)
    assert Coalition.from_array(c.to_array()) == c
    assert Coalition.from_members(c.members, n) == c
    assert c.size == len(c.members) == c.to_array().sum()
    assert c.complement().complement() == c
    assert c.size + c.complement().size == n


def test_coalition_bounds():
    with pytest.raises(ValueError):
        Coalition(0b100, 2)
    with pytest.raises(ValueError):
        Coalition.from_members([3], 3)
    assert 1 in Coalition(0b10, 2) and 0 not in Coalition(0b10, 2)


@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_mask_matrix_roundtrip(n, seed):
    masks = np.random.default_rng(seed).integers(0, 1 << n, size=20)
    assert np.array_equal(matrix_to_masks(masks_to_matrix(masks, n)), masks)


def test_enumeration_order_and_limit():
    X = all_coalitions_matrix(3)
    assert X.shape == (7, 3)
    assert [c.mask for c in enumerate_coalitions(3)] == list(range(1, 8))
    assert np.array_equal(matrix_to_masks(X), np.arange(1, 8))
    with pytest.raises(TooManyPlayers):
        all_coalitions_matrix(21)


@pytest.mark.parametrize("n", [1, 5, 40, 70])
def test_sampler_nonempty_and_fair(n):
    X = sample_coalition_matrix(n, 4000, np.random.default_rng(n))
    assert X.shape == (4000, n) and X.any(axis=1).all()
    if n >= 5:
        assert abs(X.mean() - 0.5) < 0.02


def test_sampler_uniform_over_nonempty():
    X = sample_coalition_matrix(3, 70_000, np.random.default_rng(0))
    freq = np.bincount(matrix_to_masks(X), minlength=8) / 70_000
    assert freq[0] == 0
    assert np.allclose(freq[1:], 1 / 7, atol=0.01)


def test_deficit_and_loss():
    g = majority_game(3)
    c = Coalition.from_members([0, 1], 3)
    p = np.array([0.2, 0.3, 0.5])
    assert deficit(p, c, 0.1, g) == pytest.approx(0.4)
    assert coalition_loss(p, c, 0.1, g) == pytest.approx(0.4**2 / 4)
    assert deficit(p, c, 0.6, g) == 0.0
    with pytest.raises(EmptyCoalition):
        coalition_loss(p, Coalition.empty(3), 0.1, g)


@given(tabular_games(), st.integers(0, 2**32 - 1), st.floats(0, 2))
def test_loss_zero_iff_constraint_holds(game, seed, eps):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(game.n))
    for c in enumerate_coalitions(game.n):
        holds = c.dot(p) + eps >= game.value(c)
        assert (coalition_loss(p, c, eps, game) == 0.0) == holds


def test_oracle_budget_and_counter():
    g = TabularGame(np.arange(8.0))
    g.budget = 5
    g.values(all_coalitions_matrix(2 + 1)[:4])
    assert g.calls == 4
    with pytest.raises(BudgetExhausted):
        g.values(all_coalitions_matrix(3)[:2])
    assert g.calls == 4
    _ = g.grand_value
    assert g.calls == 4


def test_normalize():
    g = TabularGame(np.array([0.0, 1.0, 2.0, 4.0]))
    ng = normalize(g)
    assert ng.grand_value == 1.0
    assert np.allclose(ng.values(all_coalitions_matrix(2)), [0.25, 0.5, 1.0])
    assert ng.calls == g.calls == 3
    with pytest.raises(NonPositiveGrandValue):
        normalize(TabularGame(np.array([0.0, 1.0, 1.0, -1.0])))


def test_epsilon_hat_reports_argmax():
    g = majority_game(3)
    est = epsilon_hat(np.array([0.6, 0.2, 0.2]), all_coalitions_matrix(3), g)
    assert est.value == pytest.approx(0.6)
    assert est.coalition.members == (1, 2)
    with pytest.raises(EmptySample):
        epsilon_hat(np.ones(3) / 3, np.zeros((0, 3), dtype=bool), g)


def test_is_imputation():
    assert is_imputation([0.5, 0.5])
    assert not is_imputation([0.7, 0.5])
    assert not is_imputation([1.5, -0.5])
