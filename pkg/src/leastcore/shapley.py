"""Monte Carlo Shapley values under an oracle-call budget."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CharacteristicOracle
from .errors import BudgetTooSmall, InvalidPermutation


@dataclass
class ShapleyEstimate:
    phi: np.ndarray
    permutations: int
    calls: int
    seed: int | None = None


def _marginals(game, perms):
    """Marginal vectors for a stack of permutations, one oracle batch."""
    k, n = perms.shape
    pos = np.argsort(perms, axis=1)
    # row (r, j) is the prefix of length j + 1 of permutation r
    X = (pos[:, None, :] <= np.arange(n)[None, :, None]).reshape(k * n, n)
    vals = game.values(X).reshape(k, n)
    steps = np.diff(vals, axis=1, prepend=0.0)
    m = np.empty((k, n))
    np.put_along_axis(m, perms, steps, axis=1)
    return m


def permutation_marginals(game: CharacteristicOracle, perm) -> np.ndarray:
    """Marginal contribution of each player when joining in the order ``perm``.

    Costs ``n`` oracle calls: each prefix is evaluated once and reused as
    the predecessor set of the next player.  ``v(empty)`` is taken as 0.
    """
    perm = np.asarray(perm)
    n = game.n
    if perm.shape != (n,) or not np.array_equal(np.sort(perm), np.arange(n)):
        raise InvalidPermutation(f"not a permutation of range({n}): {perm.tolist()}")
    return _marginals(game, perm[None, :])[0]


def shapley_mc(game: CharacteristicOracle, budget: int, rng: np.random.Generator,
               seed: int | None = None) -> ShapleyEstimate:
    """Average marginals over uniform random permutations, stopping before a
    full traversal would exceed ``budget`` calls."""
    n = game.n
    if budget < n:
        raise BudgetTooSmall(f"one permutation needs {n} calls, budget is {budget}")
    count = budget // n
    total = np.zeros(n)
    start = game.calls
    chunk = max(1, 20_000 // n)
    done = 0
    while done < count:
        k = min(chunk, count - done)
        perms = np.array([rng.permutation(n) for _ in range(k)])
        total += _marginals(game, perms).sum(axis=0)
        done += k
    return ShapleyEstimate(total / count, count, game.calls - start, seed)
