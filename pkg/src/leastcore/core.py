"""Coalitions, characteristic-function oracles and the excess/deficit primitives.

A coalition over ``n`` players is stored as a Python ``int`` bitmask (bit ``i``
set iff player ``i`` is a member), which packs arbitrarily many players into
machine words.  Solvers work on batches, so most functions also accept a
boolean membership matrix of shape ``(B, n)``; one row per coalition.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

from .errors import (
    BudgetExhausted,
    EmptyCoalition,
    EmptySample,
    NonPositiveGrandValue,
    TooManyPlayers,
)

MAX_ENUMERATION_PLAYERS = 20


@dataclass(frozen=True)
class Coalition:
    mask: int
    n: int

    def __post_init__(self):
        if self.n < 0 or self.mask < 0 or self.mask >> self.n:
            raise ValueError(f"mask {self.mask:#x} does not fit {self.n} players")

    @classmethod
    def from_members(cls, members: Iterable[int], n: int) -> "Coalition":
        mask = 0
        for i in members:
            if not 0 <= i < n:
                raise ValueError(f"player {i} out of range for n={n}")
            mask |= 1 << int(i)
        return cls(mask, n)

    @classmethod
    def from_array(cls, row) -> "Coalition":
        row = np.asarray(row, dtype=bool)
        return cls.from_members(np.flatnonzero(row).tolist(), row.shape[0])

    @classmethod
    def grand(cls, n: int) -> "Coalition":
        return cls((1 << n) - 1, n)

    @classmethod
    def empty(cls, n: int) -> "Coalition":
        return cls(0, n)

    @property
    def members(self) -> tuple[int, ...]:
        out = []
        m = self.mask
        while m:
            low = m & -m
            out.append(low.bit_length() - 1)
            m ^= low
        return tuple(out)

    @property
    def size(self) -> int:
        return bin(self.mask).count("1")

    def __len__(self) -> int:
        return self.size

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __contains__(self, i: int) -> bool:
        return 0 <= i < self.n and bool(self.mask >> i & 1)

    def complement(self) -> "Coalition":
        return Coalition(((1 << self.n) - 1) ^ self.mask, self.n)

    def to_array(self) -> np.ndarray:
        row = np.zeros(self.n, dtype=bool)
        row[list(self.members)] = True
        return row

    def dot(self, p) -> float:
        """Payoff ``p(C)`` of the coalition."""
        p = np.asarray(p, dtype=float)
        if p.shape != (self.n,):
            raise ValueError(f"payoff vector has shape {p.shape}, expected ({self.n},)")
        return float(p @ self.to_array())


CoalitionSample = Union[Sequence[Coalition], np.ndarray]


def as_matrix(sample: CoalitionSample, n: int) -> np.ndarray:
    """Boolean ``(B, n)`` membership matrix for a list of coalitions or a matrix."""
    if isinstance(sample, np.ndarray):
        X = np.asarray(sample, dtype=bool)
        if X.ndim != 2 or X.shape[1] != n:
            raise ValueError(f"membership matrix has shape {X.shape}, expected (B, {n})")
        return X
    X = np.zeros((len(sample), n), dtype=bool)
    for k, c in enumerate(sample):
        if c.n != n:
            raise ValueError(f"coalition over {c.n} players, expected {n}")
        X[k, list(c.members)] = True
    return X


def masks_to_matrix(masks, n: int) -> np.ndarray:
    masks = np.asarray(masks, dtype=np.int64)
    return ((masks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(bool)


def matrix_to_masks(X: np.ndarray) -> np.ndarray:
    n = X.shape[1]
    if n > 62:
        raise TooManyPlayers(f"cannot index {n} players with int64 masks")
    return X.astype(np.int64) @ (np.int64(1) << np.arange(n, dtype=np.int64))


class CharacteristicOracle:
    """Base class for games ``v: 2^I -> R`` with ``v(empty) = 0``.

    Subclasses implement ``_evaluate`` on a boolean membership matrix.  Every
    public query is charged against ``calls``, one per coalition evaluated;
    if ``budget`` is set, a query that would exceed it raises
    :class:`BudgetExhausted` before anything is evaluated.
    """

    monotone = False  # True when C <= C' implies v(C) <= v(C')

    def __init__(self, n: int, budget: int | None = None):
        self.n = int(n)
        self.budget = budget
        self.calls = 0
        self._lock = threading.Lock()

    def _evaluate(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _charge(self, k: int) -> None:
        with self._lock:
            if self.budget is not None and self.calls + k > self.budget:
                raise BudgetExhausted(
                    f"{k} more oracle calls would exceed the budget of {self.budget}"
                    f" ({self.calls} spent)"
                )
            self.calls += k

    def values(self, sample: CoalitionSample) -> np.ndarray:
        X = as_matrix(sample, self.n)
        self._charge(X.shape[0])
        return np.asarray(self._evaluate(X), dtype=float)

    def value(self, coalition: Coalition) -> float:
        return float(self.values(coalition.to_array()[None, :])[0])

    __call__ = value

    @cached_property
    def grand_value(self) -> float:
        """``v(I)``; computed once and not charged to the call counter."""
        return float(self._evaluate(np.ones((1, self.n), dtype=bool))[0])

    def reset_calls(self) -> None:
        with self._lock:
            self.calls = 0


class NormalizedGame(CharacteristicOracle):
    """``v(C) / v(I)``; shares the inner game's call counter and budget."""

    def __init__(self, inner: CharacteristicOracle):
        self.inner = inner
        self.n = inner.n
        self.scale = 1.0 / inner.grand_value

    @property
    def calls(self) -> int:
        return self.inner.calls

    @property
    def monotone(self):
        return self.inner.monotone

    @property
    def budget(self):
        return self.inner.budget

    def _evaluate(self, X):
        # divide rather than multiply by scale so v(I) comes out exactly 1
        return self.inner._evaluate(X) / self.inner.grand_value

    def _charge(self, k):
        self.inner._charge(k)

    def reset_calls(self):
        self.inner.reset_calls()


def normalize(game: CharacteristicOracle) -> NormalizedGame:
    if isinstance(game, NormalizedGame):
        return game
    vI = game.grand_value
    if not vI > 0:
        raise NonPositiveGrandValue(f"v(I) = {vI!r}; normalization needs v(I) > 0")
    return NormalizedGame(game)


def deficit(p, coalition: Coalition, eps: float, game: CharacteristicOracle) -> float:
    """Clamped constraint violation ``max(0, v(C) - eps - p(C))``."""
    return max(0.0, game.value(coalition) - eps - coalition.dot(p))


def coalition_loss(p, coalition: Coalition, eps: float, game: CharacteristicOracle) -> float:
    size = coalition.size
    if size == 0:
        raise EmptyCoalition("loss is undefined for the empty coalition")
    d = deficit(p, coalition, eps, game)
    return d * d / (2 * size)


def batch_deficits(p, eps: float, X: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.maximum(0.0, v - eps - X @ p)


@dataclass(frozen=True)
class SampleEstimate:
    """Largest excess ``v(C) - p(C)`` seen over a coalition sample."""

    value: float
    size: int
    coalition: Coalition


def epsilon_hat(p, sample: CoalitionSample, game: CharacteristicOracle) -> SampleEstimate:
    X = as_matrix(sample, game.n)
    if X.shape[0] == 0:
        raise EmptySample("epsilon_hat needs at least one coalition")
    v = game.values(X)
    return estimate_from_values(p, X, v)


def estimate_from_values(p, X: np.ndarray, v: np.ndarray) -> SampleEstimate:
    excess = v - X @ np.asarray(p, dtype=float)
    k = int(np.argmax(excess))  # first occurrence on ties
    return SampleEstimate(float(excess[k]), int(X.shape[0]), Coalition.from_array(X[k]))


def _check_enumerable(n: int, limit: int = MAX_ENUMERATION_PLAYERS) -> None:
    if n > limit:
        raise TooManyPlayers(f"n={n} exceeds the enumeration limit of {limit}")


def enumerate_coalitions(n: int) -> Iterator[Coalition]:
    """All nonempty coalitions in increasing bitmask order."""
    _check_enumerable(n)
    for mask in range(1, 1 << n):
        yield Coalition(mask, n)


def all_coalitions_matrix(n: int, limit: int = MAX_ENUMERATION_PLAYERS) -> np.ndarray:
    """Membership matrix of every nonempty coalition, rows in bitmask order."""
    _check_enumerable(n, limit)
    return masks_to_matrix(np.arange(1, 1 << n, dtype=np.int64), n)


def sample_coalition_matrix(n: int, B: int, rng: np.random.Generator) -> np.ndarray:
    """``B`` coalitions, each player included independently with probability 1/2.

    Empty draws are redrawn so every row has at least one member.
    """
    if B < 1:
        raise ValueError("batch size must be at least 1")
    if n <= 62:
        # uniform over nonempty bitmasks is the same law, without redraws
        masks = rng.integers(1, np.int64(1) << n, size=B, dtype=np.int64)
        return ((masks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(bool)
    X = rng.integers(0, 2, size=(B, n), dtype=np.uint8).astype(bool)
    empty = ~X.any(axis=1)
    while empty.any():
        X[empty] = rng.random((int(empty.sum()), n)) < 0.5
        empty = ~X.any(axis=1)
    return X


def sample_coalitions(n: int, B: int, rng: np.random.Generator) -> list[Coalition]:
    return [Coalition.from_array(row) for row in sample_coalition_matrix(n, B, rng)]


def is_imputation(p, tol: float = 1e-9) -> bool:
    p = np.asarray(p, dtype=float)
    return bool(np.all(p >= 0) and abs(p.sum() - 1.0) <= tol)


def max_excess(p, X: np.ndarray, v: np.ndarray) -> float:
    return float(np.max(v - X @ np.asarray(p, dtype=float)))
