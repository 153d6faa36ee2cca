"""Compact game representations and seeded random generators.

Weighted voting games, induced subgraph games, marginal contribution networks
and dense tables.  All of them evaluate whole membership matrices at once, so
a batch of B coalitions costs one vectorized pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Sequence

import numpy as np

from .core import CharacteristicOracle, Coalition, masks_to_matrix, matrix_to_masks
from .errors import (
    ConfigError,
    InvalidDistributionParams,
    InvalidGraphParams,
    ParseError,
    ResampleLimitExceeded,
    TooManyPlayers,
)
from .graphs import generate_graph

MAX_RESAMPLES = 10**6


@dataclass(frozen=True)
class WeightDistribution:
    """One of ``uniform-int:lo:hi``, ``gaussian:mu:sigma``, ``exponential:rate``
    or ``beta:a:b``."""

    kind: str
    params: tuple[float, ...]

    _ARITY = {"uniform-int": 2, "gaussian": 2, "exponential": 1, "beta": 2}

    def __post_init__(self):
        if self.kind not in self._ARITY:
            raise InvalidDistributionParams(f"unknown distribution {self.kind!r}")
        if len(self.params) != self._ARITY[self.kind]:
            raise InvalidDistributionParams(
                f"{self.kind} takes {self._ARITY[self.kind]} parameters, got {len(self.params)}"
            )
        if not all(math.isfinite(x) for x in self.params):
            raise InvalidDistributionParams(f"non-finite parameter in {self.params}")
        if self.kind == "uniform-int":
            lo, hi = self.params
            if lo != int(lo) or hi != int(hi) or lo > hi:
                raise InvalidDistributionParams(f"uniform-int needs integers lo <= hi, got {self.params}")
        elif self.kind == "gaussian" and self.params[1] <= 0:
            raise InvalidDistributionParams(f"gaussian sigma must be positive, got {self.params[1]}")
        elif self.kind == "exponential" and self.params[0] <= 0:
            raise InvalidDistributionParams(f"exponential rate must be positive, got {self.params[0]}")
        elif self.kind == "beta" and min(self.params) <= 0:
            raise InvalidDistributionParams(f"beta parameters must be positive, got {self.params}")

    @classmethod
    def parse(cls, text: str) -> "WeightDistribution":
        kind, *rest = text.strip().split(":")
        try:
            params = tuple(float(x) for x in rest)
        except ValueError:
            raise InvalidDistributionParams(f"cannot parse distribution {text!r}")
        return cls(kind, params)

    def __str__(self):
        return ":".join([self.kind] + [repr(float(x)) if self.kind != "uniform-int" else str(int(x)) for x in self.params])

    @property
    def mean(self) -> float:
        a = self.params
        if self.kind == "uniform-int":
            return (a[0] + a[1]) / 2
        if self.kind == "gaussian":
            return a[0]
        if self.kind == "exponential":
            return 1.0 / a[0]
        return a[0] / (a[0] + a[1])

    def _draw(self, rng, size):
        a = self.params
        if self.kind == "uniform-int":
            return rng.integers(int(a[0]), int(a[1]) + 1, size=size).astype(float)
        if self.kind == "gaussian":
            return rng.normal(a[0], a[1], size=size)
        if self.kind == "exponential":
            return rng.exponential(1.0 / a[0], size=size)
        return rng.beta(a[0], a[1], size=size)

    def sample(self, rng: np.random.Generator, size: int, positive: bool = False) -> np.ndarray:
        """Draw ``size`` weights; with ``positive`` redraw any draw that is <= 0."""
        w = self._draw(rng, size)
        if positive:
            bad = w <= 0
            tries = 0
            while bad.any():
                tries += 1
                if tries > MAX_RESAMPLES:
                    raise ResampleLimitExceeded(f"{self} keeps producing nonpositive weights")
                w[bad] = self._draw(rng, int(bad.sum()))
                bad = w <= 0
        return w


class WeightedVotingGame(CharacteristicOracle):
    """``v(C) = 1`` iff the total weight of ``C`` reaches the quota."""

    monotone = True

    def __init__(self, weights, quota: float, budget=None):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ConfigError("weights must be a nonempty vector")
        if not quota > 0:
            raise ConfigError(f"quota must be positive so that v(empty) = 0, got {quota}")
        super().__init__(w.size, budget)
        self.weights = w
        self.quota = float(quota)

    def _evaluate(self, X):
        return (X.astype(float) @ self.weights >= self.quota).astype(float)


def wvg_generate(n: int, dist: WeightDistribution, xi: float, rng: np.random.Generator) -> WeightedVotingGame:
    """Random WVG with quota ``xi * n * E[w]``."""
    if not 0 < xi <= 1:
        raise ConfigError(f"xi must lie in (0, 1], got {xi}")
    if n < 1:
        raise ConfigError("need at least one player")
    w = dist.sample(rng, n, positive=True)
    return WeightedVotingGame(w, xi * n * dist.mean)


def majority_game(n: int) -> WeightedVotingGame:
    return WeightedVotingGame(np.ones(n), n // 2 + 1)


def unanimity_game(n: int) -> WeightedVotingGame:
    return WeightedVotingGame(np.ones(n), n)


def singleton_win_game(n: int) -> WeightedVotingGame:
    """Every nonempty coalition wins."""
    return WeightedVotingGame(np.ones(n), 0.5)


@dataclass(frozen=True)
class WeightedGraph:
    n: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        seen = set()
        for i, j, _ in self.edges:
            if not (0 <= i < j < self.n):
                raise InvalidGraphParams(f"edge ({i}, {j}) needs 0 <= i < j < n={self.n}")
            if (i, j) in seen:
                raise InvalidGraphParams(f"duplicate edge ({i}, {j})")
            seen.add((i, j))

    def adjacency(self) -> np.ndarray:
        """Upper-triangular weight matrix."""
        W = np.zeros((self.n, self.n))
        for i, j, w in self.edges:
            W[i, j] = w
        return W


class InducedSubgraphGame(CharacteristicOracle):
    """``v(C)`` is the total weight of edges with both endpoints in ``C``."""

    def __init__(self, graph: WeightedGraph, budget=None):
        super().__init__(graph.n, budget)
        self.graph = graph
        self._W = graph.adjacency()

    def _evaluate(self, X):
        Xf = X.astype(float)
        return ((Xf @ self._W) * Xf).sum(axis=1)


def edge_weight_mean(sigma: float, positive_fraction: float = 0.6) -> float:
    """Mean that makes a Gaussian with std ``sigma`` positive with the given probability."""
    return sigma * NormalDist().inv_cdf(positive_fraction)


def assign_edge_weights(edges, n: int, sigma: float, rng: np.random.Generator,
                        positive_fraction: float = 0.6) -> WeightedGraph:
    if not sigma > 0:
        raise InvalidDistributionParams(f"sigma must be positive, got {sigma}")
    if not 0 < positive_fraction < 1:
        raise InvalidDistributionParams(f"positive_fraction must lie in (0, 1), got {positive_fraction}")
    edges = list(edges)
    w = rng.normal(edge_weight_mean(sigma, positive_fraction), sigma, size=len(edges))
    return WeightedGraph(n, tuple((int(i), int(j), float(x)) for (i, j), x in zip(edges, w)))


def graph_game_generate(model: str, n: int, sigma: float, rng: np.random.Generator,
                        positive_fraction: float = 0.6, **params) -> InducedSubgraphGame:
    edges = generate_graph(model, n, rng, **params)
    return InducedSubgraphGame(assign_edge_weights(edges, n, sigma, rng, positive_fraction))


@dataclass(frozen=True)
class Rule:
    positive: int  # bitmask of P
    negative: int  # bitmask of N
    weight: float

    def applies(self, coalition: Coalition) -> bool:
        m = coalition.mask
        return self.positive & m == self.positive and not self.negative & m


class MarginalContributionNetwork(CharacteristicOracle):
    """Rule-based game.  A rule ``(P, N, w)`` pays ``w`` to coalitions containing
    all of ``P`` and none of ``N``.  The raw sum at the empty coalition is
    subtracted from every value so that ``v(empty) = 0``."""

    def __init__(self, n: int, rules: Sequence[Rule], budget=None):
        super().__init__(n, budget)
        if n > 62:
            raise TooManyPlayers("rule masks are limited to 62 players")
        for r in rules:
            if r.positive & r.negative:
                raise ConfigError(f"rule with P={r.positive:#x} and N={r.negative:#x} overlaps")
            if (r.positive | r.negative) >> n:
                raise ConfigError(f"rule mentions players beyond n={n}")
        self.rules = tuple(rules)
        k = len(self.rules)
        self._P = masks_to_matrix([r.positive for r in self.rules], n).astype(float) if k else np.zeros((0, n))
        self._N = masks_to_matrix([r.negative for r in self.rules], n).astype(float) if k else np.zeros((0, n))
        self._w = np.array([r.weight for r in self.rules], dtype=float)
        self._psize = self._P.sum(axis=1)
        self.offset = float(sum(r.weight for r in self.rules if r.positive == 0))

    def raw_value(self, X) -> np.ndarray:
        Xf = np.asarray(X, dtype=float)
        applies = (Xf @ self._P.T == self._psize) & (Xf @ self._N.T == 0)
        return applies.astype(float) @ self._w

    def _evaluate(self, X):
        return self.raw_value(X) - self.offset


def mcn_generate(n: int, k: int, p: float, q: float, weights: WeightDistribution,
                 rng: np.random.Generator) -> MarginalContributionNetwork:
    """``k`` rules; each player joins P with probability ``p`` and N with
    probability ``q``, and a rule with any player in both is redrawn whole."""
    if k < 1:
        raise ConfigError("need at least one rule")
    if not (0 <= p <= 1 and 0 <= q <= 1):
        raise ConfigError(f"inclusion probabilities must lie in [0, 1], got p={p}, q={q}")
    bits = 1 << np.arange(n, dtype=np.int64)
    rules = []
    for _ in range(k):
        for _attempt in range(MAX_RESAMPLES):
            P = rng.random(n) < p
            N = rng.random(n) < q
            if not (P & N).any():
                break
        else:
            raise ResampleLimitExceeded(f"{MAX_RESAMPLES} consecutive overlapping rules at p={p}, q={q}")
        rules.append((int(bits[P].sum()), int(bits[N].sum())))
    w = weights.sample(rng, k)
    return MarginalContributionNetwork(n, [Rule(P, N, float(x)) for (P, N), x in zip(rules, w)])


class TabularGame(CharacteristicOracle):
    """Dense table of all ``2^n`` values indexed by bitmask."""

    MAX_PLAYERS = 20

    def __init__(self, values, budget=None):
        values = np.asarray(values, dtype=float)
        n = int(round(math.log2(values.size))) if values.size else -1
        if n < 0 or values.shape != (1 << n,):
            raise ConfigError(f"table of size {values.size} is not a power of two")
        if n > self.MAX_PLAYERS:
            raise TooManyPlayers(f"tabular games are limited to {self.MAX_PLAYERS} players")
        if values[0] != 0:
            raise ConfigError("table entry for the empty coalition must be 0")
        super().__init__(n, budget)
        self.table = values

    @classmethod
    def from_game(cls, game: CharacteristicOracle) -> "TabularGame":
        if game.n > cls.MAX_PLAYERS:
            raise TooManyPlayers(f"cannot materialize {game.n} players")
        X = masks_to_matrix(np.arange(1 << game.n, dtype=np.int64), game.n)
        values = np.asarray(game._evaluate(X), dtype=float)
        values[0] = 0.0
        return cls(values)

    @classmethod
    def from_function(cls, n: int, fn) -> "TabularGame":
        """Build from ``fn(frozenset_of_members) -> value``."""
        values = np.array([0.0] + [float(fn(frozenset(Coalition(m, n).members))) for m in range(1, 1 << n)])
        return cls(values)

    def _evaluate(self, X):
        return self.table[matrix_to_masks(X)]


# text serialization

def _fmt(x: float) -> str:
    return f"{x:.17g}"


def to_text(game) -> str:
    if isinstance(game, WeightedVotingGame):
        lines = [f"wvg {game.n} {_fmt(game.quota)}"] + [_fmt(w) for w in game.weights]
    elif isinstance(game, InducedSubgraphGame):
        g = game.graph
        lines = [f"graph {g.n} {len(g.edges)}"] + [f"{i} {j} {_fmt(w)}" for i, j, w in g.edges]
    elif isinstance(game, MarginalContributionNetwork):
        lines = [f"mcn {game.n} {len(game.rules)}"]
        lines += [f"{r.positive:x} {r.negative:x} {_fmt(r.weight)}" for r in game.rules]
    else:
        raise ConfigError(f"no text format for {type(game).__name__}")
    return "\n".join(lines) + "\n"


def from_text(text: str):
    rows = [(k + 1, line.split()) for k, line in enumerate(text.splitlines()) if line.strip()]
    if not rows:
        raise ParseError("empty game file", line=1)
    lineno, head = rows[0]
    body = rows[1:]

    def num(tok, ln, col, kind=float):
        try:
            return kind(tok)
        except ValueError:
            raise ParseError(f"bad number {tok!r}", line=ln, column=col)

    def expect(count, width):
        if len(body) != count:
            raise ParseError(f"header announces {count} entries, found {len(body)}", line=lineno)
        for ln, toks in body:
            if len(toks) != width:
                raise ParseError(f"expected {width} fields, got {len(toks)}", line=ln)

    if len(head) != 3:
        raise ParseError("header must have three fields", line=lineno)
    kind = head[0]
    n = num(head[1], lineno, 2, int)
    if kind == "wvg":
        quota = num(head[2], lineno, 3)
        expect(n, 1)
        return WeightedVotingGame([num(t[0], ln, 1) for ln, t in body], quota)
    if kind == "graph":
        m = num(head[2], lineno, 3, int)
        expect(m, 3)
        edges = tuple((num(t[0], ln, 1, int), num(t[1], ln, 2, int), num(t[2], ln, 3)) for ln, t in body)
        return InducedSubgraphGame(WeightedGraph(n, edges))
    if kind == "mcn":
        k = num(head[2], lineno, 3, int)
        expect(k, 3)
        hexint = lambda s: int(s, 16)
        rules = [Rule(num(t[0], ln, 1, hexint), num(t[1], ln, 2, hexint), num(t[2], ln, 3)) for ln, t in body]
        return MarginalContributionNetwork(n, rules)
    raise ParseError(f"unknown game kind {kind!r}", line=lineno, column=1)
