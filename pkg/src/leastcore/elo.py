"""Bradley-Terry ratings fitted by minorization-maximization, on the Elo scale.

Win probability is the natural logistic of the rating gap over 400, and
strengths map to ratings by ``r = 400 ln(pi)`` so that the two agree.
"""

from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .core import CharacteristicOracle
from .errors import ConfigError, DisconnectedComparisonGraph, ParseError

log = logging.getLogger(__name__)

ELO_SCALE = 400.0
PSEUDO_WIN = 0.5


class DisconnectedComparisonWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Matches:
    """Pairwise outcomes; ``a_won[k]`` is True when ``a[k]`` beat ``b[k]``."""

    a: np.ndarray
    b: np.ndarray
    a_won: np.ndarray
    n_models: int
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        if not (self.a.shape == self.b.shape == self.a_won.shape):
            raise ConfigError("match arrays differ in length")
        if (self.a == self.b).any():
            raise ConfigError("a model cannot play itself")
        if len(self.a) and (min(self.a.min(), self.b.min()) < 0 or max(self.a.max(), self.b.max()) >= self.n_models):
            raise ConfigError("model index out of range")

    @classmethod
    def from_records(cls, records, n_models: int | None = None) -> "Matches":
        """``records`` is an iterable of ``(model_a, model_b, a_won)``."""
        rec = list(records)
        a = np.array([r[0] for r in rec], dtype=np.int64)
        b = np.array([r[1] for r in rec], dtype=np.int64)
        w = np.array([bool(r[2]) for r in rec], dtype=bool)
        if n_models is None:
            n_models = int(max(a.max(), b.max()) + 1) if rec else 0
        return cls(a, b, w, n_models)

    def __len__(self):
        return len(self.a)

    def take(self, idx) -> "Matches":
        return Matches(self.a[idx], self.b[idx], self.a_won[idx], self.n_models, self.names)

    @property
    def winners(self):
        return np.where(self.a_won, self.a, self.b)

    @property
    def losers(self):
        return np.where(self.a_won, self.b, self.a)

    def win_matrix(self) -> np.ndarray:
        """``W[i, j]`` = number of times ``i`` beat ``j``."""
        W = np.zeros((self.n_models, self.n_models))
        np.add.at(W, (self.winners, self.losers), 1.0)
        return W


def load_matches(path) -> Matches:
    """Read ``model_a,model_b,winner`` rows; ``winner`` is ``a`` or ``b``."""
    index: dict[str, int] = {}
    rec = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header != ["model_a", "model_b", "winner"]:
            raise ParseError(f"expected header model_a,model_b,winner, got {','.join(header)}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 fields, got {len(row)}", line=lineno)
            ma, mb, w = (c.strip() for c in row)
            if w not in ("a", "b"):
                raise ParseError(f"winner must be 'a' or 'b', got {w!r}", line=lineno, column=3)
            if ma == mb:
                raise ParseError(f"model {ma!r} plays itself", line=lineno)
            ia = index.setdefault(ma, len(index))
            ib = index.setdefault(mb, len(index))
            rec.append((ia, ib, w == "a"))
    m = Matches.from_records(rec, len(index))
    return Matches(m.a, m.b, m.a_won, len(index), tuple(index))


def write_matches(path, matches: Matches) -> None:
    names = matches.names or tuple(f"m{i}" for i in range(matches.n_models))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("model_a,model_b,winner\n")
        for a, b, w in zip(matches.a, matches.b, matches.a_won):
            fh.write(f"{names[a]},{names[b]},{'a' if w else 'b'}\n")


def elo_prob(r_i, r_j):
    """Probability that a model rated ``r_i`` beats one rated ``r_j``."""
    x = (np.asarray(r_i, dtype=float) - np.asarray(r_j, dtype=float)) / ELO_SCALE
    return 1.0 / (1.0 + np.exp(-x))


def cross_entropy(ratings, matches: Matches) -> float:
    if len(matches) == 0:
        raise ConfigError("cross entropy needs at least one match")
    r = np.asarray(ratings, dtype=float)
    gap = (r[matches.winners] - r[matches.losers]) / ELO_SCALE
    return float(np.mean(np.logaddexp(0.0, -gap)))


def log_likelihood(strengths, W) -> float:
    """Bradley-Terry log-likelihood of win counts ``W`` under ``strengths``."""
    pi = np.asarray(strengths, dtype=float)
    i, j = np.nonzero(W)
    return float(np.sum(W[i, j] * (np.log(pi[i]) - np.log(pi[i] + pi[j]))))


def _closure(A):
    """Reflexive transitive closure of a stack of boolean adjacency matrices."""
    n = A.shape[-1]
    R = A | np.eye(n, dtype=bool)
    for _ in range(max(1, int(np.ceil(np.log2(max(n, 2)))))):
        R = (R.astype(np.int32) @ R.astype(np.int32)) > 0
    return R


@dataclass
class RatingFit:
    r: np.ndarray
    strengths: np.ndarray
    sweeps: int
    smoothed: bool
    components: int
    loglik: list | None = None


def _fit_batch(W, iterations, tol, trace=False):
    """MM on a stack ``W`` of win matrices of shape ``(B, n, n)``.

    Returns strengths, sweeps run, smoothing flags, component counts and,
    when ``trace`` is set, per-sweep log-likelihoods of the first fit.
    """
    B, n, _ = W.shape
    played = (W + W.transpose(0, 2, 1)) > 0
    U = _closure(played)
    D = _closure(W > 0)
    # the MLE is finite only when every model can reach every other model of
    # its component through wins; otherwise split a pseudo-win on each pair
    smooth = (U & ~D).any(axis=(1, 2))
    if smooth.any():
        W = W.copy()
        W[smooth] += PSEUDO_WIN * played[smooth]
    N = W + W.transpose(0, 2, 1)
    wins = W.sum(axis=2)
    csize = U.sum(axis=2)
    ncomp = (1.0 / csize).sum(axis=1).round().astype(int)
    logpi = np.zeros((B, n))
    pi = np.ones((B, n))
    lls = [] if trace else None
    sweeps = 0
    active = wins > 0
    for sweeps in range(1, iterations + 1):
        denom = (N / (pi[:, :, None] + pi[:, None, :])).sum(axis=2)
        new = np.where(active, wins / np.where(denom > 0, denom, 1.0), 1.0)
        lnew = np.log(new)
        # geometric-mean-one gauge inside every component
        lnew -= np.einsum("bij,bj->bi", U, lnew) / csize
        delta = np.max(np.abs(lnew - logpi)) if B else 0.0
        logpi, pi = lnew, np.exp(lnew)
        if trace:
            lls.append(log_likelihood(pi[0], W[0]))
        if delta <= tol:
            break
    return pi, sweeps, smooth, ncomp, lls


def mm_fit(matches: Matches, iterations: int = 20000, tol: float = 1e-12, trace: bool = False) -> RatingFit:
    """Maximum-likelihood Bradley-Terry ratings by MM sweeps.

    Sweeps stop early once no log-strength moves by more than ``tol``.
    Models in separate components of the comparison graph are fitted
    independently, each component centred at rating 0, with a warning.
    """
    W = matches.win_matrix()[None]
    pi, sweeps, smooth, ncomp, lls = _fit_batch(W, iterations, tol, trace)
    if smooth[0]:
        log.info("one-sided comparisons: added %.1f pseudo-wins per pair", PSEUDO_WIN)
    if ncomp[0] > 1:
        warnings.warn(f"comparison graph has {ncomp[0]} components; ratings are not comparable across them",
                      DisconnectedComparisonWarning, stacklevel=2)
    return RatingFit(ELO_SCALE * np.log(pi[0]), pi[0], sweeps, bool(smooth[0]), int(ncomp[0]), lls)


def require_connected(matches: Matches) -> None:
    W = matches.win_matrix()
    if not _closure((W + W.T) > 0).all():
        raise DisconnectedComparisonGraph("some models are never compared, directly or indirectly")


class ArenaValuationGame(CharacteristicOracle):
    """Players are training matches.

    ``v(C)`` is the drop in test cross entropy when ratings are fitted on the
    matches in ``C`` instead of left all equal.  With ``shift=False`` the
    value is ``2 - cross_entropy`` as a raw score.
    """

    def __init__(self, train: Matches, test: Matches, iterations: int = 20000, tol: float = 1e-10,
                 shift: bool = True, budget=None, chunk: int = 64):
        if len(train) < 1:
            raise ConfigError("need at least one training match")
        if train.n_models != test.n_models:
            raise ConfigError("train and test disagree on the number of models")
        super().__init__(len(train), budget)
        self.train, self.test = train, test
        self.iterations, self.tol = iterations, tol
        self.chunk = chunk
        self.offset = np.log(2.0) if shift else 2.0
        m = train.n_models
        self._onehot = np.zeros((len(train), m * m))
        self._onehot[np.arange(len(train)), train.winners * m + train.losers] = 1.0

    def _evaluate(self, X):
        m = self.train.n_models
        out = np.empty(X.shape[0])
        for s in range(0, X.shape[0], self.chunk):
            W = X[s:s + self.chunk].astype(float) @ self._onehot
            pi = _fit_batch(W.reshape(-1, m, m), self.iterations, self.tol)[0]
            gap = np.log(pi[:, self.test.winners]) - np.log(pi[:, self.test.losers])
            out[s:s + self.chunk] = np.mean(np.logaddexp(0.0, -gap), axis=1)
        return self.offset - out


def arena_valuation_game(train: Matches, test: Matches, iterations: int = 20000, shift: bool = True,
                         budget=None) -> ArenaValuationGame:
    return ArenaValuationGame(train, test, iterations, shift=shift, budget=budget)


def synthetic_matches(ratings, count: int, rng: np.random.Generator) -> Matches:
    """Uniformly random distinct pairs with outcomes drawn from ``elo_prob``."""
    r = np.asarray(ratings, dtype=float)
    m = len(r)
    a = rng.integers(m, size=count)
    b = (a + rng.integers(1, m, size=count)) % m
    won = rng.random(count) < elo_prob(r[a], r[b])
    return Matches(a.astype(np.int64), b.astype(np.int64), won, m)


def removal_curve_matches(train: Matches, test: Matches, importances, step: float = 0.05,
                          max_fraction: float = 0.5, iterations: int = 20000):
    """Drop training matches from most to least important in blocks of
    ``step``, refit, and record ``2 - cross_entropy`` on the test matches."""
    importances = np.asarray(importances, dtype=float)
    if importances.shape != (len(train),):
        raise ConfigError("need one importance per training match")
    order = np.lexsort((np.arange(len(train)), -importances))
    blocks = int(round(max_fraction / step))
    out = []
    for k in range(blocks + 1):
        f = round(k * step, 12)
        keep = np.sort(order[int(round(f * len(train))):])
        W = train.take(keep).win_matrix()[None]
        pi = _fit_batch(W, iterations, 1e-10)[0][0]
        out.append((f, 2.0 - cross_entropy(ELO_SCALE * np.log(pi), test)))
    return out
