"""Iterative least-core solvers.

Three methods share the same coalition sampler and primitives:

* cyclic halfspace projections for a fixed slack ``eps``,
* projected stochastic subgradient on the coalition loss for a fixed ``eps``,
* an extragradient (mirror-prox) method on the Lagrangian
  ``eps + mu * (sum_c loss_c - gamma^2)`` that finds ``eps`` itself.

The last one runs its inner step in a compiled kernel; the plain numpy
functions ``f_map`` and ``prox_tailored`` compute the same quantities and are
what the tests check the kernel against.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Union

import numba
import numpy as np

from .core import (
    CharacteristicOracle,
    Coalition,
    SampleEstimate,
    all_coalitions_matrix,
    as_matrix,
    estimate_from_values,
    normalize,
    sample_coalition_matrix,
)
from .errors import ConfigError, EmptyBatch, EmptyCoalition, NonFiniteInput

log = logging.getLogger(__name__)

LOG_FLOOR = 1e-300
PREFETCH = 32  # iterations of sampled batches drawn and evaluated together


# step schedules

@dataclass(frozen=True)
class ConstantSchedule:
    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ConfigError(f"step size must be positive, got {self.eta}")

    def __call__(self, t: int) -> float:
        return self.eta

    def __str__(self):
        return repr(float(self.eta))


@dataclass(frozen=True)
class LinearSchedule:
    """Linear decay from ``start`` to ``end`` over ``horizon`` steps, then flat."""

    start: float
    end: float
    horizon: int

    def __post_init__(self):
        if not (self.start > 0 and self.end > 0 and self.horizon >= 1):
            raise ConfigError(f"invalid linear schedule {self}")

    def __call__(self, t: int) -> float:
        f = t / self.horizon
        return max(self.end, self.start * (1 - f) + self.end * f)

    def __str__(self):
        return f"linear:{self.start!r}:{self.end!r}:{self.horizon}"


Schedule = Union[ConstantSchedule, LinearSchedule]


def parse_schedule(text: str) -> Schedule:
    """``0.1`` or ``linear:0.1:0.01:1000``."""
    try:
        if text.startswith("linear:"):
            _, a, b, h = text.split(":")
            return LinearSchedule(float(a), float(b), int(h))
        return ConstantSchedule(float(text))
    except ValueError:
        raise ConfigError(f"cannot parse step schedule {text!r}")


# configuration and results

@dataclass(frozen=True)
class SolverConfig:
    T: int = 10_000
    B: int = 1000
    schedule: Schedule = ConstantSchedule(0.1)
    gamma: float = 0.01
    seed: int = 0
    prox: str = "adam"  # "adam" (softmax logits + adaptive moments) or "tailored"
    mu0: float | None = 1000.0  # None starts at the upper bound
    mu_max: float | None = None  # None means n / gamma
    eps_hi: float | None = None  # None derives it from the game
    full_batch: bool | None = None  # None enumerates when 2^n - 1 <= B
    scaling: str = "auto"  # "sum", "mean" or "auto" (sum for full batches, else mean)
    holdout: int = 10_000
    trace_every: int = 0
    last_iterate: bool = False  # SGD: return p_T instead of the weighted draw
    time_limit: float | None = None
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.T < 1 or self.B < 1:
            raise ConfigError(f"T and B must be at least 1, got T={self.T}, B={self.B}")
        if not self.gamma > 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma}")
        if self.prox not in ("adam", "tailored"):
            raise ConfigError(f"unknown prox {self.prox!r}")
        if self.scaling not in ("auto", "sum", "mean"):
            raise ConfigError(f"unknown scaling {self.scaling!r}")
        if self.holdout < 1:
            raise ConfigError("holdout sample must be nonempty")
        if self.eps_hi is not None and self.eps_hi < 0:
            raise ConfigError("eps_hi must be nonnegative")

    @classmethod
    def defaults(cls, **kw) -> "SolverConfig":
        """Defaults for everything except the timing race."""
        base = dict(T=10_000, B=1000, schedule=ConstantSchedule(0.1), gamma=0.01, mu0=1000.0, prox="adam")
        base.update(kw)
        return cls(**base)

    @classmethod
    def race_defaults(cls, **kw) -> "SolverConfig":
        """Defaults for the wall-clock race."""
        base = dict(T=10_000, B=100, schedule=LinearSchedule(0.1, 0.01, 1000), gamma=0.001,
                    mu0=1000.0, prox="tailored")
        base.update(kw)
        return cls(**base)

    def echo(self) -> dict:
        d = asdict(self)
        d["schedule"] = str(self.schedule)
        return d


@dataclass(frozen=True)
class SaddleState:
    p: np.ndarray
    eps: float
    mu: float


@dataclass
class LeastCoreResult:
    p: np.ndarray
    eps_final: float
    eps_hat: SampleEstimate
    seed: int
    calls: int
    seconds: float
    iterations: int
    eps_last: float | None = None
    mu_last: float | None = None
    trace: np.ndarray | None = None  # rows (t, eps, mu)
    notes: list[str] = field(default_factory=list)
    method: str = ""

    def summary(self) -> dict:
        return {
            "method": self.method,
            "eps_final": self.eps_final,
            "eps_hat": self.eps_hat.value,
            "eps_hat_sample": self.eps_hat.size,
            "eps_hat_argmax": list(self.eps_hat.coalition.members),
            "eps_last": self.eps_last,
            "mu_last": self.mu_last,
            "iterations": self.iterations,
            "calls": self.calls,
            "seed": self.seed,
            "seconds": self.seconds,
            "notes": list(self.notes),
        }


# projections and maps

def project_simplex(x) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort and threshold)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("expected a nonempty vector")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("cannot project a vector with non-finite entries")
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, x.size + 1)
    rho = np.flatnonzero(u - css / k > 0)[-1]
    theta = css[rho] / (rho + 1)
    p = np.maximum(x - theta, 0.0)
    # absorb rounding so the sum is 1 to machine precision
    p /= p.sum()
    return p


def project_halfspace(p, coalition: Coalition, eps: float, game: CharacteristicOracle) -> np.ndarray:
    """Closest point to ``p`` satisfying ``p(C) >= v(C) - eps``."""
    size = coalition.size
    if size == 0:
        raise EmptyCoalition("cannot project onto the constraint of the empty coalition")
    p = np.asarray(p, dtype=float)
    row = coalition.to_array()
    d = game.value(coalition) - eps - float(p @ row)
    if d <= 0:
        return p.copy()
    return p + (d / size) * row


def _halfspace_step(p, row, size, value, eps):
    d = value - eps - p @ row
    if d > 0:
        return p + (d / size) * row
    return p


def subgradient_batch(p, eps: float, batch, game: CharacteristicOracle) -> np.ndarray:
    """Gradient of the batch-mean coalition loss, ``-(1/B) sum_c (d_c / |C|) c``.

    Stepping against it moves ``p`` along the halfspace displacement; for a
    single coalition ``p - grad`` is exactly the halfspace projection.
    """
    X = as_matrix(batch, game.n)
    if X.shape[0] == 0:
        raise EmptyBatch("subgradient needs a nonempty batch")
    size = X.sum(axis=1)
    if np.any(size == 0):
        raise EmptyCoalition("batch contains the empty coalition")
    v = game.values(X)
    return _batch_gradient(np.asarray(p, dtype=float), eps, X.astype(float), size, v)


def _batch_gradient(p, eps, Xf, size, v):
    d = np.maximum(0.0, v - eps - Xf @ p)
    return -((d / size) @ Xf) / Xf.shape[0]


def f_map(state: SaddleState, X, v, gamma: float, scale: float | None = None):
    """Descent directions ``(g_p, g_eps, g_mu)`` of the Lagrangian on a batch.

    ``scale`` multiplies every coalition sum; the default ``1/B`` gives batch
    means, ``1`` gives plain sums over the batch.
    """
    X = np.asarray(X)
    if X.shape[0] == 0:
        raise EmptyBatch("map needs a nonempty batch")
    Xf = X.astype(float)
    size = Xf.sum(axis=1)
    if scale is None:
        scale = 1.0 / X.shape[0]
    d = np.maximum(0.0, np.asarray(v, dtype=float) - state.eps - Xf @ state.p)
    w = d / size
    g_p = -state.mu * scale * (w @ Xf)
    g_eps = 1.0 - state.mu * scale * w.sum()
    g_mu = -(scale * (d * w).sum() / 2 - gamma**2)
    return g_p, float(g_eps), float(g_mu)


def softmax(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    z = np.exp(s - s.max())
    return z / z.sum()


def logit_gradient(p, g_p) -> np.ndarray:
    """Pull a gradient in ``p`` back through ``p = softmax(s)``."""
    p = np.asarray(p, dtype=float)
    g_p = np.asarray(g_p, dtype=float)
    return p * g_p - (p @ g_p) * p


def prox_tailored(state: SaddleState, g, eta: float, eps_bounds=(0.0, 1.0), mu_max: float = np.inf) -> SaddleState:
    """Entropic step on ``p``, clipped gradient steps on ``eps`` and ``mu``."""
    g_p, g_eps, g_mu = g
    p = softmax(np.log(np.maximum(state.p, LOG_FLOOR)) - eta * np.asarray(g_p))
    eps = min(max(state.eps - eta * g_eps, eps_bounds[0]), eps_bounds[1])
    mu = min(max(state.mu - eta * g_mu, 0.0), mu_max)
    return SaddleState(p, eps, mu)


def core_certificate(p, eps: float, X, v, gamma: float):
    """Check the loss premise and the relaxed constraints at once.

    Returns ``(premise, violations)``: whether every loss is at most
    ``gamma^2``, and how many coalitions exceed ``eps + sqrt(2n) * gamma``.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[1]
    excess = np.asarray(v) - X @ np.asarray(p, dtype=float)
    d = np.maximum(0.0, excess - eps)
    premise = bool(np.all(d * d / (2 * X.sum(axis=1)) <= gamma**2))
    violations = int(np.sum(excess > eps + math.sqrt(2 * n) * gamma))
    return premise, violations


# compiled mirror-prox kernel

@numba.njit(cache=True)
def _kernel_map(s, eps, mu, X, size, v, scale, gamma2, logits, out):
    n = s.shape[0]
    p = np.exp(s - s.max())
    p /= p.sum()
    g = np.zeros(n)
    sw = 0.0
    sl = 0.0
    for r in range(X.shape[0]):
        acc = 0.0
        for j in range(n):
            acc += X[r, j] * p[j]
        d = v[r] - eps - acc
        if d > 0.0:
            w = d / size[r]
            sw += w
            sl += 0.5 * d * w
            for j in range(n):
                g[j] += w * X[r, j]
    for j in range(n):
        g[j] *= -mu * scale
    if logits:
        pg = 0.0
        for j in range(n):
            pg += p[j] * g[j]
        for j in range(n):
            out[j] = p[j] * g[j] - pg * p[j]
    else:
        for j in range(n):
            out[j] = g[j]
    out[n] = 1.0 - mu * scale * sw
    out[n + 1] = -(scale * sl - gamma2)
    return p


@numba.njit(cache=True)
def _kernel_step(x, x1, m1, m2, k, Xa, sa, va, Xb, sb, vb, eta, scale, gamma2,
                 eps_lo, eps_hi, mu_max, adam, b1, b2, tiny, g):
    """One extragradient pair.  ``x`` holds ``[logits, eps, mu]`` and is updated
    in place; ``x1`` receives the extrapolated point.  With ``adam`` both map
    evaluations advance the same moment estimates.  Returns the moment count."""
    n = x.shape[0] - 2
    for half in range(2):
        if half == 0:
            _kernel_map(x[:n], x[n], x[n + 1], Xa, sa, va, scale, gamma2, adam, g)
            dst = x1
        else:
            _kernel_map(x1[:n], x1[n], x1[n + 1], Xb, sb, vb, scale, gamma2, adam, g)
            dst = x
        if adam:
            k += 1
            c1 = 1.0 - b1**k
            c2 = 1.0 - b2**k
            for j in range(n + 2):
                m1[j] = b1 * m1[j] + (1.0 - b1) * g[j]
                m2[j] = b2 * m2[j] + (1.0 - b2) * g[j] * g[j]
                dst[j] = x[j] - eta * (m1[j] / c1) / (math.sqrt(m2[j] / c2) + tiny)
        else:
            # entropic step is taken from the base point x
            q = np.exp(x[:n] - x[:n].max())
            q /= q.sum()
            for j in range(n):
                dst[j] = math.log(max(q[j], 1e-300)) - eta * g[j]
            dst[n] = x[n] - eta * g[n]
            dst[n + 1] = x[n + 1] - eta * g[n + 1]
        dst[n] = min(max(dst[n], eps_lo), eps_hi)
        dst[n + 1] = min(max(dst[n + 1], 0.0), mu_max)
    return k


@numba.njit(cache=True)
def _kernel_fixed(x, x1, m1, m2, X, size, v, etas, scale, gamma2, eps_lo, eps_hi, mu_max,
                  adam, b1, b2, tiny, trace_every, trace):
    """All iterations on one fixed batch; returns the eta-weighted sum of p_t."""
    n = x.shape[0] - 2
    g = np.zeros(n + 2)
    acc = np.zeros(n)
    k = 0
    row = 0
    for t in range(etas.shape[0]):
        k = _kernel_step(x, x1, m1, m2, k, X, size, v, X, size, v, etas[t], scale, gamma2,
                         eps_lo, eps_hi, mu_max, adam, b1, b2, tiny, g)
        p = np.exp(x[:n] - x[:n].max())
        p /= p.sum()
        for j in range(n):
            acc[j] += etas[t] * p[j]
        if trace_every > 0 and (t + 1) % trace_every == 0:
            trace[row, 0] = t + 1
            trace[row, 1] = x[n]
            trace[row, 2] = x[n + 1]
            row += 1
    return acc


@numba.njit(cache=True)
def _unpack_masks(masks, n):
    """Bitmasks to a boolean membership matrix plus row sizes."""
    B = masks.shape[0]
    Xb = np.empty((B, n), dtype=np.bool_)
    size = np.empty(B)
    for r in range(B):
        m = masks[r]
        c = 0
        for j in range(n):
            bit = (m >> j) & 1
            Xb[r, j] = bit == 1
            c += bit
        size[r] = c
    return Xb, size


# shared plumbing

def _streams(seed: int):
    """Independent generators for training batches, the held-out sample and misc draws."""
    ss = np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in ss.spawn(3)]


def _use_full_batch(n, config) -> bool:
    if config.full_batch is None:
        return n <= 20 and (1 << n) - 1 <= config.B
    return bool(config.full_batch)


def _eps_upper(game, config, rng, notes, full=None):
    if config.eps_hi is not None:
        return float(config.eps_hi)
    if game.monotone:
        return 1.0
    if full is not None:
        return max(1.0, float(full[1].max()))
    X = sample_coalition_matrix(game.n, 10 * game.n, rng)
    hi = max(1.0, float(game.values(X).max()))
    notes.append(f"eps_hi={hi!r} from {10 * game.n} sampled coalitions")
    return hi


def _holdout_estimate(p, game, config, rng, full=None) -> SampleEstimate:
    n = game.n
    if n <= 20 and (1 << n) - 1 <= config.holdout:
        if full is None:
            X = all_coalitions_matrix(n)
            full = (X, game.values(X))
        return estimate_from_values(p, full[0], full[1])
    X = sample_coalition_matrix(n, config.holdout, rng)
    return estimate_from_values(p, X, game.values(X))


def _max_excess(p, X, v):
    return float(np.max(v - X @ p))


# cyclic projections

def cyclic_projection_solve(game: CharacteristicOracle, eps: float, config: SolverConfig) -> LeastCoreResult:
    """Alternate halfspace projections over coalitions with simplex projections.

    ``config.T`` counts single halfspace steps.  Up to 20 players the
    coalitions are visited in bitmask order; beyond that a sampled pool of
    ``config.B`` coalitions is visited in a fresh random order every pass.
    """
    t0 = time.perf_counter()
    game = normalize(game)
    n = game.n
    train_rng, hold_rng, _ = _streams(config.seed)
    notes = []
    full = None
    if n <= 20:
        X = all_coalitions_matrix(n)
        v = game.values(X)
        full = (X, v)
        order = None
    else:
        X = sample_coalition_matrix(n, config.B, train_rng)
        v = game.values(X)
        order = train_rng.permutation(X.shape[0])
        notes.append(f"n={n} > 20: random order per pass over a pool of {config.B} coalitions")
    Xf = X.astype(float)
    size = Xf.sum(axis=1)
    p = np.full(n, 1.0 / n)
    m = X.shape[0]
    for t in range(config.T):
        i = t % m
        if order is not None:
            if i == 0 and t > 0:
                order = train_rng.permutation(m)
            i = order[i]
        p = project_simplex(_halfspace_step(p, Xf[i], size[i], v[i], eps))
    est = _holdout_estimate(p, game, config, hold_rng, full)
    return LeastCoreResult(
        p=p, eps_final=float(eps), eps_hat=est, seed=config.seed, calls=game.calls,
        seconds=time.perf_counter() - t0, iterations=config.T, notes=notes, method="cyclic",
    )


# projected stochastic subgradient

def sgd_solve(game: CharacteristicOracle, eps: float, config: SolverConfig) -> LeastCoreResult:
    """Projected SGD on the batch-mean coalition loss at fixed ``eps``.

    The output index is drawn with probability proportional to its step size
    by a one-pass weighted reservoir, unless ``config.last_iterate`` is set.
    """
    t0 = time.perf_counter()
    game = normalize(game)
    n = game.n
    train_rng, hold_rng, pick_rng = _streams(config.seed)
    full = None
    if _use_full_batch(n, config):
        X = all_coalitions_matrix(n)
        full = (X, game.values(X))
        Xf, vf = X.astype(float), full[1]
        sizef = Xf.sum(axis=1)
    p = np.full(n, 1.0 / n)
    chosen, total = p, config.schedule(0)
    for t in range(1, config.T + 1):
        eta = config.schedule(t - 1)
        if full is None:
            Xb = sample_coalition_matrix(n, config.B, train_rng)
            vb = game.values(Xb)
            Xb = Xb.astype(float)
            grad = _batch_gradient(p, eps, Xb, Xb.sum(axis=1), vb)
        else:
            grad = _batch_gradient(p, eps, Xf, sizef, vf)
        p = project_simplex(p - eta * grad)
        w = config.schedule(t)
        total += w
        if pick_rng.random() < w / total:
            chosen = p
    out = p if config.last_iterate else chosen
    est = _holdout_estimate(out, game, config, hold_rng, full)
    return LeastCoreResult(
        p=out, eps_final=float(eps), eps_hat=est, seed=config.seed, calls=game.calls,
        seconds=time.perf_counter() - t0, iterations=config.T, method="sgd",
    )


# mirror prox on the Lagrangian

def _sum_scale(n, B, full, scaling):
    if scaling == "auto":
        scaling = "sum" if full else "mean"
    if scaling == "mean":
        return 1.0 / B
    return 1.0 if full else ((1 << n) - 1) / B


def mirror_prox_solve(game: CharacteristicOracle, config: SolverConfig) -> LeastCoreResult:
    """Extragradient saddle-point solver for the least core.

    Returns ``p*``, the step-weighted average of the iterates, and as
    ``eps_final`` the largest excess of ``p*`` over the training coalitions
    (all of them for full batches, the final pair of batches otherwise),
    clipped to the ``eps`` box.  The raw last ``eps`` iterate is kept in
    ``eps_last``.
    """
    t0 = time.perf_counter()
    game = normalize(game)
    n = game.n
    train_rng, hold_rng, misc_rng = _streams(config.seed)
    notes: list[str] = []
    full_batch = _use_full_batch(n, config)
    full = None
    if full_batch:
        X = all_coalitions_matrix(n)
        full = (X, game.values(X))
    eps_lo = 0.0
    eps_hi = _eps_upper(game, config, misc_rng, notes, full)
    mu_max = config.mu_max if config.mu_max is not None else n / config.gamma
    mu0 = mu_max if config.mu0 is None else min(config.mu0, mu_max)
    adam = config.prox == "adam"
    gamma2 = config.gamma**2

    x = np.zeros(n + 2)
    x[:n] = math.log(1.0 / n)
    x[n] = eps_hi
    x[n + 1] = mu0
    x1 = x.copy()
    m1 = np.zeros(n + 2)
    m2 = np.zeros(n + 2)
    etas = np.array([config.schedule(t) for t in range(config.T)], dtype=float)
    n_trace = config.T // config.trace_every if config.trace_every > 0 else 0
    trace = np.zeros((n_trace, 3))
    b1, b2, tiny = config.beta1, config.beta2, config.adam_eps

    if full_batch and config.time_limit is None:
        Xf = np.ascontiguousarray(full[0], dtype=float)
        size = Xf.sum(axis=1)
        scale = _sum_scale(n, Xf.shape[0], True, config.scaling)
        acc = _kernel_fixed(x, x1, m1, m2, Xf, size, full[1], etas, scale, gamma2, eps_lo, eps_hi,
                            mu_max, adam, b1, b2, tiny, config.trace_every, trace)
        iterations = config.T
        last_pool = (full[0], full[1])
    else:
        g = np.zeros(n + 2)
        acc = np.zeros(n)
        k = 0
        row = 0
        iterations = 0
        last_pool = None

        chunk = {"X": None, "v": None, "size": None, "next": 0}

        def draw(t):
            """The pair of batches for iteration ``t``; sampled batches are
            drawn and evaluated a block of iterations at a time."""
            if full_batch:
                Xf_ = np.ascontiguousarray(full[0], dtype=float)
                s_ = Xf_.sum(axis=1)
                return Xf_, s_, full[1], Xf_, s_, full[1]
            if chunk["X"] is None or chunk["next"] >= chunk["X"].shape[0]:
                rows = 2 * min(PREFETCH, config.T - t) * config.B
                if n <= 62:
                    masks = train_rng.integers(1, np.int64(1) << n, size=rows, dtype=np.int64)
                    chunk["X"], chunk["size"] = _unpack_masks(masks, n)
                else:
                    chunk["X"] = sample_coalition_matrix(n, rows, train_rng)
                    chunk["size"] = chunk["X"].sum(axis=1).astype(float)
                chunk["v"] = game.values(chunk["X"])
                chunk["next"] = 0
            i, B = chunk["next"], config.B
            chunk["next"] += 2 * B
            X_, s_, v_ = chunk["X"], chunk["size"], chunk["v"]
            return (X_[i:i + B], s_[i:i + B], v_[i:i + B],
                    X_[i + B:i + 2 * B], s_[i + B:i + 2 * B], v_[i + B:i + 2 * B])

        for t in range(config.T):
            if config.time_limit is not None and time.perf_counter() - t0 >= config.time_limit:
                notes.append(f"stopped by time limit after {t} iterations")
                break
            Xa, sa, va, Xb, sb, vb = draw(t)
            scale = _sum_scale(n, Xa.shape[0], full_batch, config.scaling)
            k = _kernel_step(x, x1, m1, m2, k, Xa, sa, va, Xb, sb, vb, etas[t], scale, gamma2,
                             eps_lo, eps_hi, mu_max, adam, b1, b2, tiny, g)
            acc += etas[t] * softmax(x[:n])
            iterations = t + 1
            last_pool = (Xa, va, Xb, vb)
            if config.trace_every > 0 and (t + 1) % config.trace_every == 0:
                trace[row] = (t + 1, x[n], x[n + 1])
                row += 1
        trace = trace[:row]
        if iterations == 0:
            acc = softmax(x[:n])
            last_pool = full
        elif not full_batch:
            last_pool = (np.vstack([last_pool[0], last_pool[2]]), np.concatenate([last_pool[1], last_pool[3]]))
        else:
            last_pool = (full[0], full[1])

    p_star = acc / acc.sum()
    if last_pool is None:
        eps_final = eps_hi  # stopped before seeing any coalition
    else:
        eps_final = min(max(_max_excess(p_star, last_pool[0].astype(float), last_pool[1]), eps_lo), eps_hi)
    est = _holdout_estimate(p_star, game, config, hold_rng, full)
    return LeastCoreResult(
        p=p_star, eps_final=eps_final, eps_hat=est, seed=config.seed, calls=game.calls,
        seconds=time.perf_counter() - t0, iterations=iterations, eps_last=float(x[n]),
        mu_last=float(x[n + 1]), trace=trace if config.trace_every > 0 else None, notes=notes,
        method=f"cl-{config.prox}",
    )


def adam_softmax_solve(game: CharacteristicOracle, config: SolverConfig) -> LeastCoreResult:
    """Mirror prox with softmax logits and adaptive-moment steps."""
    return mirror_prox_solve(game, replace(config, prox="adam"))


# bisection on eps

def lcv_via_bisection(game: CharacteristicOracle, inner: str = "sgd", tolerance: float = 0.01,
                      config: SolverConfig | None = None) -> LeastCoreResult:
    """Smallest ``eps`` for which the fixed-slack solver reaches a held-out
    max deficit of at most ``gamma``, found by bisection over ``[0, eps_hi]``."""
    if not tolerance > 0:
        raise ConfigError("tolerance must be positive")
    solvers: dict[str, Callable] = {"sgd": sgd_solve, "cyclic": cyclic_projection_solve}
    if inner not in solvers:
        raise ConfigError(f"inner solver must be one of {sorted(solvers)}")
    config = config or SolverConfig()
    game = normalize(game)
    solve = solvers[inner]
    notes: list[str] = []
    lo = 0.0
    hi = _eps_upper(game, config, _streams(config.seed)[2], notes)
    t0 = time.perf_counter()

    def feasible(eps):
        res = solve(game, eps, config)
        return res.eps_hat.value - eps <= config.gamma, res

    ok, best = feasible(lo)
    if not ok:
        _, best = feasible(hi)
        while hi - lo > tolerance:
            mid = 0.5 * (lo + hi)
            ok, res = feasible(mid)
            if ok:
                hi, best = mid, res
            else:
                lo = mid
    else:
        hi = lo
    best.eps_final = hi
    best.notes = notes + best.notes
    best.method = f"bisection-{inner}"
    best.calls = game.calls
    best.seconds = time.perf_counter() - t0
    return best
