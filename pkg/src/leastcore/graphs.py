"""Seeded random graph generators.

Each generator returns a sorted list of undirected edges ``(i, j)`` with
``i < j``.  All randomness comes from the ``numpy.random.Generator`` passed in,
so a fixed seed reproduces the same edge set bit for bit.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidGraphParams


def _check_prob(name, p):
    if not 0.0 <= p <= 1.0:
        raise InvalidGraphParams(f"{name}={p} is not a probability")


def _check_degree(name, m, n):
    if not 1 <= m < n:
        raise InvalidGraphParams(f"{name}={m} must satisfy 1 <= {name} < n={n}")


def _edges_from_adjacency(adj: list[set]) -> list[tuple[int, int]]:
    return sorted((i, j) for i, nbrs in enumerate(adj) for j in nbrs if i < j)


def _upper_pairs(n):
    return np.triu_indices(n, k=1)


def erdos_renyi(n: int, p: float, rng: np.random.Generator) -> list[tuple[int, int]]:
    _check_prob("p", p)
    iu, ju = _upper_pairs(n)
    keep = rng.random(iu.size) < p
    return list(zip(iu[keep].tolist(), ju[keep].tolist()))


def newman_watts_strogatz(n: int, k: int, p: float, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Ring lattice joining each vertex to its ``k // 2`` neighbours on either side,
    plus one shortcut per lattice edge with probability ``p``."""
    _check_degree("k", k, n)
    _check_prob("p", p)
    adj = [set() for _ in range(n)]
    lattice = []
    for u in range(n):
        for j in range(1, k // 2 + 1):
            w = (u + j) % n
            if w != u and w not in adj[u]:
                adj[u].add(w)
                adj[w].add(u)
                lattice.append((u, w))
    for u, _ in lattice:
        if rng.random() < p:
            candidates = [w for w in range(n) if w != u and w not in adj[u]]
            if candidates:
                w = candidates[int(rng.integers(len(candidates)))]
                adj[u].add(w)
                adj[w].add(u)
    return _edges_from_adjacency(adj)


def partition_sizes(n: int, parts: int) -> list[int]:
    base, extra = divmod(n, parts)
    return [base + (1 if g < extra else 0) for g in range(parts)]


def partition_graph(n: int, parts: int, p_in: float, p_out: float, rng: np.random.Generator) -> list[tuple[int, int]]:
    if not 1 <= parts <= n:
        raise InvalidGraphParams(f"parts={parts} must lie in [1, n={n}]")
    _check_prob("p_in", p_in)
    _check_prob("p_out", p_out)
    group = np.repeat(np.arange(parts), partition_sizes(n, parts))
    iu, ju = _upper_pairs(n)
    prob = np.where(group[iu] == group[ju], p_in, p_out)
    keep = rng.random(iu.size) < prob
    return list(zip(iu[keep].tolist(), ju[keep].tolist()))


def _random_subset(seq: list[int], m: int, rng) -> list[int]:
    targets: set[int] = set()
    while len(targets) < m:
        targets.add(seq[int(rng.integers(len(seq)))])
    return sorted(targets)


def dual_barabasi_albert(n: int, m1: int, m2: int, p: float, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Preferential attachment where each new vertex brings ``m1`` edges with
    probability ``p`` and ``m2`` edges otherwise.  Grows from a star on
    ``max(m1, m2) + 1`` vertices."""
    _check_degree("m1", m1, n)
    _check_degree("m2", m2, n)
    _check_prob("p", p)
    m0 = max(m1, m2)
    adj = [set() for _ in range(n)]
    repeated: list[int] = []
    for leaf in range(1, m0 + 1):
        adj[0].add(leaf)
        adj[leaf].add(0)
        repeated += [0, leaf]
    for source in range(m0 + 1, n):
        m = m1 if rng.random() < p else m2
        targets = _random_subset(repeated, m, rng)
        for t in targets:
            adj[source].add(t)
            adj[t].add(source)
        repeated += targets
        repeated += [source] * m
    return _edges_from_adjacency(adj)


def powerlaw_cluster(n: int, m: int, p: float, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Holme-Kim growth: preferential attachment with ``m`` edges per vertex, each
    followed by a triangle-closing edge with probability ``p``."""
    _check_degree("m", m, n)
    _check_prob("p", p)
    adj = [set() for _ in range(n)]
    repeated = list(range(m))
    for source in range(m, n):
        targets = _random_subset(repeated, m, rng)
        target = targets.pop()
        adj[source].add(target)
        adj[target].add(source)
        repeated.append(target)
        count = 1
        while count < m:
            if rng.random() < p:
                hood = sorted(w for w in adj[target] if w != source and w not in adj[source])
                if hood:
                    w = hood[int(rng.integers(len(hood)))]
                    adj[source].add(w)
                    adj[w].add(source)
                    repeated.append(w)
                    count += 1
                    continue
            target = targets.pop()
            adj[source].add(target)
            adj[target].add(source)
            repeated.append(target)
            count += 1
        repeated += [source] * m
    return _edges_from_adjacency(adj)


def uniform_intersection(n: int, m: int, p: float, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Each vertex owns each of ``m`` elements with probability ``p``; vertices
    sharing an element are adjacent."""
    if m < 1:
        raise InvalidGraphParams(f"m={m} must be at least 1")
    _check_prob("p", p)
    owns = (rng.random((n, m)) < p).astype(np.int64)
    shared = owns @ owns.T
    iu, ju = _upper_pairs(n)
    keep = shared[iu, ju] > 0
    return list(zip(iu[keep].tolist(), ju[keep].tolist()))


GENERATORS = {
    "erdos-renyi": (erdos_renyi, ("p",)),
    "newman-watts-strogatz": (newman_watts_strogatz, ("k", "p")),
    "partition": (partition_graph, ("parts", "p_in", "p_out")),
    "dual-barabasi-albert": (dual_barabasi_albert, ("m1", "m2", "p")),
    "powerlaw-cluster": (powerlaw_cluster, ("m", "p")),
    "uniform-intersection": (uniform_intersection, ("m", "p")),
}

INT_PARAMS = {"k", "parts", "m", "m1", "m2"}


def generate_graph(model: str, n: int, rng: np.random.Generator, **params) -> list[tuple[int, int]]:
    try:
        fn, names = GENERATORS[model]
    except KeyError:
        raise InvalidGraphParams(f"unknown graph model {model!r}; choose from {sorted(GENERATORS)}")
    missing = [k for k in names if k not in params]
    if missing:
        raise InvalidGraphParams(f"{model} needs parameters {missing}")
    args = [int(params[k]) if k in INT_PARAMS else float(params[k]) for k in names]
    return fn(n, *args, rng)
