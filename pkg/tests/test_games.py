import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from leastcore.core import Coalition, all_coalitions_matrix, enumerate_coalitions
from leastcore.errors import (
    ConfigError,
    InvalidDistributionParams,
    InvalidGraphParams,
    ParseError,
    TooManyPlayers,
)
from leastcore.games import (
    InducedSubgraphGame,
    MarginalContributionNetwork,
    Rule,
    TabularGame,
    WeightDistribution,
    WeightedGraph,
    WeightedVotingGame,
    edge_weight_mean,
    from_text,
    graph_game_generate,
    majority_game,
    mcn_generate,
    to_text,
    wvg_generate,
)
from leastcore.graphs import GENERATORS, generate_graph


# weighted voting games

def test_wvg_values_by_brute_force():
    g = WeightedVotingGame([3, 1, 1, 2], 4)
    for c in enumerate_coalitions(4):
        total = sum([3, 1, 1, 2][i] for i in c.members)
        assert g.value(c) == float(total >= 4)


@pytest.mark.parametrize("text,mean", [("uniform-int:1:100", 50.5), ("gaussian:1:0.3", 1.0),
                                       ("exponential:2", 0.5), ("beta:2:6", 0.25)])
def test_distribution_mean_matches_samples(text, mean):
    d = WeightDistribution.parse(text)
    assert d.mean == pytest.approx(mean)
    x = d.sample(np.random.default_rng(0), 200_000)
    assert x.mean() == pytest.approx(mean, rel=0.01)


@pytest.mark.parametrize("text", ["gaussian:1", "gaussian:1:-1", "exponential:0", "beta:0:1",
                                  "uniform-int:5:1", "uniform-int:1.5:3", "poisson:3", "gaussian:a:b"])
def test_bad_distributions(text):
    with pytest.raises(InvalidDistributionParams):
        WeightDistribution.parse(text)


def test_positive_sampling_redraws():
    w = WeightDistribution.parse("gaussian:0:1").sample(np.random.default_rng(1), 5000, positive=True)
    assert (w > 0).all()


def test_wvg_quota_rule():
    d = WeightDistribution.parse("uniform-int:1:100")
    g = wvg_generate(30, d, 0.4, np.random.default_rng(0))
    assert g.quota == pytest.approx(0.4 * 30 * 50.5)
    assert g.monotone
    with pytest.raises(ConfigError):
        wvg_generate(5, d, 0.0, np.random.default_rng(0))


# graphs

def _check_edges(edges, n):
    assert edges == sorted(set(edges))
    assert all(0 <= i < j < n for i, j in edges)


PARAMS = {"erdos-renyi": dict(p=0.3), "newman-watts-strogatz": dict(k=4, p=0.2),
          "partition": dict(parts=3, p_in=0.8, p_out=0.05), "dual-barabasi-albert": dict(m1=1, m2=3, p=0.25),
          "powerlaw-cluster": dict(m=2, p=0.5), "uniform-intersection": dict(m=5, p=0.2)}


@pytest.mark.parametrize("model", sorted(GENERATORS))
def test_generators_valid_and_seeded(model):
    a = generate_graph(model, 25, np.random.default_rng(3), **PARAMS[model])
    b = generate_graph(model, 25, np.random.default_rng(3), **PARAMS[model])
    _check_edges(a, 25)
    assert a == b


# mean edge counts against the networkx implementations of the same models
NX = {
    "erdos-renyi": lambda n, s: nx.gnp_random_graph(n, 0.3, seed=s),
    "newman-watts-strogatz": lambda n, s: nx.newman_watts_strogatz_graph(n, 4, 0.2, seed=s),
    "powerlaw-cluster": lambda n, s: nx.powerlaw_cluster_graph(n, 2, 0.5, seed=s),
    "dual-barabasi-albert": lambda n, s: nx.dual_barabasi_albert_graph(n, 1, 3, 0.25, seed=s),
    "uniform-intersection": lambda n, s: nx.uniform_random_intersection_graph(n, 5, 0.2, seed=s),
}


@pytest.mark.parametrize("model", sorted(NX))
def test_edge_counts_match_networkx(model):
    n, reps = 30, 200
    ours = np.mean([len(generate_graph(model, n, np.random.default_rng(s), **PARAMS[model])) for s in range(reps)])
    ref = np.mean([_nx_edges(NX[model](n, s), n) for s in range(reps)])
    assert ours == pytest.approx(ref, rel=0.06)


def _nx_edges(G, n):
    # the intersection generator returns a bipartite graph; project it
    if G.number_of_nodes() > n:
        return nx.bipartite.projected_graph(G, range(n)).number_of_edges()
    return G.number_of_edges()


def test_nws_keeps_ring_lattice():
    edges = set(generate_graph("newman-watts-strogatz", 12, np.random.default_rng(0), k=4, p=0.5))
    for u in range(12):
        for j in (1, 2):
            w = (u + j) % 12
            assert (min(u, w), max(u, w)) in edges


def test_partition_blocks():
    edges = generate_graph("partition", 9, np.random.default_rng(0), parts=3, p_in=1.0, p_out=0.0)
    assert sorted(edges) == sorted((i, j) for g in range(3) for i, j in itertools.combinations(range(3 * g, 3 * g + 3), 2))


@pytest.mark.parametrize("model,params", [("erdos-renyi", dict(p=1.5)), ("newman-watts-strogatz", dict(k=30, p=0.1)),
                                          ("partition", dict(parts=0, p_in=0.5, p_out=0.5)), ("nope", {}),
                                          ("erdos-renyi", {})])
def test_bad_graph_params(model, params):
    with pytest.raises(InvalidGraphParams):
        generate_graph(model, 10, np.random.default_rng(0), **params)


def test_induced_subgraph_values():
    g = InducedSubgraphGame(WeightedGraph(4, ((0, 1, 2.0), (1, 2, -1.0), (0, 3, 0.5))))
    for c in enumerate_coalitions(4):
        expect = sum(w for i, j, w in g.graph.edges if i in c and j in c)
        assert g.value(c) == pytest.approx(expect)


def test_edge_weight_sign_fraction():
    assert edge_weight_mean(1.0, 0.5) == pytest.approx(0.0, abs=1e-12)
    g = graph_game_generate("erdos-renyi", 60, 2.0, np.random.default_rng(0), p=0.9)
    w = np.array([e[2] for e in g.graph.edges])
    assert (w > 0).mean() == pytest.approx(0.6, abs=0.03)


def test_weighted_graph_validation():
    with pytest.raises(ConfigError):
        WeightedGraph(3, ((0, 0, 1.0),))
    with pytest.raises(ConfigError):
        WeightedGraph(3, ((0, 5, 1.0),))


# marginal contribution networks

def test_mcn_matches_rule_definition():
    g = mcn_generate(6, 12, 0.3, 0.2, WeightDistribution.parse("gaussian:0:1"), np.random.default_rng(4))
    for c in enumerate_coalitions(6):
        raw = sum(r.weight for r in g.rules if r.applies(c))
        assert g.value(c) == pytest.approx(raw - g.offset)
    assert g.values(np.zeros((1, 6), bool))[0] == pytest.approx(0.0)


def test_mcn_rules_disjoint():
    g = mcn_generate(8, 50, 0.5, 0.5, WeightDistribution.parse("gaussian:0:1"), np.random.default_rng(0))
    assert all(r.positive & r.negative == 0 for r in g.rules)
    with pytest.raises(ConfigError):
        MarginalContributionNetwork(3, [Rule(0b1, 0b1, 1.0)])


def test_mcn_empty_set_offset():
    # a rule with P empty and N = {0} applies to the empty coalition
    g = MarginalContributionNetwork(2, [Rule(0, 0b1, 2.0), Rule(0b11, 0, 1.0)])
    assert g.values(np.zeros((1, 2), bool))[0] == 0.0
    assert g.value(Coalition.from_members([1], 2)) == 0.0
    assert g.value(Coalition.from_members([0], 2)) == -2.0
    assert g.grand_value == -1.0


# tables and text

@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_tabular_from_game(n, seed):
    w = np.random.default_rng(seed).integers(1, 10, size=n)
    g = WeightedVotingGame(w, w.sum() / 2)
    t = TabularGame.from_game(g)
    X = all_coalitions_matrix(n)
    assert np.array_equal(t.values(X), g.values(X))


def test_tabular_validation():
    with pytest.raises(ConfigError):
        TabularGame(np.ones(3))
    with pytest.raises(ConfigError):
        TabularGame(np.array([1.0, 0.0]))
    t = TabularGame.from_function(2, lambda s: len(s) ** 2)
    assert t.value(Coalition.grand(2)) == 4.0


@given(st.sampled_from(["wvg", "graph", "mcn"]), st.integers(0, 2**32 - 1))
def test_text_roundtrip(kind, seed):
    rng = np.random.default_rng(seed)
    if kind == "wvg":
        g = wvg_generate(7, WeightDistribution.parse("gaussian:1:0.3"), 0.5, rng)
    elif kind == "graph":
        g = graph_game_generate("erdos-renyi", 7, 1.0, rng, p=0.5)
    else:
        g = mcn_generate(7, 5, 0.3, 0.3, WeightDistribution.parse("gaussian:0:1"), rng)
    h = from_text(to_text(g))
    X = all_coalitions_matrix(7)
    assert np.array_equal(g.values(X), h.values(X))
    assert to_text(h) == to_text(g)


@pytest.mark.parametrize("text,line,column", [("wvg 2 1\n1\n", 1, None), ("wvg 2 x\n1\n1\n", 1, 3),
                                              ("graph 3 1\n0 1 zz\n", 2, 3), ("cube 2 1\n", 1, 1), ("", 1, None)])
def test_parse_errors_carry_location(text, line, column):
    with pytest.raises(ParseError) as info:
        from_text(text)
    assert info.value.line == line
    if column is not None:
        assert info.value.column == column


def test_majority_fixture():
    g = majority_game(5)
    assert g.value(Coalition.from_members([0, 1, 2], 5)) == 1.0
    assert g.value(Coalition.from_members([0, 1], 5)) == 0.0
    with pytest.raises(TooManyPlayers):
        TabularGame.from_game(majority_game(21))
