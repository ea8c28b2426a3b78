import math

import numpy as np
import pytest
from hypothesis import given, settings

from congestcut import graph as G
from congestcut.errors import InvalidCut, InvalidGraph, InvalidProbability, SizeLimit
from congestcut.lowerbound import gen_weighted_cut_instance, path_nodes
from congestcut.primitives import sparse_certificate

from conftest import multigraphs


def test_cut_weight_examples(dumbbell):
    assert G.cut_weight(G.cycle(4), {0}) == 2
    assert G.cut_weight(dumbbell, set(range(5))) == 1
    g = gen_weighted_cut_instance(16, 4, 1, {1, 2}, {2, 3})
    assert G.cut_weight(g, path_nodes(16, 4, 2)) == 4


@pytest.mark.parametrize("members", [set(), set(range(4))])
def test_cut_weight_rejects_trivial_subsets(members):
    with pytest.raises(InvalidCut):
        G.cut_weight(G.cycle(4), members)


def test_min_cut_exact_examples():
    assert G.min_cut_exact(G.complete(4)).weight == 3
    assert G.min_cut_exact(G.cycle(6)).weight == 2
    tri = G.Multigraph.from_edges(3, [(0, 1, 1), (1, 2, 2), (0, 2, 3)])
    assert G.min_cut_exact(tri).weight == 3
    assert G.min_cut_exact(tri).weight == min(G.all_cut_weights(tri)[1:])


def test_min_cut_exact_disconnected_returns_zero_cut():
    g = G.Multigraph.from_edges(4, [(0, 1, 2), (2, 3, 5)])
    cut = G.min_cut_exact(g)
    assert cut.weight == 0
    assert G.cut_weight(g, cut.members) == 0


def test_bruteforce_examples():
    assert G.min_cut_bruteforce(G.path_graph(3, [5, 3])).weight == 3
    assert G.min_cut_bruteforce(G.complete(4)).weight == 3


def test_bruteforce_size_limit():
    with pytest.raises(SizeLimit):
        G.min_cut_bruteforce(G.cycle(21))


def test_random_graphs_oracles_agree(rng):
    for _ in range(50):
        g = G.random_multigraph(rng, 8)
        assert G.min_cut_exact(g).weight == G.min_cut_bruteforce(g).weight


@settings(max_examples=60, deadline=None)
@given(multigraphs(max_n=12, connected=False))
def test_exact_matches_bruteforce(g):
    exact = G.min_cut_exact(g)
    assert exact.weight == G.min_cut_bruteforce(g).weight
    assert G.cut_weight(g, exact.members) == exact.weight


@settings(max_examples=40, deadline=None)
@given(multigraphs(max_n=9))
def test_cut_weight_symmetric(g):
    rng = np.random.default_rng(g.m)
    for _ in range(5):
        k = int(rng.integers(1, g.n))
        members = set(rng.choice(g.n, size=k, replace=False).tolist())
        assert G.cut_weight(g, members) == G.cut_weight(g, set(range(g.n)) - members)


def test_components_examples(dumbbell):
    g = G.cycle(5)
    assert G.components(g, np.zeros(g.m, bool)).tolist() == list(range(5))
    assert G.components(g).tolist() == [0] * 5
    sub = np.ones(dumbbell.m, bool)
    sub[-1] = False
    assert G.components(dumbbell, sub).tolist() == [0] * 5 + [5] * 5
    assert G.components(dumbbell, sub, mode="max").tolist() == [4] * 5 + [9] * 5


def test_contract_examples():
    tri = G.complete(3)
    q, mapping = G.contract(tri, None)
    assert (q.n, q.m) == (1, 0)
    c4 = G.cycle(4)
    q, mapping = G.contract(c4, [0])
    assert q.n == 3 and q.m == 3
    assert G.min_cut_exact(q).weight == 2
    q, mapping = G.contract(c4, [])
    assert q.n == 4 and sorted(q.edges()) == sorted(c4.edges())


@settings(max_examples=30, deadline=None)
@given(multigraphs(max_n=10, max_weight=3))
def test_contract_outside_certificate_preserves_min_cut(g):
    lam = G.lambda_of(g)
    cert = sparse_certificate(g, np.zeros(g.m, bool), lam, engine="replay")
    contracted = cert.counts < g.w
    q, _ = G.contract(g, contracted)
    if q.n >= 2:
        assert G.lambda_of(q) == lam


def test_sample_edges_extremes_and_determinism():
    g = G.cycle(10, 3)
    assert G.sample_edges(g, 0, np.random.default_rng(1)).sum() == 0
    assert (G.sample_edges(g, 1, np.random.default_rng(1)) == g.w).all()
    a = G.sample_edges(g, 0.3, np.random.default_rng(9))
    b = G.sample_edges(g, 0.3, np.random.default_rng(9))
    assert (a == b).all()


def test_sample_edges_concentration():
    g = G.cycle(10_000)
    for seed in range(5):
        frac = G.sample_edges(g, 0.5, np.random.default_rng(seed)).sum() / g.m
        assert 0.47 <= frac <= 0.53


@pytest.mark.parametrize("p", [-0.1, 1.5, float("nan")])
def test_sample_edges_bad_probability(p):
    with pytest.raises(InvalidProbability):
        G.sample_edges(G.cycle(4), p, np.random.default_rng(0))


def test_diameter_examples(dumbbell):
    assert G.diameter(G.complete(4)) == 1
    assert G.diameter(G.path_graph(7)) == 6
    sub = np.ones(dumbbell.m, bool)
    sub[-1] = False
    assert G.diameter(dumbbell, sub) == math.inf


def test_validation():
    with pytest.raises(InvalidGraph):
        G.Multigraph.from_edges(3, [(0, 0, 1)])
    with pytest.raises(InvalidGraph):
        G.Multigraph.from_edges(3, [(0, 1, 0)])
    with pytest.raises(InvalidGraph):
        G.Multigraph.from_edges(2, [(0, 1, 9)])
    G.Multigraph.from_edges(2, [(0, 1, 9)], weight_exponent=4)


def test_file_roundtrip(tmp_path, dumbbell):
    path = tmp_path / "g.txt"
    G.write_graph(dumbbell, path, {"family": "dumbbell"})
    back = G.read_graph(path)
    assert list(back.edges()) == list(dumbbell.edges())
    assert (tmp_path / "g.txt.json").exists()
    assert G.Cut.of(dumbbell, range(5)).to_json() == {"members": [0, 1, 2, 3, 4], "weight": 1}


def test_malformed_file():
    with pytest.raises(InvalidGraph):
        G.loads_graph("3 2\n0 1 1\n")
