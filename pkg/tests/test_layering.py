import math

import numpy as np
import pytest

from congestcut import graph as G
from congestcut.errors import InvalidParameter
from congestcut.layering import (
    collect_family_and_test,
    cut_tester,
    experiments,
    guess_range,
    hit_probabilities,
    layering_mincut,
)


def no_bridge(g):
    sub = np.ones(g.m, bool)
    sub[-1] = False
    return sub


def test_single_component_passes():
    g = G.cycle(6)
    v = cut_tester(g, None, 1.0, 1 / 8, seed=0)
    assert v.passed.all() and (v.hits == 0).all()
    assert v.passing_ids() == []


def test_hit_probability_formula():
    g = G.path_graph(3, [1, 3])
    p = hit_probabilities(g, G.edge_mask(g), 1.0)
    assert p[0] == pytest.approx(0.5)
    assert p[1] == pytest.approx(1 - 2**-3)
    assert experiments(16, 1 / 8) == math.ceil(8 * 4 * 64)


@pytest.mark.parametrize("delta", [0, 0.25, -1])
def test_delta_out_of_range(delta):
    with pytest.raises(InvalidParameter):
        cut_tester(G.cycle(4), None, 1, delta)


def test_bad_kappa_and_method():
    with pytest.raises(InvalidParameter):
        cut_tester(G.cycle(4), None, 0, 0.1)
    with pytest.raises(InvalidParameter):
        cut_tester(G.cycle(4), None, 1, 0.1, method="bogus")


def test_dumbbell_tester_rates():
    g = G.dumbbell()
    sub = no_bridge(g)
    passes = sum(cut_tester(g, sub, 10, 1 / 8, s, engine="replay").passed.all() for s in range(100))
    fails = sum(not cut_tester(g, sub, 0.8, 1 / 8, s, engine="replay").passed.any() for s in range(100))
    assert passes >= 95 and fails >= 95


def test_verdict_consistent_within_component():
    g = G.random_multigraph(np.random.default_rng(1), 12, max_weight=3)
    sub = np.random.default_rng(2).random(g.m) < 0.5
    v = cut_tester(g, sub, 3, 0.2, seed=5, engine="replay")
    for c in np.unique(v.cid):
        assert len(set(v.passed[v.cid == c].tolist())) == 1
        assert len(set(v.hits[v.cid == c].tolist())) == 1


@pytest.mark.parametrize("seed", range(4))
def test_methods_and_engines_agree(seed):
    g = G.random_multigraph(np.random.default_rng(seed), 10, max_weight=4)
    sub = np.random.default_rng(seed + 100).random(g.m) < 0.4
    ref = cut_tester(g, sub, 2.5, 0.2, seed, engine="replay")
    for engine in ("sim", "replay"):
        for method in ("hitmask", "labels"):
            v = cut_tester(g, sub, 2.5, 0.2, seed, engine=engine, method=method)
            assert (v.hits == ref.hits).all() and (v.cid == ref.cid).all()


def test_k2_returns_the_only_cut():
    g = G.Multigraph.from_edges(2, [(0, 1, 1)])
    res = collect_family_and_test(g, 1, 0.5, seed=0)
    assert res.cut is not None and res.cut.members == frozenset({0}) and res.cut.weight == 1


def test_huge_lambda_prime_singletons_pass():
    g = G.cycle(10)
    res = collect_family_and_test(g, 1e6, 0.5, seed=3)
    assert res.layer == 1 and len(res.cut.members) == 1 and res.cut.weight == 2


def test_dumbbell_epochs():
    g = G.dumbbell()
    bridge_passes = 0
    for s in range(100):
        res = collect_family_and_test(g, 1, 0.5, seed=s)
        if res.cut is not None:
            assert res.cut.weight <= (1 + 1 / 8) * 100
    for s in range(100):
        v = cut_tester(g, no_bridge(g), 100, 1 / 8, s, engine="replay")
        bridge_passes += bool(v.passed.all())
    assert bridge_passes >= 90


def test_invalid_epoch_params():
    with pytest.raises(InvalidParameter):
        collect_family_and_test(G.cycle(4), 0, 0.5)
    with pytest.raises(InvalidParameter):
        collect_family_and_test(G.cycle(4), 1, 1.5)


def test_guess_range_covers_both_sides():
    exps = guess_range(16, 0.5)
    assert exps == sorted(exps) and exps[-1] == 4
    assert exps[0] == -(4 + math.ceil(math.log2(100)))


def test_layering_mincut_examples():
    weights = [layering_mincut(G.dumbbell(), 0.5, seed=s).cut.weight for s in range(10)]
    assert max(weights) <= 113 and sorted(weights)[len(weights) // 2] == 1
    res = layering_mincut(G.cycle(16), 0.5, seed=0)
    assert res.cut.weight <= 100 * 2 / 0.5 * 1.125
    assert G.cut_weight(G.cycle(16), res.cut.members) == res.cut.weight
    assert res.ledger.total > 0 and res.counts["total"] >= res.counts["tests_run"]


def test_layering_sim_matches_replay():
    g = G.dumbbell()
    a = layering_mincut(g, 0.5, seed=1, engine="sim")
    b = layering_mincut(g, 0.5, seed=1, engine="replay")
    assert a.cut == b.cut and a.ledger.total == b.ledger.total
    assert a.sim.max_bits_per_edge_round <= 8 * math.ceil(math.log2(g.n))
