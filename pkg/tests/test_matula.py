import math

import numpy as np
import pytest
from hypothesis import given, settings

from congestcut import graph as G
from congestcut.errors import InvalidParameter, NoCutFound
from congestcut.matula import (
    guess_values,
    iteration_cap,
    karger_presample,
    matula_core,
    matula_mincut,
    presample_probability,
)

from conftest import multigraphs


def test_cycle_core_returns_weight_two():
    res = matula_core(G.cycle(8), 2, 0.5, seed=0)
    assert res.cut is not None and res.cut.weight == 2
    assert res.kappa == pytest.approx(2 * (2 + 0.5 / 3))
    assert res.state.eta_new == 8


def test_dumbbell_core_returns_bridge():
    res = matula_core(G.dumbbell(), 1, 0.5, seed=0)
    assert res.cut.weight == 1


def test_huge_guess_keeps_every_edge():
    g = G.cycle(8)
    res = matula_core(g, 100 * g.m, 0.5, seed=1)
    assert (res.state.star == g.w).all()
    assert res.cut.weight <= res.kappa * (1 + res.delta)


def test_core_rejects_bad_input():
    with pytest.raises(InvalidParameter):
        matula_core(G.cycle(4), 0, 0.5)
    with pytest.raises(InvalidParameter):
        matula_core(G.cycle(4), 2, 0)


@settings(max_examples=20, deadline=None)
@given(multigraphs(min_n=4, max_n=10, max_weight=3))
def test_loop_progress_and_termination(g):
    eps = 0.5
    res = matula_core(g, max(1, G.lambda_of(g) / 2), eps, seed=g.m)
    etas = [g.n] + res.etas
    assert res.iterations <= iteration_cap(g.n, eps)
    for prev, cur in zip(etas[:-2], etas[1:-1]):
        assert cur <= prev * (1 - eps / 10)
    last, before = etas[-1], etas[-2]
    assert last < 2 or last > before * (1 - eps / 10)


@settings(max_examples=20, deadline=None)
@given(multigraphs(min_n=3, max_n=10, max_weight=3))
def test_contraction_keeps_a_minimum_cut(g):
    lam = G.lambda_of(g)
    res = matula_core(g, lam, 0.5, seed=7)
    labels = G.components(g, res.state.H)
    if len(np.unique(labels)) >= 2:
        q, _ = G.contract(g, res.state.H)
        assert G.lambda_of(q) == lam


def test_presample_identity_when_capped():
    g = G.cycle(16, 64)
    pre = karger_presample(g, 128, 1.0, seed=0)
    assert pre.p == 1.0 and (pre.counts == g.w).all()
    assert G.lambda_of(pre.graph) == 128
    assert presample_probability(16, 10, 0.5) == 1.0


def test_presample_concentration():
    g = G.cycle(16, 4096)
    lam = 8192
    for seed in range(10):
        pre = karger_presample(g, lam, 1.0, seed=seed)
        assert pre.p == pytest.approx(400 / 8192)
        ratio = G.lambda_of(pre.graph) / (lam * pre.p)
        assert 2 / 3 <= ratio <= 4 / 3


def test_guess_values_are_geometric():
    vals = guess_values(64, 16, 0.5)
    assert vals[0] == pytest.approx(2.0) and vals[-1] >= 128
    ratios = np.array(vals[1:]) / np.array(vals[:-1])
    assert np.allclose(ratios, 1.05)


def test_matula_mincut_cycle():
    g = G.cycle(16)
    res = matula_mincut(g, 0.5, seed=0)
    assert res.cut.weight == 2
    assert G.cut_weight(g, res.cut.members) == 2


def test_matula_mincut_is_within_factor(dumbbell):
    res = matula_mincut(dumbbell, 0.5, seed=3)
    assert res.cut.weight <= (2 + 0.5) * 1
    assert res.ledger.total > 0 and res.guesses == len(guess_values(res.lambda_tilde, 10, 0.5))


def test_matula_sim_matches_replay():
    g = G.cycle(8)
    a = matula_mincut(g, 0.5, seed=2, engine="sim")
    b = matula_mincut(g, 0.5, seed=2, engine="replay")
    assert a.cut == b.cut and a.ledger.total == b.ledger.total
    assert a.sim.max_bits_per_edge_round <= 8 * math.ceil(math.log2(g.n))


def test_matula_no_cut(monkeypatch):
    import congestcut.matula as M

    monkeypatch.setattr(M, "matula_core", lambda *a, **k: M.CoreResult(None, 1, [], [], None, M.empty_result(), M.CostLedger(), 1, 1))
    with pytest.raises(NoCutFound):
        matula_mincut(G.cycle(6), 0.5, seed=0)
