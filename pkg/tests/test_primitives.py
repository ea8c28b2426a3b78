import numpy as np
import pytest
from hypothesis import given, settings

from congestcut import graph as G
from congestcut.primitives import (
    _kruskal,
    bfs_tree,
    broadcast,
    component_id_multi,
    connectivity_test_multi,
    convergecast_min,
    mst,
    sparse_certificate,
)

from conftest import multigraphs


def eccentricity(g, root):
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import shortest_path

    adj = coo_matrix((np.ones(g.m), (g.u, g.v)), shape=(g.n, g.n))
    return int(shortest_path(adj, directed=False, unweighted=True, indices=root).max())


@pytest.mark.parametrize("engine", ["sim", "replay"])
def test_bfs_examples(engine):
    t = bfs_tree(G.path_graph(5), 0, engine=engine)
    assert t.depth[4] == 4
    t = bfs_tree(G.complete(4), 2, engine=engine)
    assert max(t.depth.values()) <= 1
    t = bfs_tree(G.star(6), 3, engine=engine)
    assert t.depth[0] == 1 and all(t.depth[v] == 2 for v in (1, 2, 4, 5))


def test_bfs_disconnected_flags_unreached():
    g = G.Multigraph.from_edges(4, [(0, 1, 1), (2, 3, 1)])
    for engine in ("sim", "replay"):
        assert bfs_tree(g, 0, engine=engine).unreached == [2, 3]


@settings(max_examples=25, deadline=None)
@given(multigraphs(max_n=12))
def test_bfs_sim_matches_replay_and_round_bound(g):
    a = bfs_tree(g, 0, engine="sim")
    b = bfs_tree(g, 0, engine="replay")
    assert a.depth == b.depth and a.parent == b.parent
    assert a.sim.rounds_used <= eccentricity(g, 0) + 2
    for v, p in a.parent.items():
        if v != 0:
            assert a.depth[v] == a.depth[p] + 1


def test_convergecast_and_broadcast():
    g = G.path_graph(3)
    t = bfs_tree(g, 0)
    assert convergecast_min(g, t, [5, 3, 9])[0] == 3
    vals, _ = broadcast(g, t, 7)
    assert vals == {0: 7, 1: 7, 2: 7}
    one = G.Multigraph.from_edges(1, [])
    t1 = bfs_tree(one, 0)
    assert convergecast_min(one, t1, [11])[0] == 11


@pytest.mark.parametrize("engine", ["sim", "replay"])
def test_component_labels_examples(engine, dumbbell):
    g = G.cycle(6)
    labs = component_id_multi(g, [None, np.zeros(g.m, bool)], want_max=True, engine=engine).labels
    assert labs[0].label_min.tolist() == [0] * 6 and labs[0].label_max.tolist() == [5] * 6
    assert labs[1].label_min.tolist() == list(range(6))
    sub = np.ones(dumbbell.m, bool)
    sub[-1] = False
    lab = component_id_multi(dumbbell, [sub], engine=engine).labels[0]
    assert lab.label_min.tolist() == [0] * 5 + [5] * 5


@settings(max_examples=25, deadline=None)
@given(multigraphs(max_n=12))
def test_labels_sim_matches_oracle(g):
    rng = np.random.default_rng(g.m)
    inst = [rng.random(g.m) < 0.5 for _ in range(3)]
    res = component_id_multi(g, inst, want_max=True, engine="sim")
    for mask, lab in zip(inst, res.labels):
        assert (lab.label_min == G.components(g, mask)).all()
        assert (lab.label_max == G.components(g, mask, mode="max")).all()
    assert res.sim.max_bits_per_edge_round <= 2 * int(np.ceil(np.log2(max(g.n, 2)))) * 8


@pytest.mark.parametrize("engine", ["sim", "replay"])
def test_connectivity_examples(engine):
    g = G.cycle(8)
    minus1 = np.ones(g.m, bool)
    minus1[0] = False
    minus2 = minus1.copy()
    minus2[4] = False
    res = connectivity_test_multi(g, [None, np.zeros(g.m, bool), minus1, minus2], engine=engine)
    assert res.connected == [True, False, True, False]


def test_connectivity_costs_at_least_labeling():
    g = G.random_multigraph(np.random.default_rng(4), 14)
    inst = [np.random.default_rng(i).random(g.m) < 0.6 for i in range(4)]
    lab = component_id_multi(g, inst)
    conn = connectivity_test_multi(g, inst)
    assert conn.sim.rounds_used >= lab.sim.rounds_used
    assert conn.connected == [G.count_components(g, m) == 1 for m in inst]


@pytest.mark.parametrize("engine", ["sim", "replay"])
def test_mst_examples(engine):
    tri = G.Multigraph.from_edges(3, [(0, 1, 1), (1, 2, 2), (0, 2, 3)])
    assert sorted(tri.w[mst(tri, engine=engine).edges].tolist()) == [1, 2]
    tree = G.path_graph(6)
    assert mst(tree, engine=engine).edges.all()


def test_mst_matches_kruskal_on_random_graphs():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        g = G.random_multigraph(rng, 9, max_weight=20)
        got = mst(g, engine="sim").edges
        oracle = _kruskal(g, g.w)
        assert got.sum() == g.n - 1
        assert g.w[got].sum() == g.w[oracle].sum()


def test_certificate_examples():
    tree = G.path_graph(5)
    assert sparse_certificate(tree, G.edge_mask(tree), 1).edges.all()
    tri = G.complete(3)
    assert sparse_certificate(tri, G.edge_mask(tri), 2).size == 3
    k4 = G.complete(4)
    cert = sparse_certificate(k4, G.edge_mask(k4), 1)
    assert cert.size == 3
    assert G.count_components(k4, cert.edges) == 1


@settings(max_examples=25, deadline=None)
@given(multigraphs(max_n=9, max_weight=4))
def test_certificate_invariants(g):
    rng = np.random.default_rng(g.n * 31 + g.m)
    base = rng.random(g.m) < 0.3
    k = int(rng.integers(1, 5))
    sim = sparse_certificate(g, base, k, engine="sim")
    rep = sparse_certificate(g, base, k, engine="replay")
    assert (sim.counts == rep.counts).all()
    assert not (sim.edges & base).any()
    assert (sim.counts <= g.w).all()
    assert sim.size <= k * G.count_components(g, base)
    # every cut of the quotient keeps min(k, weight) copies
    if G.count_components(g, base) >= 2:
        full = G.all_cut_weights(g)
        kept = G.all_cut_weights(g, sim.counts)
        labels = G.components(g, base)
        codes = np.arange(full.size)
        # only bipartitions that do not split a contracted component
        bits = (codes[:, None] >> np.arange(g.n - 1)) & 1
        bits = np.hstack([bits, np.zeros((codes.size, 1), dtype=bits.dtype)])
        whole = np.ones(codes.size, bool)
        for lab in np.unique(labels):
            cols = bits[:, labels == lab]
            whole &= (cols.min(axis=1) == cols.max(axis=1))
        ok = kept[whole] >= np.minimum(k, full[whole])
        assert ok.all()
