"""Distributed building blocks executed on the simulator.

Each primitive takes ``engine="sim"`` (node programs exchanging bit strings
under the budget) or ``engine="replay"`` (the same outputs computed
centrally, used by the bulk experiment loops).  Both engines produce
identical outputs; the test suite checks this on random graphs.

The sublinear component-identification algorithm is not reproduced round for round.
Labels are computed by pipelined min/max flooding and the analytical
``O(D + k sqrt(n) log* n)`` cost is charged to the ledger instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import _as_mask, components
from .sim import (
    BitBudget,
    CostLedger,
    PipedProgram,
    SimResult,
    empty_result,
    id_width,
    run_sync,
)

ENGINES = ("sim", "replay")


def _check_engine(engine):
    if engine not in ENGINES:
        raise ValueError(f"engine must be one of {ENGINES}, not {engine!r}")


def _budget(g, budget):
    return budget or BitBudget.for_graph(g)


# -- generic node programs --------------------------------------------------

class ExchangeProgram(PipedProgram):
    """Send one fixed-width record on selected edges and collect the replies.

    Input: ``{"send": {eid: (value, width)}, "recv": {eid: width}}``.
    Output: ``{eid: value}`` for every edge listed under ``recv``.
    """

    def start(self):
        inp = self.ctx.input
        self.expect = dict(inp.get("recv", {}))
        self.got = {}
        for eid, (value, width) in inp.get("send", {}).items():
            self.send(eid, value, width)

    def on_data(self, eid, reader):
        width = self.expect.get(eid)
        if width is not None and eid not in self.got:
            value = reader.read(width)
            if value is not None:
                self.got[eid] = value

    def output(self):
        return self.got


class FloodProgram(PipedProgram):
    """Pipelined min (or max) flooding for ``k`` independent instances.

    Input keys: ``values`` (initial value per instance), ``edges``
    (``{eid: [instances containing eid]}``), ``width`` (value bits), ``k``
    and ``op`` (``"min"`` or ``"max"``).  A record is ``(instance, value)``;
    queued updates for the same instance are merged before they leave.
    """

    def start(self):
        inp = self.ctx.input
        self.values = list(inp["values"])
        self.better = (lambda a, b: a < b) if inp.get("op", "min") == "min" else (lambda a, b: a > b)
        k = inp["k"]
        self.idx_w = (k - 1).bit_length()
        self.val_w = inp["width"]
        self.rec_w = self.idx_w + self.val_w
        self.inst_adj = [[] for _ in range(k)]
        self.pending = {eid: {} for eid in self.pipes}
        for eid, insts in inp["edges"].items():
            pend = self.pending[eid]
            for i in insts:
                self.inst_adj[i].append(eid)
                pend[i] = self.values[i]

    def on_data(self, eid, reader):
        idx_mask = (1 << self.idx_w) - 1
        while True:
            rec = reader.read(self.rec_w)
            if rec is None:
                return
            i, val = rec & idx_mask, rec >> self.idx_w
            if self.better(val, self.values[i]):
                self.values[i] = val
                for f in self.inst_adj[i]:
                    if f != eid:
                        self.pending[f][i] = val

    def refill(self, eid, pipe):
        pend = self.pending[eid]
        budget = self.ctx.allowance[eid]
        while pend and pipe.pending_bits() < budget:
            i = next(iter(pend))
            val = pend.pop(i)
            pipe.push(i | (val << self.idx_w), self.rec_w)

    def busy(self):
        return super().busy() or any(self.pending.values())

    def output(self):
        return self.values


class MaskFloodProgram(PipedProgram):
    """OR-flood a ``width``-bit mask over the given edges."""

    def start(self):
        inp = self.ctx.input
        self.mask = int(inp["mask"])
        self.width = inp["width"]
        self.allowed = set(inp["edges"])
        self.known = {eid: 0 for eid in self.allowed}

    def on_data(self, eid, reader):
        while True:
            val = reader.read(self.width)
            if val is None:
                return
            self.mask |= val
            if eid in self.known:
                self.known[eid] |= val

    def refill(self, eid, pipe):
        if eid in self.allowed and not pipe and self.mask & ~self.known[eid]:
            pipe.push(self.mask, self.width)
            self.known[eid] = self.mask

    def busy(self):
        return super().busy() or any(self.mask & ~k for k in self.known.values())

    def output(self):
        return self.mask


class BFSProgram(PipedProgram):
    """BFS from a known root; a record is ``(depth, you-are-my-parent flag)``."""

    def start(self):
        self.root = self.ctx.input["root"]
        self.dw = id_width(self.ctx.n)
        self.depth = None
        self.parent = None
        self.parent_edge = None
        self.children = []
        self.offers = []
        if self.ctx.node == self.root:
            self.depth = 0
            self.announce()

    def announce(self):
        for eid in self.pipes:
            flag = 1 if eid == self.parent_edge else 0
            self.send(eid, self.depth | (flag << self.dw), self.dw + 1)

    def on_data(self, eid, reader):
        rec = reader.read(self.dw + 1)
        if rec is None:
            return
        depth, flag = rec & ((1 << self.dw) - 1), rec >> self.dw
        if flag:
            self.children.append(eid)
        self.offers.append((depth, self.nbr[eid], eid))

    def after_receive(self, rnd):
        if self.depth is None and self.offers:
            depth, parent, eid = min(self.offers)
            self.depth, self.parent, self.parent_edge = depth + 1, parent, eid
            self.announce()
        self.offers = []

    def output(self):
        return {
            "depth": self.depth,
            "parent": self.parent,
            "parent_edge": self.parent_edge,
            "children": sorted(self.children),
        }


class ConvergecastProgram(PipedProgram):
    """Min-aggregate values up a tree; the root outputs the minimum."""

    def start(self):
        inp = self.ctx.input
        self.value = inp["value"]
        self.width = inp["width"]
        self.parent_edge = inp["parent_edge"]
        self.waiting = set(inp["children"])
        self.maybe_report()

    def maybe_report(self):
        if not self.waiting and self.parent_edge is not None:
            self.send(self.parent_edge, self.value, self.width)
            self.parent_edge = None

    def on_data(self, eid, reader):
        val = reader.read(self.width)
        if val is not None and eid in self.waiting:
            self.value = min(self.value, val)
            self.waiting.discard(eid)
            self.maybe_report()

    def busy(self):
        return super().busy() or bool(self.waiting)

    def output(self):
        return self.value


class BroadcastProgram(PipedProgram):
    """Push the root's value down a tree."""

    def start(self):
        inp = self.ctx.input
        self.width = inp["width"]
        self.children = inp["children"]
        self.parent_edge = inp["parent_edge"]
        self.value = inp.get("value")
        if self.ctx.node == inp["root"]:
            self.forward()

    def forward(self):
        for eid in self.children:
            self.send(eid, self.value, self.width)

    def on_data(self, eid, reader):
        val = reader.read(self.width)
        if val is not None and eid == self.parent_edge:
            self.value = val
            self.forward()

    def output(self):
        return self.value


# -- BFS, convergecast, broadcast ------------------------------------------

@dataclass
class BFSTree:
    root: int
    parent: dict
    parent_edge: dict
    depth: dict
    children: dict
    sim: SimResult

    @property
    def unreached(self):
        return sorted(v for v, d in self.depth.items() if d is None)

    @property
    def height(self):
        return max(d for d in self.depth.values() if d is not None)


def bfs_tree(g, root=0, *, budget=None, seed=0, engine="sim") -> BFSTree:
    _check_engine(engine)
    if engine == "replay":
        return _bfs_replay(g, root)
    res = run_sync(g, BFSProgram, _budget(g, budget), seed=seed, inputs=[{"root": root}] * g.n)
    out = res.outputs
    return BFSTree(
        root,
        {v: o["parent"] for v, o in out.items()},
        {v: o["parent_edge"] for v, o in out.items()},
        {v: o["depth"] for v, o in out.items()},
        {v: o["children"] for v, o in out.items()},
        res,
    )


def _bfs_replay(g, root):
    adj = g.adjacency()
    depth = {v: None for v in range(g.n)}
    parent = {v: None for v in range(g.n)}
    pedge = {v: None for v in range(g.n)}
    children = {v: [] for v in range(g.n)}
    depth[root] = 0
    frontier = [root]
    while frontier:
        offers = {}
        for x in frontier:
            for eid, y in adj[x]:
                if depth[y] is None:
                    cand = (depth[x], x, eid)
                    if y not in offers or cand < offers[y]:
                        offers[y] = cand
        frontier = sorted(offers)
        for y in frontier:
            d, x, eid = offers[y]
            depth[y], parent[y], pedge[y] = d + 1, x, eid
            children[x].append(eid)
    for x in children:
        children[x].sort()
    return BFSTree(root, parent, pedge, depth, children, empty_result())


def convergecast_min(g, tree, values, width=None, *, budget=None, seed=0, engine="sim"):
    """Minimum of ``values`` over the tree's nodes, known at the root."""
    _check_engine(engine)
    reached = [v for v in range(g.n) if tree.depth[v] is not None]
    if engine == "replay":
        return min(int(values[v]) for v in reached), empty_result()
    width = width or max(1, max(int(values[v]) for v in reached).bit_length())
    inputs = [
        {
            "value": int(values[v]),
            "width": width,
            "parent_edge": tree.parent_edge[v],
            "children": tree.children[v],
        }
        for v in range(g.n)
    ]
    res = run_sync(g, ConvergecastProgram, _budget(g, budget), seed=seed, inputs=inputs)
    return res.outputs[tree.root], res


def broadcast(g, tree, value, width=None, *, budget=None, seed=0, engine="sim"):
    """Deliver the root's ``value`` to every node of the tree."""
    _check_engine(engine)
    if engine == "replay":
        return {v: value for v in range(g.n) if tree.depth[v] is not None}, empty_result()
    width = width or max(1, int(value).bit_length())
    inputs = [
        {
            "root": tree.root,
            "value": int(value) if v == tree.root else None,
            "width": width,
            "parent_edge": tree.parent_edge[v],
            "children": tree.children[v],
        }
        for v in range(g.n)
    ]
    res = run_sync(g, BroadcastProgram, _budget(g, budget), seed=seed, inputs=inputs)
    return {v: o for v, o in res.outputs.items() if tree.depth[v] is not None}, res


# -- component identification ----------------------------------------------

@dataclass
class ComponentLabels:
    label_min: np.ndarray
    label_max: np.ndarray | None = None
    instance: int = 0


@dataclass
class MultiLabels:
    labels: list
    sim: SimResult
    instances: int


def _instance_masks(g, instances):
    return [_as_mask(g, inst) for inst in instances]


def flood_values(g, masks, initial, width, op="min", *, budget=None, seed=0, engine="sim"):
    """Per instance, the min (max) of ``initial`` values over each component.

    ``initial`` has shape ``(k, n)``.  Returns a ``(k, n)`` array and the
    simulation record.
    """
    initial = np.asarray(initial, dtype=np.int64)
    k = len(masks)
    if engine == "replay" or k == 0:
        out = np.empty_like(initial)
        for i, mask in enumerate(masks):
            comp = components(g, mask)
            agg = {}
            for node, c in enumerate(comp.tolist()):
                val = int(initial[i, node])
                if c not in agg or (val < agg[c] if op == "min" else val > agg[c]):
                    agg[c] = val
            out[i] = [agg[c] for c in comp.tolist()]
        return out, empty_result()
    adj = g.adjacency()
    stacked = np.array(masks) if k else np.zeros((0, g.m), dtype=bool)
    inputs = []
    for x in range(g.n):
        edges = {eid: np.flatnonzero(stacked[:, eid]).tolist() for eid, _ in adj[x]}
        inputs.append({"values": initial[:, x].tolist(), "edges": edges, "width": width, "k": k, "op": op})
    res = run_sync(g, FloodProgram, _budget(g, budget), seed=seed, inputs=inputs)
    out = np.array([res.outputs[x] for x in range(g.n)], dtype=np.int64).T
    return out.reshape(k, g.n), res


def component_id_multi(g, instances, *, want_max=False, initial=None, budget=None, seed=0, engine="sim") -> MultiLabels:
    """Label the components of every instance subgraph ``(V, E_i)``.

    ``initial`` optionally replaces node ids as the starting labels (the cut
    tester floods component ids this way).
    """
    _check_engine(engine)
    masks = _instance_masks(g, instances)
    k = len(masks)
    if initial is None:
        initial = np.tile(np.arange(g.n), (k, 1))
    width = id_width(g.n)
    lo, res = flood_values(g, masks, initial, width, "min", budget=budget, seed=seed, engine=engine)
    hi = None
    if want_max:
        hi, res2 = flood_values(g, masks, initial, width, "max", budget=budget, seed=seed, engine=engine)
        res.merge(res2)
    labels = [ComponentLabels(lo[i], None if hi is None else hi[i], i) for i in range(k)]
    return MultiLabels(labels, res, k)


def exchange(g, send, recv, *, budget=None, seed=0):
    """One-shot record exchange; ``send[x] = {eid: (value, width)}``, ``recv[x] = {eid: width}``."""
    inputs = [{"send": send[x], "recv": recv[x]} for x in range(g.n)]
    return run_sync(g, ExchangeProgram, _budget(g, budget), seed=seed, inputs=inputs)


def mask_flood(g, masks, width, edge_sets, *, budget=None, seed=0):
    inputs = [{"mask": masks[x], "width": width, "edges": edge_sets[x]} for x in range(g.n)]
    return run_sync(g, MaskFloodProgram, _budget(g, budget), seed=seed, inputs=inputs)


@dataclass
class ConnectivityResult:
    connected: list
    labels: MultiLabels
    sim: SimResult
    agreed: bool = True


def connectivity_test_multi(g, instances, *, budget=None, seed=0, engine="sim") -> ConnectivityResult:
    """Decide, for each instance, whether ``(V, E_i)`` is connected.

    After labeling, neighbors compare labels across every edge of ``g``; a
    mismatch raises that instance's "not connected" bit, which is then
    OR-flooded over ``g`` so every node holds the same verdict.
    """
    _check_engine(engine)
    masks = _instance_masks(g, instances)
    k = len(masks)
    labels = component_id_multi(g, masks, budget=budget, seed=seed, engine=engine)
    if engine == "replay" or k == 0:
        connected = [bool(lab.label_min.max() == lab.label_min.min()) for lab in labels.labels]
        return ConnectivityResult(connected, labels, labels.sim)

    width = id_width(g.n)
    adj = g.adjacency()
    lab = np.array([x.label_min for x in labels.labels])  # (k, n)
    packed = []
    for x in range(g.n):
        v = 0
        for i in range(k):
            v |= int(lab[i, x]) << (i * width)
        packed.append(v)
    send = [{eid: (packed[x], k * width) for eid, _ in adj[x]} for x in range(g.n)]
    recv = [{eid: k * width for eid, _ in adj[x]} for x in range(g.n)]
    res_x = exchange(g, send, recv, budget=budget, seed=seed)
    flags = []
    for x in range(g.n):
        bad = 0
        for eid, y in adj[x]:
            theirs = res_x.outputs[x][eid]
            for i in range(k):
                if (theirs >> (i * width)) & ((1 << width) - 1) != lab[i, x]:
                    bad |= 1 << i
        flags.append(bad)
    res_f = mask_flood(g, flags, k, [[eid for eid, _ in adj[x]] for x in range(g.n)], budget=budget, seed=seed)
    sim = labels.sim
    sim.merge(res_x).merge(res_f)
    views = [res_f.outputs[x] for x in range(g.n)]
    agreed = len(set(views)) == 1
    connected = [not (views[0] >> i) & 1 for i in range(k)]
    return ConnectivityResult(connected, labels, sim, agreed)


# -- minimum spanning forest ------------------------------------------------

@dataclass
class MSTResult:
    edges: np.ndarray  # bool mask over edge ids
    sim: SimResult
    phases: int = 0

    @property
    def ids(self):
        return np.flatnonzero(self.edges)


def _kruskal(g, weights):
    order = np.lexsort((np.arange(g.m), weights))
    parent = list(range(g.n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    mask = np.zeros(g.m, dtype=bool)
    us, vs = g.u.tolist(), g.v.tolist()
    for eid in order.tolist():
        a, b = find(us[eid]), find(vs[eid])
        if a != b:
            parent[a] = b
            mask[eid] = True
    return mask


def mst(g, weights=None, *, budget=None, seed=0, engine="sim") -> MSTResult:
    """Minimum spanning forest with ties broken by edge id.

    The simulated version is synchronous Borůvka: per phase, fragments learn
    their neighbors' fragment ids, flood the fragment's lightest outgoing
    ``(weight, edge id)``, mark it, and relabel by flooding the minimum node
    id over tree edges.  ``ceil(log2 n)`` phases suffice.
    """
    _check_engine(engine)
    w = g.w if weights is None else np.asarray(weights, dtype=np.int64)
    if engine == "replay" or g.n < 2:
        return MSTResult(_kruskal(g, w), empty_result())

    budget = _budget(g, budget)
    adj = g.adjacency()
    idw = id_width(g.n)
    eid_w = id_width(g.m)
    key_w = max(1, int(w.max()).bit_length()) + eid_w + 1
    none_key = (1 << key_w) - 1
    fid = list(range(g.n))
    tree = np.zeros(g.m, dtype=bool)
    sim = empty_result()
    phases = math.ceil(math.log2(g.n))
    w_list = w.tolist()
    for _ in range(phases):
        send = [{eid: (fid[x], idw) for eid, _ in adj[x]} for x in range(g.n)]
        recv = [{eid: idw for eid, _ in adj[x]} for x in range(g.n)]
        res = exchange(g, send, recv, budget=budget, seed=seed)
        sim.merge(res)
        cand = []
        for x in range(g.n):
            best = none_key
            for eid, _ in adj[x]:
                if res.outputs[x][eid] != fid[x]:
                    best = min(best, (w_list[eid] << eid_w) | eid)
            cand.append(best)
        tree_masks = [tree]
        moe, res = flood_values(g, tree_masks, [cand], key_w, "min", budget=budget, seed=seed)
        sim.merge(res)
        moe = moe[0]
        send, recv = [], []
        for x in range(g.n):
            s, r = {}, {}
            key = int(moe[x])
            chosen = None if key == none_key else key & ((1 << eid_w) - 1)
            for eid, _ in adj[x]:
                r[eid] = 1
                if eid == chosen:
                    s[eid] = (1, 1)
            send.append(s)
            recv.append(r)
        res = exchange(g, send, recv, budget=budget, seed=seed)
        sim.merge(res)
        for x in range(g.n):
            for eid, (flag, _) in send[x].items():
                tree[eid] = True
            for eid in res.outputs[x]:
                tree[eid] = True
        labels, res = flood_values(g, [tree], [list(range(g.n))], idw, "min", budget=budget, seed=seed)
        sim.merge(res)
        fid = labels[0].tolist()
    return MSTResult(tree, sim, phases)


# -- sparse certificates ----------------------------------------------------

@dataclass
class Certificate:
    counts: np.ndarray  # unit copies of each edge inside E*
    k: int
    base: np.ndarray  # E_c mask
    sim: SimResult = field(default_factory=empty_result)
    ledger: CostLedger = field(default_factory=CostLedger)

    @property
    def edges(self):
        return self.counts > 0

    @property
    def size(self):
        return int(self.counts.sum())


def certificate_mst_weights(base, counts, weights):
    """Edge weights for one certificate iteration.

    Contracted edges cost 0, edges with a copy not yet in E* cost 1, fully
    chosen edges cost 2, and zero-weight communication-only links cost 3.
    """
    mst_w = np.where(counts < weights, 1, 2)
    mst_w = np.where(weights == 0, 3, mst_w)
    return np.where(base, 0, mst_w)


def sparse_certificate(g, contracted, k, weights=None, *, budget=None, seed=0, engine="sim", D=None) -> Certificate:
    """Certificate for ``k``-edge-connectivity of ``g`` with ``contracted`` merged.

    ``k`` spanning-forest iterations; each adds one unit copy of every
    chosen non-contracted edge that still has a copy outside E*.
    """
    _check_engine(engine)
    if k < 1:
        raise ValueError("certificate parameter k must be >= 1")
    w = g.w if weights is None else np.asarray(weights, dtype=np.int64)
    base = _as_mask(g, contracted)
    counts = np.zeros(g.m, dtype=np.int64)
    sim = empty_result()
    for _ in range(int(k)):
        t = mst(g, certificate_mst_weights(base, counts, w), budget=budget, seed=seed, engine=engine)
        sim.merge(t.sim)
        add = t.edges & ~base & (counts < w)
        counts[add] += 1
    ledger = CostLedger()
    if D is not None:
        ledger.charge("certificate", D=D, n=g.n, k=int(k))
    return Certificate(counts, int(k), base, sim, ledger)
