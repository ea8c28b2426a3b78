"""Random edge sampling, random layering and the O(log n) connectivity estimate.

Weighted edges stand for parallel unit copies.  Sampling draws a binomial
number of copies per edge; layering only needs the smallest layer among an
edge's copies, which is drawn directly from its exact distribution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidParameter, InvalidProbability
from .graph import Cut, components, cut_weight, diameter, sample_edges
from .primitives import _budget, _check_engine, connectivity_test_multi
from .sim import CostLedger, PipedProgram, SimResult, empty_result, node_rng, run_sync

SEED_BITS = 63


def log2n(n):
    return math.log2(max(n, 2))


def _check_p(p):
    if not (0.0 <= p <= 1.0) or math.isnan(p):
        raise InvalidProbability(f"p must lie in [0, 1], got {p}")


# -- shared per-edge randomness ---------------------------------------------

class EdgeSeedProgram(PipedProgram):
    """The smaller endpoint of each edge draws a seed and sends it across."""

    def start(self):
        self.seeds = {}
        for eid, y, _ in sorted(self.ctx.neighbors):
            if self.ctx.node < y:
                s = int(self.ctx.rng.integers(1 << SEED_BITS))
                self.seeds[eid] = s
                self.send(eid, s, SEED_BITS)

    def on_data(self, eid, reader):
        val = reader.read(SEED_BITS)
        if val is not None:
            self.seeds[eid] = val

    def output(self):
        return self.seeds


def edge_seeds(g, seed, *, budget=None, engine="sim"):
    """One seed per edge, shared by both endpoints.

    Owners draw from their node stream in increasing edge-id order, so the
    replay engine reproduces the simulated seeds exactly.
    """
    _check_engine(engine)
    seeds = np.zeros(g.m, dtype=np.int64)
    if engine == "replay":
        owner = np.minimum(g.u, g.v)
        for x in np.unique(owner).tolist():
            rng = node_rng(seed, x)
            for eid in np.flatnonzero(owner == x).tolist():
                seeds[eid] = rng.integers(1 << SEED_BITS)
        return seeds, empty_result()
    res = run_sync(g, EdgeSeedProgram, _budget(g, budget), seed=seed)
    for x, out in res.outputs.items():
        for eid, s in out.items():
            seeds[eid] = s
    return seeds, res


def edge_uniforms(seeds, count):
    """``(count, m)`` uniforms; column ``e`` comes from edge ``e``'s own stream."""
    out = np.empty((count, len(seeds)))
    for eid, s in enumerate(seeds.tolist()):
        out[:, eid] = np.random.default_rng(s).random(count)
    return out


# -- random layering --------------------------------------------------------

@dataclass
class LayeringOutcome:
    g: object
    p: float
    L: int
    counts: np.ndarray  # sampled unit copies per edge
    first_layer: np.ndarray  # smallest layer among the copies, 0 if unsampled
    labels: np.ndarray  # (L, n): min-id component label in G_i = (V, S_{i-})
    weights: np.ndarray | None = None

    @property
    def M(self):
        return [len(np.unique(row)) for row in self.labels]

    @property
    def final_connected(self):
        return self.M[-1] == 1

    def prefix(self, i):
        """Edge mask of S_{i-}."""
        return (self.first_layer >= 1) & (self.first_layer <= i)

    def layer(self, i):
        """Edges whose first sampled copy sits in layer ``i``."""
        return self.first_layer == i

    @cached_property
    def family(self):
        """Deduplicated cuts (C, V-C) over the components of G_1..G_{L-1}."""
        seen, out = set(), []
        for i in range(1, self.L):
            row = self.labels[i - 1]
            if len(np.unique(row)) == 1:
                continue
            for lab in np.unique(row).tolist():
                members = frozenset(np.flatnonzero(row == lab).tolist())
                if members not in seen:
                    seen.add(members)
                    out.append(Cut(members, cut_weight(self.g, members, self.weights)))
        return out

    def min_family_weight(self):
        fam = self.family
        return min(c.weight for c in fam) if fam else math.inf


def _min_layer(rng, counts, L):
    """Smallest of ``counts`` uniform layers in 1..L, drawn by inversion."""
    out = np.zeros(len(counts), dtype=np.int64)
    hit = counts > 0
    if hit.any():
        u = rng.random(int(hit.sum()))
        x = 1.0 - (1.0 - u) ** (1.0 / counts[hit])
        out[hit] = np.minimum(np.floor(L * x).astype(np.int64) + 1, L)
    return out


def prefix_labels(g, first_layer, L):
    """Component labels of every prefix graph, by one union-find sweep over layers."""
    parent = np.arange(g.n)

    def find(a):
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    order = np.argsort(first_layer, kind="stable")
    layers = first_layer[order]
    us, vs = g.u[order].tolist(), g.v[order].tolist()
    out = np.empty((L, g.n), dtype=np.int64)
    pos = int(np.searchsorted(layers, 1))
    for i in range(1, L + 1):
        end = int(np.searchsorted(layers, i, side="right"))
        for k in range(pos, end):
            a, b = find(us[k]), find(vs[k])
            if a != b:
                # keep the smaller id as root so roots are min-id labels
                if a < b:
                    parent[b] = a
                else:
                    parent[a] = b
        pos = end
        out[i - 1] = [find(x) for x in range(g.n)]
    return out


def layering_experiment(g, p, L, seed=0, *, weights=None, rng=None) -> LayeringOutcome:
    """Sample unit copies with probability ``p`` and give each a uniform layer in 1..L."""
    _check_p(p)
    if L < 2:
        raise InvalidParameter("L must be >= 2")
    rng = rng if rng is not None else np.random.default_rng(seed)
    counts = sample_edges(g, p, rng, weights)
    first = _min_layer(rng, counts, L)
    labels = prefix_labels(g, first, L)
    return LayeringOutcome(g, p, L, counts, first, labels, weights)


def default_layers(n):
    return math.ceil(20 * log2n(n))


def connectivity_rate(g, p, L=None, trials=100, seed=0, *, weights=None):
    """Fraction of layering experiments whose full sample connects ``g``."""
    if trials < 1:
        raise InvalidParameter("trials must be >= 1")
    L = L or default_layers(g.n)
    hits = 0
    for t in range(trials):
        out = layering_experiment(g, p, L, rng=np.random.default_rng([seed, t]), weights=weights)
        hits += out.final_connected
    return hits / trials


# -- connectivity approximation ---------------------------------------------

@dataclass
class ApproxResult:
    lambda_tilde: float
    i_star: int
    rates: dict  # i -> fraction of connected samples at p = 2^-i
    trials: int
    instances: int
    sim: SimResult
    ledger: CostLedger = field(default_factory=CostLedger)
    fallback: bool = False

    def to_json(self):
        return {
            "lambda_tilde": self.lambda_tilde,
            "i_star": self.i_star,
            "rates": {str(k): v for k, v in self.rates.items()},
            "trials": self.trials,
            "instances": self.instances,
            "fallback": self.fallback,
            "measured_rounds": self.sim.rounds_used,
            "ledger_rounds": self.ledger.total,
        }


def approx_edge_connectivity(g, seed=0, *, c=4, budget=None, engine="replay", D=None) -> ApproxResult:
    """O(log n)-approximation of the edge connectivity, known at all nodes.

    For ``p = 2^-i`` with ``i = 1..i_max`` the algorithm tests
    ``c * ceil(log2 n)`` sampled subgraphs for connectivity, all in one
    pipelined batch.  ``i*`` is the largest ``i`` with at least 9/10 of its
    samples connected (``i* = 0`` when none qualifies, standing for ``p = 1``).
    Connectivity appears near ``p ~ log n / lambda``, so ``2^i*`` sits a log
    factor below lambda; the estimate is ``2 log2(n) 2^i*``.

    ``i_max = ceil(log2 d_min) + 1`` where ``d_min`` is the smallest weighted
    degree, an upper bound on lambda that every node can learn.
    """
    _check_engine(engine)
    if g.n < 2:
        raise InvalidParameter("need at least two nodes")
    d_min = int(g.weighted_degree().min())
    if d_min < 1:
        raise InvalidParameter("graph has an isolated node")
    i_max = max(1, math.ceil(math.log2(d_min)) + 1)
    trials = c * math.ceil(log2n(g.n))
    levels = np.repeat(np.arange(1, i_max + 1), trials)
    probs = 1.0 - (1.0 - 2.0 ** -levels[:, None].astype(float)) ** g.w[None, :]

    seeds, sim = edge_seeds(g, seed, budget=budget, engine=engine)
    masks = edge_uniforms(seeds, len(levels)) < probs
    test = connectivity_test_multi(g, list(masks), budget=budget, seed=seed, engine=engine)
    sim.merge(test.sim)
    ok = np.array(test.connected)

    rates = {}
    i_star = 0
    for i in range(1, i_max + 1):
        sel = ok[levels == i]
        rates[i] = float(sel.mean())
        if sel.sum() >= 0.9 * trials:
            i_star = i
    lam = 2.0 * log2n(g.n) * 2.0**i_star

    D = diameter(g) if D is None else D
    ledger = CostLedger()
    ledger.charge("thurimella_multi", D=D, n=g.n, k=len(levels))
    ledger.charge("connectivity_extra", D=D)
    return ApproxResult(lam, i_star, rates, trials, len(levels), sim, ledger, fallback=i_star == 0)
