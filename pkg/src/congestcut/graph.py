"""Weighted multigraphs, cuts and centralized oracles.

Every algorithm in the package runs on a :class:`Multigraph`: nodes are the
integers ``0..n-1`` and each edge carries a positive integer weight.  A weight
``w`` edge is interchangeable with ``w`` parallel unit edges; sampling code
works on those unit copies through per-edge multiplicity arrays instead of
materializing them.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .errors import InvalidCut, InvalidGraph, InvalidProbability, SizeLimit

WEIGHT_EXPONENT = 3
BRUTEFORCE_MAX_N = 20


@dataclass(frozen=True, eq=False)
class Multigraph:
    n: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    _adj: list = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for name in ("u", "v", "w"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.int64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_edges(cls, n, edges, *, weight_exponent=WEIGHT_EXPONENT, validate=True):
        """Build from ``(u, v)`` or ``(u, v, w)`` tuples; edge ids follow list order."""
        edges = list(edges)
        u = np.array([e[0] for e in edges], dtype=np.int64)
        v = np.array([e[1] for e in edges], dtype=np.int64)
        w = np.array([e[2] if len(e) > 2 else 1 for e in edges], dtype=np.int64)
        g = cls(int(n), u, v, w)
        if validate:
            g.validate(weight_exponent)
        return g

    def validate(self, weight_exponent=WEIGHT_EXPONENT):
        if self.n < 1:
            raise InvalidGraph("graph needs at least one node")
        if not (len(self.u) == len(self.v) == len(self.w)):
            raise InvalidGraph("edge arrays differ in length")
        if self.m == 0:
            return
        if self.u.min() < 0 or self.v.min() < 0 or max(self.u.max(), self.v.max()) >= self.n:
            raise InvalidGraph("edge endpoint outside 0..n-1")
        if np.any(self.u == self.v):
            raise InvalidGraph("self-loops are not allowed")
        if self.w.min() < 1:
            raise InvalidGraph("edge weights must be >= 1")
        cap = max(self.n, 2) ** weight_exponent
        if self.w.max() > cap:
            raise InvalidGraph(f"edge weight {int(self.w.max())} exceeds n^{weight_exponent} = {cap}")

    @property
    def m(self) -> int:
        return len(self.u)

    @property
    def total_weight(self) -> int:
        return int(self.w.sum())

    def edges(self):
        return [(int(a), int(b), int(c)) for a, b, c in zip(self.u, self.v, self.w)]

    def adjacency(self):
        """Per node, the list of ``(edge_id, neighbor)`` in increasing edge id."""
        if self._adj is None:
            adj = [[] for _ in range(self.n)]
            for eid, (a, b) in enumerate(zip(self.u.tolist(), self.v.tolist())):
                adj[a].append((eid, b))
                adj[b].append((eid, a))
            object.__setattr__(self, "_adj", adj)
        return self._adj

    def weighted_degree(self, weights=None):
        w = self.w if weights is None else np.asarray(weights)
        deg = np.zeros(self.n, dtype=np.int64)
        np.add.at(deg, self.u, w)
        np.add.at(deg, self.v, w)
        return deg

    def with_weights(self, weights):
        return Multigraph(self.n, self.u, self.v, np.asarray(weights, dtype=np.int64))

    def __repr__(self):
        return f"Multigraph(n={self.n}, m={self.m}, W={self.total_weight})"


@dataclass(frozen=True)
class Cut:
    members: frozenset
    weight: int

    @classmethod
    def of(cls, g, members, weights=None):
        members = frozenset(int(x) for x in members)
        return cls(members, cut_weight(g, members, weights))

    def partition(self, n):
        """Unordered ``{C, V-C}`` so that complementary cuts compare equal."""
        other = frozenset(range(n)) - self.members
        return frozenset((self.members, other))

    def to_json(self):
        return {"members": sorted(self.members), "weight": int(self.weight)}


def _as_mask(g, sub):
    if sub is None:
        return np.ones(g.m, dtype=bool)
    sub = np.asarray(sub)
    if sub.dtype == bool:
        if sub.shape != (g.m,):
            raise ValueError("edge mask must have one entry per edge")
        return sub
    mask = np.zeros(g.m, dtype=bool)
    if sub.size:
        mask[sub.astype(np.int64)] = True
    return mask


def edge_mask(g, ids=()):
    return _as_mask(g, np.asarray(list(ids), dtype=np.int64))


def _membership(g, members):
    inside = np.zeros(g.n, dtype=bool)
    idx = np.fromiter(members, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= g.n):
        raise InvalidCut("cut member outside 0..n-1")
    inside[idx] = True
    return inside


def cut_weight(g, members, weights=None) -> int:
    inside = _membership(g, members)
    k = int(inside.sum())
    if k == 0 or k == g.n:
        raise InvalidCut("a cut needs a nonempty proper node subset")
    w = g.w if weights is None else np.asarray(weights)
    crossing = inside[g.u] != inside[g.v]
    return int(w[crossing].sum())


def min_cut_exact(g, weights=None) -> Cut:
    """Stoer-Wagner minimum cut on the dense weight matrix.

    Parallel edges are merged by summing.  On a disconnected graph the
    component of node 0 is returned with weight 0.
    """
    if g.n < 2:
        raise InvalidCut("minimum cut needs at least two nodes")
    w = g.w if weights is None else np.asarray(weights, dtype=np.int64)
    labels = components(g, w > 0)
    if labels.max() != 0:
        side = frozenset(np.flatnonzero(labels == 0).tolist())
        return Cut(side, cut_weight(g, side, w))

    mat = np.zeros((g.n, g.n), dtype=np.int64)
    np.add.at(mat, (g.u, g.v), w)
    np.add.at(mat, (g.v, g.u), w)
    groups = [[i] for i in range(g.n)]
    alive = list(range(g.n))
    best_weight, best_side = None, None
    while len(alive) > 1:
        sub = mat[np.ix_(alive, alive)]
        added = np.zeros(len(alive), dtype=bool)
        conn = np.zeros(len(alive), dtype=np.int64)
        prev = last = 0
        for step in range(len(alive)):
            cand = np.where(added, -1, conn)
            prev, last = last, int(np.argmax(cand))
            if step == len(alive) - 1:
                phase_weight = int(conn[last])
            added[last] = True
            conn += sub[last]
        s, t = alive[prev], alive[last]
        if best_weight is None or phase_weight < best_weight:
            best_weight, best_side = phase_weight, list(groups[t])
        mat[s, :] += mat[t, :]
        mat[:, s] += mat[:, t]
        mat[s, s] = 0
        groups[s].extend(groups[t])
        alive.remove(t)
    return Cut(frozenset(best_side), int(best_weight))


def min_cut_bruteforce(g, weights=None) -> Cut:
    """Exhaustive minimum cut over all ``2^(n-1) - 1`` bipartitions."""
    if g.n > BRUTEFORCE_MAX_N:
        raise SizeLimit(f"brute force limited to n <= {BRUTEFORCE_MAX_N}, got {g.n}")
    if g.n < 2:
        raise InvalidCut("minimum cut needs at least two nodes")
    w = g.w if weights is None else np.asarray(weights, dtype=np.int64)
    # node n-1 always sits outside C, so each bipartition is seen once
    best_weight, best_code = None, None
    total = 1 << (g.n - 1)
    chunk = 1 << 16
    for start in range(1, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bu = (codes[:, None] >> g.u[None, :]) & 1
        bv = (codes[:, None] >> g.v[None, :]) & 1
        weights_ = ((bu != bv) * w[None, :]).sum(axis=1)
        i = int(np.argmin(weights_))
        if best_weight is None or weights_[i] < best_weight:
            best_weight, best_code = int(weights_[i]), int(codes[i])
    members = frozenset(i for i in range(g.n - 1) if best_code >> i & 1)
    return Cut(members, best_weight)


def all_cut_weights(g, weights=None):
    """Weights of every bipartition, indexed by the bitmask of C (node n-1 outside)."""
    if g.n > BRUTEFORCE_MAX_N:
        raise SizeLimit(f"enumeration limited to n <= {BRUTEFORCE_MAX_N}")
    w = g.w if weights is None else np.asarray(weights, dtype=np.int64)
    codes = np.arange(1 << (g.n - 1), dtype=np.int64)
    out = np.zeros(codes.size, dtype=np.int64)
    for a, b, c in zip(g.u.tolist(), g.v.tolist(), w.tolist()):
        out += (((codes >> a) ^ (codes >> b)) & 1) * c
    return out


def components(g, sub=None, mode="min") -> np.ndarray:
    """Component label per node: the minimum (or maximum) node id of its component."""
    mask = _as_mask(g, sub)
    if g.m and mask.any():
        adj = coo_matrix(
            (np.ones(int(mask.sum())), (g.u[mask], g.v[mask])), shape=(g.n, g.n)
        )
        _, comp = connected_components(adj, directed=False)
    else:
        comp = np.arange(g.n)
    ids = np.arange(g.n)
    ncomp = comp.max() + 1
    if mode == "min":
        rep = np.full(ncomp, g.n, dtype=np.int64)
        np.minimum.at(rep, comp, ids)
    elif mode == "max":
        rep = np.full(ncomp, -1, dtype=np.int64)
        np.maximum.at(rep, comp, ids)
    else:
        raise ValueError(f"mode must be 'min' or 'max', not {mode!r}")
    return rep[comp]


def count_components(g, sub=None) -> int:
    return len(np.unique(components(g, sub)))


def component_sets(labels):
    """Group nodes by label, ordered by label."""
    groups = {}
    for node, lab in enumerate(np.asarray(labels).tolist()):
        groups.setdefault(lab, []).append(node)
    return {lab: frozenset(nodes) for lab, nodes in sorted(groups.items())}


def contract(g, contracted, weights=None):
    """Merge the endpoints of ``contracted`` edges into supernodes.

    Supernodes are numbered by increasing minimum original id.  Returns the
    quotient multigraph (non-internal edges keep their weights, as parallel
    edges) and the node -> supernode map.
    """
    mask = _as_mask(g, contracted)
    labels = components(g, mask)
    reps = np.unique(labels)
    mapping = np.searchsorted(reps, labels)
    keep = mapping[g.u] != mapping[g.v]
    w = g.w if weights is None else np.asarray(weights, dtype=np.int64)
    q = Multigraph(len(reps), mapping[g.u][keep], mapping[g.v][keep], w[keep])
    return q, mapping


def sample_edges(g, p, rng, weights=None) -> np.ndarray:
    """Sample every unit copy independently with probability ``p``.

    Returns the number of sampled copies of each edge.  Drawing a binomial
    count per edge is the same distribution as one coin per copy.
    """
    if not (0.0 <= p <= 1.0) or math.isnan(p):
        raise InvalidProbability(f"p must lie in [0, 1], got {p}")
    w = g.w if weights is None else np.asarray(weights, dtype=np.int64)
    return rng.binomial(w, p).astype(np.int64)


def diameter(g, sub=None):
    """Hop diameter of ``(V, sub)``; ``math.inf`` when disconnected."""
    if g.n <= 1:
        return 0
    mask = _as_mask(g, sub)
    adj = coo_matrix((np.ones(int(mask.sum())), (g.u[mask], g.v[mask])), shape=(g.n, g.n))
    if count_components(g, mask) > 1:
        return math.inf
    dist = shortest_path(adj, method="D", directed=False, unweighted=True)
    return int(dist.max())


def lambda_of(g, weights=None) -> int:
    return min_cut_exact(g, weights).weight


# -- graph file format ------------------------------------------------------

def dumps_graph(g) -> str:
    lines = [f"{g.n} {g.m}"]
    lines += [f"{a} {b} {c}" for a, b, c in g.edges()]
    return "\n".join(lines) + "\n"


def loads_graph(text, *, weight_exponent=WEIGHT_EXPONENT) -> Multigraph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 2:
        raise InvalidGraph("first line must be 'n m'")
    n, m = int(rows[0][0]), int(rows[0][1])
    body = rows[1:]
    if len(body) != m:
        raise InvalidGraph(f"header announces {m} edges, found {len(body)}")
    edges = []
    for row in body:
        if len(row) != 3:
            raise InvalidGraph(f"edge line must be 'u v w': {' '.join(row)}")
        edges.append(tuple(int(x) for x in row))
    return Multigraph.from_edges(n, edges, weight_exponent=weight_exponent)


def write_graph(g, path, sidecar=None):
    path = Path(path)
    path.write_text(dumps_graph(g))
    if sidecar is not None:
        path.with_suffix(path.suffix + ".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True))


def read_graph(path, **kw) -> Multigraph:
    return loads_graph(Path(path).read_text(), **kw)


# -- small standard graphs ---------------------------------------------------

def cycle(n, multiplicity=1):
    """n-cycle whose edges all have weight ``multiplicity`` (lambda = 2 * multiplicity)."""
    return Multigraph.from_edges(n, [(i, (i + 1) % n, multiplicity) for i in range(n)])


def path_graph(n, weights=None):
    weights = weights or [1] * (n - 1)
    return Multigraph.from_edges(n, [(i, i + 1, weights[i]) for i in range(n - 1)])


def complete(n, weight=1):
    return Multigraph.from_edges(n, [(a, b, weight) for a, b in combinations(range(n), 2)])


def star(n):
    return Multigraph.from_edges(n, [(0, i, 1) for i in range(1, n)])


def dumbbell(clique=5, bridge=1):
    """Two cliques on ``0..c-1`` and ``c..2c-1`` joined by the edge ``(c-1, c)``."""
    edges = [(a, b, 1) for a, b in combinations(range(clique), 2)]
    edges += [(a + clique, b + clique, 1) for a, b in combinations(range(clique), 2)]
    edges.append((clique - 1, clique, bridge))
    return Multigraph.from_edges(2 * clique, edges)


def random_multigraph(rng, n, m=None, max_weight=8, connected=True):
    """Random multigraph; a random spanning tree is laid first when ``connected``."""
    edges = []
    if connected and n > 1:
        order = rng.permutation(n)
        for i in range(1, n):
            a = int(order[i])
            b = int(order[rng.integers(0, i)])
            edges.append((a, b, int(rng.integers(1, max_weight + 1))))
    if m is None:
        m = int(rng.integers(n, 2 * n + 1))
    while len(edges) < m and n > 1:
        a, b = rng.choice(n, size=2, replace=False)
        edges.append((int(a), int(b), int(rng.integers(1, max_weight + 1))))
    return Multigraph.from_edges(n, edges)
