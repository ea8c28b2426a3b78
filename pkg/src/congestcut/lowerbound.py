"""Generators and checks for the lower-bound graph families.

All graphs are built on nodes ``0..n-1``.  In ``H(n, k)`` node ``i`` lies on
path ``i mod k`` and in group ``i // k``; the first node of each group is the
center of that group's star.
"""
from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from .errors import InvalidParams, InvalidPromise
from .graph import Multigraph, diameter, sample_edges


def _check_hk(n, k):
    if k < 1 or n < 1 or n % k:
        raise InvalidParams(f"k={k} must divide n={n}")
    if n // k < 2:
        raise InvalidParams("paths need at least two nodes (n/k >= 2)")


def h_parts(n, k, include_s0=False):
    """The three edge lists of ``H(n, k)`` as ``(E1, E2, E3)`` of node pairs."""
    _check_hk(n, k)
    e1 = [(i, i + k) for i in range(n - k)]
    e2 = []
    s = 0 if include_s0 else 1
    while k * 2**s < n:
        step = k * 2**s
        e2 += [(i, i + step) for i in range(0, n - step, step)]
        s += 1
    e3 = [(i, j) for i in range(0, n, k) for j in range(i + 1, i + k)]
    return e1, e2, e3


def gen_base_H(n, k, include_s0=False) -> Multigraph:
    """Unit-weight ``H(n, k)``: k paths, a doubling overlay on path 0, one star per group."""
    e1, e2, e3 = h_parts(n, k, include_s0)
    return Multigraph.from_edges(n, [(a, b, 1) for a, b in e1 + e2 + e3])


def path_nodes(n, k, z):
    return frozenset(range(z, n, k))


def _check_sets(k, X, Y):
    X, Y = set(X), set(Y)
    universe = set(range(1, k))
    if not X <= universe or not Y <= universe:
        raise InvalidParams(f"X and Y must be subsets of 1..{k - 1}")
    if len(X & Y) > 1:
        raise InvalidPromise("X and Y may share at most one element")
    return X, Y


def gen_weighted_cut_instance(n, k, alpha, X, Y, *, weight_exponent=3) -> Multigraph:
    """Weighted ``H(n, k)`` encoding a set-disjointness instance.

    Path edges are heavy (``alpha*l + 1``); the star edge ``(0, x)`` is heavy
    iff ``x`` is not in X, and ``(n-k, n-k+y)`` is heavy iff ``y`` is not in Y.
    Everything else weighs 1.  With ``X & Y == {z}`` path ``z`` is the unique
    minimum cut, of weight ``l``.
    """
    X, Y = _check_sets(k, X, Y)
    if alpha < 1:
        raise InvalidParams("alpha must be >= 1")
    e1, e2, e3 = h_parts(n, k)
    heavy = int(alpha * (n // k)) + 1
    edges = [(a, b, heavy) for a, b in e1] + [(a, b, 1) for a, b in e2]
    for a, b in e3:
        x = b - a
        if a == 0 and x not in X:
            w = heavy
        elif a == n - k and x not in Y:
            w = heavy
        else:
            w = 1
        edges.append((a, b, w))
    return Multigraph.from_edges(n, edges, weight_exponent=weight_exponent)


def weighted_instance_sidecar(n, k, alpha, X, Y):
    X, Y = _check_sets(k, X, Y)
    common = sorted(X & Y)
    out = {
        "family": "weighted_cut_instance",
        "params": {"n": n, "k": k, "alpha": alpha, "X": sorted(X), "Y": sorted(Y)},
        "expected_lambda": n // k if common else None,
        "expected_min_cut_members": sorted(path_nodes(n, k, common[0])) if common else None,
    }
    if not common:
        out["lambda_lower_bound"] = int(alpha * (n // k)) + 1
    return out


def vertical_columns(ell, lam):
    """Group indices that get vertical connections: first, last and greedy interior ones.

    Interior columns sit every ``max(1, floor(2l/lambda))`` groups, which keeps
    consecutive columns at most ``2 l / lambda`` apart.
    """
    step = max(1, math.floor(2 * ell / lam))
    cols = [0] + list(range(step, ell - 1, step)) + [ell - 1]
    cols = sorted(set(cols))
    if len(cols) > lam:
        raise InvalidParams(f"{len(cols)} vertical columns needed but lambda={lam} allows at most {lam}")
    return cols


def gen_simple_cut_instance(k, ell, alpha, lam, X, Y) -> Multigraph:
    """Simple unit-weight version: every node of ``H(k l, k)`` becomes a clique.

    Cliques have ``alpha*lambda + 1`` nodes.  Heavy relations become complete
    bipartite graphs, unit relations a single edge between the lowest ids.
    """
    X, Y = _check_sets(k, X, Y)
    if lam < 2:
        raise InvalidParams("lambda must be >= 2")
    if k < 2 or ell < 2:
        raise InvalidParams("need k >= 2 and l >= 2")
    n0 = k * ell
    s = int(alpha * lam) + 1
    e1, e2, _ = h_parts(n0, k)
    base = lambda i: i * s  # noqa: E731

    edges = set()

    def clique(i):
        for a, b in combinations(range(base(i), base(i) + s), 2):
            edges.add((a, b))

    def biclique(i, j):
        for a in range(base(i), base(i) + s):
            for b in range(base(j), base(j) + s):
                edges.add((min(a, b), max(a, b)))

    def single(i, j):
        a, b = base(i), base(j)
        edges.add((min(a, b), max(a, b)))

    for i in range(n0):
        clique(i)
    for a, b in e1:
        biclique(a, b)
    for a, b in e2:
        single(a, b)
    last = n0 - k
    for x in range(1, k):
        (single if x in X else biclique)(0, x)
        (single if x in Y else biclique)(last, last + x)
    for h in vertical_columns(ell, lam)[1:-1]:
        for x in range(1, k):
            single(h * k, h * k + x)
    return Multigraph.from_edges(n0 * s, [(a, b, 1) for a, b in sorted(edges)])


def simple_path_members(k, ell, alpha, lam, z):
    s = int(alpha * lam) + 1
    return frozenset(x for i in range(z, k * ell, k) for x in range(i * s, (i + 1) * s))


def verify_family(g, k):
    """Largest weight between ``{0..h}`` and ``{h+k+1..n-1}`` over all ``h``."""
    lo = np.minimum(g.u, g.v)
    hi = np.maximum(g.u, g.v)
    best = 0
    for h in range(g.n):
        crossing = (lo <= h) & (hi >= h + k + 1)
        best = max(best, int(g.w[crossing].sum()))
    return best


def _doubling_pairs(n):
    pairs = []
    s = 1
    while 2**s < n:
        step = 2**s
        pairs += [(i, i + step) for i in range(0, n - step, step)]
        s += 1
    return pairs


def gen_dissemination_graphs(n, lam):
    """Weight-lambda path ``H`` and the lambda-th path power ``H'``, both with doubling shortcuts."""
    if n < 4 or lam < 1:
        raise InvalidParams("need n >= 4 and lambda >= 1")
    h_edges = {(i, i + 1): lam for i in range(n - 1)}
    hp_edges = {(i, j): 1 for i in range(n) for j in range(i + 1, min(n, i + lam + 1))}
    for pair in _doubling_pairs(n):
        h_edges.setdefault(pair, 1)
        hp_edges.setdefault(pair, 1)
    H = Multigraph.from_edges(n, [(a, b, w) for (a, b), w in sorted(h_edges.items())])
    Hp = Multigraph.from_edges(n, [(a, b, w) for (a, b), w in sorted(hp_edges.items())])
    return H, Hp


def sampled_diameter_experiment(g, p, trials, seed=0):
    """Hop diameter (``math.inf`` when disconnected) of ``trials`` independent unit-copy samples."""
    if not 0 <= p <= 1:
        raise InvalidParams("p must lie in [0, 1]")
    out = []
    for t in range(trials):
        counts = sample_edges(g, p, np.random.default_rng([seed & 0xFFFFFFFF, t]))
        out.append(diameter(g, counts > 0))
    return out
