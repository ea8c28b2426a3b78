"""Distributed cut tester and the random-layering minimum cut approximation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter, NoCutFound
from .graph import Cut, _as_mask, components, cut_weight, diameter
from .primitives import (
    _budget,
    _check_engine,
    bfs_tree,
    broadcast,
    component_id_multi,
    convergecast_min,
    exchange,
    mask_flood,
)
from .sampling import (
    approx_edge_connectivity,
    default_layers,
    edge_seeds,
    edge_uniforms,
    layering_experiment,
    log2n,
)
from .sim import CostLedger, SimResult, empty_result, id_width

TESTER_C = 8
LAYER_DELTA = 1 / 8


def experiments(n, delta, c=TESTER_C):
    return math.ceil(c * log2n(n) / delta**2)


def hit_probabilities(g, sub, kappa, weights=None):
    """Per-edge probability that some unit copy lands in an experiment: 1 - 2^(-w/kappa)."""
    w = g.w if weights is None else np.asarray(weights, dtype=np.int64)
    p = -np.expm1(-np.log(2.0) * w / kappa)
    p[_as_mask(g, sub)] = 0.0
    return p


@dataclass
class CutTestVerdict:
    passed: np.ndarray  # per node
    hits: np.ndarray  # per node, experiments whose sample touched the boundary
    cid: np.ndarray
    kappa: float
    delta: float
    experiments: int
    sim: SimResult = field(default_factory=empty_result)

    def passing_ids(self, proper_only=True):
        """Component ids that passed; the whole-graph component is dropped by default."""
        ids = np.unique(self.cid[self.passed]).tolist()
        if proper_only and len(np.unique(self.cid)) == 1:
            return []
        return ids

    def members(self, cid):
        return frozenset(np.flatnonzero(self.cid == cid).tolist())


def _seed_for(*parts):
    return int(np.random.SeedSequence([int(x) & 0xFFFFFFFF for x in parts]).generate_state(1)[0])


def cut_tester(
    g,
    sub,
    kappa,
    delta,
    seed=0,
    *,
    c=TESTER_C,
    weights=None,
    engine="sim",
    method="hitmask",
    cid=None,
    budget=None,
) -> CutTestVerdict:
    """Test every component of ``(V, sub)`` against threshold ``kappa``.

    Each of ``J = ceil(c log2 n / delta^2)`` experiments samples the edges
    outside ``sub`` (an edge of weight ``w`` with probability
    ``1 - 2^(-w/kappa)``).  A component is hit when the sample touches its
    boundary; it passes when at most half of the experiments hit it.

    ``method="labels"`` detects hits by flooding min and max component ids
    over ``sub`` plus each sample; ``"hitmask"`` ORs per-edge hit bitmasks
    over the component.  Both read the same per-edge random streams.
    """
    _check_engine(engine)
    if not kappa > 0:
        raise InvalidParameter("kappa must be positive")
    if not 0 < delta < 0.25:
        raise InvalidParameter("delta must lie in (0, 1/4)")
    if method not in ("hitmask", "labels"):
        raise InvalidParameter(f"unknown tester method {method!r}")
    J = experiments(g.n, delta, c)
    mask = _as_mask(g, sub)
    sim = empty_result()
    if cid is None:
        if engine == "sim":
            lab = component_id_multi(g, [mask], budget=budget, seed=seed)
            cid = lab.labels[0].label_min
            sim.merge(lab.sim)
        else:
            cid = components(g, mask)
    cid = np.asarray(cid)
    prob = hit_probabilities(g, mask, kappa, weights)
    seeds, res = edge_seeds(g, seed, budget=budget, engine=engine)
    sim.merge(res)

    if method == "labels":
        samples = edge_uniforms(seeds, J) < prob
        inst = [mask | samples[j] for j in range(J)]
        init = np.tile(cid, (J, 1))
        lab = component_id_multi(g, inst, want_max=True, initial=init, budget=budget, seed=seed, engine=engine)
        sim.merge(lab.sim)
        hits = np.zeros(g.n, dtype=np.int64)
        for x in lab.labels:
            hits += (x.label_min != cid) | (x.label_max != cid)
    elif engine == "replay":
        boundary = np.flatnonzero(cid[g.u] != cid[g.v])
        hits = np.zeros(g.n, dtype=np.int64)
        if boundary.size:
            sampled = edge_uniforms(seeds[boundary], J) < prob[boundary]
            per_comp = {}
            for k, eid in enumerate(boundary.tolist()):
                for end in (int(g.u[eid]), int(g.v[eid])):
                    key = int(cid[end])
                    acc = per_comp.get(key)
                    per_comp[key] = sampled[:, k].copy() if acc is None else acc | sampled[:, k]
            for key, acc in per_comp.items():
                hits[cid == key] = int(acc.sum())
    else:
        hits, res = _hitmask_sim(g, mask, cid, prob, seeds, J, budget, seed)
        sim.merge(res)
    return CutTestVerdict(hits <= J / 2, hits, cid, kappa, delta, J, sim)


def _hitmask_sim(g, mask, cid, prob, seeds, J, budget, seed):
    """Neighbors swap component ids, then OR-flood J-bit hit masks inside components."""
    adj = g.adjacency()
    w = id_width(g.n)
    send = [{eid: (int(cid[x]), w) for eid, _ in adj[x]} for x in range(g.n)]
    recv = [{eid: w for eid, _ in adj[x]} for x in range(g.n)]
    res = exchange(g, send, recv, budget=budget, seed=seed)
    local = []
    for x in range(g.n):
        acc = 0
        for eid, _ in adj[x]:
            if res.outputs[x][eid] != cid[x]:
                bits = np.random.default_rng(int(seeds[eid])).random(J) < prob[eid]
                acc |= int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")
        local.append(acc)
    inside = [[eid for eid, _ in adj[x] if mask[eid]] for x in range(g.n)]
    res2 = mask_flood(g, local, J, inside, budget=budget, seed=seed)
    res.merge(res2)
    hits = np.array([bin(res2.outputs[x]).count("1") for x in range(g.n)], dtype=np.int64)
    return hits, res


# -- one epoch --------------------------------------------------------------

@dataclass
class EpochResult:
    layer: int | None
    cid: int | None
    cut: Cut | None
    outcome: object
    tests: int
    sim: SimResult = field(default_factory=empty_result)

    @property
    def found(self):
        return self.cut is not None


def epoch_parameters(n, lam_prime, eps):
    p = min(1.0, eps * log2n(n) / (2 * lam_prime))
    return p, default_layers(n), 50 * lam_prime / eps


def collect_family_and_test(g, lam_prime, eps, seed=0, *, engine="replay", method="hitmask", tester_seed=None, budget=None, c=TESTER_C):
    """One epoch: random layering, then test the components of every prefix graph.

    Returns the passing component with the smallest ``(layer, component id)``.
    Layers are scanned in order and the scan stops at the first layer with a
    pass, which yields the same minimum as testing every layer.
    """
    if lam_prime <= 0:
        raise InvalidParameter("lambda' must be positive")
    if not 0 < eps < 1:
        raise InvalidParameter("epsilon must lie in (0, 1)")
    p, L, kappa = epoch_parameters(g.n, lam_prime, eps)
    out = layering_experiment(g, p, L, rng=np.random.default_rng([seed & 0xFFFFFFFF, 1]))
    tseed = seed if tester_seed is None else tester_seed
    sim = empty_result()
    tests = 0
    for i in range(1, L):
        labels = out.labels[i - 1]
        if len(np.unique(labels)) == 1:
            break
        verdict = cut_tester(
            g, out.prefix(i), kappa, LAYER_DELTA, _seed_for(tseed, i), c=c,
            engine=engine, method=method, cid=labels if engine == "replay" else None, budget=budget,
        )
        sim.merge(verdict.sim)
        tests += 1
        ids = verdict.passing_ids()
        if ids:
            cid = ids[0]
            return EpochResult(i, cid, Cut.of(g, verdict.members(cid)), out, tests, sim)
    return EpochResult(None, None, None, out, tests, sim)


# -- full pipeline ----------------------------------------------------------

@dataclass
class LayeringResult:
    cut: Cut
    epsilon: float
    lambda_tilde: float
    guess: float
    guess_index: int
    epoch: int
    layer: int
    cid: int
    sim: SimResult
    ledger: CostLedger
    counts: dict

    def to_json(self):
        return {
            "epsilon": self.epsilon,
            "lambda_tilde": self.lambda_tilde,
            "guess": self.guess,
            "guess_index": self.guess_index,
            "epoch": self.epoch,
            "layer": self.layer,
            "cut_weight": self.cut.weight,
            "members": sorted(self.cut.members),
            "measured_rounds": self.sim.rounds_used,
            "ledger_rounds": self.ledger.total,
            "instances": self.counts,
        }


def guess_range(n, eps, c1=2):
    """Exponents i of the guesses lambda~ 2^i, smallest first.

    The upper end is ``ceil(c1 log2 log2 n)``.  The lower end reaches a
    further ``ceil(log2(50/eps))`` below the mirror image, so the smallest
    tester threshold 50 lambda'/eps can fall to the order of lambda itself.
    """
    top = math.ceil(c1 * math.log2(max(log2n(n), 2)))
    return list(range(-(top + math.ceil(math.log2(50 / eps))), top + 1))


def layering_mincut(g, eps, seed=0, *, c1=2, engine="replay", method="hitmask", budget=None, c=TESTER_C, D=None) -> LayeringResult:
    """O(1/eps)-approximate minimum cut by random layering.

    Guesses ``lambda' = lambda~ 2^i`` run ``ceil(n^eps log2 n)`` epochs each.
    The winner is the smallest ``(guess, epoch, layer, component id)`` tuple
    that passes; evaluating tuples in that order and stopping at the first
    pass gives the same winner as running every instance.  The ledger charges
    the full pipelined schedule.
    """
    if not 0 < eps < 1:
        raise InvalidParameter("epsilon must lie in (0, 1)")
    budget = _budget(g, budget)
    approx = approx_edge_connectivity(g, seed, budget=budget, engine=engine)
    sim = empty_result().merge(approx.sim)
    guesses = guess_range(g.n, eps, c1)
    epochs = math.ceil(g.n**eps * log2n(g.n))
    L = default_layers(g.n)
    J = experiments(g.n, LAYER_DELTA, c)

    D = diameter(g) if D is None else D
    tester_instances = len(guesses) * epochs * (L - 1) * (1 + 2 * J)
    counts = {
        "approx": approx.instances,
        "tester": tester_instances,
        "guesses": len(guesses),
        "epochs": epochs,
        "layers": L - 1,
        "experiments": J,
        "total": approx.instances + tester_instances,
    }
    ledger = CostLedger()
    ledger.charge("thurimella_multi", D=D, n=g.n, k=counts["total"])
    ledger.charge("connectivity_extra", D=D)
    ledger.charge("bfs", D=D)
    ledger.charge("convergecast", D=D)
    ledger.charge("broadcast", D=D)

    tests = 0
    for gi, i in enumerate(guesses):
        lam_prime = approx.lambda_tilde * 2.0**i
        for e in range(epochs):
            ep = collect_family_and_test(
                g, lam_prime, eps, _seed_for(seed, gi, e), engine=engine, method=method,
                tester_seed=_seed_for(seed, gi, e, 7), budget=budget, c=c,
            )
            sim.merge(ep.sim)
            tests += ep.tests
            if ep.found:
                counts["tests_run"] = tests
                cut = ep.cut
                if engine == "sim":
                    cut = _announce(g, (gi, e, ep.layer, ep.cid), (len(guesses), epochs, L), ep.outcome, budget, seed, sim)
                return LayeringResult(cut, eps, approx.lambda_tilde, lam_prime, i, e, ep.layer, ep.cid, sim, ledger, counts)
    raise NoCutFound("no component passed the cut tester at any guess")


def _announce(g, winner, sizes, outcome, budget, seed, sim):
    """Convergecast the winning tuple to a BFS root and broadcast it back.

    The tuple is packed into one integer so that integer order is tuple
    order; nodes outside the winning component report the all-ones value.
    Every node then decides membership from its stored layer labels.
    """
    widths = [id_width(s) for s in sizes] + [id_width(g.n)]
    packed, shift = 0, 0
    for val, w in reversed(list(zip(winner, widths))):
        packed |= int(val) << shift
        shift += w
    none = (1 << shift) - 1
    gi, e, layer, cid = winner
    labels = outcome.labels[layer - 1]
    values = [packed if labels[x] == cid else none for x in range(g.n)]
    tree = bfs_tree(g, 0, budget=budget, seed=seed)
    best, res = convergecast_min(g, tree, values, shift, budget=budget, seed=seed)
    got, res2 = broadcast(g, tree, best, shift, budget=budget, seed=seed)
    sim.merge(tree.sim).merge(res).merge(res2)
    mine = got[0] & ((1 << widths[-1]) - 1)
    members = [x for x in range(g.n) if got[x] == packed and labels[x] == mine]
    return Cut.of(g, members)
