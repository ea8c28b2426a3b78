"""The acceptance battery, shared by ``congestcut suite`` and the test suite.

Each check returns a :class:`CriterionResult`; :func:`run_all` prints one
PASS/FAIL line per criterion.
"""
from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from . import graph as G
from .errors import BudgetViolation
from .layering import LAYER_DELTA, epoch_parameters, experiments, guess_range, layering_experiment, layering_mincut
from .lowerbound import (
    gen_base_H,
    gen_dissemination_graphs,
    gen_weighted_cut_instance,
    path_nodes,
    sampled_diameter_experiment,
    verify_family,
)
from .matula import matula_mincut
from .primitives import bfs_tree, connectivity_test_multi, sparse_certificate
from .sampling import approx_edge_connectivity, connectivity_rate, log2n
from .sim import BitBudget, Bits, NodeProgram, log_star, run_sync


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d}: {self.name} ({self.seconds:.1f}s)"

    def to_json(self):
        return {"criterion": self.number, "name": self.name, "passed": self.passed, "seconds": round(self.seconds, 3), "details": self.details}


# -- benchmark graphs -------------------------------------------------------

def k2_heavy():
    return G.Multigraph.from_edges(2, [(0, 1, 32)], weight_exponent=5)


def cut_instance(alpha=1):
    return gen_weighted_cut_instance(16, 4, alpha, {1, 2}, {2, 3})


def approx_benchmarks():
    return {
        "cycle16x8": G.cycle(16, 8),
        "cycle64x4": G.cycle(64, 4),
        "dumbbell": G.dumbbell(),
        "k2_w32": k2_heavy(),
        "cut_instance_a1": cut_instance(1),
    }


# -- criteria ---------------------------------------------------------------

def c1_oracles(count=200, seed=1):
    rng = np.random.default_rng(seed)
    bad = []
    for t in range(count):
        n = int(rng.integers(2, 13))
        g = G.random_multigraph(rng, n, max_weight=8, connected=bool(rng.random() < 0.9))
        a, b = G.min_cut_exact(g).weight, G.min_cut_bruteforce(g).weight
        if a != b:
            bad.append({"trial": t, "exact": a, "brute": b})
    return not bad, {"graphs": count, "mismatches": bad}


def c2_threshold():
    n = 64
    out = {}
    ok = True
    for lam in (8, 16):
        g = G.cycle(n, lam // 2)
        high = connectivity_rate(g, min(1.0, 20 * log2n(n) / lam), trials=100, seed=lam)
        low = connectivity_rate(g, 1 / lam, trials=200, seed=1000 + lam)
        out[f"lambda={lam}"] = {"rate_high_p": high, "rate_p_1_over_lambda": low}
        ok &= high >= 0.95 and low <= 0.85
    return ok, out


def c3_approx(seeds=20):
    out = {}
    ok = True
    for name, g in approx_benchmarks().items():
        lam = G.lambda_of(g)
        vals = [approx_edge_connectivity(g, s).lambda_tilde for s in range(seeds)]
        good = sum(lam / 2 <= v <= 8 * lam * log2n(g.n) for v in vals)
        out[name] = {"lambda": lam, "in_range": good, "estimates": sorted(set(vals))}
        ok &= good >= 18
    return ok, out


def tester_dumbbell():
    g = G.dumbbell()
    sub = np.ones(g.m, dtype=bool)
    sub[-1] = False
    return g, sub


def c4_tester(runs=100, engine="replay"):
    from .layering import cut_tester

    g, sub = tester_dumbbell()
    false_fail = sum(not cut_tester(g, sub, 10, 1 / 8, s, engine=engine).passed.all() for s in range(runs))
    false_pass = sum(cut_tester(g, sub, 0.8, 1 / 8, 10_000 + s, engine=engine).passed.any() for s in range(runs))
    rate_ff, rate_fp = false_fail / runs, false_pass / runs
    return rate_ff <= 0.05 and rate_fp <= 0.05, {"false_fail_rate": rate_ff, "false_pass_rate": rate_fp, "runs": runs}


def c5_family(epochs=400, eps=0.5):
    n, lam = 64, 8
    g = G.cycle(n, lam // 2)
    p, L, _ = epoch_parameters(n, lam, eps)
    bound = 80 * lam / eps
    hits = 0
    for e in range(epochs):
        out = layering_experiment(g, p, L, rng=np.random.default_rng([5, e]))
        hits += out.min_family_weight() <= bound
    frac = hits / epochs
    need = n**-eps / 4
    return frac >= need, {"success_fraction": frac, "required": need, "p": p, "L": L}


def c6_layering(seeds=10, eps=0.5):
    graphs = {"dumbbell": G.dumbbell(), "cycle16": G.cycle(16, 1), "cut_instance_a1": cut_instance(1)}
    out = {}
    ok = True
    for name, g in graphs.items():
        lam = G.lambda_of(g)
        bound = 100 * (1 + 1 / 8) * 2 * lam / eps
        weights = [layering_mincut(g, eps, s).cut.weight for s in range(seeds)]
        good = sum(w <= bound for w in weights)
        ratio = statistics.median(w / lam for w in weights)
        out[name] = {"lambda": lam, "weights": weights, "within_bound": good, "median_ratio": ratio}
        ok &= good >= 9
        if name == "dumbbell":
            ok &= ratio == 1
    return ok, out


def c7_matula(seeds=10, eps=0.5):
    graphs = {"cycle16": G.cycle(16, 1), "dumbbell": G.dumbbell(), "cut_instance_a3": cut_instance(3)}
    out = {}
    ok = True
    for name, g in graphs.items():
        oracle = G.min_cut_exact(g)
        lam = oracle.weight
        cuts = [matula_mincut(g, eps, s).cut for s in range(seeds)]
        good = [c for c in cuts if c.weight <= (2 + eps) * lam]
        rec = {"lambda": lam, "weights": [c.weight for c in cuts], "within_bound": len(good)}
        ok &= len(good) >= 9
        if name == "cut_instance_a3":
            target = G.Cut(path_nodes(16, 4, 2), lam).partition(g.n)
            same = sum(c.partition(g.n) == target for c in cuts)
            rec["oracle_members"] = sorted(oracle.members)
            rec["matching_members"] = same
            ok &= oracle.partition(g.n) == target and same == len(good)
        out[name] = rec
    return ok, out


def quotient_cut_check(g, base, counts, k):
    """Sparsity, cut coverage and connectivity of a certificate on the quotient ``G/E_c``.

    Every cut of the quotient is enumerated.  Connectivity asks that the
    certificate alone keeps each cut at ``min(k, its weight in G/E_c)``;
    since quotient cuts are cuts of ``g``, this implies the bound
    ``min(k, lambda(g))``.
    """
    q, mapping = G.contract(g, base)
    keep = mapping[g.u] != mapping[g.v]
    w_q = g.w[keep]
    c_q = counts[keep]
    sparse = int(counts.sum()) <= k * q.n
    covered = True
    lam_ok = True
    if q.n >= 2 and q.m:
        codes = np.arange(1, 2 ** (q.n - 1))
        bits = ((codes[:, None] >> np.arange(q.n)) & 1).astype(bool)
        crossing = bits[:, q.u] != bits[:, q.v]
        full = crossing @ w_q
        small = full <= k
        if small.any():
            missing = crossing[small] & (c_q < w_q)
            covered = not missing.any()
        cert_weight = crossing @ c_q
        lam_ok = bool((cert_weight >= np.minimum(k, full)).all())
    return sparse, covered, lam_ok


def c8_certificates(count=100, seed=8):
    rng = np.random.default_rng(seed)
    fails = []
    for t in range(count):
        n = int(rng.integers(2, 11))
        g = G.random_multigraph(rng, n, max_weight=4)
        base = rng.random(g.m) < rng.choice([0.0, 0.2, 0.4])
        k = int(rng.integers(1, 6))
        cert = sparse_certificate(g, base, k, engine="replay")
        sparse, covered, lam_ok = quotient_cut_check(g, base, cert.counts, k)
        if not (sparse and covered and lam_ok):
            fails.append({"trial": t, "sparse": sparse, "covered": covered, "connectivity": lam_ok})
    return not fails, {"graphs": count, "failures": fails}


def c9_lowerbound():
    rng = np.random.default_rng(9)
    problems = []
    checked = 0
    for n, k in [(8, 2), (16, 4), (16, 2), (24, 3), (32, 4), (24, 6)]:
        ell = n // k
        limit = math.log2(ell)
        if verify_family(gen_base_H(n, k), k) > limit:
            problems.append({"n": n, "k": k, "kind": "base family"})
        for alpha in (1, 2, 3):
            for _ in range(3):
                universe = list(range(1, k))
                z = int(rng.choice(universe))
                rest = [x for x in universe if x != z]
                X = {z} | {x for x in rest if rng.random() < 0.5}
                Y = {z} | {x for x in rest if x not in X}
                g = gen_weighted_cut_instance(n, k, alpha, X, Y)
                cut = G.min_cut_exact(g)
                checked += 1
                if verify_family(g, k) > limit or cut.weight != ell:
                    problems.append({"n": n, "k": k, "alpha": alpha, "X": sorted(X), "Y": sorted(Y), "lambda": cut.weight})
                X2 = {x for x in rest if rng.random() < 0.5}
                Y2 = set(rest) - X2
                g = gen_weighted_cut_instance(n, k, alpha, X2, Y2)
                lam = G.min_cut_exact(g).weight
                checked += 1
                if verify_family(g, k) > limit or lam < alpha * ell + 1:
                    problems.append({"n": n, "k": k, "alpha": alpha, "X": sorted(X2), "Y": sorted(Y2), "lambda": lam})
    return not problems, {"instances": checked, "problems": problems}


def expected_layering_ledger(g, eps, c=4, c_tester=8):
    """Ledger total recomputed from first principles for a layering run on ``g``."""
    n = g.n
    D = G.diameter(g)
    i_max = max(1, math.ceil(math.log2(int(g.weighted_degree().min()))) + 1)
    approx_instances = i_max * c * math.ceil(log2n(n))
    L = math.ceil(20 * log2n(n))
    J = math.ceil(c_tester * log2n(n) / LAYER_DELTA**2)
    tester_instances = len(guess_range(n, eps)) * math.ceil(n**eps * log2n(n)) * (L - 1) * (1 + 2 * J)
    instances = approx_instances + tester_instances
    labeling = D + instances * math.ceil(math.sqrt(n)) * log_star(n)
    return labeling + D + (D + 1) + D + D, instances


def c10_ledger(eps=0.5):
    g = G.cycle(16, 1)
    res = layering_mincut(g, eps, 0)
    expected, instances = expected_layering_ledger(g, eps)
    return res.ledger.total == expected and res.counts["total"] == instances, {
        "ledger_total": res.ledger.total,
        "recomputed": expected,
        "instances": instances,
        "by_primitive": res.ledger.by_primitive(),
    }


class _Greedy(NodeProgram):
    """Sends twice the per-edge budget in round 1."""

    def step(self, rnd, inbox):
        if rnd == 1 and self.ctx.neighbors:
            eid = self.ctx.neighbors[0][0]
            return {eid: Bits(0, 2 * self.ctx.B)}
        return {}


def c11_budget():
    details = {}
    g = G.cycle(4, 1)
    try:
        run_sync(g, _Greedy, BitBudget("PerEdge", 16))
        details["over_budget_raised"] = False
    except BudgetViolation as exc:
        details["over_budget_raised"] = exc.round == 1
    ok = details["over_budget_raised"]
    runs = {}

    def record(name, sim, B, same):
        runs[name] = {"max_bits": sim.max_bits_per_edge_round, "B": B, "rounds": sim.rounds_used, "matches_replay": same}
        return sim.max_bits_per_edge_round <= B and same

    for gname, g in {"dumbbell": G.dumbbell(), "cycle16": G.cycle(16, 1), "cut_instance_a3": cut_instance(3)}.items():
        B = BitBudget.for_graph(g).B
        t = bfs_tree(g, 0)
        ok &= record(f"bfs/{gname}", t.sim, B, t.depth == bfs_tree(g, 0, engine="replay").depth)
        a = approx_edge_connectivity(g, 1, engine="sim")
        ok &= record(f"approx/{gname}", a.sim, B, a.lambda_tilde == approx_edge_connectivity(g, 1).lambda_tilde)
        m = matula_mincut(g, 0.5, 0, engine="sim")
        ok &= record(f"matula/{gname}", m.sim, B, m.cut == matula_mincut(g, 0.5, 0).cut)
    for gname, g in {"dumbbell": G.dumbbell(), "cycle16": G.cycle(16, 1)}.items():
        B = BitBudget.for_graph(g).B
        r = layering_mincut(g, 0.5, 0, engine="sim")
        ok &= record(f"layering/{gname}", r.sim, B, r.cut == layering_mincut(g, 0.5, 0).cut)
    g = G.cycle(16, 1)
    ct = connectivity_test_multi(g, [np.ones(g.m, bool), np.zeros(g.m, bool)])
    ok &= record("connectivity/cycle16", ct.sim, BitBudget.for_graph(g).B, ct.connected == [True, False])
    details["runs"] = runs
    return bool(ok), details


def c12_diameter(trials=50):
    n, lam = 256, 4
    _, Hp = gen_dissemination_graphs(n, lam)
    p = 1 / (4 * log2n(n))
    diams = sampled_diameter_experiment(Hp, p, trials, seed=12)
    long = sum(d >= n / (32 * lam) for d in diams)
    frac = long / trials
    return frac >= 0.2, {"fraction": frac, "disconnected": sum(d == math.inf for d in diams), "p": p}


CRITERIA = [
    (1, "min_cut_exact agrees with brute force", c1_oracles),
    (2, "sampling connectivity threshold", c2_threshold),
    (3, "edge-connectivity approximation range", c3_approx),
    (4, "cut tester error rates", c4_tester),
    (5, "layering family success rate", c5_family),
    (6, "layering min cut end to end", c6_layering),
    (7, "certificate contraction min cut end to end", c7_matula),
    (8, "sparse certificate properties", c8_certificates),
    (9, "lower-bound family invariants", c9_lowerbound),
    (10, "ledger recomputation", c10_ledger),
    (11, "bit budget enforcement", c11_budget),
    (12, "sampled diameter experiment", c12_diameter),
]


def run_criterion(number) -> CriterionResult:
    for num, name, fn in CRITERIA:
        if num == number:
            t = time.perf_counter()
            passed, details = fn()
            return CriterionResult(num, name, bool(passed), time.perf_counter() - t, details)
    raise KeyError(number)


def run_all(numbers=None, echo=print):
    results = []
    for num, _, _ in CRITERIA:
        if numbers and num not in numbers:
            continue
        res = run_criterion(num)
        if echo:
            echo(res.line())
        results.append(res)
    return results
