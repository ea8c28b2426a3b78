"""(2+eps)-approximate minimum cut by repeated sparse certificates and contraction.

Edges are bundles of unit copies.  ``E*`` is tracked as the number of copies
of each edge inside the certificate; an edge with a copy outside ``E*``
belongs to ``E - E*`` and is contracted in the next iteration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter, NoCutFound
from .graph import Cut, Multigraph, components, cut_weight, diameter
from .layering import _seed_for, cut_tester, experiments
from .primitives import _budget, _check_engine, component_id_multi, sparse_certificate
from .sampling import approx_edge_connectivity, log2n
from .sim import CostLedger, SimResult, empty_result


@dataclass
class MatulaState:
    star: np.ndarray  # copies of each edge in E*
    weights: np.ndarray
    eta_old: int
    eta_new: int
    iteration: int = 0

    @property
    def E_c(self):
        """Edges with at least one copy outside E*; their endpoints are merged."""
        return self.star < self.weights

    @property
    def H(self):
        return self.star < self.weights


@dataclass
class CoreResult:
    cut: Cut | None
    iterations: int
    certificate_sizes: list
    etas: list
    state: MatulaState
    sim: SimResult
    ledger: CostLedger
    kappa: float
    delta: float


def iteration_cap(n, eps):
    return math.ceil(math.log(max(n, 2)) / -math.log1p(-eps / 10))


def matula_core(g, lam_hat, eps, seed=0, *, weights=None, engine="replay", method="hitmask", budget=None, D=None) -> CoreResult:
    """One guess ``lam_hat``: contract until components stop shrinking, then test them.

    Returns the passing component of ``H = (V, E - E*)`` with the smallest
    id, or ``None`` when nothing passes or ``H`` is connected.
    """
    _check_engine(engine)
    if not lam_hat > 0:
        raise InvalidParameter("lambda guess must be positive")
    if not eps > 0:
        raise InvalidParameter("epsilon must be positive")
    budget = _budget(g, budget)
    w = g.w if weights is None else np.asarray(weights, dtype=np.int64)
    D = diameter(g) if D is None else D
    k = math.ceil(lam_hat * (1 + eps / 5))
    state = MatulaState(w.copy(), w, g.n, 1)
    sim = empty_result()
    ledger = CostLedger()
    sizes, etas = [], []
    cap = iteration_cap(g.n, eps)
    while True:
        state.iteration += 1
        E_c = state.E_c
        cert = sparse_certificate(g, E_c, k, w, budget=budget, seed=seed, engine=engine)
        sim.merge(cert.sim)
        ledger.charge("certificate", D=D, n=g.n, k=k)
        state.star = cert.counts
        labels = component_id_multi(g, [state.H], budget=budget, seed=seed, engine=engine)
        sim.merge(labels.sim)
        ledger.charge("thurimella_multi", D=D, n=g.n, k=1)
        eta = len(np.unique(labels.labels[0].label_min))
        sizes.append(cert.size)
        etas.append(eta)
        state.eta_old, state.eta_new = state.eta_new if state.iteration > 1 else g.n, eta
        if not (eta >= 2 and eta <= state.eta_old * (1 - eps / 10)):
            break
        if state.iteration >= cap:
            raise RuntimeError(f"contraction loop exceeded {cap} iterations")

    kappa = lam_hat * (2 + eps / 3)
    delta = eps / 20
    cut = None
    if state.eta_new >= 2:
        verdict = cut_tester(
            g, state.H, kappa, delta, _seed_for(seed, 11), weights=w,
            engine=engine, method=method, budget=budget,
        )
        sim.merge(verdict.sim)
        J = experiments(g.n, delta)
        ledger.charge("thurimella_multi", D=D, n=g.n, k=1 + 2 * J)
        ledger.charge("connectivity_extra", D=D)
        ids = verdict.passing_ids()
        if ids:
            members = verdict.members(ids[0])
            cut = Cut(members, cut_weight(g, members, w))
    return CoreResult(cut, state.iteration, sizes, etas, state, sim, ledger, kappa, delta)


@dataclass
class Presample:
    g: Multigraph
    p: float
    counts: np.ndarray

    @property
    def graph(self):
        """The sampled unit multigraph on V (edges with no sampled copy dropped)."""
        keep = self.counts > 0
        return Multigraph(self.g.n, self.g.u[keep], self.g.v[keep], self.counts[keep])


def presample_probability(n, lam, eps):
    return min(1.0, 100 * log2n(n) / (eps**2 * lam))


def karger_presample(g, lam, eps, seed=0) -> Presample:
    """Keep each unit copy with probability ``min(1, 100 log2 n / (eps^2 lam))``."""
    if not lam > 0:
        raise InvalidParameter("lambda estimate must be positive")
    p = presample_probability(g.n, lam, eps)
    rng = np.random.default_rng([seed & 0xFFFFFFFF, 2])
    counts = rng.binomial(g.w, p).astype(np.int64) if p < 1 else g.w.copy()
    return Presample(g, p, counts)


@dataclass
class MatulaResult:
    cut: Cut
    epsilon: float
    lambda_tilde: float
    guess: float
    guess_index: int
    iterations: int
    certificate_sizes: list
    sim: SimResult
    ledger: CostLedger
    guesses: int
    candidates: list = field(default_factory=list)

    def to_json(self):
        return {
            "epsilon": self.epsilon,
            "lambda_tilde": self.lambda_tilde,
            "guess": self.guess,
            "guess_index": self.guess_index,
            "cut_weight": self.cut.weight,
            "members": sorted(self.cut.members),
            "iterations": self.iterations,
            "certificate_sizes": self.certificate_sizes,
            "guesses": self.guesses,
            "measured_rounds": self.sim.rounds_used,
            "ledger_rounds": self.ledger.total,
        }


def guess_values(lam_tilde, n, eps):
    """Geometric guesses with ratio 1+eps/10 covering [lam~/(8 log2 n), 2 lam~]."""
    lo = max(1.0, lam_tilde / (8 * log2n(n)))
    hi = 2 * lam_tilde
    count = max(0, math.ceil(math.log(hi / lo) / math.log1p(eps / 10))) + 1
    return [lo * (1 + eps / 10) ** i for i in range(count)]


def matula_mincut(g, eps, seed=0, *, engine="replay", method="hitmask", budget=None) -> MatulaResult:
    """Run the contraction loop for every guess and keep the lightest passing cut."""
    if not 0 < eps <= 1:
        raise InvalidParameter("epsilon must lie in (0, 1]")
    budget = _budget(g, budget)
    D = diameter(g)
    approx = approx_edge_connectivity(g, seed, budget=budget, engine=engine, D=D)
    sim = empty_result().merge(approx.sim)
    ledger = CostLedger()
    ledger.extend(approx.ledger)
    guesses = guess_values(approx.lambda_tilde, g.n, eps)
    best = None
    candidates = []
    for gi, lam_hat in enumerate(guesses):
        pre = karger_presample(g, lam_hat, eps, _seed_for(seed, gi, 3))
        core = matula_core(
            g, lam_hat * pre.p, eps, _seed_for(seed, gi, 5), weights=pre.counts,
            engine=engine, method=method, budget=budget, D=D,
        )
        sim.merge(core.sim)
        ledger.extend(core.ledger)
        if core.cut is None:
            continue
        cut = Cut.of(g, core.cut.members)
        candidates.append((gi, cut.weight))
        if best is None or cut.weight < best[1].weight:
            best = (gi, cut, core)
    ledger.charge("bfs", D=D)
    ledger.charge("convergecast", D=D)
    ledger.charge("broadcast", D=D)
    if best is None:
        raise NoCutFound("no guess produced a passing component")
    gi, cut, core = best
    return MatulaResult(
        cut, eps, approx.lambda_tilde, guesses[gi], gi, core.iterations,
        core.certificate_sizes, sim, ledger, len(guesses), candidates,
    )
