"""Synchronous CONGEST simulator and the analytical round ledger.

A run executes one :class:`NodeProgram` per node in lock-step rounds.  A
message sent in round ``r`` is delivered in round ``r + 1``.  Payloads are
bit strings (:class:`Bits`); the budget counts payload bits only.

Termination follows the vote-to-halt convention: every node steps in round 1,
and a run ends after the first round in which every node reports halted and
no message was sent.  A halted
node that receives a message is stepped again.  Multi-phase algorithms are a
sequence of runs; their measured rounds add up.
"""
from __future__ import annotations

import json
import math
import os
import sys
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import BudgetViolation, InvalidParameter, RoundCapExceeded, UnknownPrimitive

DEFAULT_ROUND_CAP = 1_000_000
TRACE_ENV = "CONGESTCUT_TRACE"
TRACE_PATH_ENV = "CONGESTCUT_TRACE_PATH"


class Bits(NamedTuple):
    """An opaque bit string: ``nbits`` bits of ``value``, least significant first."""

    value: int
    nbits: int

    def concat(self, other):
        return Bits(self.value | (other.value << self.nbits), self.nbits + other.nbits)


def id_width(n):
    """Bits needed for one identifier in ``0..n-1``."""
    return max(1, (max(n, 2) - 1).bit_length())


def default_bandwidth(n):
    """B = 8 * ceil(log2 n): room for a handful of ids or weights."""
    return 8 * max(1, math.ceil(math.log2(max(n, 2))))


@dataclass(frozen=True)
class BitBudget:
    mode: str = "PerEdge"
    B: int = 32

    def __post_init__(self):
        if self.mode not in ("PerEdge", "PerWeight"):
            raise InvalidParameter(f"budget mode must be PerEdge or PerWeight, not {self.mode!r}")
        if self.B < 1:
            raise InvalidParameter("B must be >= 1")

    @classmethod
    def for_graph(cls, g, mode="PerEdge", B=None):
        return cls(mode, B if B is not None else default_bandwidth(g.n))

    def allowed(self, weight):
        return self.B * int(weight) if self.mode == "PerWeight" else self.B


# -- programs ---------------------------------------------------------------

@dataclass
class NodeContext:
    node: int
    n: int
    neighbors: list  # (edge_id, neighbor, weight)
    input: object
    rng: np.random.Generator
    B: int
    allowance: dict  # edge_id -> bits per round


class NodeProgram:
    """Per-node state machine.

    ``init`` receives the node's context; ``step`` consumes the inbox of the
    round (``{edge_id: Bits}``) and returns the outbox in the same shape.
    """

    def init(self, ctx: NodeContext):
        self.ctx = ctx

    def step(self, rnd, inbox):
        raise NotImplementedError

    def output(self):
        return None

    def halted(self):
        return True


class Pipe:
    """Outgoing bit stream on one edge, drained at most ``B`` bits per round."""

    def __init__(self):
        self.records = deque()
        self.head_value = 0
        self.head_bits = 0
        self.queued = 0

    def push(self, value, width):
        self.records.append((int(value), int(width)))
        self.queued += int(width)

    def pending_bits(self):
        return self.head_bits + self.queued

    def __bool__(self):
        return self.head_bits > 0 or bool(self.records)

    def take(self, budget):
        value, nbits = 0, 0
        while nbits < budget:
            if self.head_bits == 0:
                if not self.records:
                    break
                self.head_value, self.head_bits = self.records.popleft()
                self.queued -= self.head_bits
                if self.head_bits == 0:
                    continue
            room = budget - nbits
            chunk = min(room, self.head_bits)
            value |= (self.head_value & ((1 << chunk) - 1)) << nbits
            nbits += chunk
            self.head_value >>= chunk
            self.head_bits -= chunk
        return Bits(value, nbits) if nbits else None


class Reader:
    """Incoming bit stream on one edge."""

    def __init__(self):
        self.value = 0
        self.nbits = 0

    def feed(self, bits):
        self.value |= bits.value << self.nbits
        self.nbits += bits.nbits

    def read(self, width):
        if self.nbits < width:
            return None
        out = self.value & ((1 << width) - 1)
        self.value >>= width
        self.nbits -= width
        return out


class PipedProgram(NodeProgram):
    """Program whose traffic goes through per-edge pipes.

    Subclasses push records with :meth:`send`, consume them in
    :meth:`on_data`, and may top up pipes lazily in :meth:`refill`.  The node
    counts as halted once nothing is left to send.
    """

    def init(self, ctx):
        super().init(ctx)
        self.pipes = {eid: Pipe() for eid, _, _ in ctx.neighbors}
        self.readers = {eid: Reader() for eid, _, _ in ctx.neighbors}
        self.nbr = {eid: u for eid, u, _ in ctx.neighbors}
        self.start()

    def start(self):
        pass

    def send(self, eid, value, width):
        self.pipes[eid].push(value, width)

    def on_data(self, eid, reader):
        pass

    def refill(self, eid, pipe):
        pass

    def after_receive(self, rnd):
        pass

    def step(self, rnd, inbox):
        for eid, bits in inbox.items():
            reader = self.readers[eid]
            reader.feed(bits)
            self.on_data(eid, reader)
        self.after_receive(rnd)
        out = {}
        allowance = self.ctx.allowance
        for eid, pipe in self.pipes.items():
            B = allowance[eid]
            if pipe.pending_bits() < B:
                self.refill(eid, pipe)
            chunk = pipe.take(B)
            if chunk is not None:
                out[eid] = chunk
        return out

    def busy(self):
        return any(self.pipes.values())

    def halted(self):
        return not self.busy()


# -- ledger -----------------------------------------------------------------

def log_star(n):
    """Iterated base-2 logarithm: how often log2 is applied until the value is <= 1."""
    count, x = 0, float(n)
    while x > 1.0:
        x = math.log2(x)
        count += 1
    return count


def _thurimella_multi(D, n, k):
    return D + k * math.ceil(math.sqrt(n)) * log_star(n)


LEDGER_FORMULAS = {
    "thurimella_multi": _thurimella_multi,
    "connectivity_extra": lambda D: D,
    "bfs": lambda D: D + 1,
    "convergecast": lambda D: D,
    "broadcast": lambda D: D,
    # k MST instances in sequence, one per certificate iteration
    "certificate": lambda D, n, k: k * (D + math.ceil(math.sqrt(n)) * log_star(n)),
}


def ledger_charge(primitive, **params):
    try:
        formula = LEDGER_FORMULAS[primitive]
    except KeyError:
        raise UnknownPrimitive(primitive) from None
    return int(formula(**params))


@dataclass
class CostLedger:
    entries: list = field(default_factory=list)

    def charge(self, primitive, **params):
        rounds = ledger_charge(primitive, **params)
        self.entries.append((primitive, dict(params), rounds))
        return rounds

    def extend(self, other):
        self.entries.extend(other.entries)

    @property
    def total(self):
        return sum(r for _, _, r in self.entries)

    def by_primitive(self):
        out = {}
        for name, _, rounds in self.entries:
            out[name] = out.get(name, 0) + rounds
        return out

    def to_json(self):
        return [{"primitive": p, "params": q, "rounds": r} for p, q, r in self.entries]


# -- running ----------------------------------------------------------------

@dataclass
class SimResult:
    outputs: dict
    rounds_used: int
    max_bits_per_edge_round: int
    ledger: CostLedger = field(default_factory=CostLedger)
    log: dict | None = None

    def merge(self, other):
        """Fold a later phase into this result (rounds add, maxima combine)."""
        self.rounds_used += other.rounds_used
        self.max_bits_per_edge_round = max(self.max_bits_per_edge_round, other.max_bits_per_edge_round)
        self.ledger.extend(other.ledger)
        return self


def empty_result():
    return SimResult({}, 0, 0)


def node_rng(seed, node):
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, int(node)])


def _trace_sink():
    if os.environ.get(TRACE_ENV) != "1":
        return None
    path = os.environ.get(TRACE_PATH_ENV)
    return open(path, "a") if path else sys.stderr


def run_sync(g, program, budget=None, round_cap=DEFAULT_ROUND_CAP, seed=0, inputs=None, record=False):
    """Execute ``program`` at every node of ``g`` until global quiescence.

    ``program`` is a factory called once per node.  ``inputs`` maps node to
    its private input.  With ``record`` the result carries every node's
    inbox log, ``{node: [(round, inbox), ...]}``.
    """
    if round_cap < 1:
        raise InvalidParameter("round_cap must be >= 1")
    budget = budget or BitBudget.for_graph(g)
    adj = g.adjacency()
    weights = g.w.tolist()
    endpoints = list(zip(g.u.tolist(), g.v.tolist()))
    progs = []
    for x in range(g.n):
        ctx = NodeContext(
            node=x,
            n=g.n,
            neighbors=[(eid, y, weights[eid]) for eid, y in adj[x]],
            input=None if inputs is None else inputs[x],
            rng=node_rng(seed, x),
            B=budget.B,
            allowance={eid: budget.allowed(weights[eid]) for eid, _ in adj[x]},
        )
        prog = program()
        prog.init(ctx)
        progs.append(prog)

    log = {x: [] for x in range(g.n)} if record else None
    trace = _trace_sink()
    inboxes = [dict() for _ in range(g.n)]
    max_bits = 0
    rnd = 0
    try:
        while True:
            rnd += 1
            if rnd > round_cap:
                raise RoundCapExceeded(f"not quiescent after {round_cap} rounds")
            next_inboxes = [dict() for _ in range(g.n)]
            sent = False
            for x, prog in enumerate(progs):
                inbox = inboxes[x]
                if rnd > 1 and not inbox and prog.halted():
                    continue
                if record:
                    log[x].append((rnd, dict(inbox)))
                out = prog.step(rnd, inbox)
                for eid, bits in out.items():
                    if bits.nbits == 0:
                        continue
                    allowed = budget.allowed(weights[eid])
                    if bits.nbits > allowed:
                        raise BudgetViolation(eid, rnd, bits.nbits, allowed)
                    a, b = endpoints[eid]
                    if x not in (a, b):
                        raise InvalidParameter(f"node {x} sent on non-incident edge {eid}")
                    next_inboxes[b if x == a else a][eid] = bits
                    max_bits = max(max_bits, bits.nbits)
                    sent = True
                    if trace is not None:
                        trace.write(json.dumps({"round": rnd, "edge": eid, "from": x, "bits": bits.nbits}) + "\n")
            inboxes = next_inboxes
            if not sent and all(p.halted() for p in progs):
                break
    finally:
        if trace is not None and trace is not sys.stderr:
            trace.close()
    outputs = {x: p.output() for x, p in enumerate(progs)}
    return SimResult(outputs, rnd, max_bits, CostLedger(), log)


def replay_node(program, ctx, log, upto):
    """Re-run one node from its recorded inboxes through round ``upto``.

    Returns the node's output; used to check that a node's state depends
    only on its own input, randomness and received messages.
    """
    prog = program()
    prog.init(ctx)
    for rnd, inbox in log:
        if rnd > upto:
            break
        prog.step(rnd, inbox)
    return prog.output()
