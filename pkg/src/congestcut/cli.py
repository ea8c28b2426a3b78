"""Command-line front end: ``congestcut <command> ...``.

Exit codes: 0 success, 1 failed acceptance suite, 2 bad arguments or input,
3 no cut found, 4 bit budget violated.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import statistics
import sys

from . import graph as G
from . import lowerbound as LB
from .errors import BudgetViolation, CongestCutError, NoCutFound
from .sim import BitBudget

SCHEMA = "congestcut.report/1"
CSV_COLUMNS = ["command", "seed", "trial", "cut_weight", "oracle_weight", "ratio", "measured_rounds", "ledger_rounds", "value"]

FAMILIES = ("cycle", "path", "complete", "star", "dumbbell", "random", "base-h", "cut-instance", "simple-instance", "dissemination")


def _int_set(text):
    return {int(x) for x in text.split(",") if x.strip()} if text else set()


def _budget(args, g):
    return BitBudget(args.budget_mode, args.budget_bits if args.budget_bits else BitBudget.for_graph(g).B)


def _ratio(weight, oracle):
    return weight / oracle if oracle else None


def _finite(x):
    return None if isinstance(x, float) and math.isinf(x) else x


# -- commands ---------------------------------------------------------------

def cmd_gen(args):
    sidecar = {"family": args.family, "params": {}, "expected_lambda": None, "expected_min_cut_members": None}
    f = args.family
    if f == "cycle":
        g = G.cycle(args.n, args.multiplicity)
        sidecar["params"] = {"n": args.n, "multiplicity": args.multiplicity}
        sidecar["expected_lambda"] = 2 * args.multiplicity
    elif f == "path":
        g = G.path_graph(args.n)
        sidecar["params"] = {"n": args.n}
        sidecar["expected_lambda"] = 1
    elif f == "complete":
        g = G.complete(args.n)
        sidecar["params"] = {"n": args.n}
        sidecar["expected_lambda"] = args.n - 1
    elif f == "star":
        g = G.star(args.n)
        sidecar["params"] = {"n": args.n}
        sidecar["expected_lambda"] = 1
    elif f == "dumbbell":
        g = G.dumbbell(args.clique)
        sidecar["params"] = {"clique": args.clique}
        sidecar["expected_lambda"] = 1
        sidecar["expected_min_cut_members"] = list(range(args.clique))
    elif f == "random":
        import numpy as np

        g = G.random_multigraph(np.random.default_rng(args.seed), args.n, args.m, args.max_weight)
        sidecar["params"] = {"n": args.n, "m": args.m, "max_weight": args.max_weight, "seed": args.seed}
    elif f == "base-h":
        g = LB.gen_base_H(args.n, args.k)
        sidecar["params"] = {"n": args.n, "k": args.k}
    elif f == "cut-instance":
        X, Y = _int_set(args.X), _int_set(args.Y)
        g = LB.gen_weighted_cut_instance(args.n, args.k, args.alpha, X, Y)
        sidecar = LB.weighted_instance_sidecar(args.n, args.k, args.alpha, X, Y)
    elif f == "simple-instance":
        X, Y = _int_set(args.X), _int_set(args.Y)
        g = LB.gen_simple_cut_instance(args.k, args.ell, args.alpha, args.lam, X, Y)
        sidecar["params"] = {"k": args.k, "ell": args.ell, "alpha": args.alpha, "lambda": args.lam, "X": sorted(X), "Y": sorted(Y)}
        common = sorted(X & Y)
        if common:
            sidecar["expected_min_cut_members"] = sorted(LB.simple_path_members(args.k, args.ell, args.alpha, args.lam, common[0]))
    else:
        H, Hp = LB.gen_dissemination_graphs(args.n, args.lam)
        g = H if args.which == "H" else Hp
        sidecar["params"] = {"n": args.n, "lambda": args.lam, "which": args.which}
    if args.graph_out:
        G.write_graph(g, args.graph_out, sidecar)
        return {"command": "gen", "params": sidecar["params"], "records": [{"value": args.graph_out, "n": g.n, "m": g.m}]}
    sys.stdout.write(G.dumps_graph(g))
    return None


def cmd_exact(args):
    g = G.read_graph(args.graph)
    cut = G.min_cut_exact(g)
    return {"command": "exact", "params": {"graph": args.graph}, "records": [cut.to_json()], "weight": cut.weight}


def cmd_approx(args):
    from .sampling import approx_edge_connectivity

    g = G.read_graph(args.graph)
    oracle = G.lambda_of(g) if args.oracle else None
    records = []
    for t in range(args.trials):
        res = approx_edge_connectivity(g, args.seed + t, budget=_budget(args, g), engine=args.engine)
        rec = res.to_json()
        rec.update(seed=args.seed + t, trial=t, value=res.lambda_tilde, oracle_weight=oracle, ledger_rounds=res.ledger.total)
        if args.ledger_only:
            rec.pop("measured_rounds", None)
        records.append(rec)
    return {"command": "approx-conn", "params": {"graph": args.graph}, "records": records}


def _cut_command(args, name, run):
    g = G.read_graph(args.graph)
    oracle = G.lambda_of(g)
    records = []
    for t in range(args.trials):
        seed = args.seed + t
        res = run(g, args.epsilon, seed, engine=args.engine, budget=_budget(args, g))
        rec = res.to_json()
        rec.update(seed=seed, trial=t, oracle_weight=oracle, ratio=_ratio(res.cut.weight, oracle))
        if args.ledger_only:
            rec.pop("measured_rounds", None)
        records.append(rec)
    ratios = [r["ratio"] for r in records if r["ratio"] is not None]
    agg = {"median_ratio": statistics.median(ratios)} if ratios else {}
    return {"command": name, "params": {"graph": args.graph, "epsilon": args.epsilon}, "records": records, "aggregate": agg}


def cmd_layering(args):
    from .layering import layering_mincut

    return _cut_command(args, "layering", layering_mincut)


def cmd_matula(args):
    from .matula import matula_mincut

    return _cut_command(args, "matula", matula_mincut)


def cmd_sample_exp(args):
    from .sampling import connectivity_rate, default_layers

    g = G.read_graph(args.graph)
    L = args.layers or default_layers(g.n)
    records = []
    for p in args.p:
        rate = connectivity_rate(g, p, L, args.trials, args.seed)
        records.append({"seed": args.seed, "p": p, "L": L, "trials": args.trials, "connected_rate": rate, "value": rate})
    return {"command": "sample-exp", "params": {"graph": args.graph}, "records": records}


def cmd_diam_exp(args):
    g = G.read_graph(args.graph)
    diams = LB.sampled_diameter_experiment(g, args.p, args.trials, args.seed)
    records = [{"seed": args.seed, "trial": t, "value": _finite(d), "disconnected": math.isinf(d)} for t, d in enumerate(diams)]
    agg = {"disconnected": sum(math.isinf(d) for d in diams)}
    if args.threshold is not None:
        agg["fraction_at_least_threshold"] = sum(d >= args.threshold for d in diams) / len(diams)
    return {"command": "diam-exp", "params": {"graph": args.graph, "p": args.p}, "records": records, "aggregate": agg}


def cmd_lb_verify(args):
    g = G.read_graph(args.graph)
    c = LB.verify_family(g, args.k)
    bound = math.log2(g.n / args.k)
    return {"command": "lb-verify", "params": {"graph": args.graph, "k": args.k}, "records": [{"value": c, "c_observed": c, "log2_n_over_k": bound}], "aggregate": {"within_bound": c <= bound}}


def cmd_suite(args):
    from .acceptance import run_all

    numbers = sorted(_int_set(args.criteria)) if args.criteria else None
    results = run_all(numbers, echo=lambda line: print(line, file=sys.stderr))
    report = {"command": "suite", "params": {"criteria": numbers}, "records": [r.to_json() for r in results], "aggregate": {"all_passed": all(r.passed for r in results)}}
    report["_exit"] = 0 if report["aggregate"]["all_passed"] else 1
    return report


# -- output -----------------------------------------------------------------

def _emit(report, args):
    report = {"schema": SCHEMA, **report}
    if args.out == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, extrasaction="ignore")
        writer.writeheader()
        for rec in report.get("records", []):
            row = {"command": report["command"], **rec}
            if "cut_weight" not in row and "weight" in rec:
                row["cut_weight"] = rec["weight"]
            writer.writerow(row)
        text = buf.getvalue()
    else:
        text = json.dumps(report, indent=2, default=str) + "\n"
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="base seed (required by randomized commands)")
    common.add_argument("--trials", type=int, default=1)
    common.add_argument("--epsilon", type=float, default=0.5)
    common.add_argument("--budget-bits", type=int, default=None, help="B; defaults to 8*ceil(log2 n)")
    common.add_argument("--budget-mode", choices=("PerEdge", "PerWeight"), default="PerEdge")
    common.add_argument("--engine", choices=("replay", "sim"), default="replay")
    common.add_argument("--out", choices=("json", "csv"), default="json")
    common.add_argument("--report", default=None, help="write the report here instead of stdout")
    common.add_argument("--ledger-only", action="store_true", help="omit measured rounds from reports")

    parser = argparse.ArgumentParser(prog="congestcut", description="CONGEST minimum cut simulator and experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a graph file")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--multiplicity", type=int, default=1)
    p.add_argument("--clique", type=int, default=5)
    p.add_argument("--max-weight", type=int, default=8)
    p.add_argument("--alpha", type=float, default=1)
    p.add_argument("--lam", type=int, default=2)
    p.add_argument("--ell", type=int, default=4)
    p.add_argument("--X", default="")
    p.add_argument("--Y", default="")
    p.add_argument("--which", choices=("H", "Hprime"), default="H")
    p.add_argument("--graph-out", default=None, help="graph file path; a .json sidecar is written next to it")
    p.set_defaults(func=cmd_gen, randomized=False)

    for name, func, randomized, helptext in [
        ("exact", cmd_exact, False, "exact minimum cut"),
        ("approx-conn", cmd_approx, True, "O(log n) edge-connectivity estimate"),
        ("layering", cmd_layering, True, "random-layering min cut approximation"),
        ("matula", cmd_matula, True, "(2+eps) min cut approximation"),
        ("sample-exp", cmd_sample_exp, True, "connectivity rate of sampled layerings"),
        ("diam-exp", cmd_diam_exp, True, "diameters of sampled subgraphs"),
        ("lb-verify", cmd_lb_verify, False, "lower-bound family membership scan"),
    ]:
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("graph")
        p.set_defaults(func=func, randomized=randomized)
        if name == "approx-conn":
            p.add_argument("--oracle", action="store_true", help="also report the exact lambda")
        if name == "sample-exp":
            p.add_argument("--p", type=float, nargs="+", required=True)
            p.add_argument("--layers", type=int, default=None)
        if name == "diam-exp":
            p.add_argument("--p", type=float, required=True)
            p.add_argument("--threshold", type=float, default=None)
        if name == "lb-verify":
            p.add_argument("--k", type=int, required=True)

    p = sub.add_parser("suite", parents=[common], help="run the acceptance battery")
    p.add_argument("--criteria", default="", help="comma-separated subset, e.g. 1,2,9")
    p.set_defaults(func=cmd_suite, randomized=False)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.randomized and args.seed is None:
        parser.error(f"{args.command} needs --seed")
    if args.seed is None:
        args.seed = 0
    if args.trials < 1:
        parser.error("--trials must be >= 1")
    try:
        report = args.func(args)
    except NoCutFound as exc:
        print(f"congestcut: no cut found: {exc}", file=sys.stderr)
        return 3
    except BudgetViolation as exc:
        print(f"congestcut: budget violation: {exc}", file=sys.stderr)
        return 4
    except (CongestCutError, OSError, ValueError) as exc:
        print(f"congestcut: {exc}", file=sys.stderr)
        return 2
    code = 0
    if report is not None:
        code = report.pop("_exit", 0)
        _emit(report, args)
    return code


if __name__ == "__main__":
    sys.exit(main())
