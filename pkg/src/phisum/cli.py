"""Command-line interface: ``phisum <command> ...``.

Exit codes: 0 success, 1 verification failure or path budget exceeded,
2 parse or usage error, 3 validation error, 4 capability error, 5 an order that
``--assert-compatible`` rejected.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys

from . import generate
from .automaton import build_failure_forest, compute_stats, failure_expand
from .errors import CapabilityError, ParseError, PathBudgetExceeded, ValidationError
from .io import format_automaton, load_automaton
from .pathsum import ALGORITHMS, memo_modeled_cost, pathsum
from .semiring import SEMIRINGS, get_semiring
from .splitting import SplitPolicy, plan_static_splits

EXIT_VERIFY = 1
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_CAPABILITY = 4
EXIT_INCOMPATIBLE = 5

CSV_COLUMNS = (
    "seed", "states", "symbols", "s", "s_bar", "t_max", "pi_max",
    "algorithm", "semiring", "order", "compatible", "Z",
    "oplus", "otimes", "beta_qa", "visits", "leaves", "sets", "copies",
    "expanded_arcs", "wall_us", "verified",
)


def _weighted_flag(value):
    return {"auto": None, "on": True, "off": False}[value]


def _load(args):
    sr = get_semiring(args.semiring)
    if args.input == "-":
        from .io import parse_automaton

        return parse_automaton(sys.stdin.read(), sr)
    return load_automaton(args.input, sr)


def _same(sr, x, y) -> bool:
    if x == y:
        return True
    if isinstance(x, float) and isinstance(y, float):
        if sr.name == "log":
            return math.isclose(x, y, abs_tol=1e-6)
        return math.isclose(x, y, rel_tol=1e-9, abs_tol=1e-12)
    return False


# -- pathsum ----------------------------------------------------------------------------


def _split_report(a, rep, policy, args, out):
    forest = build_failure_forest(a)
    names = a.state_names
    print(f"split: {policy.mode}", file=out)
    if policy.mode == "static":
        plan = rep.extras["plan"]
        for tree in plan.trees:
            splits = " ".join(names[s] for s in tree.splits) or "-"
            D = " ".join(f"{names[q]}:{d}" for q, d in tree.D.items())
            print(f"tree {names[tree.root]}: S={splits} improvement={tree.improvement:g}", file=out)
            print(f"  D {D}", file=out)
        # measured: pessimal traversal with and without the plan, |Σ| copy units
        sigma_plan = plan_static_splits(a, forest, plan.c_u, a.n_symbols)
        kw = dict(weighted_phi=_weighted_flag(args.weighted_phi), aggregator=args.aggregator,
                  pessimal=True)
        base = pathsum(a, "general", args.order,
                       SplitPolicy("none", plan.c_u, "sigma"), **kw)
        cut = pathsum(a, "general", args.order,
                      SplitPolicy("static", plan.c_u, "sigma", sigma_plan), **kw)
        measured = base.extras["modeled_cost"] - cut.extras["modeled_cost"]
        print(f"predicted improvement {sigma_plan.improvement:g}", file=out)
        print(f"measured improvement {measured:g}", file=out)
    else:
        splits = " ".join(names[s] for s in rep.extras["splits"]) or "-"
        print(f"split states: {splits}", file=out)
    model = policy.copy_model
    print(f"modeled cost {rep.extras['modeled_cost']:g} "
          f"(copies: interned {rep.extras['copy_cost_interned']}, sigma {rep.extras['copy_cost_sigma']})",
          file=out)
    print(f"always-copy cost ({model}) {memo_modeled_cost(a, model, forest)}", file=out)


def cmd_pathsum(args) -> int:
    a = _load(args)
    sr = a.semiring
    if args.fast:
        from .accel import USING_NUMBA, fast_pathsum

        alg = args.algorithm if args.algorithm in ("expand", "memo") else "memo"
        z = fast_pathsum(a, alg, args.order)
        print(sr.format(z))
        if args.stats:
            print(f"backend={'numba' if USING_NUMBA else 'numpy'}")
        return 0

    policy = SplitPolicy(args.split, args.update_cost, args.copy_model)
    dumps = []

    def trace(event, q, g):
        if event == "state":
            dumps.append({
                "state": a.state_names[q],
                "values": {a.symbol_names[k]: sr.format(v) for k, v in g.items()},
                "value": sr.format(g.value()),
            })

    rep = pathsum(
        a,
        args.algorithm,
        order=args.order,
        split=policy,
        weighted_phi=_weighted_flag(args.weighted_phi),
        aggregator=args.aggregator,
        pessimal=args.pessimal,
        trace=trace if args.dump_aggregator else None,
    )
    if args.assert_compatible and rep.compatible is False:
        print("error: order is not compatible with the failure forest", file=sys.stderr)
        return EXIT_INCOMPATIBLE
    record = rep.as_record(sr.format)
    if args.json:
        if args.dump_aggregator:
            record["aggregator"] = dumps
        print(json.dumps(record))
    else:
        print(record["Z"])
        if args.stats:
            for k, v in record.items():
                if k != "Z":
                    print(f"{k}={v}")
        if args.dump_aggregator:
            for d in dumps:
                print(json.dumps(d))
    if args.split_report and rep.algorithm == "general":
        _split_report(a, rep, policy, args, sys.stdout)
    return 0


# -- gen ---------------------------------------------------------------------------------


def _generate(args, seed):
    sr = get_semiring(args.semiring)
    if args.family == "random":
        return generate.random_automaton(
            args.states, args.symbols, args.density, args.phi_prob, seed, sr,
            args.weighted_phi, not args.nondeterministic,
        )
    if args.family == "lattice":
        return generate.vocrf_lattice(
            args.length, args.contexts, args.symbols, args.density, seed, sr, args.weighted_phi
        )
    return generate.shoelaces(args.states, sr)


def cmd_gen(args) -> int:
    text = format_automaton(_generate(args, args.seed))
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# -- bench -------------------------------------------------------------------------------


def _bench_instances(args):
    if args.family == "shoelaces":
        for n in args.states_list:
            ns = argparse.Namespace(**vars(args))
            ns.states = n
            yield n, _generate(ns, 0)
        return
    for seed in range(args.seed, args.seed + args.seeds):
        for n in args.states_list:
            for k in args.symbols_list:
                for d in args.density_list:
                    ns = argparse.Namespace(**vars(args))
                    ns.states, ns.symbols, ns.density = n, k, d
                    yield seed, _generate(ns, seed)


def cmd_bench(args) -> int:
    sr = get_semiring(args.semiring)
    algorithms = args.algorithms
    for alg in algorithms:
        if alg not in ALGORITHMS:
            raise SystemExit(f"unknown algorithm {alg!r}")
    writer = csv.writer(sys.stdout)
    writer.writerow(CSV_COLUMNS)
    failed = False
    for seed, a in _bench_instances(args):
        stats = compute_stats(a)
        reps = []
        for alg in algorithms:
            if alg == "ring" and not sr.is_ring:
                continue
            reps.append(pathsum(a, alg, args.order, SplitPolicy(args.split)))
        ref = reps[0].Z if reps else None
        for rep in reps:
            ok = _same(sr, rep.Z, ref)
            failed |= not ok
            rec = rep.as_record(sr.format)
            rec.update(
                seed=seed, states=a.n_states, symbols=a.n_symbols,
                s=f"{stats.s:.4f}", s_bar=f"{stats.s_bar:.4f}",
                t_max=stats.t_max, pi_max=stats.pi_max, verified=ok,
            )
            writer.writerow([rec[c] for c in CSV_COLUMNS])
        sys.stdout.flush()
        if failed and not args.no_verify:
            print(f"error: algorithms disagree on instance seed={seed}", file=sys.stderr)
            return EXIT_VERIFY
    return EXIT_VERIFY if failed and not args.no_verify else 0


# -- expand / stats ----------------------------------------------------------------------


def cmd_expand(args) -> int:
    sys.stdout.write(format_automaton(failure_expand(_load(args))))
    return 0


def cmd_stats(args) -> int:
    a = _load(args)
    forest = build_failure_forest(a)
    stats = compute_stats(a, forest)
    record = stats.as_dict()
    record["trees"] = len(forest.trees)
    record["nonsingleton_trees"] = sum(1 for t in forest.trees if len(t) > 1)
    record["ideal_k"] = round(stats.ideal_k(forest.t_max), 3)
    if args.json:
        record["forest"] = [[a.state_names[q] for q in t] for t in forest.trees if len(t) > 1]
        print(json.dumps(record))
        return 0
    for k, v in record.items():
        print(f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}")
    for t in forest.trees:
        if len(t) > 1:
            root = a.state_names[t[0]]
            rest = " ".join(a.state_names[q] for q in t[1:])
            print(f"tree {root}: {rest}")
    return 0


# -- parser ------------------------------------------------------------------------------


def _csv_list(cast):
    def parse(text):
        return [cast(x) for x in text.split(",") if x]
    return parse


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="phisum", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def input_args(sp):
        sp.add_argument("-i", "--input", required=True, help="automaton file, or - for stdin")
        sp.add_argument("--semiring", default="real", choices=sorted(SEMIRINGS))

    def gen_args(sp):
        sp.add_argument("--semiring", default="real", choices=sorted(SEMIRINGS))
        sp.add_argument("--family", default="random", choices=generate.FAMILIES)
        sp.add_argument("--symbols", type=int, default=4)
        sp.add_argument("--density", type=float, default=0.3)
        sp.add_argument("--phi-prob", type=float, default=0.3)
        sp.add_argument("--weighted-phi", action="store_true")
        sp.add_argument("--nondeterministic", action="store_true")
        sp.add_argument("--length", type=int, default=5, help="lattice layers")
        sp.add_argument("--contexts", type=int, default=4, help="lattice states per layer")

    sp = sub.add_parser("pathsum", help="compute the pathsum of an automaton")
    input_args(sp)
    sp.add_argument("--algorithm", default="general", choices=ALGORITHMS)
    sp.add_argument("--order", default="kahn", choices=("kahn", "greedy"))
    sp.add_argument("--split", default="none", choices=("none", "dynamic", "static"))
    sp.add_argument("--copy-model", default="interned", choices=("interned", "sigma"))
    sp.add_argument("--update-cost", type=float, default=None, metavar="C_U")
    sp.add_argument("--aggregator", default=None, choices=("fenwick", "ring", "division"))
    sp.add_argument("--weighted-phi", default="auto", choices=("auto", "on", "off"))
    sp.add_argument("--pessimal", action="store_true",
                    help="walk each aggregator back to its root after every state")
    sp.add_argument("--assert-compatible", action="store_true")
    sp.add_argument("--split-report", action="store_true")
    sp.add_argument("--stats", action="store_true")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--dump-aggregator", action="store_true")
    sp.add_argument("--fast", action="store_true", help="array kernels; Z only")
    sp.set_defaults(func=cmd_pathsum)

    sp = sub.add_parser("gen", help="generate a random automaton")
    gen_args(sp)
    sp.add_argument("--states", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("bench", help="sweep generator parameters, CSV on stdout")
    gen_args(sp)
    sp.add_argument("--states", dest="states_list", type=_csv_list(int), default=[50])
    sp.add_argument("--symbols-list", type=_csv_list(int), default=None)
    sp.add_argument("--densities", dest="density_list", type=_csv_list(float), default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--seeds", type=int, default=1)
    sp.add_argument("--algorithms", type=_csv_list(str), default=["memo", "ring", "general"])
    sp.add_argument("--order", default="kahn", choices=("kahn", "greedy"))
    sp.add_argument("--split", default="none", choices=("none", "dynamic", "static"))
    sp.add_argument("--no-verify", action="store_true")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("expand", help="print the failure-expanded automaton")
    input_args(sp)
    sp.set_defaults(func=cmd_expand)

    sp = sub.add_parser("stats", help="sparsity statistics and failure forest")
    input_args(sp)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_stats)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "bench":
        args.symbols_list = args.symbols_list or [args.symbols]
        args.density_list = args.density_list or [args.density]
    try:
        return args.func(args)
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head)
        sys.stderr.close()
        return 0
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CapabilityError as exc:
        print(f"capability error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except PathBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
