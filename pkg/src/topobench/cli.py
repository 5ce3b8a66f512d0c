"""Command-line front end.

Every command writes JSON (default) or CSV to stdout, or to ``--out``.
Wall-clock fields are 0 unless ``--timing`` is given, so output with a fixed
seed is byte-identical across runs. Errors exit with status 2 and a single
``error: <Type>: <message>`` line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import benchmark, cuts, throughput
from .graph import Network, TopoBenchError, export_edge_list, import_edge_list
from .topologies import TopoSpec
from .traffic import build_tm, write_tm


def _epsilon(text: str) -> float:
    value = float(text)
    if not 0 < value <= 0.2:
        raise argparse.ArgumentTypeError(f"epsilon must lie in (0, 0.2], got {value}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {value}")
    return value


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parser() -> argparse.ArgumentParser:
    top = _Parser(prog="topobench", description="Throughput and cut benchmarks for network topologies.")
    sub = top.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--in", dest="infile", help="read the network from an edge-list file")
    common.add_argument("--servers-per-switch", type=int, help="override servers on every switch")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="write output to FILE instead of stdout")
    common.add_argument("--timing", action="store_true", help="report wall-clock times")

    solving = argparse.ArgumentParser(add_help=False)
    solving.add_argument("--solver", choices=("auto", "exact", "approx"), default="auto")
    solving.add_argument("--eps", type=_epsilon, default=throughput.DEFAULT_EPSILON)

    cutting = argparse.ArgumentParser(add_help=False)
    cutting.add_argument("--brute-cap", type=int, default=cuts.DEFAULT_BRUTE_CAP)

    one_topo = argparse.ArgumentParser(add_help=False)
    one_topo.add_argument("--topo", help="family:key=val,... e.g. hypercube:d=3")
    common_one = [one_topo, common]

    sub.add_parser("gen", parents=common_one, help="emit the network as an edge list")
    p = sub.add_parser("tm", parents=common_one, help="emit a traffic matrix")
    p.add_argument("--tm", default="a2a", help="a2a | lm | rm[:seed=S] | file:PATH")
    p = sub.add_parser("throughput", parents=[*common_one, solving], help="solve for throughput")
    p.add_argument("--tm", default="a2a")
    p.add_argument("--flows", action="store_true", help="emit per-commodity edge flows as CSV")
    p = sub.add_parser("cut", parents=[*common_one, cutting], help="run sparse-cut heuristics")
    p.add_argument("--tm", help="score by demand sparsity for this TM (default: uniform)")
    p.add_argument("--heuristic", choices=("all",) + cuts.HEURISTICS, default="all")
    p = sub.add_parser("bench", parents=[*common_one, solving], help="relative throughput vs random graphs")
    p.add_argument("--tm", default="a2a")
    p.add_argument("--iters", type=_positive, default=10)
    p.add_argument("--workers", type=_positive, default=1)
    p = sub.add_parser("ordering", parents=[*common_one, solving], help="A2A / RM(k) / LM ordering")
    p.add_argument("--iters", type=_positive, default=10, help="number of RM samples")
    p = sub.add_parser("cutflow", parents=[common, solving, cutting], help="LM throughput vs best cut")
    p.add_argument("--topo", action="append", dest="topos", help="repeatable")
    p.set_defaults(topo=None)
    p = sub.add_parser("separation", parents=[common, solving, cutting],
                       help="clustered random graph vs subdivided expander")
    for name, default in (("n", 50), ("alpha", 8), ("beta", 1), ("N", 8), ("d", 2), ("p", 2)):
        p.add_argument(f"--{name}", type=int, default=default)
    p.add_argument("--iters", type=_positive, default=5, help="number of seeds")
    return top


def _network(args) -> Network:
    if args.infile and args.topo:
        raise TopoBenchError("give either --topo or --in, not both")
    if args.infile:
        with open(args.infile) as fh:
            net = import_edge_list(fh.read())
    elif args.topo:
        net = TopoSpec.parse(args.topo, seed=args.seed).build()
    else:
        raise TopoBenchError("a network is required: --topo or --in")
    if args.servers_per_switch is not None:
        net = net.with_servers(args.servers_per_switch)
    return net


def _topo_name(args) -> str:
    return str(TopoSpec.parse(args.topo, seed=args.seed)) if args.topo else f"imported:{args.infile}"


def _table(rows: list[dict], output: str) -> str:
    if output == "json":
        return json.dumps(rows if len(rows) != 1 else rows[0], sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    keys = list(rows[0]) if rows else []
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})
    return buf.getvalue()


def _cmd_gen(args) -> str:
    return export_edge_list(_network(args))


def _cmd_tm(args) -> str:
    return write_tm(build_tm(_network(args), args.tm, args.seed))


def _cmd_throughput(args) -> str:
    net = _network(args)
    tm = build_tm(net, args.tm, args.seed)
    sol = throughput.solve(net, tm, args.solver, args.eps)
    throughput.verify_solution(net, tm, sol)
    if args.flows:
        return sol.edge_flows_csv(net)
    row = {"topo": _topo_name(args), "tm": args.tm, "seed": args.seed, **sol.to_dict(args.timing)}
    return _table([row], args.output)


def _cmd_cut(args) -> str:
    net = _network(args)
    tm = build_tm(net, args.tm, args.seed) if args.tm else None
    if args.heuristic == "all":
        results = cuts.run_heuristics(net, tm, args.brute_cap, args.seed)
        best = cuts.best_cut(net, tm, args.brute_cap, args.seed, results)
        rows = [dict(r.to_dict(), kind="heuristic") for r in results.values() if r is not None]
        rows.append(dict(best.to_dict(), kind="best"))
    else:
        fn = {
            "brute": lambda: cuts.brute_force_cuts(net, tm, args.brute_cap, args.seed),
            "one_node": lambda: cuts.one_node_cuts(net, tm),
            "two_node": lambda: cuts.two_node_cuts(net, tm),
            "expanding": lambda: cuts.expanding_cuts(net, tm),
            "eigenvector": lambda: cuts.eigenvector_sweep(net, tm),
        }[args.heuristic]
        result = fn()
        if result is None:
            raise cuts.ZeroDemandAcrossCut("heuristic found no cut carrying demand")
        rows = [dict(result.to_dict(), kind="heuristic")]
    for r in rows:
        r.setdefault("winners", [])
        r.setdefault("exhaustive", True)
    return _table(rows, args.output)


def _cmd_bench(args) -> str:
    net = _network(args)
    spec = TopoSpec.parse(args.topo, seed=args.seed) if args.topo else TopoSpec("imported")
    rec = benchmark.relative_throughput(spec, args.tm, args.iters, args.seed, args.solver, args.eps,
                                        workers=args.workers, net=net)
    if args.output == "csv":
        return benchmark.write_csv([rec], args.timing)
    return benchmark.write_jsonl([rec], args.timing)


def _cmd_ordering(args) -> str:
    net = _network(args)
    rep = benchmark.tm_ordering_experiment(net, args.iters, args.solver, args.eps, seed=args.seed)
    rows = [{"tm": k, "throughput": v, "normalized": rep["normalized"][k]} for k, v in rep["throughput"].items()]
    return _table(rows, args.output)


def _cmd_cutflow(args) -> str:
    topos = args.topos or []
    if args.infile:
        net = _network(args)
        recs = [benchmark.cut_vs_flow(net, f"imported:{args.infile}", args.brute_cap, args.seed,
                                      args.solver, args.eps)]
    elif topos:
        specs = [TopoSpec.parse(t, seed=args.seed) for t in topos]
        recs = benchmark.cut_vs_flow_experiment(specs, args.brute_cap, args.seed, args.solver, args.eps)
    else:
        raise TopoBenchError("a network is required: --topo or --in")
    return _table([r.to_dict() for r in recs], args.output)


def _cmd_separation(args) -> str:
    rep = benchmark.separation_experiment(args.n, args.alpha, args.beta, args.N, args.d, args.p,
                                          args.iters, args.brute_cap, args.solver, args.eps, args.seed)
    if args.output == "json":
        return json.dumps(rep, sort_keys=True, indent=2) + "\n"
    return _table(rep["rows"], "csv")


COMMANDS = {
    "gen": _cmd_gen,
    "tm": _cmd_tm,
    "throughput": _cmd_throughput,
    "cut": _cmd_cut,
    "bench": _cmd_bench,
    "ordering": _cmd_ordering,
    "cutflow": _cmd_cutflow,
    "separation": _cmd_separation,
}


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: UsageError: {exc}", file=sys.stderr)
        return 2
    try:
        text = COMMANDS[args.command](args)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except (TopoBenchError, ValueError, OSError) as exc:
        msg = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
