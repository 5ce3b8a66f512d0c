"""Experiment protocols built on the generators, solvers and cut heuristics.

Every protocol is a pure function of its arguments and seeds. Per-iteration
seeds come from :class:`numpy.random.SeedSequence`, so results do not depend
on how many worker processes run the iterations.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from .cuts import DEFAULT_BRUTE_CAP, best_cut, run_heuristics
from .graph import Network, TopoBenchError
from .throughput import DEFAULT_EPSILON, solve
from .topologies import TopoSpec, gen_clustered_random, gen_same_equipment_random, gen_subdivided_expander
from .traffic import TrafficMatrix, build_tm, tm_all_to_all, tm_longest_matching, tm_random_matching

CSV_COLUMNS = ("topo", "tm", "seed", "t", "t_random_mean", "relative", "ci_lo", "ci_hi", "runtime_ms")


class BoundViolated(TopoBenchError):
    pass


def derive_seeds(seed: int, count: int) -> list[int]:
    return [int(x) for x in np.random.SeedSequence(seed).generate_state(count, dtype=np.uint32)]


def _throughput(net: Network, tm: TrafficMatrix, solver: str, epsilon: float) -> float:
    return solve(net, tm, solver=solver, epsilon=epsilon).t


def _tm_for(net: Network, tm_spec: str, seed: int) -> TrafficMatrix:
    # RM is re-drawn from ``seed`` unless the TM string pins its own seed
    return build_tm(net, tm_spec, seed)


@dataclass(frozen=True)
class BenchmarkRecord:
    topo: str
    tm: str
    seed: int
    t: float
    t_random: tuple[float, ...]
    relative: float
    ci_lo: float
    ci_hi: float
    runtime_ms: float

    @property
    def t_random_mean(self) -> float:
        return float(np.mean(self.t_random))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["t_random"] = list(self.t_random)
        out["t_random_mean"] = self.t_random_mean
        return out

    def csv_row(self) -> list:
        d = self.to_dict()
        return [d[c] for c in CSV_COLUMNS]


def mean_ci95(values) -> tuple[float, float, float]:
    """Mean and two-sided 95% Student-t interval; degenerate for a single value."""
    x = np.asarray(values, dtype=np.float64)
    m = float(x.mean())
    if len(x) < 2:
        return m, m, m
    half = float(stats.t.ppf(0.975, len(x) - 1) * x.std(ddof=1) / np.sqrt(len(x)))
    return m, m - half, m + half


def _random_iteration(args) -> float:
    net, tm_spec, seed, solver, epsilon = args
    graph_seed, tm_seed = derive_seeds(seed, 2)
    rand = gen_same_equipment_random(net, graph_seed)
    return _throughput(rand, _tm_for(rand, tm_spec, tm_seed), solver, epsilon)


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def relative_throughput(topo_spec, tm_spec: str = "a2a", iterations: int = 10, seed: int = 0,
                        solver: str = "auto", epsilon: float = DEFAULT_EPSILON, servers_per_switch=None,
                        workers: int = 1, net: Network | None = None) -> BenchmarkRecord:
    """Throughput of a topology over the mean of same-equipment random graphs.

    The CI is the Student-t interval for the random-graph mean, mapped through
    t / mean so it brackets the relative value.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    start = time.perf_counter()
    spec = TopoSpec.parse(topo_spec) if isinstance(topo_spec, str) else topo_spec
    if net is None:
        net = spec.build()
    if servers_per_switch is not None:
        net = net.with_servers(servers_per_switch)
    topo_tm_seed, *iter_seeds = derive_seeds(seed, iterations + 1)
    t = _throughput(net, _tm_for(net, tm_spec, topo_tm_seed), solver, epsilon)
    t_random = _map(_random_iteration, [(net, tm_spec, s, solver, epsilon) for s in iter_seeds], workers)
    mean, lo, hi = mean_ci95(t_random)
    ci = (t / hi if hi > 0 else 0.0, t / lo if lo > 0 else float("inf"))
    return BenchmarkRecord(str(spec), tm_spec, seed, t, tuple(t_random), t / mean, ci[0], ci[1],
                           round((time.perf_counter() - start) * 1000, 3))


def write_jsonl(records, timing: bool = True) -> str:
    lines = []
    for r in records:
        d = r.to_dict()
        if not timing:
            d["runtime_ms"] = 0
        lines.append(json.dumps(d, sort_keys=True))
    return "\n".join(lines) + "\n"


def write_csv(records, timing: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        row = r.csv_row()
        if not timing:
            row[-1] = 0
        w.writerow(row)
    return buf.getvalue()


def hosting_layout(net: Network, k: int) -> tuple[int, ...]:
    """k servers on every switch that hosts any server, none elsewhere."""
    return tuple(k if s > 0 else 0 for s in net.servers)


def tm_ordering_experiment(net: Network, seeds=10, solver: str = "auto", epsilon: float = DEFAULT_EPSILON,
                           rm_sizes=(5, 1), seed: int = 0) -> dict:
    """Throughput under A2A, RM(k) and LM, normalized by the lower bound t_A2A / 2.

    Every TM is a hose TM at switch level: each hosting switch sends and
    receives at most one unit. A2A and LM use one server per hosting switch;
    RM(k) puts k servers there and scales each server's demand by 1/k.
    """
    seed_list = derive_seeds(seed, seeds) if isinstance(seeds, int) else list(seeds)
    base = Network(net.switch_count, net.edges, hosting_layout(net, 1))
    t_a2a = _throughput(base, tm_all_to_all(base), solver, epsilon)
    t_lm = _throughput(base, tm_longest_matching(base)[0], solver, epsilon)
    bound = t_a2a / 2
    out = {"A2A": t_a2a}
    rm_values = {}
    for k in rm_sizes:
        multi = Network(net.switch_count, net.edges, hosting_layout(net, k))
        # scaling demand by 1/k multiplies throughput by k
        vals = [k * _throughput(multi, tm_random_matching(multi, s), solver, epsilon) for s in seed_list]
        rm_values[f"RM({k})"] = vals
        out[f"RM({k})"] = float(np.mean(vals))
    out["LM"] = t_lm
    out["bound"] = bound
    return {
        "throughput": out,
        "normalized": {key: val / bound for key, val in out.items()},
        "rm_samples": rm_values,
        "seeds": seed_list,
    }


def random_hose_tm(layout, rng: np.random.Generator, iterations: int = 500) -> TrafficMatrix:
    """Uniform random server-to-server demands, zero diagonal, scaled to saturate the hose.

    Alternating row and column normalization, then a final division by the
    largest row or column sum so every server sends and receives at most 1.
    """
    n = int(sum(layout))
    m = rng.random((n, n))
    np.fill_diagonal(m, 0.0)
    for _ in range(iterations):
        m /= m.sum(axis=1, keepdims=True)
        m /= m.sum(axis=0, keepdims=True)
    m /= max(m.sum(axis=1).max(), m.sum(axis=0).max())
    src, dst = np.nonzero(m)
    return TrafficMatrix(tuple(layout), src, dst, m[src, dst], "hose")


def hose_lower_bound_check(net: Network, trials: int = 20, seed: int = 0, solver: str = "exact",
                   epsilon: float = DEFAULT_EPSILON, tms=()) -> dict:
    """Throughput of random hose TMs (plus any given ``tms``) against t_A2A / 2.

    Raises BoundViolated if some TM falls below the bound by more than 1e-6.
    """
    t_a2a = _throughput(net, tm_all_to_all(net), solver, epsilon)
    rng = np.random.default_rng(seed)
    cases = [random_hose_tm(net.servers, rng) for _ in range(trials)] + list(tms)
    ratios = []
    for tm in cases:
        ratio = _throughput(net, tm, solver, epsilon) / t_a2a
        if ratio < 0.5 - 1e-6:
            raise BoundViolated(f"throughput ratio {ratio:.9f} below 1/2")
        ratios.append(ratio)
    return {"t_a2a": t_a2a, "ratios": ratios, "min_ratio": min(ratios), "trials": len(cases)}


@dataclass(frozen=True)
class CutFlowRecord:
    topo: str
    t_lm: float
    best_cut_sparsity: float
    winning_heuristic: str
    winners: tuple[str, ...]
    equal: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["winners"] = list(self.winners)
        return d


def cut_vs_flow(net: Network, name: str, brute_cap: int = DEFAULT_BRUTE_CAP, seed: int = 0,
                solver: str = "auto", epsilon: float = DEFAULT_EPSILON) -> CutFlowRecord:
    tm, _ = tm_longest_matching(net)
    t = _throughput(net, tm, solver, epsilon)
    cut = best_cut(net, tm, brute_cap, seed, run_heuristics(net, tm, brute_cap, seed))
    if solver != "approx" and cut.demand_sparsity < t - 1e-7:
        raise BoundViolated(f"{name}: cut {cut.demand_sparsity!r} below throughput {t!r}")
    return CutFlowRecord(name, t, cut.demand_sparsity, cut.heuristic, cut.winners,
                         abs(cut.demand_sparsity - t) <= 1e-6)


def cut_vs_flow_experiment(topo_specs, brute_cap: int = DEFAULT_BRUTE_CAP, seed: int = 0,
                           solver: str = "auto", epsilon: float = DEFAULT_EPSILON) -> list[CutFlowRecord]:
    """Longest-matching throughput against the sparsest demand-weighted cut found, per topology."""
    out = []
    for spec in topo_specs:
        spec = TopoSpec.parse(spec) if isinstance(spec, str) else spec
        out.append(cut_vs_flow(spec.build(), str(spec), brute_cap, seed, solver, epsilon))
    return out


def separation_experiment(n: int = 50, alpha: int = 8, beta: int = 1, N: int = 8, d: int = 2, p: int = 2,
                          seeds=5, brute_cap: int = DEFAULT_BRUTE_CAP, solver: str = "auto",
                          epsilon: float = DEFAULT_EPSILON, seed: int = 0) -> dict:
    """Clustered random graph against subdivided expander under A2A demand.

    Both graphs get one server on every switch. Per seed the report holds
    throughput and best uniform cut of each graph, and whether the ordering
    flips: the clustered graph has the smaller cut but the larger throughput.
    """
    seed_list = derive_seeds(seed, seeds) if isinstance(seeds, int) else list(seeds)
    rows = []
    for s in seed_list:
        graphs = {
            "clustered": gen_clustered_random(n, alpha, beta, s),
            "subdivided": gen_subdivided_expander(N, d, p, s).with_servers(1),
        }
        row = {"seed": s}
        for name, g in graphs.items():
            row[f"t_{name}"] = _throughput(g, tm_all_to_all(g), solver, epsilon)
            row[f"cut_{name}"] = best_cut(g, None, brute_cap, s).uniform_sparsity
        row["flip"] = bool(row["cut_clustered"] < row["cut_subdivided"]
                           and row["t_clustered"] > row["t_subdivided"])
        rows.append(row)
    flips = sum(r["flip"] for r in rows)
    return {
        "params": {"n": n, "alpha": alpha, "beta": beta, "N": N, "d": d, "p": p},
        "rows": rows,
        "flips": flips,
        "majority_flip": flips * 2 > len(rows),
    }
