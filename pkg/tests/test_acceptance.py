"""Acceptance criteria, one test each. Every test prints a single PASS/FAIL line."""

import itertools
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import complete, cycle
from topobench.benchmark import hose_lower_bound_check, separation_experiment, tm_ordering_experiment
from topobench.cuts import best_cut, bisection_bandwidth, brute_force_cuts, eigenvector_sweep
from topobench.graph import Network
from topobench.matching import max_weight_perfect_matching
from topobench.throughput import solve_approx, solve_exact
from topobench.topologies import TopoSpec, gen_fattree, gen_flattened_butterfly, gen_hypercube, gen_jellyfish
from topobench.traffic import tm_all_to_all, tm_longest_matching, tm_random_matching


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail

    return emit


def lm(net):
    return tm_longest_matching(net)[0]


def test_01_exact_small_instances(report):
    cases = [
        ("C4/A2A", cycle(4), tm_all_to_all, 2.0),
        ("C4/LM", cycle(4), lm, 1.0),
        ("K4/A2A", complete(4), tm_all_to_all, 4.0),
        ("hypercube d=3/LM", gen_hypercube(3), lm, 1.0),
        ("hypercube d=3/A2A", gen_hypercube(3), tm_all_to_all, 2.0),
    ]
    parts, ok = [], True
    for name, net, make, expected in cases:
        start = time.perf_counter()
        t = solve_exact(net, make(net)).t
        elapsed = time.perf_counter() - start
        good = abs(t - expected) <= 1e-6 and elapsed < 1.0
        ok &= good
        parts.append(f"{name} t={t:.9f} ({elapsed:.3f}s)")
    report(1, ok, "; ".join(parts))


def test_02_hose_lower_bound(report):
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    ratios, graphs = [], 0
    for n, r in ((8, 3), (10, 3), (12, 4), (14, 3), (16, 4), (16, 3)):
        net = gen_jellyfish(n, r, 1, int(rng.integers(2**31)))
        ratios += hose_lower_bound_check(net, trials=10, seed=int(rng.integers(2**31)))["ratios"]
        graphs += 1
    q3 = gen_hypercube(3)
    lm_ratio = hose_lower_bound_check(q3, trials=0, tms=[lm(q3)])["ratios"][0]
    elapsed = time.perf_counter() - start
    ok = (len(ratios) >= 50 and graphs >= 5 and min(ratios) >= 0.5 - 1e-6
          and abs(lm_ratio - 0.5) <= 1e-6 and elapsed < 120)
    report(2, ok, f"{len(ratios)} hose TMs on {graphs} graphs, min ratio {min(ratios):.6f}; "
                  f"hypercube d=3 LM ratio {lm_ratio:.9f}; {elapsed:.1f}s")


SMALLEST = [
    "hypercube:d=2", "fattree:k=4", "bcube:n=2,k=1", "dcell:n=2,k=1", "flattened_butterfly:k=3,n=2",
    "dragonfly:a=2,h=1,p=1", "hyperx:dims=2-3,trunking=1-2", "jellyfish:n=8,r=3", "clustered_random:n=8,alpha=2,beta=1",
    "subdivided_expander:N=8,d=2,p=2",
]


def test_03_cut_at_least_flow(report):
    start = time.perf_counter()
    worst, parts, ok = np.inf, [], True
    fat_gap = None
    for spec in SMALLEST:
        net = TopoSpec.parse(spec).build()
        tm = lm(net)
        t = solve_exact(net, tm).t
        cut = best_cut(net, tm).demand_sparsity
        worst = min(worst, cut - t)
        ok &= cut >= t - 1e-7
        if spec.startswith("fattree"):
            fat_gap = abs(cut - t)
        parts.append(f"{spec.split(':')[0]} {cut:.4f}>={t:.4f}")
    elapsed = time.perf_counter() - start
    ok &= fat_gap is not None and fat_gap <= 1e-6 and elapsed < 300
    report(3, ok, f"min(cut - t_LM) = {worst:.3g}; fat-tree k=4 gap {fat_gap:.2g}; {elapsed:.1f}s; "
                  + ", ".join(parts))


def true_sparsest(net):
    """Independent oracle: score every subset directly from the link list."""
    n = net.switch_count
    links = list(zip(net.src.tolist(), net.dst.tolist(), net.cap.tolist()))
    best = np.inf
    for mask in range(1, (1 << n) - 1):
        c = sum(cap for u, v, cap in links if mask >> u & 1 and not mask >> v & 1)
        k = bin(mask).count("1")
        best = min(best, c / (k * (n - k)))
    return best


def random_connected(rng, n):
    parent = [int(rng.integers(v)) for v in range(1, n)]
    links = {(p, v) for v, p in zip(range(1, n), parent)}
    for a, b in rng.integers(0, n, size=(int(rng.integers(0, 2 * n)), 2)):
        if a != b:
            links.add((int(min(a, b)), int(max(a, b))))
    return Network.from_links(n, sorted(links))


def test_04_cut_oracle(report):
    start = time.perf_counter()
    rng = np.random.default_rng(4)
    ok, worst_eig, count = True, 1.0, 0
    for i in range(32):
        n = int(rng.integers(4, 15))
        net = random_connected(rng, n) if i % 2 else gen_jellyfish(n + n % 2 if n < 14 else 14, 3, 1, i)
        truth = true_sparsest(net)
        brute = brute_force_cuts(net, cap=1 << 14)
        best = best_cut(net, brute_cap=1 << 14)
        eig = eigenvector_sweep(net).uniform_sparsity
        ok &= brute.exhaustive and abs(best.uniform_sparsity - truth) <= 1e-12
        ok &= abs(brute.uniform_sparsity - truth) <= 1e-12
        worst_eig = max(worst_eig, eig / truth)
        count += 1
    elapsed = time.perf_counter() - start
    ok &= worst_eig <= 2.0 and elapsed < 300
    report(4, ok, f"{count} graphs (n<=14): best_cut equals exhaustive oracle; "
                  f"worst eigenvector/optimum ratio {worst_eig:.4f}; {elapsed:.1f}s")


def test_05_hypercube_bisection(report):
    start = time.perf_counter()
    found = {d: bisection_bandwidth(gen_hypercube(d)).crossing_capacity for d in (2, 3, 4)}
    elapsed = time.perf_counter() - start
    ok = all(found[d] == 2 ** (d - 1) for d in found) and elapsed < 60
    report(5, ok, f"balanced cut capacity {found}; {elapsed:.2f}s")


def test_06_matching_oracle(report):
    start = time.perf_counter()
    rng = np.random.default_rng(6)
    ok = True
    for i in range(50):
        n = int(rng.integers(1, 9))
        w = rng.integers(-10, 30, size=(n, n)) if i % 2 else rng.random((n, n))
        perms = np.array(list(itertools.permutations(range(n))))
        brute = w[np.arange(n), perms].sum(axis=1).max()
        got = max_weight_perfect_matching(w)
        ok &= got.total_weight == brute
    elapsed = time.perf_counter() - start
    ok &= elapsed < 30
    report(6, ok, f"50 matrices n<=8 equal brute force exactly; {elapsed:.2f}s")


def test_07_approx_contract(report):
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = {0.05: 0.0, 0.01: 0.0}
    kinds = ("a2a", "lm", "rm")
    for i in range(20):
        n = int(rng.choice([8, 10, 12, 14, 16, 18, 20]))
        net = gen_jellyfish(n, 3, 1, int(rng.integers(2**31)))
        kind = kinds[i % 3]
        tm = {"a2a": tm_all_to_all, "lm": lm, "rm": lambda g: tm_random_matching(g, i)}[kind](net)
        exact = solve_exact(net, tm).t
        for eps in worst:
            approx = solve_approx(net, tm, eps).t
            worst[eps] = max(worst[eps], abs(approx - exact) / exact)
    elapsed = time.perf_counter() - start
    ok = all(worst[eps] <= eps for eps in worst) and elapsed < 300
    report(7, ok, f"20 Jellyfish(n<=20, r=3) instances, worst relative error "
                  f"{worst[0.05]:.4f} (eps 0.05), {worst[0.01]:.4f} (eps 0.01); {elapsed:.1f}s")


def test_08_tm_ordering(report):
    start = time.perf_counter()
    nets = {
        "hypercube d=4": gen_hypercube(4),
        "jellyfish n=32 r=4": gen_jellyfish(32, 4, 1, 8),
        "fat-tree k=4": gen_fattree(4),
        "flattened butterfly k=4 n=3": gen_flattened_butterfly(4, 3),
    }
    ok, parts = True, []
    for name, net in nets.items():
        v = tm_ordering_experiment(net, seeds=10, seed=8)["normalized"]
        chain = [v["A2A"], v["RM(5)"], v["RM(1)"], v["LM"]]
        ok &= all(a >= b * (1 - 0.02) for a, b in zip(chain, chain[1:]))
        ok &= all(x >= 1 - 1e-6 for x in v.values())
        parts.append(f"{name}: " + " >= ".join(f"{x:.3f}" for x in chain))
    elapsed = time.perf_counter() - start
    ok &= elapsed < 900
    report(8, ok, "; ".join(parts) + f"; {elapsed:.1f}s")


def test_09_separation(report):
    start = time.perf_counter()
    rep = separation_experiment(n=50, alpha=8, beta=1, N=8, d=2, p=2, seeds=5, seed=9)
    elapsed = time.perf_counter() - start
    row = rep["rows"][0]
    ok = rep["majority_flip"] and elapsed < 600
    report(9, ok, f"clustered(n=50, alpha=8, beta=1) vs subdivided(N=8, d=2, p=2): flip in "
                  f"{rep['flips']}/5 seeds; first seed cut {row['cut_clustered']:.4f} < "
                  f"{row['cut_subdivided']:.4f}, t {row['t_clustered']:.3f} > {row['t_subdivided']:.3f}; "
                  f"{elapsed:.1f}s")


CLI_RUNS = [
    ["gen", "--topo", "jellyfish:n=12,r=3", "--seed", "5"],
    ["tm", "--topo", "jellyfish:n=12,r=3", "--tm", "rm", "--seed", "5"],
    ["throughput", "--topo", "jellyfish:n=12,r=3", "--tm", "rm", "--seed", "5"],
    ["throughput", "--topo", "jellyfish:n=12,r=3", "--tm", "lm", "--solver", "approx", "--seed", "5"],
    ["cut", "--topo", "jellyfish:n=24,r=3", "--brute-cap", "2000", "--seed", "5"],
    ["bench", "--topo", "fattree:k=4", "--tm", "a2a", "--iters", "10", "--seed", "7"],
    ["bench", "--topo", "jellyfish:n=12,r=3", "--tm", "rm", "--iters", "3", "--seed", "7", "--output", "csv"],
    ["ordering", "--topo", "hypercube:d=3", "--iters", "3", "--seed", "5"],
    ["cutflow", "--topo", "jellyfish:n=10,r=3", "--seed", "5"],
    ["separation", "--n", "16", "--alpha", "3", "--iters", "2", "--seed", "5"],
]


def test_10_cli_determinism(report):
    mismatched = []
    for argv in CLI_RUNS:
        outs = [subprocess.run([sys.executable, "-m", "topobench.cli", *argv], capture_output=True, check=True).stdout
                for _ in range(2)]
        if outs[0] != outs[1] or not outs[0]:
            mismatched.append(argv[0])
    report(10, not mismatched, f"{len(CLI_RUNS)} CLI invocations byte-identical across two runs"
           + (f"; mismatched: {mismatched}" if mismatched else ""))
