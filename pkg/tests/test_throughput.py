import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import complete, cycle
from topobench.cuts import run_heuristics
from topobench.graph import Network
from topobench.throughput import (
    CapacityViolated,
    ConservationViolated,
    DemandShort,
    FlowProblem,
    FlowSolution,
    TooLargeForExact,
    Unbounded,
    ZeroDemand,
    ecmp_solution,
    solve,
    solve_approx,
    solve_exact,
    verify_solution,
    volumetric_upper_bound,
)
from topobench.topologies import gen_hypercube, gen_jellyfish
from topobench.traffic import TrafficMatrix, tm_all_to_all, tm_longest_matching, tm_random_matching

# (network, TM, value). Each value is pinned by an explicit routing (ECMP)
# meeting the volumetric upper bound, independent of the LP.
PINNED = [
    ("C4/A2A", lambda: cycle(4), tm_all_to_all, 2.0),
    ("C4/LM", lambda: cycle(4), lambda n: tm_longest_matching(n)[0], 1.0),
    ("K4/A2A", lambda: complete(4), tm_all_to_all, 4.0),
    ("Q3/LM", lambda: gen_hypercube(3), lambda n: tm_longest_matching(n)[0], 1.0),
    ("Q3/A2A", lambda: gen_hypercube(3), tm_all_to_all, 2.0),
]


@pytest.mark.parametrize("name,make_net,make_tm,value", PINNED, ids=[p[0] for p in PINNED])
def test_pinned_values(name, make_net, make_tm, value):
    net = make_net()
    tm = make_tm(net)
    lower = ecmp_solution(net, tm)
    verify_solution(net, tm, lower)
    assert lower.t == pytest.approx(value, abs=1e-12)
    assert volumetric_upper_bound(net, tm) == pytest.approx(value, abs=1e-12)
    sol = solve_exact(net, tm)
    verify_solution(net, tm, sol)
    assert sol.t == pytest.approx(value, abs=1e-6)


def test_volumetric_examples(c4, k4):
    assert volumetric_upper_bound(gen_hypercube(3), tm_longest_matching(gen_hypercube(3))[0]) == 1.0
    assert volumetric_upper_bound(c4, tm_all_to_all(c4)) == 2.0
    assert volumetric_upper_bound(k4, tm_all_to_all(k4)) == 4.0


def test_volumetric_zero_demand():
    net = Network.from_links(2, [(0, 1)], servers=[2, 0])
    with pytest.raises(ZeroDemand):
        volumetric_upper_bound(net, tm_all_to_all(net))


def test_unbounded_when_only_local_demand():
    net = Network.from_links(2, [(0, 1)], servers=[2, 0])
    with pytest.raises(Unbounded):
        solve_exact(net, tm_all_to_all(net))


def test_exact_limit():
    net = gen_jellyfish(70, 3, 1, seed=0)
    with pytest.raises(TooLargeForExact):
        solve_exact(net, tm_random_matching(net, 0))
    assert solve(cycle(4), tm_all_to_all(cycle(4))).solver == "exact_lp"


def test_flow_problem_aggregation():
    net = Network.from_links(3, [(0, 1), (1, 2)], servers=[2, 1, 0])
    problem = FlowProblem.build(net, tm_all_to_all(net))
    assert problem.sources.tolist() == [0, 1]
    assert problem.demand.tolist() == [[0, 2 / 3, 0], [2 / 3, 0, 0]]
    assert problem.local_demand == pytest.approx(2 / 3)
    assert problem.total_demand == pytest.approx(tm_all_to_all(net).total)


def test_approx_examples(c4):
    sol = solve_approx(c4, tm_all_to_all(c4), 0.01)
    assert 1.98 <= sol.t <= 2.0 + 1e-9
    verify_solution(c4, tm_all_to_all(c4), sol)
    net = gen_hypercube(3)
    tm = tm_longest_matching(net)[0]
    sol = solve_approx(net, tm, 0.01)
    assert 0.99 <= sol.t <= 1.0 + 1e-9
    assert sol.upper_bound >= 1.0 - 1e-9
    assert sol.upper_bound <= sol.t / (1 - 0.01) + 1e-12


def test_approx_epsilon_range(c4):
    for eps in (0.0, 0.3, -0.1):
        with pytest.raises(ValueError):
            solve_approx(c4, tm_all_to_all(c4), eps)


def test_verify_inflated_t(c4):
    tm = tm_all_to_all(c4)
    sol = solve_exact(c4, tm)
    bad = FlowSolution(sol.t * 1.1, sol.edge_flows, sol.solver, 0.0, 0.0, sol.sources)
    with pytest.raises(DemandShort):
        verify_solution(c4, tm, bad)


def test_verify_zero_flow_zero_t(c4):
    tm = tm_all_to_all(c4)
    problem = FlowProblem.build(c4, tm)
    zero = FlowSolution(0.0, np.zeros((problem.commodity_count, c4.edge_count)), "exact_lp", 0.0, 0.0,
                        problem.sources)
    verify_solution(c4, tm, zero)


def test_verify_capacity_and_conservation(c4):
    tm = tm_all_to_all(c4)
    sol = solve_exact(c4, tm)
    over = sol.edge_flows.copy()
    over[0] += 1.0
    with pytest.raises(CapacityViolated):
        verify_solution(c4, tm, FlowSolution(sol.t, over, "x", 0, 0, sol.sources))
    # at t = 0 any stray flow on 1 -> 2 breaks conservation for commodity 0 (sourced at switch 0)
    leak = np.zeros_like(sol.edge_flows)
    e = next(i for i, (u, v) in enumerate(zip(c4.src, c4.dst)) if (u, v) == (1, 2))
    leak[0, e] = 1e-3
    with pytest.raises(ConservationViolated):
        verify_solution(c4, tm, FlowSolution(0.0, leak, "x", 0, 0, sol.sources))


def test_solution_serialization(c4):
    sol = solve_exact(c4, tm_all_to_all(c4))
    d = sol.to_dict(timing=False)
    assert d == {"t": sol.t, "solver": "exact_lp", "epsilon": 0.0, "solve_time_ms": 0}
    lines = sol.edge_flows_csv(c4).splitlines()
    assert lines[0] == "commodity,src,dst,flow"
    assert len(lines) > 1


@st.composite
def small_instances(draw):
    n = draw(st.sampled_from([6, 8, 10]))
    seed = draw(st.integers(0, 10_000))
    net = gen_jellyfish(n, 3, 1, seed)
    kind = draw(st.sampled_from(["a2a", "lm", "rm"]))
    tm = {"a2a": tm_all_to_all, "lm": lambda g: tm_longest_matching(g)[0],
          "rm": lambda g: tm_random_matching(g, seed)}[kind](net)
    return net, tm


@settings(max_examples=25)
@given(small_instances())
def test_exact_invariants(instance):
    net, tm = instance
    sol = solve_exact(net, tm)
    verify_solution(net, tm, sol)
    assert sol.t <= volumetric_upper_bound(net, tm) + 1e-7
    assert ecmp_solution(net, tm).t <= sol.t + 1e-7
    for cut in run_heuristics(net, tm, brute_cap=1000).values():
        if cut is not None:
            assert sol.t <= cut.demand_sparsity + 1e-7


@settings(max_examples=15)
@given(small_instances(), st.sampled_from([0.5, 2.0, 3.0]))
def test_capacity_scaling(instance, factor):
    net, tm = instance
    base = solve_exact(net, tm).t
    assert solve_exact(net.scaled(factor), tm).t == pytest.approx(factor * base, rel=1e-8)


@settings(max_examples=10)
@given(small_instances())
def test_approx_agrees_with_exact(instance):
    net, tm = instance
    exact = solve_exact(net, tm).t
    sol = solve_approx(net, tm, 0.05)
    verify_solution(net, tm, sol)
    assert abs(sol.t - exact) / exact <= 0.05
    assert sol.upper_bound >= exact - 1e-7
