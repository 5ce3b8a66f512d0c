"""Throughput: the largest t such that t times the traffic matrix is routable.

Commodities are aggregated by source switch. Server links are uncapacitated,
so demand between two servers on the same switch never constrains t and is
left out of the flow problem.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix

from .graph import FLOW_TOL, Network, TopoBenchError
from .traffic import TrafficMatrix

EXACT_SWITCH_LIMIT = 64
DEFAULT_EPSILON = 0.01


class ThroughputError(TopoBenchError):
    pass


class TooLargeForExact(ThroughputError):
    pass


class Unbounded(ThroughputError):
    pass


class ZeroDemand(ThroughputError):
    pass


class VerificationError(ThroughputError):
    pass


class CapacityViolated(VerificationError):
    pass


class ConservationViolated(VerificationError):
    pass


class DemandShort(VerificationError):
    pass


@dataclass(frozen=True, eq=False)
class FlowProblem:
    """Switch-level multicommodity flow instance.

    ``demand[k, v]`` is what source switch ``sources[k]`` must deliver to
    switch ``v``. ``local_demand`` is the switch-local traffic that was
    dropped.
    """

    net: Network
    sources: np.ndarray
    demand: np.ndarray
    local_demand: float

    @classmethod
    def build(cls, net: Network, tm: TrafficMatrix) -> FlowProblem:
        if tuple(tm.layout) != tuple(net.servers):
            raise ThroughputError("traffic matrix server layout does not match the network")
        agg = tm.switch_matrix()
        local = float(np.trace(agg))
        np.fill_diagonal(agg, 0.0)
        sources = np.flatnonzero(agg.sum(axis=1) > 0)
        return cls(net, sources, agg[sources], local)

    @property
    def commodity_count(self) -> int:
        return len(self.sources)

    @property
    def total_demand(self) -> float:
        return float(self.demand.sum()) + self.local_demand

    def balance(self, k: int) -> np.ndarray:
        """Required net outflow per switch for one unit of t of commodity k."""
        b = -self.demand[k].copy()
        b[self.sources[k]] += self.demand[k].sum()
        return b


@dataclass(frozen=True, eq=False)
class FlowSolution:
    t: float
    edge_flows: np.ndarray = field(repr=False)
    solver: str
    epsilon: float
    solve_time: float
    sources: np.ndarray = field(repr=False)
    upper_bound: float | None = None

    def to_dict(self, timing: bool = True) -> dict:
        out = {"t": self.t, "solver": self.solver, "epsilon": self.epsilon}
        if self.upper_bound is not None:
            out["t_upper"] = self.upper_bound
        out["solve_time_ms"] = round(self.solve_time * 1000, 3) if timing else 0
        return out

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), sort_keys=True)

    def edge_flows_csv(self, net: Network) -> str:
        lines = ["commodity,src,dst,flow"]
        for k, s in enumerate(self.sources):
            for e in np.flatnonzero(self.edge_flows[k] > 0):
                lines.append(f"{s},{net.src[e]},{net.dst[e]},{self.edge_flows[k, e]!r}")
        return "\n".join(lines) + "\n"


def _check_demand(problem: FlowProblem) -> None:
    if problem.commodity_count == 0:
        raise Unbounded("no demand crosses the switch network; throughput is unbounded")


def solve_exact(net: Network, tm: TrafficMatrix, limit: int = EXACT_SWITCH_LIMIT) -> FlowSolution:
    """Maximum concurrent flow via the edge-based LP (HiGHS)."""
    if net.switch_count > limit:
        raise TooLargeForExact(f"{net.switch_count} switches exceeds the exact-solve limit {limit}")
    start = time.perf_counter()
    problem = FlowProblem.build(net, tm)
    _check_demand(problem)
    n, m, K = net.switch_count, net.edge_count, problem.commodity_count
    nvar = K * m + 1
    tcol = K * m

    # conservation: out - in - t * balance = 0, one row per (commodity, switch)
    k_idx = np.repeat(np.arange(K), m)
    e_idx = np.tile(np.arange(m), K)
    col = k_idx * m + e_idx
    rows = np.concatenate([k_idx * n + net.src[e_idx], k_idx * n + net.dst[e_idx]])
    cols = np.concatenate([col, col])
    vals = np.concatenate([np.ones(K * m), -np.ones(K * m)])
    bal = np.stack([problem.balance(k) for k in range(K)])
    nz = np.flatnonzero(bal.ravel())
    rows = np.concatenate([rows, nz])
    cols = np.concatenate([cols, np.full(len(nz), tcol)])
    vals = np.concatenate([vals, -bal.ravel()[nz]])
    a_eq = coo_matrix((vals, (rows, cols)), shape=(K * n, nvar)).tocsr()

    # capacity: sum_k f_k(e) <= c(e)
    a_ub = coo_matrix((np.ones(K * m), (e_idx, col)), shape=(m, nvar)).tocsr()

    cost = np.zeros(nvar)
    cost[tcol] = -1.0
    res = linprog(
        cost,
        A_ub=a_ub,
        b_ub=net.cap,
        A_eq=a_eq,
        b_eq=np.zeros(K * n),
        bounds=(0, None),
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise ThroughputError(f"LP solver failed: {res.message}")
    flows = np.clip(res.x[: K * m].reshape(K, m), 0.0, None)
    return FlowSolution(
        t=float(res.x[tcol]),
        edge_flows=flows,
        solver="exact_lp",
        epsilon=0.0,
        solve_time=time.perf_counter() - start,
        sources=problem.sources,
    )


def _shortest_path_congestion(net: Network, problem: FlowProblem) -> float:
    """Max edge utilization when every demand follows one BFS tree from its source."""
    from scipy.sparse.csgraph import breadth_first_order

    load = np.zeros(net.edge_count)
    edge_of = {(u, v): i for i, (u, v, _) in enumerate(net.edges)}
    for k, s in enumerate(problem.sources):
        order, pred = breadth_first_order(net.adjacency, s, directed=True, return_predecessors=True)
        sub = problem.demand[k].copy()
        for v in order[:0:-1]:
            u = pred[v]
            load[edge_of[(u, v)]] += sub[v]
            sub[u] += sub[v]
    return float(np.max(load / net.cap))


def solve_approx(net: Network, tm: TrafficMatrix, epsilon: float = DEFAULT_EPSILON,
                 max_phases: int = 2_000_000) -> FlowSolution:
    """(1 - epsilon)-approximate maximum concurrent flow with a duality certificate.

    Multiplicative-weights routing over shortest paths: each phase sends every
    commodity's full demand along shortest-path trees under the current edge
    lengths, and every unit of flow on an edge multiplies its length by
    ``1 + step * flow / capacity``. The primal value is the accumulated flow
    scaled down to fit capacities; any length function gives the dual upper
    bound ``sum c*l / sum D*dist_l``. Phases continue until
    ``upper / t <= 1 / (1 - epsilon)``.
    """
    from . import _mcf

    if not 0 < epsilon <= 0.2:
        raise ValueError(f"epsilon must lie in (0, 0.2], got {epsilon}")
    start = time.perf_counter()
    problem = FlowProblem.build(net, tm)
    _check_demand(problem)
    keep = net.cap > 0
    edge_ids = np.flatnonzero(keep)
    src, dst, cap = net.src[keep], net.dst[keep], net.cap[keep]
    order = np.argsort(src, kind="stable")
    out_ptr = np.searchsorted(src[order], np.arange(net.switch_count + 1)).astype(np.int64)
    out_edge = order.astype(np.int64)

    # rescale so the optimum is at least 1 and typically a small constant
    scale = 1.0 / _shortest_path_congestion(net, problem)
    demand = problem.demand * scale
    flows, phases, upper = _mcf.run_phases(
        net.switch_count, problem.sources.astype(np.int64), demand, out_ptr, out_edge,
        src.astype(np.int64), dst.astype(np.int64), cap, epsilon / 2, 1.0 / (1.0 - epsilon),
        max_phases,
    )
    congestion = float(np.max(flows.sum(axis=0) / cap))
    t_scaled = phases / congestion
    full = np.zeros((problem.commodity_count, net.edge_count))
    full[:, edge_ids] = flows / congestion
    return FlowSolution(
        t=t_scaled * scale,
        edge_flows=full,
        solver="approx_mcf",
        epsilon=epsilon,
        solve_time=time.perf_counter() - start,
        sources=problem.sources,
        upper_bound=upper * scale,
    )


def ecmp_solution(net: Network, tm: TrafficMatrix) -> FlowSolution:
    """Explicit routing: every demand splits evenly over next hops on shortest paths.

    The returned t is the largest scale at which this fixed routing fits, so
    it is a lower bound on throughput. Where it meets
    :func:`volumetric_upper_bound` the throughput is pinned exactly.
    """
    start = time.perf_counter()
    problem = FlowProblem.build(net, tm)
    _check_demand(problem)
    n, dist = net.switch_count, net.distances
    edge_of = {(int(u), int(v)): i for i, (u, v) in enumerate(zip(net.src, net.dst))}
    flows = np.zeros((problem.commodity_count, net.edge_count))
    for k, s in enumerate(problem.sources):
        for w in np.flatnonzero(problem.demand[k]):
            amount = np.zeros(n)
            amount[s] = problem.demand[k, w]
            for u in np.argsort(-dist[:, w], kind="stable"):
                if u == w or amount[u] == 0:
                    continue
                hops = [v for v in net.neighbors[u] if dist[v, w] == dist[u, w] - 1]
                share = amount[u] / len(hops)
                for v in hops:
                    flows[k, edge_of[(int(u), v)]] += share
                    amount[v] += share
    t = 1.0 / float(np.max(flows.sum(axis=0) / net.cap))
    return FlowSolution(t, flows * t, "ecmp", 0.0, time.perf_counter() - start, problem.sources)


def solve(net: Network, tm: TrafficMatrix, solver: str = "auto", epsilon: float = DEFAULT_EPSILON,
          limit: int = EXACT_SWITCH_LIMIT) -> FlowSolution:
    """Dispatch: ``exact``, ``approx``, or ``auto`` (exact up to ``limit`` switches)."""
    if solver == "exact" or (solver == "auto" and net.switch_count <= limit):
        return solve_exact(net, tm, limit=max(limit, net.switch_count) if solver == "exact" else limit)
    if solver in ("approx", "auto"):
        return solve_approx(net, tm, epsilon)
    raise ValueError(f"unknown solver {solver!r}")


def verify_solution(net: Network, tm: TrafficMatrix, sol: FlowSolution, tol: float = FLOW_TOL) -> None:
    """Check capacities, per-commodity conservation and delivered demand; raise on the first failure."""
    problem = FlowProblem.build(net, tm)
    flows = sol.edge_flows
    if flows.shape != (problem.commodity_count, net.edge_count):
        raise VerificationError(f"edge_flows has shape {flows.shape}")
    if np.any(flows < -tol):
        k, e = np.argwhere(flows < -tol)[0]
        raise CapacityViolated(f"negative flow on edge ({net.src[e]},{net.dst[e]})")
    usage = flows.sum(axis=0)
    over = np.flatnonzero(usage > net.cap + tol)
    if len(over):
        e = over[0]
        raise CapacityViolated(
            f"edge ({net.src[e]},{net.dst[e]}) carries {usage[e]:.12g} > {net.cap[e]:.12g}"
        )
    n = net.switch_count
    for k, s in enumerate(problem.sources):
        net_out = np.bincount(net.src, weights=flows[k], minlength=n) - np.bincount(
            net.dst, weights=flows[k], minlength=n
        )
        want = problem.demand[k] * sol.t
        for v in range(n):
            if v == s:
                continue
            if want[v] > 0:
                if -net_out[v] < want[v] - tol:
                    raise DemandShort(
                        f"switch {s} -> {v} receives {-net_out[v]:.12g} < {want[v]:.12g}"
                    )
            elif abs(net_out[v]) > tol:
                raise ConservationViolated(f"commodity {s} unbalanced at switch {v} by {net_out[v]:.3g}")


def volumetric_upper_bound(net: Network, tm: TrafficMatrix) -> float:
    """Total capacity divided by the demand-weighted sum of shortest path lengths."""
    agg = tm.switch_matrix()
    volume = float((agg * net.distances).sum())
    if volume <= 0:
        raise ZeroDemand("no demand crosses the switch network")
    return float(net.cap.sum()) / volume
