"""Sparse-cut heuristics: brute force, one-node, two-node, expanding balls and a spectral sweep.

A cut is a set S of switches. Its crossing capacity counts directed edges
from S to the complement, and its demand counts traffic from S to the
complement, aggregated at switches. Every heuristic scores each candidate in
both orientations and keeps the better one. With a traffic matrix the score
is the demand sparsity, otherwise the uniform sparsity c / (|S| |S'|).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .graph import Network, TopoBenchError
from .traffic import TrafficMatrix

DEFAULT_BRUTE_CAP = 100_000
HEURISTICS = ("brute", "one_node", "two_node", "expanding", "eigenvector")
EIGEN_TOL = 1e-8
_TIE = 1e-12


class CutError(TopoBenchError, ValueError):
    pass


class ZeroDemandAcrossCut(CutError):
    pass


class EigenNoConvergence(CutError):
    def __init__(self, iterations: int, residual: float):
        super().__init__(f"eigenvector residual {residual:.3g} after {iterations} iterations")
        self.iterations = iterations
        self.residual = residual


@dataclass(frozen=True)
class CutResult:
    side: tuple[int, ...]
    crossing_capacity: float
    uniform_sparsity: float
    demand_sparsity: float | None
    heuristic: str
    exhaustive: bool = True
    winners: tuple[str, ...] = field(default=(), compare=False)

    @property
    def score(self) -> float:
        return self.uniform_sparsity if self.demand_sparsity is None else self.demand_sparsity

    def to_dict(self) -> dict:
        out = {
            "heuristic": self.heuristic,
            "side": list(self.side),
            "crossing_capacity": self.crossing_capacity,
            "uniform_sparsity": self.uniform_sparsity,
            "demand_sparsity": self.demand_sparsity,
        }
        if self.winners:
            out["winners"] = list(self.winners)
        if not self.exhaustive:
            out["exhaustive"] = False
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


class _Scorer:
    """Vectorized scoring of many cuts given as a boolean (cuts x switches) membership matrix."""

    def __init__(self, net: Network, tm: TrafficMatrix | None):
        self.net = net
        self.n = net.switch_count
        self.demand = None
        if tm is not None:
            d = tm.switch_matrix()
            np.fill_diagonal(d, 0.0)
            self.demand = d

    def evaluate(self, member: np.ndarray):
        """(scores, crossing, uniform, demand) for each row and for its complement; arrays of length 2k."""
        member = np.concatenate([member, ~member])
        size = member.sum(axis=1)
        net = self.net
        crossing = (member[:, net.src] & ~member[:, net.dst]).astype(np.float64) @ net.cap
        with np.errstate(divide="ignore", invalid="ignore"):
            uniform = crossing / (size * (self.n - size))
        if self.demand is None:
            return uniform, crossing, uniform, None
        m = member.astype(np.float64)
        across = ((m @ self.demand) * (1.0 - m)).sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            dsp = np.where(across > 0, crossing / np.where(across > 0, across, 1.0), np.inf)
        return dsp, crossing, uniform, dsp

    def best(self, member: np.ndarray, heuristic: str, exhaustive: bool = True,
             current: CutResult | None = None) -> CutResult | None:
        member = np.asarray(member, dtype=bool)
        valid = (member.sum(axis=1) > 0) & (member.sum(axis=1) < self.n)
        member = member[valid]
        if len(member) == 0:
            return current
        scores, crossing, uniform, dsp = self.evaluate(member)
        i = int(np.argmin(scores))
        if not np.isfinite(scores[i]):
            return current
        if current is not None and not scores[i] < current.score - _TIE:
            return current
        return CutResult(
            side=tuple(int(x) for x in np.flatnonzero(member[i % len(member)] ^ (i >= len(member)))),
            crossing_capacity=float(crossing[i]),
            uniform_sparsity=float(uniform[i]),
            demand_sparsity=None if dsp is None else float(dsp[i]),
            heuristic=heuristic,
            exhaustive=exhaustive,
        )


def sparsity(net: Network, side, tm: TrafficMatrix | None = None, heuristic: str = "given") -> CutResult:
    """Score the single cut ``side`` (this orientation only)."""
    n = net.switch_count
    member = np.zeros(n, dtype=bool)
    idx = np.fromiter(side, dtype=np.int64)
    if len(idx) and (idx.min() < 0 or idx.max() >= n):
        raise CutError("cut contains an unknown switch")
    member[idx] = True
    k = int(member.sum())
    if not 0 < k < n:
        raise CutError(f"cut side must be a proper non-empty subset, got {k} of {n} switches")
    crossing = float(net.cap[member[net.src] & ~member[net.dst]].sum())
    dsp = None
    if tm is not None:
        d = tm.switch_matrix()
        across = float(d[np.ix_(member, ~member)].sum())
        if across <= 0:
            raise ZeroDemandAcrossCut("no demand crosses the cut")
        dsp = crossing / across
    return CutResult(tuple(int(x) for x in np.flatnonzero(member)), crossing,
                     crossing / (k * (n - k)), dsp, heuristic)


def _mask_bits(masks: np.ndarray, n: int) -> np.ndarray:
    return ((masks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(bool)


def brute_force_cuts(net: Network, tm: TrafficMatrix | None = None, cap: int = DEFAULT_BRUTE_CAP,
                     seed: int = 0, chunk: int = 8192) -> CutResult | None:
    """Exhaustive when all 2**(n-1) - 1 cuts fit under ``cap``, else ``cap`` seeded random cuts.

    Exhaustive mode keeps the last switch on the far side, so each cut is
    listed once up to orientation. Random mode draws a size uniformly, then a
    uniform subset of that size.
    """
    scorer = _Scorer(net, tm)
    n = net.switch_count
    if n < 2:
        return None
    total = (1 << (n - 1)) - 1
    best = None
    if total <= cap:
        for lo in range(1, total + 1, chunk):
            masks = np.arange(lo, min(lo + chunk, total + 1), dtype=np.int64)
            best = scorer.best(_mask_bits(masks, n), "brute", True, best)
        return best
    rng = np.random.default_rng(seed)
    done = 0
    while done < cap:
        k = min(chunk, cap - done)
        sizes = rng.integers(1, n, size=k)
        ranks = np.argsort(rng.random((k, n)), axis=1).argsort(axis=1)
        best = scorer.best(ranks < sizes[:, None], "brute", False, best)
        done += k
    return best


def one_node_cuts(net: Network, tm: TrafficMatrix | None = None) -> CutResult | None:
    return _Scorer(net, tm).best(np.eye(net.switch_count, dtype=bool), "one_node")


def two_node_cuts(net: Network, tm: TrafficMatrix | None = None) -> CutResult | None:
    n = net.switch_count
    pairs = np.array(list(itertools.combinations(range(n), 2)), dtype=np.int64).reshape(-1, 2)
    member = np.zeros((len(pairs), n), dtype=bool)
    member[np.arange(len(pairs)), pairs[:, 0]] = True
    member[np.arange(len(pairs)), pairs[:, 1]] = True
    return _Scorer(net, tm).best(member, "two_node")


def expanding_cuts(net: Network, tm: TrafficMatrix | None = None) -> CutResult | None:
    """Balls B(v, k) around every switch for k = 0 .. diameter - 1."""
    dist = net.distances
    diameter = int(dist.max())
    member = np.concatenate([dist <= k for k in range(diameter)]) if diameter else np.zeros((0, 0), bool)
    return _Scorer(net, tm).best(member, "expanding")


def fiedler_vector(net: Network, tol: float = EIGEN_TOL) -> np.ndarray:
    """Eigenvector for the second-smallest eigenvalue of the normalized Laplacian.

    The adjacency is symmetrized by averaging both directions. When that
    eigenvalue is repeated, the result is the projection of (1, 2, ..., n)
    onto its eigenspace, which makes the choice canonical.
    """
    n = net.switch_count
    a = np.zeros((n, n))
    np.add.at(a, (net.src, net.dst), net.cap)
    a = (a + a.T) / 2
    deg = a.sum(axis=1)
    inv = 1.0 / np.sqrt(deg)
    lap = np.eye(n) - inv[:, None] * a * inv[None, :]
    vals, vecs = np.linalg.eigh(lap)
    lam = vals[1]
    cluster = np.flatnonzero(np.abs(vals - lam) <= 1e-8 * max(1.0, abs(lam)))
    cluster = cluster[cluster >= 1]
    basis = vecs[:, cluster]
    start = np.arange(1, n + 1, dtype=np.float64)
    x = basis @ (basis.T @ start)
    if np.linalg.norm(x) < 1e-12:
        x = basis[:, 0]
    x /= np.linalg.norm(x)
    first = np.sqrt(deg) / np.linalg.norm(np.sqrt(deg))
    residual = float(np.linalg.norm(lap @ x - lam * x))
    if residual > tol or abs(first @ x) > tol:
        raise EigenNoConvergence(1, max(residual, abs(first @ x)))
    return x


def eigenvector_sweep(net: Network, tm: TrafficMatrix | None = None) -> CutResult | None:
    """Sort switches by their Fiedler entry and score the n - 1 prefix cuts."""
    n = net.switch_count
    if n < 2:
        return None
    order = np.argsort(fiedler_vector(net), kind="stable")
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)
    member = rank[None, :] < np.arange(1, n)[:, None]
    return _Scorer(net, tm).best(member, "eigenvector")


def run_heuristics(net: Network, tm: TrafficMatrix | None = None, brute_cap: int = DEFAULT_BRUTE_CAP,
                   seed: int = 0) -> dict[str, CutResult | None]:
    return {
        "brute": brute_force_cuts(net, tm, brute_cap, seed),
        "one_node": one_node_cuts(net, tm),
        "two_node": two_node_cuts(net, tm),
        "expanding": expanding_cuts(net, tm),
        "eigenvector": eigenvector_sweep(net, tm) if net.switch_count >= 3 else None,
    }


def best_cut(net: Network, tm: TrafficMatrix | None = None, brute_cap: int = DEFAULT_BRUTE_CAP,
             seed: int = 0, results: dict | None = None) -> CutResult:
    """Sparsest cut over all heuristics; ``winners`` lists every heuristic that attains it."""
    results = results if results is not None else run_heuristics(net, tm, brute_cap, seed)
    found = [r for r in results.values() if r is not None]
    if not found:
        raise ZeroDemandAcrossCut("no candidate cut carries demand")
    best = min(found, key=lambda r: r.score)
    winners = tuple(h for h in HEURISTICS if results.get(h) is not None
                    and results[h].score <= best.score * (1 + 1e-9) + _TIE)
    return CutResult(best.side, best.crossing_capacity, best.uniform_sparsity, best.demand_sparsity,
                     best.heuristic, results["brute"].exhaustive if results.get("brute") else False, winners)


def bisection_bandwidth(net: Network, brute_cap: int = DEFAULT_BRUTE_CAP, seed: int = 0) -> CutResult:
    """Smallest crossing capacity over the balanced (|S| = n/2) cuts found by brute force or the sweep.

    Exhaustive when every balanced cut fits under ``brute_cap``.
    """
    n = net.switch_count
    if n < 2 or n % 2:
        raise CutError("bisection needs an even number of switches")
    half = n // 2
    scorer = _Scorer(net, None)
    candidates = []
    exhaustive = (1 << (n - 1)) - 1 <= brute_cap
    if exhaustive:
        masks = np.arange(1, 1 << (n - 1), dtype=np.int64)
        bits = _mask_bits(masks, n)
        candidates.append(bits[bits.sum(axis=1) == half])
    else:
        rng = np.random.default_rng(seed)
        ranks = np.argsort(rng.random((brute_cap, n)), axis=1).argsort(axis=1)
        candidates.append(ranks < half)
    order = np.argsort(fiedler_vector(net), kind="stable")
    sweep = np.zeros((1, n), dtype=bool)
    sweep[0, order[:half]] = True
    candidates.append(sweep)
    member = np.concatenate(candidates)
    _, crossing, uniform, _ = scorer.evaluate(member)
    i = int(np.argmin(crossing))
    side = member[i % len(member)] ^ (i >= len(member))
    return CutResult(tuple(int(x) for x in np.flatnonzero(side)), float(crossing[i]), float(uniform[i]),
                     None, "bisection", exhaustive)
