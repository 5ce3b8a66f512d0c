"""Traffic matrices under the hose model: all-to-all, random matching, longest matching.

Servers are numbered globally in switch order: switch 0's slots first, then
switch 1's, and so on. A :class:`ServerId` names a server by ``(switch, slot)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .graph import CAPACITY_TOL, Network, TopoBenchError
from .matching import max_weight_perfect_matching

__all__ = [
    "ServerId",
    "TrafficMatrix",
    "Matching",
    "TrafficError",
    "NoServers",
    "SingleServer",
    "HoseViolation",
    "SelfDemand",
    "tm_all_to_all",
    "tm_random_matching",
    "tm_longest_matching",
    "validate_hose",
    "max_weight_perfect_matching",
    "read_tm",
    "write_tm",
    "build_tm",
]


class TrafficError(TopoBenchError, ValueError):
    pass


class NoServers(TrafficError):
    pass


class SingleServer(TrafficError):
    pass


class SelfDemand(TrafficError):
    pass


class HoseViolation(TrafficError):
    def __init__(self, server: ServerId, total: float, direction: str):
        super().__init__(f"server {tuple(server)} {direction} {total:.12g} > 1")
        self.server = server
        self.total = total


class ServerId(NamedTuple):
    switch: int
    slot: int


def server_switches(layout) -> np.ndarray:
    """Switch index of every global server id."""
    return np.repeat(np.arange(len(layout)), np.asarray(layout, dtype=np.int64))


def server_ids(layout) -> list[ServerId]:
    return [ServerId(u, k) for u, cnt in enumerate(layout) for k in range(cnt)]


@dataclass(frozen=True, eq=False)
class TrafficMatrix:
    """Sparse server-to-server demands.

    ``src``/``dst`` are global server indices into ``layout`` (servers per
    switch). Entries with zero demand are dropped.
    """

    layout: tuple[int, ...]
    src: np.ndarray
    dst: np.ndarray
    demand: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        src = np.asarray(self.src, dtype=np.int64)
        dst = np.asarray(self.dst, dtype=np.int64)
        demand = np.asarray(self.demand, dtype=np.float64)
        if not (src.shape == dst.shape == demand.shape) or src.ndim != 1:
            raise TrafficError("src, dst and demand must be equal-length vectors")
        if np.any(demand < 0):
            raise TrafficError("negative demand")
        total = int(sum(self.layout))
        if len(src) and (src.min() < 0 or dst.min() < 0 or src.max() >= total or dst.max() >= total):
            raise TrafficError("server index out of range")
        keep = demand > 0
        order = np.lexsort((dst[keep], src[keep]))
        for name, arr in (("src", src), ("dst", dst), ("demand", demand)):
            arr = arr[keep][order]
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "layout", tuple(int(x) for x in self.layout))

    @classmethod
    def from_dict(cls, layout, demands: dict, kind: str = "custom") -> TrafficMatrix:
        """Build from ``{(ServerId, ServerId): demand}``."""
        offsets = np.concatenate([[0], np.cumsum(layout)])
        src, dst, val = [], [], []
        for (a, b), d in demands.items():
            for s in (a, b):
                if not 0 <= s[1] < layout[s[0]]:
                    raise TrafficError(f"server {tuple(s)} does not exist")
            src.append(offsets[a[0]] + a[1])
            dst.append(offsets[b[0]] + b[1])
            val.append(d)
        return cls(tuple(layout), np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64),
                   np.array(val, dtype=np.float64), kind)

    def __len__(self):
        return len(self.demand)

    def __eq__(self, other):
        if not isinstance(other, TrafficMatrix):
            return NotImplemented
        return (
            self.layout == other.layout
            and self.kind == other.kind
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
            and np.array_equal(self.demand, other.demand)
        )

    @property
    def server_count(self) -> int:
        return sum(self.layout)

    @property
    def total(self) -> float:
        return float(self.demand.sum())

    @cached_property
    def demands(self) -> dict[tuple[ServerId, ServerId], float]:
        ids = server_ids(self.layout)
        return {(ids[a], ids[b]): float(d) for a, b, d in zip(self.src, self.dst, self.demand)}

    def scaled(self, factor: float) -> TrafficMatrix:
        return TrafficMatrix(self.layout, self.src, self.dst, self.demand * factor, self.kind)

    def switch_matrix(self) -> np.ndarray:
        """Demand aggregated per (source switch, destination switch); diagonal is switch-local traffic."""
        sw = server_switches(self.layout)
        n = len(self.layout)
        out = np.zeros((n, n))
        np.add.at(out, (sw[self.src], sw[self.dst]), self.demand)
        return out

    def egress(self) -> np.ndarray:
        return np.bincount(self.src, weights=self.demand, minlength=self.server_count)

    def ingress(self) -> np.ndarray:
        return np.bincount(self.dst, weights=self.demand, minlength=self.server_count)


@dataclass(frozen=True)
class Matching:
    """Server permutation; ``total_weight`` sums the switch hop distance of each pair."""

    pairs: tuple[int, ...]
    total_weight: float
    layout: tuple[int, ...]

    def as_server_ids(self) -> dict[ServerId, ServerId]:
        ids = server_ids(self.layout)
        return {ids[v]: ids[w] for v, w in enumerate(self.pairs)}


def validate_hose(tm: TrafficMatrix, tol: float = CAPACITY_TOL) -> None:
    """Raise SelfDemand or HoseViolation; None when every server sends and receives at most 1."""
    self_pairs = np.flatnonzero(tm.src == tm.dst)
    ids = server_ids(tm.layout)
    if len(self_pairs):
        raise SelfDemand(f"demand from server {tuple(ids[tm.src[self_pairs[0]]])} to itself")
    for direction, sums in (("sends", tm.egress()), ("receives", tm.ingress())):
        over = np.flatnonzero(sums > 1 + tol)
        if len(over):
            raise HoseViolation(ids[over[0]], float(sums[over[0]]), direction)


def tm_all_to_all(net: Network) -> TrafficMatrix:
    """Demand 1/n between every ordered pair of distinct servers."""
    n = net.server_count
    if n < 2:
        raise NoServers(f"all-to-all needs at least 2 servers, network has {n}")
    v, w = np.nonzero(~np.eye(n, dtype=bool))
    return TrafficMatrix(net.servers, v, w, np.full(len(v), 1.0 / n), "A2A")


def _derangement(n: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        perm = rng.permutation(n)
        if not np.any(perm == np.arange(n)):
            return perm


def tm_random_matching(net: Network, seed: int = 0) -> TrafficMatrix:
    """One unit from every server to a partner drawn by a uniform fixed-point-free permutation.

    Partners may share a switch. RM(k) is this TM on ``net.with_servers(k)``.
    """
    n = net.server_count
    if n < 2:
        raise SingleServer(f"random matching needs at least 2 servers, network has {n}")
    perm = _derangement(n, np.random.default_rng(seed))
    return TrafficMatrix(net.servers, np.arange(n), perm, np.ones(n), "RM")


def tm_longest_matching(net: Network) -> tuple[TrafficMatrix, Matching]:
    """Server pairing maximizing the total switch hop distance, as a unit-demand TM.

    Any fixed points in the optimal permutation are rotated away: with metric
    weights that never lowers the total, so the result stays optimal.
    """
    n = net.server_count
    if n < 2:
        raise SingleServer(f"longest matching needs at least 2 servers, network has {n}")
    sw = server_switches(net.servers)
    weights = net.distances[np.ix_(sw, sw)].astype(np.float64)
    perm = np.array(max_weight_perfect_matching(weights).perm, dtype=np.int64)
    fixed = np.flatnonzero(perm == np.arange(n))
    if len(fixed) >= 2:
        perm[fixed] = np.roll(fixed, -1)
    elif len(fixed) == 1:
        v = int(fixed[0])
        u = int(np.flatnonzero(perm != np.arange(n))[0])
        perm[v], perm[u] = perm[u], v
    total = float(weights[np.arange(n), perm].sum())
    matching = Matching(tuple(int(x) for x in perm), total, net.servers)
    return TrafficMatrix(net.servers, np.arange(n), perm, np.ones(n), "LM"), matching


def write_tm(tm: TrafficMatrix) -> str:
    """One ``src_switch src_slot dst_switch dst_slot demand`` line per nonzero entry."""
    ids = server_ids(tm.layout)
    lines = [f"# kind {tm.kind}"]
    for a, b, d in zip(tm.src, tm.dst, tm.demand):
        s, t = ids[a], ids[b]
        lines.append(f"{s.switch} {s.slot} {t.switch} {t.slot} {float(d)!r}")
    return "\n".join(lines) + "\n"


def read_tm(text: str, layout) -> TrafficMatrix:
    from .graph import ParseError

    demands: dict[tuple[ServerId, ServerId], float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ParseError(lineno, "expected 'src_switch src_slot dst_switch dst_slot demand'")
        try:
            a = ServerId(int(parts[0]), int(parts[1]))
            b = ServerId(int(parts[2]), int(parts[3]))
            d = float(parts[4])
        except ValueError as exc:
            raise ParseError(lineno, str(exc)) from None
        if not (0 <= a.switch < len(layout) and 0 <= b.switch < len(layout)):
            raise ParseError(lineno, "switch id out of range")
        demands[(a, b)] = demands.get((a, b), 0.0) + d
    return TrafficMatrix.from_dict(tuple(layout), demands, "custom")


def build_tm(net: Network, spec: str, seed: int | None = None) -> TrafficMatrix:
    """Traffic matrix from ``a2a``, ``lm``, ``rm[:seed=S]`` or ``file:PATH``.

    ``seed`` fills in an RM seed when the string names none.
    """
    kind, _, rest = spec.strip().partition(":")
    kind = kind.lower()
    if kind == "a2a" and not rest:
        return tm_all_to_all(net)
    if kind == "lm" and not rest:
        return tm_longest_matching(net)[0]
    if kind == "rm":
        rm_seed = 0 if seed is None else seed
        for item in filter(None, rest.split(",")):
            key, eq, value = item.partition("=")
            if key != "seed" or not eq:
                raise TrafficError(f"bad RM parameter {item!r}")
            try:
                rm_seed = int(value)
            except ValueError:
                raise TrafficError(f"bad RM seed {value!r}") from None
        return tm_random_matching(net, rm_seed)
    if kind == "file" and rest:
        with open(rest) as fh:
            return read_tm(fh.read(), net.servers)
    raise TrafficError(f"unknown traffic spec {spec!r}")
