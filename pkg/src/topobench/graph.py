"""Switch-level network representation, validation, BFS distances and edge-list I/O.

Servers are not graph nodes. Each switch carries a server count and all
traffic endpoints are aggregated at their switch, because server links are
treated as having unlimited capacity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

# Single place for the floating point slack used across the package.
CAPACITY_TOL = 1e-9
FLOW_TOL = 1e-7


class TopoBenchError(Exception):
    """Base class for every error raised by this package."""


class GraphError(TopoBenchError, ValueError):
    pass


class SelfLoop(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class NegativeCapacity(GraphError):
    pass


class AsymmetricLink(GraphError):
    pass


class Disconnected(GraphError):
    pass


class ParseError(GraphError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True, eq=False)
class Network:
    """Capacitated directed switch graph plus servers attached per switch.

    ``edges`` holds ``(src, dst, capacity)`` triples. Construction does not
    validate; call :func:`validate` (generators always do).
    """

    switch_count: int
    edges: tuple[tuple[int, int, float], ...]
    servers: tuple[int, ...] = field(default=())

    def __post_init__(self):
        n = int(self.switch_count)
        object.__setattr__(self, "switch_count", n)
        edges = tuple(sorted((int(u), int(v), float(c)) for u, v, c in self.edges))
        object.__setattr__(self, "edges", edges)
        servers = tuple(int(s) for s in self.servers) if self.servers else (1,) * n
        if len(servers) != n:
            raise GraphError(f"servers has {len(servers)} entries for {n} switches")
        if any(s < 0 for s in servers):
            raise GraphError("negative server count")
        object.__setattr__(self, "servers", servers)

    @classmethod
    def from_links(cls, n: int, links: Iterable, servers=1) -> Network:
        """Build from undirected links ``(u, v)`` or ``(u, v, cap)``; each becomes two directed edges."""
        edges = []
        for link in links:
            u, v = int(link[0]), int(link[1])
            c = float(link[2]) if len(link) > 2 else 1.0
            edges.append((u, v, c))
            edges.append((v, u, c))
        if isinstance(servers, (int, np.integer)):
            servers = (int(servers),) * n
        return cls(n, tuple(edges), tuple(servers))

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return (
            self.switch_count == other.switch_count
            and self.edges == other.edges
            and self.servers == other.servers
        )

    def __hash__(self):
        return hash((self.switch_count, self.edges, self.servers))

    def __repr__(self):
        return (
            f"Network(switches={self.switch_count}, links={len(self.edges) // 2}, "
            f"servers={self.server_count})"
        )

    @cached_property
    def src(self) -> np.ndarray:
        a = np.array([e[0] for e in self.edges], dtype=np.int64)
        a.setflags(write=False)
        return a

    @cached_property
    def dst(self) -> np.ndarray:
        a = np.array([e[1] for e in self.edges], dtype=np.int64)
        a.setflags(write=False)
        return a

    @cached_property
    def cap(self) -> np.ndarray:
        a = np.array([e[2] for e in self.edges], dtype=np.float64)
        a.setflags(write=False)
        return a

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def server_count(self) -> int:
        return sum(self.servers)

    @cached_property
    def adjacency(self) -> csr_matrix:
        """Sparse capacity matrix, ``adjacency[u, v] = c(u, v)``."""
        n = self.switch_count
        return csr_matrix((self.cap, (self.src, self.dst)), shape=(n, n))

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.switch_count)]
        for u, v, _ in self.edges:
            out[u].append(v)
        return tuple(tuple(x) for x in out)

    def degrees(self) -> np.ndarray:
        """Number of outgoing links per switch."""
        return np.bincount(self.src, minlength=self.switch_count)

    def capacity_degrees(self) -> np.ndarray:
        """Sum of outgoing capacity per switch."""
        return np.bincount(self.src, weights=self.cap, minlength=self.switch_count)

    def links(self) -> list[tuple[int, int, float]]:
        """Undirected view: one ``(u, v, cap)`` per symmetric pair with ``u < v``."""
        return [(u, v, c) for u, v, c in self.edges if u < v]

    def with_servers(self, servers) -> Network:
        """Copy with a new server map (an int applies to every switch)."""
        if isinstance(servers, (int, np.integer)):
            servers = (int(servers),) * self.switch_count
        return Network(self.switch_count, self.edges, tuple(servers))

    def scaled(self, factor: float) -> Network:
        """Copy with every capacity multiplied by ``factor``."""
        return Network(
            self.switch_count, tuple((u, v, c * factor) for u, v, c in self.edges), self.servers
        )

    @cached_property
    def distances(self) -> np.ndarray:
        return all_pairs_shortest_paths(self)


def validate(net: Network) -> None:
    """Raise the error for the first violated invariant; return None if valid."""
    n = net.switch_count
    if n < 1:
        raise GraphError("network has no switches")
    seen = set()
    for u, v, c in net.edges:
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge ({u},{v}) references a switch outside [0,{n})")
        if u == v:
            raise SelfLoop(f"self-loop at switch {u}")
        if c < 0:
            raise NegativeCapacity(f"edge ({u},{v}) has capacity {c}")
        if (u, v) in seen:
            raise DuplicateEdge(f"edge ({u},{v}) appears more than once")
        seen.add((u, v))
    caps = {(u, v): c for u, v, c in net.edges}
    for (u, v), c in caps.items():
        back = caps.get((v, u))
        if back is None or abs(back - c) > CAPACITY_TOL:
            raise AsymmetricLink(f"edge ({u},{v}) lacks a reverse edge of equal capacity")
    if n > 1:
        ncomp, _ = connected_components(net.adjacency, directed=False)
        if ncomp > 1:
            raise Disconnected(f"switch graph has {ncomp} components")


def all_pairs_shortest_paths(net: Network) -> np.ndarray:
    """Hop-count distance matrix over switch-switch edges (BFS, unit lengths).

    Unreachable pairs are -1; a valid network has none.
    """
    d = shortest_path(net.adjacency, method="D", unweighted=True)
    out = np.where(np.isinf(d), -1, d).astype(np.int64)
    out.setflags(write=False)
    return out


def average_path_length(net: Network) -> float:
    """Mean hop distance over ordered switch pairs u != v."""
    n = net.switch_count
    if n < 2:
        return 0.0
    return float(net.distances.sum()) / (n * (n - 1))


def export_edge_list(net: Network) -> str:
    """Deterministic text form: sorted undirected links, then one server line per switch."""
    lines = [f"# switches {net.switch_count}"]
    for u, v, c in net.links():
        lines.append(f"{u} {v}" if c == 1.0 else f"{u} {v} {c!r}")
    for u, k in enumerate(net.servers):
        lines.append(f"server {u} {k}")
    return "\n".join(lines) + "\n"


def import_edge_list(text: str, default_servers: int = 1) -> Network:
    """Parse the edge-list format and validate the result.

    Each ``u v [cap]`` line adds both directions; ``server u k`` sets the
    server count of switch ``u`` (others get ``default_servers``).
    """
    edges: list[tuple[int, int, float]] = []
    seen: set[tuple[int, int]] = set()
    servers: dict[int, int] = {}
    max_id = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "server":
                if len(parts) != 3:
                    raise ValueError("expected 'server u k'")
                u, k = int(parts[1]), int(parts[2])
                if u < 0 or k < 0:
                    raise ValueError("negative id or server count")
                servers[u] = k
                max_id = max(max_id, u)
                continue
            if len(parts) not in (2, 3):
                raise ValueError("expected 'u v [cap]'")
            u, v = int(parts[0]), int(parts[1])
            c = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError as exc:
            raise ParseError(lineno, str(exc)) from None
        if u < 0 or v < 0:
            raise ParseError(lineno, "negative switch id")
        if u == v:
            raise SelfLoop(f"line {lineno}: self-loop at switch {u}")
        if (u, v) in seen:
            raise DuplicateEdge(f"line {lineno}: link ({u},{v}) repeated")
        seen.add((u, v))
        seen.add((v, u))
        edges.append((u, v, c))
        edges.append((v, u, c))
        max_id = max(max_id, u, v)
    if max_id < 0:
        raise ParseError(0, "no switches defined")
    n = max_id + 1
    net = Network(n, tuple(edges), tuple(servers.get(u, default_servers) for u in range(n)))
    validate(net)
    return net
