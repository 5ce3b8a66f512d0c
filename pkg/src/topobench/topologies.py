"""Seeded generators for the evaluated topology families.

Every generator returns a validated :class:`~topobench.graph.Network` with
unit capacity per undirected link unless the family says otherwise.
Server-centric designs (BCube, DCell) are emulated by turning each server
into a switch that hosts exactly one server.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .graph import Disconnected, Network, TopoBenchError, import_edge_list, validate


class TopologyError(TopoBenchError, ValueError):
    pass


class Infeasible(TopologyError):
    pass


class OddK(Infeasible):
    pass


class UnsupportedLevel(TopologyError):
    pass


class InfeasibleGlobalWiring(Infeasible):
    pass


class DegreeSequenceInfeasible(Infeasible):
    pass


class DisconnectedClusters(Infeasible, Disconnected):
    """Parameters that can only produce a disconnected graph."""


def _finish(n: int, links, servers) -> Network:
    net = Network.from_links(n, links, servers)
    validate(net)
    return net


def _lattice(dims, trunking, servers: int) -> Network:
    dims = [int(x) for x in dims]
    points = list(itertools.product(*[range(s) for s in dims]))
    index = {p: i for i, p in enumerate(points)}
    links = []
    for p in points:
        for axis, size in enumerate(dims):
            for value in range(p[axis] + 1, size):
                q = p[:axis] + (value,) + p[axis + 1 :]
                links.append((index[p], index[q], float(trunking[axis])))
    return _finish(len(points), links, servers)


def gen_hypercube(d: int, s: int = 1) -> Network:
    """2**d switches, adjacent iff their labels differ in one bit."""
    if d < 1:
        raise TopologyError("hypercube dimension must be >= 1")
    n = 1 << d
    links = [(u, u ^ (1 << b)) for u in range(n) for b in range(d) if u < u ^ (1 << b)]
    return _finish(n, links, s)


def gen_fattree(k: int) -> Network:
    """Three-level fat tree of k-port switches; k/2 servers on each edge switch.

    Numbering: pod p holds edge switches ``p*k .. p*k + k/2 - 1`` followed by
    its aggregation switches; the (k/2)**2 core switches come last.
    """
    if k < 2 or k % 2:
        raise OddK(f"fat-tree needs an even k >= 2, got {k}")
    h = k // 2
    n = k * k + h * h
    core0 = k * k
    links = []
    servers = [0] * n
    for pod in range(k):
        edges = [pod * k + i for i in range(h)]
        aggs = [pod * k + h + j for j in range(h)]
        for e in edges:
            servers[e] = h
            links.extend((e, a) for a in aggs)
        for j, a in enumerate(aggs):
            links.extend((a, core0 + j * h + c) for c in range(h))
    return _finish(n, links, servers)


def gen_bcube(n: int, k: int) -> Network:
    """BCube_k of n-port switches with each server replaced by a one-server switch.

    Level switches come first (level-major), then the n**(k+1) server proxies.
    """
    if n < 2 or k < 0:
        raise TopologyError("BCube needs n >= 2 and k >= 0")
    per_level = n**k
    level_switches = (k + 1) * per_level
    links = []
    for sid, digits in enumerate(itertools.product(range(n), repeat=k + 1)):
        proxy = level_switches + sid
        for level in range(k + 1):
            rest = digits[:level] + digits[level + 1 :]
            idx = 0
            for x in rest:
                idx = idx * n + x
            links.append((level * per_level + idx, proxy))
    total = level_switches + n ** (k + 1)
    servers = [0] * level_switches + [1] * (n ** (k + 1))
    return _finish(total, links, servers)


def dcell_server_count(n: int, k: int) -> int:
    t = n
    for _ in range(k):
        t = t * (t + 1)
    return t


def gen_dcell(n: int, k: int) -> Network:
    """DCell_k built from n-server DCell_0 cells.

    For k >= 1 every server becomes a one-server proxy switch: mini-switches
    are numbered first, then proxies in DCell address order. DCell_0 has no
    server-to-server links, so its n servers attach to the single switch
    directly.
    """
    if n < 2:
        raise TopologyError("DCell needs n >= 2")
    if k not in (0, 1, 2):
        raise UnsupportedLevel(f"DCell level {k} is not supported (k must be 0, 1 or 2)")
    if k == 0:
        return _finish(1, [], [n])
    t_total = dcell_server_count(n, k)
    mini = t_total // n
    links = [(sid // n, mini + sid) for sid in range(t_total)]

    def wire(prefix: int, level: int) -> None:
        # servers of this sub-DCell occupy [prefix, prefix + t_level)
        if level == 0:
            return
        t_prev = dcell_server_count(n, level - 1)
        for i in range(t_prev + 1):
            wire(prefix + i * t_prev, level - 1)
        for i in range(t_prev + 1):
            for j in range(i + 1, t_prev + 1):
                a = prefix + i * t_prev + (j - 1)
                b = prefix + j * t_prev + i
                links.append((mini + a, mini + b))

    wire(0, k)
    return _finish(mini + t_total, links, [0] * mini + [1] * t_total)


def gen_flattened_butterfly(k: int, n: int, s: int = 1) -> Network:
    """k-ary n-flat: k**(n-1) switches, fully connected along each of the n-1 dimensions."""
    if k < 2 or n < 2:
        raise TopologyError("flattened butterfly needs k >= 2 and n >= 2")
    return _lattice([k] * (n - 1), [1] * (n - 1), s)


def gen_dragonfly(a: int, h: int, p: int, groups: int | None = None) -> Network:
    """a routers per group, h global links per router, p servers per router.

    Groups are complete graphs; each pair of the ah+1 groups shares exactly
    one global link. Group g's global port q leads to group (g + q + 1) mod G
    and belongs to router q mod a.
    """
    if a < 1 or h < 0 or p < 0 or a * h < 1:
        raise InfeasibleGlobalWiring(f"dragonfly needs a*h >= 1, got a={a}, h={h}")
    g = a * h + 1 if groups is None else groups
    if a * h != g - 1:
        raise InfeasibleGlobalWiring(f"{g} groups cannot be wired with a*h = {a * h} global ports")
    links = []
    for grp in range(g):
        base = grp * a
        links.extend((base + i, base + j) for i in range(a) for j in range(i + 1, a))
    for gi in range(g):
        for gj in range(gi + 1, g):
            qi = (gj - gi - 1) % g
            qj = (gi - gj - 1) % g
            links.append((gi * a + qi % a, gj * a + qj % a))
    return _finish(g * a, links, p)


def gen_hyperx(dims, trunking, servers_per_switch: int = 1) -> Network:
    """Lattice of prod(dims) switches; points differing in dimension i share a capacity-K_i link."""
    dims, trunking = list(dims), list(trunking)
    if len(dims) != len(trunking) or not dims:
        raise TopologyError("dims and trunking must be non-empty and of equal length")
    if any(x < 2 for x in dims) or any(x < 1 for x in trunking):
        raise TopologyError("HyperX needs every S_i >= 2 and K_i >= 1")
    return _lattice(dims, trunking, servers_per_switch)


def _is_connected(n: int, adj: list[set[int]]) -> bool:
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == n


def _random_regular_links(n: int, r: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Random links until no two non-adjacent switches have free ports, then
    edge-swap repair: a switch with free ports replaces a random link (x, y)
    by links to x and y."""
    adj: list[set[int]] = [set() for _ in range(n)]
    free = np.full(n, r)
    while True:
        open_nodes = np.flatnonzero(free > 0)
        if len(open_nodes) == 0:
            break
        pairs = [(u, v) for i, u in enumerate(open_nodes) for v in open_nodes[i + 1 :] if v not in adj[u]]
        if pairs:
            u, v = pairs[rng.integers(len(pairs))]
            u, v = int(u), int(v)
            adj[u].add(v)
            adj[v].add(u)
            free[u] -= 1
            free[v] -= 1
            continue
        u = int(open_nodes[0])
        if free[u] >= 2:
            cand = [(x, y) for x in range(n) for y in adj[x] if x < y
                    and x != u and y != u and x not in adj[u] and y not in adj[u]]
            if not cand:
                raise Infeasible("random regular construction got stuck")
            x, y = cand[rng.integers(len(cand))]
            adj[x].discard(y)
            adj[y].discard(x)
            for z in (x, y):
                adj[u].add(z)
                adj[z].add(u)
            free[u] -= 2
        else:
            v = int(open_nodes[1])
            cand = [(x, y) for x in range(n) for y in adj[x] if x != y
                    and x not in (u, v) and y not in (u, v) and x not in adj[u] and y not in adj[v]]
            if not cand:
                raise Infeasible("random regular construction got stuck")
            x, y = cand[rng.integers(len(cand))]
            adj[x].discard(y)
            adj[y].discard(x)
            adj[u].add(x)
            adj[x].add(u)
            adj[v].add(y)
            adj[y].add(v)
            free[u] -= 1
            free[v] -= 1
    return [(u, v) for u in range(n) for v in sorted(adj[u]) if u < v], adj


def _random_regular(n: int, r: int, rng: np.random.Generator, attempts: int = 1000):
    for _ in range(attempts):
        links, adj = _random_regular_links(n, r, rng)
        if n == 1 or _is_connected(n, adj):
            return links
    raise Disconnected(f"no connected {r}-regular graph on {n} nodes after {attempts} attempts")


def gen_jellyfish(n: int, r: int, s: int = 1, seed: int = 0) -> Network:
    """Uniform-random r-regular switch graph (Jellyfish) with s servers per switch."""
    if r >= n:
        raise Infeasible(f"degree {r} needs more than {n} switches")
    if r < 2 or (n * r) % 2:
        raise Infeasible(f"no connected {r}-regular graph on {n} switches")
    rng = np.random.default_rng(seed)
    return _finish(n, _random_regular(n, r, rng), s)


def _erdos_gallai(deg: np.ndarray) -> bool:
    d = np.sort(deg)[::-1]
    if d.sum() % 2:
        return False
    n = len(d)
    for k in range(1, n + 1):
        if d[:k].sum() > k * (k - 1) + np.minimum(d[k:], k).sum():
            return False
    return True


def _components(n: int, edges: list[list[int]]) -> np.ndarray:
    if not edges:
        return np.arange(n)
    e = np.array(edges)
    g = csr_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
    return connected_components(g, directed=False)[1]


def random_graph_with_degrees(degrees, rng: np.random.Generator, max_swaps: int = 100_000):
    """Connected simple graph with the given degree sequence.

    Configuration-model stub pairing, then random double-edge swaps until no
    self-loops or repeated links remain, then swaps that join components.
    """
    deg = np.asarray(degrees, dtype=np.int64)
    n = len(deg)
    if n == 1:
        if deg[0] != 0:
            raise DegreeSequenceInfeasible("single switch cannot have links")
        return []
    if np.any(deg < 1) or not _erdos_gallai(deg) or deg.sum() // 2 < n - 1:
        raise DegreeSequenceInfeasible(f"no connected simple graph has degrees {deg.tolist()}")
    stubs = np.repeat(np.arange(n), deg)
    rng.shuffle(stubs)
    edges = [sorted(p) for p in stubs.reshape(-1, 2).tolist()]

    def bad_edges():
        seen = set()
        out = []
        for i, (a, b) in enumerate(edges):
            if a == b or (a, b) in seen:
                out.append(i)
            seen.add((a, b))
        return out

    swaps = 0
    bad = bad_edges()
    while bad:
        if swaps > max_swaps:
            raise DegreeSequenceInfeasible("could not remove loops and repeated links")
        i = bad[rng.integers(len(bad))]
        j = int(rng.integers(len(edges)))
        swaps += 1
        if i == j:
            continue
        (a, b), (c, d) = edges[i], edges[j]
        if rng.random() < 0.5:
            c, d = d, c
        edges[i], edges[j] = sorted((a, c)), sorted((b, d))
        new_bad = bad_edges()
        if len(new_bad) <= len(bad):
            bad = new_bad
        else:
            edges[i], edges[j] = [a, b] if a <= b else [b, a], sorted((c, d))
    # join components: swap a cycle edge of one component with any edge of another
    while True:
        comp = _components(n, edges)
        if comp.max() == 0:
            break
        if swaps > max_swaps:
            raise DegreeSequenceInfeasible("could not connect the graph")
        swaps += 1
        link_set = {tuple(e) for e in edges}
        cyc = [i for i, (a, b) in enumerate(edges) if _on_cycle(n, edges, i)]
        i = cyc[rng.integers(len(cyc))]
        others = [j for j, (c, _) in enumerate(edges) if comp[c] != comp[edges[i][0]]]
        j = others[rng.integers(len(others))]
        (a, b), (c, d) = edges[i], edges[j]
        if tuple(sorted((a, c))) in link_set or tuple(sorted((b, d))) in link_set:
            c, d = d, c
            if tuple(sorted((a, c))) in link_set or tuple(sorted((b, d))) in link_set:
                continue
        edges[i], edges[j] = sorted((a, c)), sorted((b, d))
    return [tuple(e) for e in sorted(edges)]


def _on_cycle(n: int, edges, i: int) -> bool:
    rest = edges[:i] + edges[i + 1 :]
    comp = _components(n, rest)
    a, b = edges[i]
    return comp[a] == comp[b]


def gen_same_equipment_random(net: Network, seed: int = 0) -> Network:
    """Random connected simple graph keeping every switch's link count and servers.

    Integer capacities count as parallel links, so a capacity-2 trunk adds 2
    to the switch's degree; the result has unit-capacity links.
    """
    deg = net.capacity_degrees()
    if not np.allclose(deg, np.round(deg)):
        raise DegreeSequenceInfeasible("capacities must be integral to define link counts")
    rng = np.random.default_rng(seed)
    links = random_graph_with_degrees(np.round(deg).astype(np.int64), rng)
    return _finish(net.switch_count, links, net.servers)


def gen_clustered_random(n: int, alpha: int, beta: int, seed: int = 0, s: int = 1) -> Network:
    """Two random clusters of n/2 switches: alpha links inside, beta across, per switch."""
    if n % 2 or n < 4:
        raise Infeasible("clustered random graph needs an even n >= 4")
    half = n // 2
    if alpha < 0 or beta < 0 or alpha + beta >= half or (half * alpha) % 2:
        raise Infeasible(f"alpha={alpha}, beta={beta} infeasible for clusters of {half}")
    if beta == 0:
        raise DisconnectedClusters("beta = 0 leaves the two clusters disconnected")
    rng = np.random.default_rng(seed)
    links = []
    for offset in (0, half):
        if alpha:
            sub, _ = _random_regular_links(half, alpha, rng)
            links.extend((offset + u, offset + v) for u, v in sub)
    # beta-regular bipartite part as the union of beta disjoint random perfect matchings
    used: set[tuple[int, int]] = set()
    for _ in range(beta):
        for _attempt in range(1000):
            perm = rng.permutation(half)
            if all((u, int(perm[u])) not in used for u in range(half)):
                break
        else:
            raise Infeasible("could not draw disjoint inter-cluster matchings")
        for u in range(half):
            used.add((u, int(perm[u])))
            links.append((u, half + int(perm[u])))
    return _finish(n, links, s)


def gen_subdivided_expander(N: int, d: int, p: int, seed: int = 0) -> Network:
    """Random 2d-regular base graph with every link replaced by a p-hop path.

    Base switches keep ids 0..N-1 and one server each; the p-1 interior
    switches of each path follow in link order and host no servers.
    """
    if p < 1:
        raise TopologyError("path length p must be >= 1")
    base = gen_jellyfish(N, 2 * d, 1, seed)
    links = []
    nxt = N
    for u, v, _ in base.links():
        chain = [u] + list(range(nxt, nxt + p - 1)) + [v]
        nxt += p - 1
        links.extend(zip(chain, chain[1:]))
    return _finish(nxt, links, [1] * N + [0] * (nxt - N))


FAMILIES = {
    "hypercube": (gen_hypercube, {"d": int, "s": int}),
    "fattree": (gen_fattree, {"k": int}),
    "bcube": (gen_bcube, {"n": int, "k": int}),
    "dcell": (gen_dcell, {"n": int, "k": int}),
    "flattened_butterfly": (gen_flattened_butterfly, {"k": int, "n": int, "s": int}),
    "dragonfly": (gen_dragonfly, {"a": int, "h": int, "p": int}),
    "hyperx": (gen_hyperx, {"dims": "list", "trunking": "list", "T": int}),
    "jellyfish": (gen_jellyfish, {"n": int, "r": int, "s": int, "seed": int}),
    "clustered_random": (gen_clustered_random, {"n": int, "alpha": int, "beta": int, "seed": int, "s": int}),
    "subdivided_expander": (gen_subdivided_expander, {"N": int, "d": int, "p": int, "seed": int}),
    "imported": (None, {"path": str, "servers": int}),
}
SEEDED = {"jellyfish", "clustered_random", "subdivided_expander"}


@dataclass(frozen=True)
class TopoSpec:
    """Family name plus parameters, written ``family:key=val,key=val``.

    HyperX list parameters use ``-`` as separator: ``hyperx:dims=3-3,trunking=2-1,T=1``.
    """

    family: str
    params: tuple = field(default=())
    seed: int = 0

    @classmethod
    def parse(cls, text: str, seed: int | None = None) -> TopoSpec:
        family, _, rest = text.strip().partition(":")
        if family not in FAMILIES:
            raise TopologyError(f"unknown topology family {family!r}")
        kinds = FAMILIES[family][1]
        params = {}
        for item in filter(None, rest.split(",")):
            key, eq, value = item.partition("=")
            key = key.strip()
            if not eq or key not in kinds:
                raise TopologyError(f"bad parameter {item!r} for {family}")
            kind = kinds[key]
            try:
                if kind == "list":
                    params[key] = tuple(int(x) for x in value.split("-"))
                else:
                    params[key] = kind(value)
            except ValueError:
                raise TopologyError(f"bad value in {item!r}") from None
        spec_seed = params.pop("seed", 0)
        if seed is not None and "seed" not in rest:
            spec_seed = seed
        return cls(family, tuple(sorted(params.items())), int(spec_seed))

    def __str__(self):
        parts = []
        for k, v in self.params:
            parts.append(f"{k}={'-'.join(map(str, v)) if isinstance(v, tuple) else v}")
        if self.family in SEEDED:
            parts.append(f"seed={self.seed}")
        return f"{self.family}:{','.join(parts)}"

    def build(self) -> Network:
        kw = dict(self.params)
        if self.family == "imported":
            with open(kw["path"]) as fh:
                return import_edge_list(fh.read(), kw.get("servers", 1))
        fn = FAMILIES[self.family][0]
        if self.family == "hyperx":
            return fn(kw["dims"], kw["trunking"], kw.get("T", 1))
        if self.family in SEEDED:
            kw["seed"] = self.seed
        try:
            return fn(**kw)
        except TypeError as exc:
            raise TopologyError(f"{self.family}: {exc}") from None
