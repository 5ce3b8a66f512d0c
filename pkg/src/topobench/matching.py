"""Exact maximum-weight perfect matching (assignment problem).

Shortest-augmenting-path Hungarian method with row/column potentials. The
final potentials certify optimality; ties are then broken towards the
lexicographically smallest permutation by searching the equality subgraph,
which contains every optimal assignment.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .graph import TopoBenchError


class NonSquare(TopoBenchError, ValueError):
    pass


@dataclass(frozen=True)
class Assignment:
    perm: tuple[int, ...]
    total_weight: float


def _hungarian_min(cost: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Minimum-cost assignment. Returns (row -> col, row potentials, col potentials)."""
    n = cost.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)  # p[j]: row matched to column j (1-based, 0 = free)
    way = np.zeros(n + 1, dtype=np.int64)
    a = np.zeros((n + 1, n + 1))
    a[1:, 1:] = cost
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used
            free[0] = False
            cur = a[i0] - u[i0] - v
            better = free & (cur < minv)
            minv[better] = cur[better]
            way[better] = j0
            masked = np.where(free, minv, np.inf)
            j1 = int(np.argmin(masked))
            delta = masked[j1]
            u[p[used]] += delta
            v[used] -= delta
            minv[free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    row_to_col = np.empty(n, dtype=np.int64)
    row_to_col[p[1:] - 1] = np.arange(n)
    return row_to_col, u[1:], v[1:]


def _lexmin_perfect_matching(tight: np.ndarray, match: np.ndarray) -> np.ndarray:
    """Lexicographically smallest perfect matching inside a bipartite graph.

    ``tight[i, j]`` marks usable edges and ``match`` is any perfect matching
    using them. Row by row, the smallest column that still extends to a
    perfect matching is fixed; an unmatched edge (i, j) lies on some perfect
    matching iff i and j share a strongly connected component of the
    alternating digraph (rows -> columns on free edges, columns -> rows on
    matched edges).
    """
    n = tight.shape[0]
    match = match.copy()
    row_alive = np.ones(n, dtype=bool)
    col_alive = np.ones(n, dtype=bool)
    for i in range(n):
        cols = np.flatnonzero(tight[i] & col_alive)
        if cols[0] != match[i]:
            rr, cc = np.nonzero(tight & row_alive[:, None] & col_alive[None, :])
            free = cc != match[rr]
            rows = np.flatnonzero(row_alive)
            # node ids: rows 0..n-1, columns n..2n-1
            src = np.concatenate([rr[free], n + match[rows]])
            dst = np.concatenate([n + cc[free], rows])
            g = csr_matrix((np.ones(len(src)), (src, dst)), shape=(2 * n, 2 * n))
            _, comp = connected_components(g, directed=True, connection="strong")
            j = next(int(c) for c in cols if c == match[i] or comp[n + c] == comp[i])
            if j != match[i]:
                _rotate(g, match, i, j, n)
        row_alive[i] = False
        col_alive[match[i]] = False
    return match


def _rotate(g: csr_matrix, match: np.ndarray, i: int, j: int, n: int) -> None:
    """Flip the alternating cycle through the free edge (i, j)."""
    start, goal = n + j, i
    parent = {start: -1}
    queue = deque([start])
    indptr, indices = g.indptr, g.indices
    while queue:
        x = queue.popleft()
        if x == goal:
            break
        for y in indices[indptr[x] : indptr[x + 1]]:
            y = int(y)
            if y not in parent:
                parent[y] = x
                queue.append(y)
    path = [goal]
    while path[-1] != start:
        path.append(parent[path[-1]])
    path.reverse()  # column j, row, column, row, ..., column match[i], row i
    for k in range(1, len(path) - 1, 2):
        match[path[k]] = path[k + 1] - n
    match[i] = j


def max_weight_perfect_matching(weights) -> Assignment:
    """Permutation maximizing ``sum(W[i, perm[i]])``; ties go to the lexicographically smallest."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise NonSquare(f"weight matrix has shape {w.shape}")
    n = w.shape[0]
    if n == 0:
        return Assignment((), 0.0)
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    cost = -w
    match, u, v = _hungarian_min(cost)
    reduced = cost - u[:, None] - v[None, :]
    scale = max(1.0, float(np.abs(w).max()))
    tight = reduced <= 1e-9 * scale * n
    match = _lexmin_perfect_matching(tight, match)
    total = float(w[np.arange(n), match].sum())
    return Assignment(tuple(int(x) for x in match), total)
