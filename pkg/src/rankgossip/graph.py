"""Communication graphs, edge-sampling distributions and gossip matrices.

Nodes are indexed ``0 .. n-1``. Edges are stored as sorted pairs ``(i, j)``
with ``i < j`` in a canonical order, and every per-edge array (such as an
:class:`EdgeDistribution`) is aligned with :attr:`Graph.edges`.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import GenerationFailure, InvalidParameter

MAX_GENERATION_ATTEMPTS = 100


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on nodes ``0 .. n-1``.

    Use :meth:`from_edges` rather than the raw constructor; it normalizes
    the edge list and checks the structural invariants.
    """

    n: int
    edges: tuple[tuple[int, int], ...]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        if n < 2:
            raise InvalidParameter(f"graph needs at least 2 nodes, got n={n}")
        seen = set()
        for e in edges:
            i, j = int(e[0]), int(e[1])
            if i == j:
                raise InvalidParameter(f"self-loop at node {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidParameter(f"edge ({i}, {j}) out of range for n={n}")
            key = (i, j) if i < j else (j, i)
            if key in seen:
                raise InvalidParameter(f"duplicate edge {key}")
            seen.add(key)
        g = cls(n, tuple(sorted(seen)))
        isolated = np.flatnonzero(g.degrees == 0)
        if isolated.size:
            raise InvalidParameter(f"isolated node(s): {isolated.tolist()[:10]}")
        return g

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_array(self) -> np.ndarray:
        """Edges as an ``(|E|, 2)`` integer array."""
        return np.array(self.edges, dtype=np.int64).reshape(-1, 2)

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        if self.edges:
            np.add.at(deg, self.edge_array.ravel(), 1)
        return deg

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(a) for a in adj)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        if self.edges:
            e = self.edge_array
            a[e[:, 0], e[:, 1]] = 1.0
            a[e[:, 1], e[:, 0]] = 1.0
        return a

    def laplacian(self) -> np.ndarray:
        """Combinatorial Laplacian ``D - A``."""
        return np.diag(self.degrees.astype(float)) - self.adjacency()


@dataclass(frozen=True)
class EdgeDistribution:
    """Activation probability for each edge of a graph, aligned with ``Graph.edges``."""

    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise InvalidParameter("edge distribution must be a non-empty vector")
        if not np.all(p > 0):
            raise InvalidParameter("edge probabilities must be strictly positive")
        if abs(p.sum() - 1.0) > 1e-12:
            raise InvalidParameter(f"edge probabilities sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    def __len__(self) -> int:
        return self.probabilities.size


def is_connected(g: Graph) -> bool:
    seen = np.zeros(g.n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    adj = g.neighbors
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                queue.append(v)
    return bool(seen.all())


def is_bipartite(g: Graph) -> bool:
    color = [-1] * g.n
    adj = g.neighbors
    for start in range(g.n):
        if color[start] != -1:
            continue
        color[start] = 0
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if color[v] == -1:
                    color[v] = 1 - color[u]
                    queue.append(v)
                elif color[v] == color[u]:
                    return False
    return True


def _acceptable(g: Graph) -> bool:
    return is_connected(g) and not is_bipartite(g)


def build_complete(n: int) -> Graph:
    if n < 3:
        raise InvalidParameter(f"complete graph needs n >= 3 to be non-bipartite, got {n}")
    return Graph.from_edges(n, ((i, j) for i in range(n) for j in range(i + 1, n)))


def _watts_strogatz_once(n: int, k: int, p: float, rng: np.random.Generator) -> Graph | None:
    adj = [set() for _ in range(n)]
    for u in range(n):
        for step in range(1, k // 2 + 1):
            v = (u + step) % n
            adj[u].add(v)
            adj[v].add(u)
    # One pass per lattice offset; only the far endpoint is rewired.
    for step in range(1, k // 2 + 1):
        for u in range(n):
            v = (u + step) % n
            if rng.random() >= p:
                continue
            w = int(rng.integers(n))
            if w == u or w in adj[u]:
                continue
            adj[u].discard(v)
            adj[v].discard(u)
            adj[u].add(w)
            adj[w].add(u)
    if any(not a for a in adj):
        return None
    return Graph.from_edges(n, ((u, v) for u in range(n) for v in adj[u] if u < v))


def build_watts_strogatz(n: int, k: int, p: float, seed: int) -> Graph:
    """Watts-Strogatz small-world graph, redrawn until connected and non-bipartite.

    Starts from a ring lattice where each node links to its ``k/2`` nearest
    neighbours on each side, then rewires the far endpoint of each lattice
    edge with probability ``p``. A rewire that would create a self-loop or a
    duplicate edge is skipped, so the edge count stays ``n*k/2``.
    """
    if k < 2 or k % 2 or k >= n:
        raise InvalidParameter(f"need even k with 2 <= k < n, got n={n}, k={k}")
    if not 0.0 <= p <= 1.0:
        raise InvalidParameter(f"rewiring probability must be in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_GENERATION_ATTEMPTS):
        g = _watts_strogatz_once(n, k, p, rng)
        if g is not None and _acceptable(g):
            return g
    raise GenerationFailure(
        f"watts-strogatz(n={n}, k={k}, p={p}, seed={seed}): no connected "
        f"non-bipartite draw in {MAX_GENERATION_ATTEMPTS} attempts"
    )


def build_random_geometric(n: int, radius: float, seed: int) -> Graph:
    """Random geometric graph on the unit square, redrawn until connected and non-bipartite."""
    if n < 3:
        raise InvalidParameter(f"geometric graph needs n >= 3, got {n}")
    if radius <= 0:
        raise InvalidParameter(f"radius must be positive, got {radius}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    for _ in range(MAX_GENERATION_ATTEMPTS):
        pts = rng.random((n, 2))
        d2 = ((pts[iu] - pts[ju]) ** 2).sum(axis=1)
        mask = d2 <= radius * radius
        deg = np.bincount(iu[mask], minlength=n) + np.bincount(ju[mask], minlength=n)
        if np.any(deg == 0):
            continue
        g = Graph.from_edges(n, zip(iu[mask].tolist(), ju[mask].tolist()))
        if _acceptable(g):
            return g
    raise GenerationFailure(
        f"random-geometric(n={n}, radius={radius}, seed={seed}): no connected "
        f"non-bipartite draw in {MAX_GENERATION_ATTEMPTS} attempts (radius too small?)"
    )


def async_edge_distribution(g: Graph) -> EdgeDistribution:
    """Edge law of the asynchronous model: a uniform node wakes and picks a uniform neighbour.

    ``p_(i,j) = (1/d_i + 1/d_j) / n``.
    """
    e = g.edge_array
    inv = 1.0 / g.degrees.astype(float)
    return EdgeDistribution((inv[e[:, 0]] + inv[e[:, 1]]) / g.n)


def uniform_edge_distribution(g: Graph) -> EdgeDistribution:
    m = g.num_edges
    return EdgeDistribution(np.full(m, 1.0 / m))


def _check_aligned(g: Graph, dist: EdgeDistribution) -> None:
    if len(dist) != g.num_edges:
        raise InvalidParameter(
            f"distribution has {len(dist)} entries but graph has {g.num_edges} edges"
        )


def weighted_laplacian(g: Graph, dist: EdgeDistribution) -> np.ndarray:
    """``L(P) = sum_e p_e (e_i - e_j)(e_i - e_j)^T``."""
    _check_aligned(g, dist)
    e = g.edge_array
    p = dist.probabilities
    lap = np.zeros((g.n, g.n))
    np.add.at(lap, (e[:, 0], e[:, 1]), -p)
    np.add.at(lap, (e[:, 1], e[:, 0]), -p)
    np.add.at(lap, (e[:, 0], e[:, 0]), p)
    np.add.at(lap, (e[:, 1], e[:, 1]), p)
    return lap


def spectral_gap(lap: np.ndarray) -> float:
    """Second-smallest eigenvalue of a symmetric PSD Laplacian."""
    lap = np.asarray(lap, dtype=float)
    if lap.ndim != 2 or lap.shape[0] != lap.shape[1] or lap.shape[0] < 2:
        raise InvalidParameter("expected a square matrix of order >= 2")
    if not np.allclose(lap, lap.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(lap).max())):
        raise InvalidParameter("Laplacian must be symmetric")
    return float(np.linalg.eigvalsh(lap)[1])


def expected_gossip_matrix(g: Graph, dist: EdgeDistribution, alpha: int) -> np.ndarray:
    """Mean transition matrix ``I - L(P)/alpha``; alpha=1 swaps, alpha=2 averages."""
    if alpha not in (1, 2):
        raise InvalidParameter(f"alpha must be 1 or 2, got {alpha}")
    return np.eye(g.n) - weighted_laplacian(g, dist) / alpha


def sample_gossip_matrix(edge: Sequence[int], n: int, alpha: int) -> np.ndarray:
    """Per-tick transition matrix ``I - (e_i - e_j)(e_i - e_j)^T / alpha``."""
    if alpha not in (1, 2):
        raise InvalidParameter(f"alpha must be 1 or 2, got {alpha}")
    i, j = int(edge[0]), int(edge[1])
    if i == j:
        raise InvalidParameter("edge endpoints must differ")
    if not (0 <= i < n and 0 <= j < n):
        raise InvalidParameter(f"edge ({i}, {j}) out of range for n={n}")
    w = np.eye(n)
    a = 1.0 / alpha
    w[i, i] -= a
    w[j, j] -= a
    w[i, j] += a
    w[j, i] += a
    return w


def second_largest_eigenvalue(w: np.ndarray) -> float:
    """``lambda_2`` of a symmetric matrix whose top eigenvalue is 1."""
    return float(np.linalg.eigvalsh(np.asarray(w, dtype=float))[-2])
