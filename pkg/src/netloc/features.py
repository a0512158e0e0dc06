"""Structural node features and the fixed 7-column feature matrix.

Column order is frozen by ``FEATURE_COLUMNS``; every column is min-max scaled
to [0, 1] per graph (constant columns become all zeros) so feature magnitudes
are comparable across graph sizes.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .graphs import Graph
from .spectral import ConvergenceError

__all__ = [
    "FEATURE_COLUMNS",
    "clustering_coefficient",
    "pagerank",
    "degree_centrality",
    "betweenness_centrality",
    "closeness_centrality",
    "avg_neighbor_degree",
    "build_feature_matrix",
]

FEATURE_COLUMNS = (
    "clustering",
    "pagerank",
    "degree_centrality",
    "betweenness",
    "closeness",
    "degree",
    "avg_neighbor_degree",
)


def clustering_coefficient(g: Graph) -> np.ndarray:
    """Fraction of closed neighbor pairs per node; 0 for degree < 2."""
    a = g.adjacency_matrix()
    triangles = ((a @ a) * a).sum(axis=1) / 2.0
    deg = g.degrees.astype(np.float64)
    pairs = deg * (deg - 1.0) / 2.0
    out = np.zeros(g.n)
    mask = pairs > 0.0
    out[mask] = triangles[mask] / pairs[mask]
    return out


def pagerank(g: Graph, damping: float = 0.85, tol: float = 1e-10, max_iter: int = 10000) -> np.ndarray:
    """Damped random-walk stationary scores; entries sum to 1.

    Iterates p <- (1-d)/n + d * A (p / deg) until the L1 change is at most
    ``tol``. Needs every node to have at least one neighbor (or n == 1).
    """
    if not (0.0 < damping < 1.0):
        raise ValueError(f"damping must lie in (0,1), got {damping}")
    if g.n == 1:
        return np.ones(1)
    deg = g.degrees.astype(np.float64)
    if np.any(deg == 0):
        raise ValueError("pagerank needs every node to have degree >= 1")
    a = g.adjacency_matrix()
    p = np.full(g.n, 1.0 / g.n)
    teleport = (1.0 - damping) / g.n
    for _ in range(max_iter):
        p_new = teleport + damping * (a @ (p / deg))
        if float(np.abs(p_new - p).sum()) <= tol:
            return p_new
        p = p_new
    raise ConvergenceError(
        f"pagerank did not converge to {tol} in {max_iter} iterations",
        residual=float(np.abs(p_new - p).sum()),
        iterations=max_iter,
    )


def degree_centrality(g: Graph) -> np.ndarray:
    """Degree divided by n-1 (zeros for the single-node graph)."""
    if g.n == 1:
        return np.zeros(1)
    return g.degrees.astype(np.float64) / (g.n - 1)


def betweenness_centrality(g: Graph) -> np.ndarray:
    """Shortest-path betweenness via Brandes' accumulation, pair-normalized.

    The raw accumulation over all sources counts each unordered pair twice,
    so it is halved and then divided by (n-1)(n-2)/2.
    """
    n = g.n
    if n < 3:
        return np.zeros(n)
    adj = g.neighbors
    bc = np.zeros(n)
    for s in range(n):
        dist = [-1] * n
        sigma = [0.0] * n
        preds: list[list[int]] = [[] for _ in range(n)]
        dist[s] = 0
        sigma[s] = 1.0
        order: list[int] = []
        queue = deque([s])
        while queue:
            u = queue.popleft()
            order.append(u)
            du1 = dist[u] + 1
            su = sigma[u]
            for v in adj[u]:
                if dist[v] < 0:
                    dist[v] = du1
                    queue.append(v)
                if dist[v] == du1:
                    sigma[v] += su
                    preds[v].append(u)
        delta = [0.0] * n
        for w in reversed(order):
            coeff = (1.0 + delta[w]) / sigma[w]
            for u in preds[w]:
                delta[u] += sigma[u] * coeff
            if w != s:
                bc[w] += delta[w]
    norm = (n - 1) * (n - 2) / 2.0
    return bc / 2.0 / norm


def closeness_centrality(g: Graph) -> np.ndarray:
    """(n-1) over the sum of BFS distances to all other nodes."""
    if g.n == 1:
        return np.zeros(1)
    adj = g.neighbors
    out = np.zeros(g.n)
    for s in range(g.n):
        dist = [-1] * g.n
        dist[s] = 0
        queue = deque([s])
        total = 0
        seen = 1
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    total += dist[v]
                    seen += 1
                    queue.append(v)
        if seen != g.n:
            raise ValueError("closeness centrality needs a connected graph")
        out[s] = (g.n - 1) / total
    return out


def avg_neighbor_degree(g: Graph) -> np.ndarray:
    """Mean degree over each node's neighbors (0 for isolated nodes)."""
    deg = g.degrees.astype(np.float64)
    a = g.adjacency_matrix()
    out = np.zeros(g.n)
    mask = deg > 0
    out[mask] = (a @ deg)[mask] / deg[mask]
    return out


def _min_max_scale(x: np.ndarray) -> np.ndarray:
    lo = float(x.min())
    hi = float(x.max())
    if hi == lo:
        return np.zeros_like(x)
    return (x - lo) / (hi - lo)


def build_feature_matrix(g: Graph) -> np.ndarray:
    """n x 7 feature matrix in ``FEATURE_COLUMNS`` order, min-max scaled per column.

    The last two raw columns (degree and average neighbor degree) are divided
    by n before scaling so raw magnitudes stay bounded.
    """
    cols = [
        clustering_coefficient(g),
        pagerank(g),
        degree_centrality(g),
        betweenness_centrality(g),
        closeness_centrality(g),
        g.degrees.astype(np.float64) / g.n,
        avg_neighbor_degree(g) / g.n,
    ]
    return np.column_stack([_min_max_scale(c) for c in cols])
