"""Undirected simple graphs: container, model generators, and edge-list text I/O.

All randomness flows through ``numpy.random.Generator`` seeded with PCG64, so
every generator here is reproducible bit-for-bit given the same seed and numpy
version.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

__all__ = [
    "Graph",
    "make_cycle",
    "make_path",
    "make_star",
    "make_wheel",
    "make_er",
    "make_scale_free",
    "is_connected",
    "read_edgelist",
    "write_edgelist",
]


@dataclass(frozen=True)
class Graph:
    """Immutable simple undirected graph on nodes ``0..n-1``.

    Edges are stored as a sorted tuple of ``(i, j)`` pairs with ``i < j``,
    no self loops and no duplicates. Construction validates all of that.
    """

    n: int
    edges: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"graph needs at least one node, got n={self.n}")
        seen = set()
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self loop ({i},{i}) is not allowed")
            if not (0 <= i < j < self.n):
                raise ValueError(f"edge ({i},{j}) out of range for n={self.n}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i},{j})")
            seen.add((i, j))
        object.__setattr__(self, "edges", tuple(sorted(self.edges)))

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Sorted adjacency lists, one tuple per node."""
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def adjacency_matrix(self) -> np.ndarray:
        """Dense symmetric 0/1 adjacency matrix, float64."""
        a = np.zeros((self.n, self.n), dtype=np.float64)
        if self.edges:
            e = np.asarray(self.edges, dtype=np.int64)
            a[e[:, 0], e[:, 1]] = 1.0
            a[e[:, 1], e[:, 0]] = 1.0
        return a


def _normalize_edges(pairs) -> tuple[tuple[int, int], ...]:
    return tuple(sorted((int(min(i, j)), int(max(i, j))) for i, j in pairs))


def make_cycle(n: int) -> Graph:
    """Cycle on n >= 3 nodes: 0-1-...-(n-1)-0."""
    if n < 3:
        raise ValueError(f"cycle needs n >= 3, got {n}")
    return Graph(n, _normalize_edges((i, (i + 1) % n) for i in range(n)))


def make_path(n: int) -> Graph:
    """Path on n >= 2 nodes: 0-1-...-(n-1)."""
    if n < 2:
        raise ValueError(f"path needs n >= 2, got {n}")
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


def make_star(n: int) -> Graph:
    """Star on n >= 2 nodes with the hub at node 0."""
    if n < 2:
        raise ValueError(f"star needs n >= 2, got {n}")
    return Graph(n, tuple((0, i) for i in range(1, n)))


def make_wheel(n: int) -> Graph:
    """Wheel on n >= 4 nodes: hub 0 joined to every node of the rim cycle 1..n-1."""
    if n < 4:
        raise ValueError(f"wheel needs n >= 4, got {n}")
    rim = [(i, i + 1 if i < n - 1 else 1) for i in range(1, n)]
    hub = [(0, i) for i in range(1, n)]
    return Graph(n, _normalize_edges(hub + rim))


def make_er(n: int, p: float, seed: int) -> Graph:
    """Erdos-Renyi G(n, p): each of the n(n-1)/2 pairs kept independently with probability p."""
    if n < 1:
        raise ValueError(f"G(n,p) needs n >= 1, got {n}")
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"edge probability must lie in [0,1], got {p}")
    rng = np.random.default_rng(seed)
    rows, cols = np.triu_indices(n, k=1)
    keep = rng.random(rows.shape[0]) < p
    pairs = zip(rows[keep].tolist(), cols[keep].tolist())
    return Graph(n, tuple((int(i), int(j)) for i, j in pairs))


def make_scale_free(n: int, m: int, seed: int) -> Graph:
    """Preferential-attachment graph: star seed on m+1 nodes, then each new node
    attaches to m distinct existing nodes drawn with probability proportional to
    degree (duplicate draws rejected).
    """
    if m < 1:
        raise ValueError(f"attachment count must be >= 1, got m={m}")
    if n < m + 1:
        raise ValueError(f"need n >= m+1 nodes, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    edges = [(0, i) for i in range(1, m + 1)]
    # One entry per edge endpoint; uniform draws from this list are
    # degree-weighted draws over nodes.
    endpoint_pool: list[int] = []
    for i, j in edges:
        endpoint_pool.append(i)
        endpoint_pool.append(j)
    for new in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            cand = endpoint_pool[int(rng.integers(len(endpoint_pool)))]
            if cand not in targets:
                targets.add(cand)
        for t in sorted(targets):
            edges.append((t, new))
            endpoint_pool.append(t)
            endpoint_pool.append(new)
    return Graph(n, _normalize_edges(edges))


def is_connected(g: Graph) -> bool:
    """Breadth-first reachability of every node from node 0."""
    if g.n == 1:
        return True
    seen = bytearray(g.n)
    seen[0] = 1
    queue = [0]
    count = 1
    adj = g.neighbors
    while queue:
        nxt: list[int] = []
        for u in queue:
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = 1
                    count += 1
                    nxt.append(v)
        queue = nxt
    return count == g.n


def write_edgelist(g: Graph, path: str | Path) -> None:
    """Write the text edge-list form: first line ``n m``, then one ``i j`` line
    per edge with i < j, 0-indexed, LF newlines."""
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{i} {j}" for i, j in g.edges)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_edgelist(path: str | Path) -> Graph:
    """Parse the text edge-list form written by :func:`write_edgelist`."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError(f"{path}: empty edge-list file")
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError(f"{path}:1: header must be 'n m', got {lines[0]!r}")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError as exc:
        raise ValueError(f"{path}:1: header must be two integers") from exc
    if len(lines) - 1 != m:
        raise ValueError(f"{path}: header claims {m} edges, found {len(lines) - 1}")
    edges = []
    for k, ln in enumerate(lines[1:], start=2):
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{k}: edge line must be 'i j', got {ln!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ValueError(f"{path}:{k}: edge endpoints must be integers") from exc
        if not i < j:
            raise ValueError(f"{path}:{k}: edges must be written with i < j, got {i} {j}")
        edges.append((i, j))
    try:
        return Graph(n, tuple(edges))
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc
