"""Random network realizations (Erdos-Renyi and Barabasi-Albert) and
degree-ranked node selection."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConnectivityError, ParameterError, SelectionError
from .seeding import rng

MAX_ER_ATTEMPTS = 1000


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on nodes ``0..node_count-1``.

    ``edges`` holds ``(i, j)`` pairs with ``i < j`` in ascending
    lexicographic order; the adjacency matrix and degree sequence are derived
    from it and marked read-only.
    """

    node_count: int
    edges: tuple[tuple[int, int], ...]
    adjacency: np.ndarray = field(repr=False, compare=False)
    degree_sequence: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def from_edges(cls, node_count: int, edges) -> Graph:
        if node_count < 1:
            raise ParameterError("node_count must be positive")
        canon = set()
        for i, j in edges:
            i, j = int(i), int(j)
            if i == j:
                raise ParameterError(f"self-loop at node {i}")
            if not (0 <= i < node_count and 0 <= j < node_count):
                raise ParameterError(f"edge ({i}, {j}) out of range for N={node_count}")
            canon.add((min(i, j), max(i, j)))
        ordered = tuple(sorted(canon))
        adj = np.zeros((node_count, node_count), dtype=np.int8)
        if ordered:
            idx = np.asarray(ordered)
            adj[idx[:, 0], idx[:, 1]] = 1
            adj[idx[:, 1], idx[:, 0]] = 1
        deg = adj.sum(axis=1, dtype=np.int64)
        adj.setflags(write=False)
        deg.setflags(write=False)
        return cls(node_count, ordered, adj, deg)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def mean_degree(self) -> float:
        return 2.0 * self.edge_count / self.node_count

    def edge_array(self) -> np.ndarray:
        """``(M, 2)`` int64 array of the canonical edge list."""
        return np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)

    def is_connected(self) -> bool:
        """Breadth-first traversal from node 0 reaches every node."""
        neighbors = [[] for _ in range(self.node_count)]
        for i, j in self.edges:
            neighbors[i].append(j)
            neighbors[j].append(i)
        seen = np.zeros(self.node_count, dtype=bool)
        seen[0] = True
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for v in neighbors[u]:
                if not seen[v]:
                    seen[v] = True
                    queue.append(v)
        return bool(seen.all())

    def relabel(self, perm) -> Graph:
        """Graph with node ``i`` renamed to ``perm[i]``."""
        perm = np.asarray(perm)
        return Graph.from_edges(self.node_count, [(perm[i], perm[j]) for i, j in self.edges])

    def to_text(self) -> str:
        lines = [f"{self.node_count} {self.edge_count}"]
        lines.extend(f"{i} {j}" for i, j in self.edges)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Graph:
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not rows or len(rows[0]) != 2:
            raise ParameterError("edge list must start with a 'N M' line")
        n, m = int(rows[0][0]), int(rows[0][1])
        if len(rows) - 1 != m:
            raise ParameterError(f"edge list declares {m} edges but holds {len(rows) - 1}")
        return cls.from_edges(n, [(int(a), int(b)) for a, b in rows[1:]])

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path: str | Path) -> Graph:
        return cls.from_text(Path(path).read_text())


def gen_er(node_count: int, mean_degree: float, seed: int,
           max_attempts: int = MAX_ER_ATTEMPTS) -> Graph:
    """Connected G(N, p) realization with ``p = mean_degree / node_count``.

    Disconnected draws are rejected; attempt ``a`` uses the derived stream
    ``(seed, "er", a)``.
    """
    if node_count < 1:
        raise ParameterError("node_count must be positive")
    if not 0 < mean_degree <= node_count:
        raise ParameterError(f"mean_degree must lie in (0, N], got {mean_degree}")
    p = mean_degree / node_count
    iu, ju = np.triu_indices(node_count, k=1)
    for attempt in range(max_attempts):
        draw = rng(seed, "er", attempt).random(iu.size) < p
        g = Graph.from_edges(node_count, zip(iu[draw], ju[draw]))
        if g.is_connected():
            return g
    raise ConnectivityError(
        f"connectivity unreachable: no connected G({node_count}, {p:.4g}) "
        f"in {max_attempts} attempts"
    )


def gen_sf(node_count: int, attach_count: int, seed: int) -> Graph:
    """Barabasi-Albert growth from a clique of ``attach_count + 1`` nodes."""
    m = attach_count
    if m < 1 or node_count <= m:
        raise ParameterError(f"bad BA parameters: N={node_count}, m={attach_count}")
    gen = rng(seed, "ba")
    edges = [(i, j) for i in range(m + 1) for j in range(i + 1, m + 1)]
    # each node appears once per incident edge, so uniform draws from this
    # list are degree-proportional
    stubs = [v for e in edges for v in e]
    for new in range(m + 1, node_count):
        targets: list[int] = []
        while len(targets) < m:
            cand = stubs[int(gen.integers(len(stubs)))]
            if cand not in targets:
                targets.append(cand)
        for t in targets:
            edges.append((t, new))
            stubs.extend((t, new))
    return Graph.from_edges(node_count, edges)


@dataclass(frozen=True)
class NodeSelection:
    indices: np.ndarray
    mode: str

    def __len__(self) -> int:
        return len(self.indices)


def select_nodes(graph: Graph, n: int, mode: str = "HD") -> NodeSelection:
    """Top-``n`` (HD) or bottom-``n`` (LD) nodes by degree, ties by index."""
    mode = mode.upper()
    if mode not in ("HD", "LD"):
        raise ParameterError(f"mode must be HD or LD, got {mode!r}")
    if n < 1:
        raise SelectionError("selection must contain at least one node")
    if n > graph.node_count:
        raise SelectionError(f"selection too large: n={n} > N={graph.node_count}")
    deg = np.asarray(graph.degree_sequence)
    key = -deg if mode == "HD" else deg
    order = np.lexsort((np.arange(graph.node_count), key))
    idx = order[:n].astype(np.int64)
    idx.setflags(write=False)
    return NodeSelection(idx, mode)
