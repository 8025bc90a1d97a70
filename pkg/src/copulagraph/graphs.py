"""Undirected labeled graphs with the edge-local queries the rate formulas need.

Graphs are immutable-after-build snapshots: mutating operations return new
instances, so a graph can be shared read-only across concurrent rate
evaluations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class Edge(NamedTuple):
    i: int
    j: int


def make_edge(i: int, j: int) -> Edge:
    """Canonical edge with i < j; rejects self-loops."""
    if i == j:
        raise ValueError(f"self-loop ({i},{i}) is not a valid edge")
    return Edge(i, j) if i < j else Edge(j, i)


@dataclass(frozen=True)
class Graph:
    """Undirected graph on p vertices, dense symmetric boolean adjacency."""

    p: int
    adjacency: np.ndarray
    edge_count: int = field(default=-1)

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=bool)
        if adj.shape != (self.p, self.p):
            raise ValueError(f"adjacency shape {adj.shape} != ({self.p},{self.p})")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(adj)):
            raise ValueError("adjacency must have an empty diagonal")
        adj.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)
        count = int(adj[np.triu_indices(self.p, 1)].sum())
        if self.edge_count >= 0 and self.edge_count != count:
            raise ValueError("edge_count cache inconsistent with adjacency")
        object.__setattr__(self, "edge_count", count)

    def edges(self) -> list[Edge]:
        ii, jj = np.nonzero(np.triu(self.adjacency, 1))
        return [Edge(int(a), int(b)) for a, b in zip(ii, jj)]

    def has_edge(self, e: Edge) -> bool:
        return bool(self.adjacency[e.i, e.j])

    def fingerprint(self) -> bytes:
        """Compact hashable identity of the edge set (upper triangle, packed)."""
        return np.packbits(self.adjacency[np.triu_indices(self.p, 1)]).tobytes()


def empty_graph(p: int) -> Graph:
    if p < 1:
        raise ValueError("vertex count must be >= 1")
    return Graph(p, np.zeros((p, p), dtype=bool))


def complete_graph(p: int) -> Graph:
    if p < 1:
        raise ValueError("vertex count must be >= 1")
    adj = np.ones((p, p), dtype=bool)
    np.fill_diagonal(adj, False)
    return Graph(p, adj)


def graph_from_edges(p: int, edges: Iterable[tuple[int, int]]) -> Graph:
    adj = np.zeros((p, p), dtype=bool)
    for i, j in edges:
        e = make_edge(int(i), int(j))
        if not (0 <= e.i < e.j < p):
            raise ValueError(f"edge {e} out of range for p={p}")
        adj[e.i, e.j] = adj[e.j, e.i] = True
    return Graph(p, adj)


def toggle_edge(g: Graph, e: Edge) -> Graph:
    """Flip edge e symmetrically; returns a new graph."""
    e = make_edge(e[0], e[1])
    if not (0 <= e.i < e.j < g.p):
        raise ValueError(f"edge {e} out of range for p={g.p}")
    adj = g.adjacency.copy()
    adj[e.i, e.j] = adj[e.j, e.i] = not adj[e.i, e.j]
    return Graph(g.p, adj)


def triangle_count(g: Graph, e: Edge) -> int:
    """Number of common neighbors of e's endpoints (triangles through e).

    Defined whether or not e is present; the count never includes the
    endpoints themselves because the diagonal is empty.
    """
    e = make_edge(e[0], e[1])
    return int(np.count_nonzero(g.adjacency[e.i] & g.adjacency[e.j]))


def neighbors(g: Graph, j: int) -> np.ndarray:
    """Sorted index array of the vertices adjacent to j."""
    if not 0 <= j < g.p:
        raise ValueError(f"vertex {j} out of range")
    return np.flatnonzero(g.adjacency[j])


def to_edgelist_text(g: Graph) -> str:
    """One `i j` pair per line, zero-based, i < j."""
    return "".join(f"{e.i} {e.j}\n" for e in g.edges())


def from_edgelist_text(text: str, p: int) -> Graph:
    edges = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        a, b = line.split()[:2]
        edges.append((int(a), int(b)))
    return graph_from_edges(p, edges)


def to_dot(g: Graph, labels: Sequence[str] | None = None,
           edge_labels: dict[Edge, str] | None = None) -> str:
    """DOT text for an undirected graph; optional edge label attribute."""
    names = list(labels) if labels is not None else [str(v) for v in range(g.p)]
    if len(names) != g.p:
        raise ValueError("one label per vertex required")
    lines = ["graph G {"]
    for v in range(g.p):
        lines.append(f'  "{names[v]}";')
    for e in g.edges():
        attr = ""
        if edge_labels is not None and e in edge_labels:
            attr = f' [label="{edge_labels[e]}"]'
        lines.append(f'  "{names[e.i]}" -- "{names[e.j]}"{attr};')
    lines.append("}")
    return "\n".join(lines) + "\n"
