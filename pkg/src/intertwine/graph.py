"""Finite metric graphs with unit-length edges.

Every edge is stored once, oriented from the lower to the higher vertex
index.  A point on an edge is ``(e, t)`` with ``t`` measured from the first
endpoint; the same point seen from the other end is ``(e, 1 - t)``.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    Disconnected,
    DuplicateEdge,
    InvalidSize,
    LoopEdge,
    ParseError,
    UnknownVertex,
)

__all__ = [
    "Graph",
    "load_graph",
    "dump_graph",
    "builtin_graph",
    "random_connected_graph",
]


@dataclass(frozen=True, eq=False)
class Graph:
    vertices: tuple[str, ...]
    edges: tuple[tuple[int, int], ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        n = len(self.vertices)
        if n < 2:
            raise InvalidSize("a graph needs at least two vertices")
        if len(set(self.vertices)) != n:
            raise ParseError("vertex identifiers must be unique")
        seen = set()
        for u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise UnknownVertex(u if not 0 <= u < n else v)
            if u == v:
                raise LoopEdge(self.vertices[u])
            if u > v:
                raise ValueError("edges must be stored in canonical orientation")
            if (u, v) in seen:
                raise DuplicateEdge(self.vertices[u], self.vertices[v])
            seen.add((u, v))
        reached = _reachable(n, self.edges)
        for i in range(n):
            if i not in reached:
                raise Disconnected(self.vertices[i])

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def degree(self) -> np.ndarray:
        """The vertex weight m0(x): number of neighbours."""
        deg = np.zeros(self.n_vertices)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        deg.flags.writeable = False
        return deg

    @cached_property
    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n_vertices, self.n_vertices))
        for u, v in self.edges:
            a[u, v] = a[v, u] = 1.0
        a.flags.writeable = False
        return a

    @cached_property
    def incident(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per vertex: ``(edge index, end)`` pairs, end 0 means t=0 sits at the vertex."""
        inc = [[] for _ in self.vertices]
        for k, (u, v) in enumerate(self.edges):
            inc[u].append((k, 0))
            inc[v].append((k, 1))
        return tuple(tuple(x) for x in inc)

    def index(self, vertex: str) -> int:
        try:
            return self.vertices.index(vertex)
        except ValueError:
            raise UnknownVertex(vertex) from None

    def edge_point(self, u: int, v: int, t: float) -> tuple[int, float]:
        """Canonical ``(edge index, t)`` for the point at distance t from u towards v."""
        if u < v:
            return self._edge_index[(u, v)], t
        return self._edge_index[(v, u)], 1.0 - t

    @cached_property
    def _edge_index(self) -> dict[tuple[int, int], int]:
        return {e: k for k, e in enumerate(self.edges)}

    def __repr__(self):
        label = self.name or "Graph"
        return f"<{label}: {self.n_vertices} vertices, {self.n_edges} edges>"


def _reachable(n, edges):
    nbrs = [[] for _ in range(n)]
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    seen = {0}
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for y in nbrs[x]:
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


def _from_labels(vertices, edge_labels, name=""):
    vertices = tuple(vertices)
    if len(vertices) < 2:
        raise InvalidSize("a graph needs at least two vertices")
    pos = {}
    for i, v in enumerate(vertices):
        if v in pos:
            raise ParseError(f"duplicate vertex identifier {v!r}")
        pos[v] = i
    edges = []
    seen = set()
    for pair in edge_labels:
        a, b = pair
        if a not in pos:
            raise UnknownVertex(a)
        if b not in pos:
            raise UnknownVertex(b)
        if a == b:
            raise LoopEdge(a)
        e = tuple(sorted((pos[a], pos[b])))
        if e in seen:
            raise DuplicateEdge(a, b)
        seen.add(e)
        edges.append(e)
    return Graph(vertices, tuple(edges), name=name)


def load_graph(text: str | bytes, name: str = "") -> Graph:
    """Parse the JSON graph format ``{"vertices": [...], "edges": [[u, v], ...]}``."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"graph file is not UTF-8: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ParseError("graph file must contain a JSON object")
    extra = set(data) - {"vertices", "edges"}
    if extra:
        raise ParseError(f"unknown keys: {sorted(extra)}")
    if "vertices" not in data or "edges" not in data:
        raise ParseError("graph file needs 'vertices' and 'edges'")
    vertices, edges = data["vertices"], data["edges"]
    if not isinstance(vertices, list) or not all(isinstance(v, str) for v in vertices):
        raise ParseError("'vertices' must be an array of strings")
    if not isinstance(edges, list):
        raise ParseError("'edges' must be an array")
    for e in edges:
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, str) for x in e)):
            raise ParseError(f"malformed edge {e!r}")
    return _from_labels(vertices, edges, name=name)


def dump_graph(g: Graph) -> str:
    return json.dumps(
        {
            "vertices": list(g.vertices),
            "edges": [[g.vertices[u], g.vertices[v]] for u, v in g.edges],
        }
    )


def builtin_graph(family: str, n: int) -> Graph:
    """Deterministic test graphs labelled ``v0 .. v(n-1)``.

    ``star`` has ``v0`` as centre and ``n - 1`` leaves.
    """
    n = int(n)
    minimum = {"cycle": 3, "complete": 3, "star": 2, "path": 2}
    if family not in minimum:
        raise InvalidSize(f"unknown graph family {family!r}")
    if n < minimum[family]:
        raise InvalidSize(f"{family} needs n >= {minimum[family]}, got {n}")
    labels = [f"v{i}" for i in range(n)]
    if family == "cycle":
        pairs = [(i, (i + 1) % n) for i in range(n)]
    elif family == "path":
        pairs = [(i, i + 1) for i in range(n - 1)]
    elif family == "star":
        pairs = [(0, i) for i in range(1, n)]
    else:
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return _from_labels(labels, [(labels[a], labels[b]) for a, b in pairs], name=f"{family}({n})")


def random_connected_graph(n: int, rng: np.random.Generator, p_extra: float = 0.3) -> Graph:
    """Random spanning tree plus independent extra edges with probability ``p_extra``."""
    if n < 2:
        raise InvalidSize("n must be >= 2")
    pairs = set()
    for i in range(1, n):
        j = int(rng.integers(0, i))
        pairs.add((j, i))
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in pairs and rng.random() < p_extra:
                pairs.add((i, j))
    labels = [f"v{i}" for i in range(n)]
    return _from_labels(
        labels, [(labels[a], labels[b]) for a, b in sorted(pairs)], name=f"random({n})"
    )
