"""Directed weighted graphs, model-graph generators and edge substitution."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class GraphError(ValueError):
    """Raised for malformed graphs or invalid generator arguments."""


@dataclass(frozen=True)
class DirectedWeightedGraph:
    vertex_count: int
    edges: tuple[tuple[int, int, float], ...]
    vertex_labels: tuple | None = None

    def __post_init__(self):
        n = self.vertex_count
        if n < 0:
            raise GraphError("vertex_count must be non-negative")
        edges = tuple((int(s), int(t), float(w)) for s, t, w in self.edges)
        object.__setattr__(self, "edges", edges)
        seen = set()
        for s, t, _ in edges:
            if not (0 <= s < n and 0 <= t < n):
                raise GraphError(f"edge ({s}, {t}) has an endpoint outside [0, {n})")
            if s == t:
                raise GraphError(f"self-loop at vertex {s}")
            if (s, t) in seen:
                raise GraphError(f"duplicate edge ({s}, {t})")
            seen.add((s, t))
        for s, t, _ in edges:
            if (t, s) not in seen:
                raise GraphError(f"edge ({s}, {t}) has no reverse edge")
        if self.vertex_labels is not None and len(self.vertex_labels) != n:
            raise GraphError("vertex_labels length differs from vertex_count")

    def weight_matrix(self) -> np.ndarray:
        W = np.zeros((self.vertex_count, self.vertex_count))
        for s, t, w in self.edges:
            W[s, t] = w
        return W

    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for s, t, _ in self.edges:
            adj[s].append(t)
        for row in adj:
            row.sort()
        return adj

    def undirected_edges(self) -> list[tuple[int, int]]:
        """Unordered edges as sorted ``(x, y)`` pairs with ``x < y``."""
        return sorted({(min(s, t), max(s, t)) for s, t, _ in self.edges})

    def weight(self, s: int, t: int) -> float:
        for a, b, w in self.edges:
            if a == s and b == t:
                return w
        return 0.0

    def to_json(self) -> dict:
        return {"vertex_count": self.vertex_count, "edges": [[s, t, w] for s, t, w in self.edges]}

    @classmethod
    def from_json(cls, data: dict) -> "DirectedWeightedGraph":
        try:
            n = int(data["vertex_count"])
            edges = [(int(e[0]), int(e[1]), float(e[2])) for e in data["edges"]]
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            raise GraphError(f"malformed graph JSON: {exc}") from exc
        return cls(n, tuple(edges))


@dataclass(frozen=True)
class Copy:
    """One spliced-in copy of the building-block path."""

    vertices: tuple[int, ...]
    model_edge: tuple[int, int]


@dataclass(frozen=True)
class SubstitutionGraph:
    graph: DirectedWeightedGraph
    covering_map: tuple[int, ...]
    model_vertices: tuple[int, ...]
    copies: tuple[Copy, ...]
    n0: int
    model: DirectedWeightedGraph = field(repr=False)

    @property
    def interior_vertices(self) -> tuple[int, ...]:
        return tuple(range(len(self.model_vertices), self.graph.vertex_count))


def path_model_graph(k0: int, probabilities: Sequence[float] = ()) -> DirectedWeightedGraph:
    """Path on ``k0 + 1`` vertices carrying a nearest-neighbour random walk.

    Interior vertex ``k`` steps right with probability ``probabilities[k-1]``
    and left otherwise; both end vertices reflect with probability one.
    """
    if int(k0) != k0 or k0 < 1:
        raise GraphError("k0 must be a positive integer")
    probs = [float(p) for p in probabilities]
    if len(probs) != k0 - 1:
        raise GraphError(f"expected {k0 - 1} probabilities, got {len(probs)}")
    for p in probs:
        if not 0.0 < p < 1.0:
            raise GraphError(f"transition probability {p} outside (0, 1)")
    edges = [(0, 1, 1.0), (k0, k0 - 1, 1.0)]
    for k, p in enumerate(probs, start=1):
        edges.append((k, k + 1, p))
        edges.append((k, k - 1, 1.0 - p))
    edges.sort()
    return DirectedWeightedGraph(k0 + 1, tuple(edges))


def sierpinski_model_graph(level: int) -> DirectedWeightedGraph:
    """Level-``level`` Sierpinski gasket approximation with the uniform random walk.

    Vertices are numbered in creation order: the three corners first, then
    midpoints as the recursive subdivision discovers them.  Labels hold the
    integer lattice coordinates (affine gasket with side ``2**level``).
    """
    if int(level) != level or level < 0:
        raise GraphError("level must be a non-negative integer")
    side = 2 ** level
    index: dict[tuple[int, int], int] = {}

    def vid(pt):
        if pt not in index:
            index[pt] = len(index)
        return index[pt]

    corners = ((0, 0), (side, 0), (0, side))
    for c in corners:
        vid(c)
    triangles = [corners]
    for _ in range(level):
        finer = []
        for a, b, c in triangles:
            ab = ((a[0] + b[0]) // 2, (a[1] + b[1]) // 2)
            bc = ((b[0] + c[0]) // 2, (b[1] + c[1]) // 2)
            ca = ((c[0] + a[0]) // 2, (c[1] + a[1]) // 2)
            for m in (ab, bc, ca):
                vid(m)
            finer.extend([(a, ab, ca), (ab, b, bc), (ca, bc, c)])
        triangles = finer
    pairs = set()
    for tri in triangles:
        ids = [vid(p) for p in tri]
        for i in range(3):
            x, y = ids[i], ids[(i + 1) % 3]
            pairs.add((min(x, y), max(x, y)))
    n = len(index)
    degree = [0] * n
    for x, y in pairs:
        degree[x] += 1
        degree[y] += 1
    edges = []
    for x, y in sorted(pairs):
        edges.append((x, y, 1.0 / degree[x]))
        edges.append((y, x, 1.0 / degree[y]))
    edges.sort()
    labels = tuple(sorted(index, key=index.get))
    return DirectedWeightedGraph(n, tuple(edges), labels)


def substitute_graph(model: DirectedWeightedGraph, n0: int) -> SubstitutionGraph:
    """Splice an ``(n0 + 1)``-vertex path into every undirected model edge.

    Model vertices keep their indices.  Interior vertices are appended copy by
    copy (copies ordered by their canonical ``x < y`` model edge) and along
    each copy from the ``x`` end to the ``y`` end.  Edge weights of the result
    are placeholders (1.0); the operator layer assigns actual values.
    """
    if int(n0) != n0 or n0 < 1:
        raise GraphError("n0 must be a positive integer")
    if not isinstance(model, DirectedWeightedGraph):
        raise GraphError("model must be a DirectedWeightedGraph")
    nv = model.vertex_count
    cover = [-1] * nv
    copies = []
    edges = []
    nxt = nv
    for x, y in model.undirected_edges():
        verts = [x] + list(range(nxt, nxt + n0 - 1)) + [y]
        nxt += n0 - 1
        for pos, v in enumerate(verts):
            if 0 < pos < n0:
                cover.append(pos)
        # a model vertex keeps the boundary position of the first copy touching it
        if cover[x] == -1:
            cover[x] = 0
        if cover[y] == -1:
            cover[y] = n0
        for u, v in zip(verts[:-1], verts[1:]):
            edges.append((u, v, 1.0))
            edges.append((v, u, 1.0))
        copies.append(Copy(tuple(verts), (x, y)))
    # isolated model vertices still map to the boundary
    cover = [0 if c == -1 else c for c in cover]
    graph = DirectedWeightedGraph(nxt, tuple(sorted(edges)))
    return SubstitutionGraph(
        graph=graph,
        covering_map=tuple(cover),
        model_vertices=tuple(range(nv)),
        copies=tuple(copies),
        n0=int(n0),
        model=model,
    )


def path_order(sub: SubstitutionGraph) -> list[int]:
    """Vertices of a substituted path model listed from one end to the other."""
    model = sub.model
    adj = model.neighbors()
    if any(len(a) > 2 for a in adj) or len(model.undirected_edges()) != model.vertex_count - 1:
        raise GraphError("model graph is not a path")
    by_edge = {c.model_edge: c for c in sub.copies}
    order = [0]
    prev, cur = None, 0
    while True:
        nxt = [v for v in adj[cur] if v != prev]
        if not nxt:
            break
        v = nxt[0]
        c = by_edge[(min(cur, v), max(cur, v))]
        seq = list(c.vertices) if c.vertices[0] == cur else list(reversed(c.vertices))
        order.extend(seq[1:])
        prev, cur = cur, v
    if len(order) != sub.graph.vertex_count:
        raise GraphError("model path does not start at vertex 0")
    return order
