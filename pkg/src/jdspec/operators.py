"""Centrosymmetric Jacobi matrices, probabilistic Laplacians and the substitution operator."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graphs import DirectedWeightedGraph, GraphError, SubstitutionGraph, path_order, substitute_graph

SYMMETRY_TOL = 1e-12
ROW_SUM_TOL = 1e-12
CYCLE_TOL = 1e-10


class OperatorError(ValueError):
    """Raised when an operator fails validation."""


class NotSymmetrizableError(OperatorError):
    """The operator admits no positive detailed-balance measure."""


@dataclass(frozen=True)
class CentrosymmetricJacobi:
    """Tridiagonal ``(n0+1) x (n0+1)`` matrix with entries

    ``J[i, i+1] = a[i]`` (that is a(i+1) in 1-based terms),
    ``J[i+1, i] = a[n0-1-i]`` and ``J[i, i] = b[i]``, with ``b`` palindromic.
    """

    a: tuple[float, ...]
    b: tuple[float, ...]
    structural_zero: bool = False

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        b = tuple(float(x) for x in self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if len(a) < 1:
            raise OperatorError("need at least one off-diagonal entry (n0 >= 1)")
        if len(b) != len(a) + 1:
            raise OperatorError(f"len(b) must be len(a) + 1, got {len(b)} and {len(a)}")
        if not all(np.isfinite(a)) or not all(np.isfinite(b)):
            raise OperatorError("entries must be finite")
        if self.structural_zero:
            if any(x != 0.0 for x in a):
                raise OperatorError("structural-zero CSJ must have a == 0")
        elif any(x == 0.0 for x in a):
            raise OperatorError("off-diagonal entries a(i) must be nonzero")
        n0 = len(a)
        for k in range(n0 + 1):
            if abs(b[k] - b[n0 - k]) > SYMMETRY_TOL:
                raise OperatorError(f"exchange symmetry broken: b({k}) != b({n0 - k})")

    @property
    def n0(self) -> int:
        return len(self.a)

    @property
    def size(self) -> int:
        return len(self.b)

    def materialize(self) -> np.ndarray:
        n0 = self.n0
        J = np.diag(np.asarray(self.b, dtype=float))
        for i in range(n0):
            J[i, i + 1] = self.a[i]
            J[i + 1, i] = self.a[n0 - 1 - i]
        return J

    def interior(self) -> np.ndarray:
        if self.n0 < 2:
            raise OperatorError("interior block is empty for n0 = 1")
        return self.materialize()[1:-1, 1:-1]

    def a_product(self) -> float:
        return float(np.prod(self.a))

    def is_probabilistic_laplacian(self, tol: float = ROW_SUM_TOL) -> bool:
        J = self.materialize()
        off = J - np.diag(np.diag(J))
        return (
            np.allclose(np.diag(J), 1.0, atol=tol, rtol=0)
            and np.all(off <= 0)
            and np.all(off >= -1)
            and np.allclose(J.sum(axis=1), 0.0, atol=tol, rtol=0)
        )

    def scaled(self, lam: float) -> "CentrosymmetricJacobi":
        return new_csj([lam * x for x in self.a], [lam * x for x in self.b])

    def __add__(self, other: "CentrosymmetricJacobi") -> "CentrosymmetricJacobi":
        if self.n0 != other.n0:
            raise OperatorError("size mismatch")
        return new_csj([x + y for x, y in zip(self.a, other.a)], [x + y for x, y in zip(self.b, other.b)])

    def to_json(self) -> dict:
        return {"a": list(self.a), "b": list(self.b)}

    @classmethod
    def from_json(cls, data: dict) -> "CentrosymmetricJacobi":
        try:
            return new_csj(data["a"], data["b"])
        except (KeyError, TypeError) as exc:
            raise OperatorError(f"malformed CSJ JSON: {exc}") from exc


def new_csj(a: Sequence[float], b: Sequence[float]) -> CentrosymmetricJacobi:
    return CentrosymmetricJacobi(tuple(a), tuple(b))


def identity_csj(n0: int) -> CentrosymmetricJacobi:
    """The identity in CSJ form; off-diagonals are structural zeros."""
    return CentrosymmetricJacobi((0.0,) * n0, (1.0,) * (n0 + 1), structural_zero=True)


def delta0() -> CentrosymmetricJacobi:
    return new_csj([-1.0], [1.0, 1.0])


def csj_from_matrix(M: np.ndarray, tol: float = SYMMETRY_TOL) -> CentrosymmetricJacobi:
    """Read a CSJ back from a dense tridiagonal centrosymmetric matrix."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if M.shape != (n, n) or n < 2:
        raise OperatorError("need a square matrix of size >= 2")
    if np.any(np.abs(np.triu(M, 2)) > 0) or np.any(np.abs(np.tril(M, -2)) > 0):
        raise OperatorError("matrix is not tridiagonal")
    if np.max(np.abs(M - M[::-1, ::-1])) > tol:
        raise OperatorError("matrix is not centrosymmetric")
    a = [M[i, i + 1] for i in range(n - 1)]
    return new_csj(a, np.diag(M))


@dataclass(frozen=True)
class ProbabilisticLaplacian:
    graph: DirectedWeightedGraph
    matrix: np.ndarray

    @property
    def size(self) -> int:
        return self.graph.vertex_count

    def p(self, x: int, y: int) -> float:
        return -float(self.matrix[x, y])


def laplacian_from_graph(g: DirectedWeightedGraph) -> ProbabilisticLaplacian:
    """``I - P`` for the transition matrix ``P`` given by the edge weights."""
    n = g.vertex_count
    for s, t, w in g.edges:
        if not 0.0 < w <= 1.0:
            raise OperatorError(f"transition probability p({s},{t}) = {w} outside (0, 1]")
    W = g.weight_matrix()
    sums = W.sum(axis=1)
    bad = np.nonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)[0]
    if len(bad):
        raise OperatorError(f"outgoing probabilities at vertex {bad[0]} sum to {sums[bad[0]]}")
    L = np.eye(n) - W
    L[np.diag_indices(n)] = 1.0
    L.setflags(write=False)
    return ProbabilisticLaplacian(g, L)


def laplacian_from_csj(csj: CentrosymmetricJacobi) -> ProbabilisticLaplacian:
    """View a CSJ that is a probabilistic Laplacian as one on its path graph."""
    if not csj.is_probabilistic_laplacian():
        raise OperatorError("CSJ is not a probabilistic Laplacian")
    J = csj.materialize()
    n0 = csj.n0
    edges = []
    for i in range(n0):
        edges.append((i, i + 1, -J[i, i + 1]))
        edges.append((i + 1, i, -J[i + 1, i]))
    return laplacian_from_graph(DirectedWeightedGraph(n0 + 1, tuple(sorted(edges))))


@dataclass(frozen=True)
class PiecewiseJacobi:
    substitution: SubstitutionGraph
    matrix: np.ndarray
    laplacian: ProbabilisticLaplacian
    csj: CentrosymmetricJacobi

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def path_matrix(self) -> np.ndarray:
        """Matrix reordered along the path (path model graphs only)."""
        order = path_order(self.substitution)
        return self.matrix[np.ix_(order, order)]

    def as_csj(self) -> CentrosymmetricJacobi:
        return csj_from_matrix(self.path_matrix())


def substitute_operator(lap: ProbabilisticLaplacian, csj: CentrosymmetricJacobi) -> PiecewiseJacobi:
    """The piecewise centrosymmetric Jacobi operator built from ``lap`` and ``csj``.

    Boundary edges leaving a model vertex ``u`` toward ``v`` get
    ``p(u, v) * J_cs(0, 1)``; every other entry is copied from ``J_cs``
    through the covering map.
    """
    n0 = csj.n0
    sub = substitute_graph(lap.graph, n0)
    Jcs = csj.materialize()
    N = sub.graph.vertex_count
    J = np.zeros((N, N))
    for x, pos in enumerate(sub.covering_map):
        J[x, x] = Jcs[pos, pos]
    for c in sub.copies:
        u, v = c.model_edge
        verts = c.vertices
        J[u, verts[1]] = lap.p(u, v) * Jcs[0, 1]
        J[v, verts[-2]] = lap.p(v, u) * Jcs[n0, n0 - 1]
        for i in range(1, n0):
            x = verts[i]
            J[x, verts[i - 1]] = Jcs[i, i - 1]
            J[x, verts[i + 1]] = Jcs[i, i + 1]
    J.setflags(write=False)
    return PiecewiseJacobi(sub, J, lap, csj)


@dataclass(frozen=True)
class VertexMeasure:
    values: np.ndarray

    def __len__(self):
        return len(self.values)


def _pattern_graph(M: np.ndarray) -> list[list[int]]:
    n = M.shape[0]
    adj = [[] for _ in range(n)]
    rows, cols = np.nonzero(M)
    for x, y in zip(rows, cols):
        if x != y:
            adj[x].append(int(y))
    return adj


def kolmogorov_measure(M: np.ndarray, graph: DirectedWeightedGraph | None = None) -> VertexMeasure:
    """Positive measure ``pi`` with ``pi(x) M(x,y) = pi(y) M(y,x)``.

    Ratios are propagated along a breadth-first spanning tree rooted at
    vertex 0 (``pi(0) = 1``); every non-tree edge is then checked against
    the cycle condition.  Each further connected component is rooted at its
    smallest vertex.
    """
    M = np.asarray(M)
    n = M.shape[0]
    adj = graph.neighbors() if graph is not None else _pattern_graph(M)
    pi = np.zeros(n)
    for root in range(n):
        if pi[root] > 0:
            continue
        pi[root] = 1.0
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                fwd, back = M[x, y], M[y, x]
                if fwd == 0 and back == 0:
                    continue
                if fwd == 0 or back == 0:
                    raise NotSymmetrizableError(f"one-way edge between {x} and {y}")
                ratio = fwd / back
                if pi[y] == 0:
                    if not ratio > 0:
                        raise NotSymmetrizableError(f"ratio M({x},{y})/M({y},{x}) is not positive")
                    pi[y] = pi[x] * ratio
                    queue.append(y)
                else:
                    lhs, rhs = pi[x] * fwd, pi[y] * back
                    if abs(lhs - rhs) > CYCLE_TOL * max(abs(lhs), abs(rhs)):
                        raise NotSymmetrizableError(f"cycle condition fails on edge ({x}, {y})")
    if not np.all(np.isfinite(pi)) or np.any(pi <= 0):
        raise NotSymmetrizableError("measure is not positive and finite")
    return VertexMeasure(pi)


def symmetrize(M: np.ndarray, measure: VertexMeasure) -> np.ndarray:
    """``D^{1/2} M D^{-1/2}`` with ``D = diag(pi)``."""
    M = np.asarray(M, dtype=float)
    pi = np.asarray(measure.values, dtype=float)
    flux = pi[:, None] * M
    scale = max(np.max(np.abs(flux)), np.finfo(float).tiny)
    if np.max(np.abs(flux - flux.T)) > CYCLE_TOL * scale:
        raise NotSymmetrizableError("detailed balance does not hold for this measure")
    r = np.sqrt(pi)
    S = r[:, None] * M / r[None, :]
    return 0.5 * (S + S.T)
