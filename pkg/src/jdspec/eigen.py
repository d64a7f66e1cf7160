"""Self-contained symmetric eigensolvers and the symmetrize-then-solve driver."""

from __future__ import annotations

import math

import numpy as np

from .multiset import SpectrumMultiset
from .operators import VertexMeasure, kolmogorov_measure, symmetrize

EPS = np.finfo(float).eps
JACOBI_MAX_SWEEPS = 50
QL_STEPS_PER_ROW = 30


class ConvergenceError(RuntimeError):
    pass


def tql_eigenvalues(diag, offdiag) -> np.ndarray:
    """Eigenvalues of the symmetric tridiagonal matrix (QL with implicit Wilkinson-type shifts).

    ``offdiag[i]`` couples rows ``i`` and ``i + 1``.
    """
    d = [float(x) for x in diag]
    n = len(d)
    if len(offdiag) != max(n - 1, 0):
        raise ValueError("offdiag must have length len(diag) - 1")
    e = [float(x) for x in offdiag] + [0.0]
    steps = 0
    cap = QL_STEPS_PER_ROW * max(n, 1)
    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            steps += 1
            if steps > cap:
                raise ConvergenceError(f"QL did not converge within {cap} shifts")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return np.sort(np.array(d))


def jacobi_eigenvalues(S: np.ndarray, max_sweeps: int = JACOBI_MAX_SWEEPS) -> np.ndarray:
    """Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations."""
    A = np.array(S, dtype=float, copy=True)
    n = A.shape[0]
    if n <= 1:
        return np.diag(A).copy()
    scale = max(np.linalg.norm(A), EPS)
    iu = np.triu_indices(n, 1)
    for _ in range(max_sweeps):
        off = math.sqrt(2.0 * float(np.sum(A[iu] ** 2)))
        if off <= EPS * scale:
            return np.sort(np.diag(A))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= EPS * 1e-3 * scale:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                cp = A[:, p].copy()
                cq = A[:, q]
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                rp = A[p, :].copy()
                rq = A[q, :]
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = A[q, p] = 0.0
    raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")


def _path_ordering(S: np.ndarray) -> list[int] | None:
    """Vertex order making ``S`` tridiagonal, or None if its graph is not a union of paths."""
    n = S.shape[0]
    adj = [np.nonzero(S[i])[0].tolist() for i in range(n)]
    adj = [[j for j in row if j != i] for i, row in enumerate(adj)]
    if any(len(row) > 2 for row in adj):
        return None
    seen = [False] * n
    order = []
    for start in range(n):
        if seen[start] or len(adj[start]) == 2:
            continue
        prev, cur = -1, start
        while True:
            seen[cur] = True
            order.append(cur)
            nxt = [j for j in adj[cur] if j != prev]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
    if len(order) != n:
        # some component is a cycle
        return None
    return order


def symmetric_eigenvalues(S: np.ndarray) -> np.ndarray:
    order = _path_ordering(S)
    if order is not None:
        T = S[np.ix_(order, order)]
        return tql_eigenvalues(np.diag(T), np.diag(T, 1))
    return jacobi_eigenvalues(S)


def eigenvalues(M: np.ndarray, measure_hint: VertexMeasure | None = None) -> SpectrumMultiset:
    """Spectrum of a symmetrizable real matrix.

    The matrix is conjugated to symmetric form with its detailed-balance
    measure (computed unless supplied), then handed to QL when the result is
    tridiagonal up to reordering and to cyclic Jacobi otherwise.
    """
    M = np.asarray(M, dtype=float)
    scale = max(np.max(np.abs(M)), EPS) if M.size else 1.0
    if M.size == 0:
        return SpectrumMultiset.from_values([])
    if np.max(np.abs(M - M.T)) <= 1e-14 * scale and measure_hint is None:
        S = 0.5 * (M + M.T)
    else:
        pi = measure_hint if measure_hint is not None else kolmogorov_measure(M)
        S = symmetrize(M, pi)
    return SpectrumMultiset.from_values(symmetric_eigenvalues(S).tolist())
