"""Block decompositions, Schur complements and the resolvent identities built on them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .decimation import DecimationData, exceptional_points, preimages_many
from .operators import PiecewiseJacobi, ProbabilisticLaplacian, kolmogorov_measure, symmetrize

ADMISSIBILITY_MARGIN = 1e-9


class InadmissibleError(ValueError):
    """The spectral parameter is too close to a pole of the resolvent."""


@dataclass(frozen=True)
class BlockDecomposition:
    kept: tuple[int, ...]
    eliminated: tuple[int, ...]
    S: np.ndarray
    Xbar: np.ndarray
    X: np.ndarray
    Q: np.ndarray

    def reassemble(self) -> np.ndarray:
        n = len(self.kept) + len(self.eliminated)
        M = np.zeros((n, n), dtype=np.result_type(self.S, self.Q))
        k, e = list(self.kept), list(self.eliminated)
        M[np.ix_(k, k)] = self.S
        M[np.ix_(k, e)] = self.Xbar
        M[np.ix_(e, k)] = self.X
        M[np.ix_(e, e)] = self.Q
        return M

    def inclusion(self) -> np.ndarray:
        """Coordinate inclusion of the kept subspace."""
        n = len(self.kept) + len(self.eliminated)
        U = np.zeros((n, len(self.kept)))
        U[list(self.kept), range(len(self.kept))] = 1.0
        return U


def decompose(M: np.ndarray, kept: Sequence[int]) -> BlockDecomposition:
    M = np.asarray(M)
    n = M.shape[0]
    k = sorted(set(int(i) for i in kept))
    if not k:
        raise ValueError("kept index set is empty")
    if k[0] < 0 or k[-1] >= n:
        raise ValueError("kept index out of range")
    e = [i for i in range(n) if i not in set(k)]
    if not e:
        raise ValueError("eliminated index set is empty")
    return BlockDecomposition(
        tuple(k),
        tuple(e),
        M[np.ix_(k, k)].copy(),
        M[np.ix_(k, e)].copy(),
        M[np.ix_(e, k)].copy(),
        M[np.ix_(e, e)].copy(),
    )


def _check_distance(z: complex, points: np.ndarray, what: str):
    if len(points) and np.min(np.abs(points - z)) <= ADMISSIBILITY_MARGIN:
        raise InadmissibleError(f"z = {z} lies within {ADMISSIBILITY_MARGIN} of {what}")


def schur_complement(bd: BlockDecomposition, z, excluded: np.ndarray | None = None) -> np.ndarray:
    """``zI - S - Xbar (zI - Q)^{-1} X`` via a pivoted LU solve.

    ``excluded`` is the spectrum of ``Q`` if already known; otherwise it is
    computed here for the admissibility check.
    """
    z = complex(z)
    sigma_q = np.linalg.eigvals(bd.Q) if excluded is None else np.asarray(excluded, dtype=complex)
    _check_distance(z, sigma_q, "the spectrum of Q")
    m = bd.Q.shape[0]
    lu = lu_factor(z * np.eye(m) - bd.Q)
    W = lu_solve(lu, bd.X.astype(complex))
    return z * np.eye(len(bd.kept)) - bd.S - bd.Xbar @ W


def model_decomposition(J: PiecewiseJacobi) -> BlockDecomposition:
    return decompose(J.matrix, J.substitution.model_vertices)


def verify_spectral_similarity(
    J: PiecewiseJacobi, lap: ProbabilisticLaplacian, dd: DecimationData, z
) -> float:
    """Max-entry residual of ``Schur(J) - phi(z) (R(z) I - Delta_p)``."""
    z = complex(z)
    if J.csj.n0 == 1:
        # no interior vertices: the Schur complement is zI - J itself
        sc = z * np.eye(J.size) - J.matrix
    else:
        sc = schur_complement(model_decomposition(J), z, exceptional_points(dd))
    rhs = dd.phi(z) * (dd.R(z) * np.eye(lap.size) - lap.matrix)
    return float(np.max(np.abs(sc - rhs)))


def verify_renormalization(
    J: PiecewiseJacobi,
    lap: ProbabilisticLaplacian,
    dd: DecimationData,
    z,
    spectrum: np.ndarray | None = None,
) -> float:
    """Max-entry residual of ``U*(zI - J)^{-1}U = -(P^D/prod a) (R(z) I - Delta_p)^{-1}``.

    ``spectrum`` (of J) is used for the admissibility check and computed when omitted.
    """
    z = complex(z)
    _check_distance(z, exceptional_points(dd), "the exceptional set")
    sigma = np.linalg.eigvals(J.matrix) if spectrum is None else np.asarray(spectrum, dtype=complex)
    _check_distance(z, sigma, "the spectrum of J")
    N = J.size
    lu = lu_factor(z * np.eye(N) - J.matrix)
    kept = list(J.substitution.model_vertices)
    E = np.zeros((N, len(kept)), dtype=complex)
    E[kept, range(len(kept))] = 1.0
    lhs = lu_solve(lu, E)[kept, :]
    M = dd.R(z) * np.eye(lap.size) - lap.matrix
    rhs = (1.0 / dd.phi(z)) * np.linalg.solve(M, np.eye(lap.size))
    return float(np.max(np.abs(lhs - rhs)))


def lift_eigenvector(bd: BlockDecomposition, f0: np.ndarray, z) -> np.ndarray:
    """Extend ``f0`` on the kept block by ``(zI - Q)^{-1} X f0`` on the eliminated block."""
    z = complex(z)
    m = bd.Q.shape[0]
    g = np.linalg.solve(z * np.eye(m) - bd.Q, bd.X @ f0)
    n = len(bd.kept) + m
    f = np.zeros(n, dtype=complex)
    f[list(bd.kept)] = f0
    f[list(bd.eliminated)] = g
    return f


def substituted_schur(lap: ProbabilisticLaplacian, csj, z) -> np.ndarray:
    """``F(Delta_p, Schur(J_cs))``: the Schur complement of the block, substituted.

    The block's Schur complement is a 2x2 centrosymmetric matrix, so it is
    substituted with ``n0 = 1`` using complex entries directly.
    """
    z = complex(z)
    bd = decompose(csj.materialize(), [0, csj.n0])
    sc = schur_complement(bd, z)
    N = lap.size
    out = np.zeros((N, N), dtype=complex)
    out[np.diag_indices(N)] = sc[0, 0]
    for s, t, w in lap.graph.edges:
        out[s, t] = w * sc[0, 1]
    return out


def verify_eigenvector_lifting(
    J: PiecewiseJacobi, lap: ProbabilisticLaplacian, dd: DecimationData
) -> tuple[float, int]:
    """Lift every eigenpair of ``Delta_p`` to each non-exceptional preimage.

    Returns the largest relative residual ``|Jf - zf| / |f|`` and the number
    of lifted vectors.
    """
    pi = kolmogorov_measure(lap.matrix)
    w, V = np.linalg.eigh(symmetrize(lap.matrix, pi))
    F0 = V / np.sqrt(pi.values)[:, None]
    w = np.clip(w, 0.0, 2.0)
    bd = model_decomposition(J) if J.csj.n0 > 1 else None
    exc = exceptional_points(dd)
    pre = preimages_many(dd, w, real=True)
    worst, count = 0.0, 0
    for j in range(len(w)):
        for z in pre[j]:
            if len(exc) and np.min(np.abs(exc - z)) <= ADMISSIBILITY_MARGIN:
                continue
            f = F0[:, j].astype(complex) if bd is None else lift_eigenvector(bd, F0[:, j], z)
            res = np.linalg.norm(J.matrix @ f - z * f) / np.linalg.norm(f)
            worst = max(worst, float(res))
            count += 1
    return worst, count
