"""Three-term recurrences, the spectral decimation polynomial and its inverse branches."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as npoly

from .eigen import eigenvalues
from .multiset import SpectrumMultiset
from .operators import CentrosymmetricJacobi, NotSymmetrizableError

log = logging.getLogger(__name__)

REAL_PROJECTION_TOL = 1e-8
CLUSTER_RTOL = 1e-6
CRITICAL_SNAP_RTOL = 1e-12


class PreimageError(RuntimeError):
    pass


def _p_couplings(csj: CentrosymmetricJacobi) -> list[float]:
    # c[k] = a(k-1) a(n0+2-k) for k = 2..n0+1 (1-based a)
    a, n0 = csj.a, csj.n0
    return [a[k - 2] * a[n0 + 1 - k] for k in range(2, n0 + 2)]


def _pd_couplings(csj: CentrosymmetricJacobi) -> list[float]:
    # c[k] = a(k) a(n0+1-k) for k = 2..n0-1
    a, n0 = csj.a, csj.n0
    return [a[k - 1] * a[n0 - k] for k in range(2, n0)]


def _run(z, diag, coupl, k, nderiv=0):
    """Value and derivatives of the k-th monic polynomial of a three-term recurrence.

    ``Q_0 = 1``, ``Q_1 = z - diag[0]``,
    ``Q_j = (z - diag[j-1]) Q_{j-1} - coupl[j-2] Q_{j-2}``.
    """
    z = np.asarray(z, dtype=complex)
    one = np.ones_like(z)
    zero = np.zeros_like(z)
    prev = [one] + [zero] * nderiv
    if k == 0:
        return prev
    cur = [z - diag[0], one] + [zero] * (nderiv - 1)
    cur = cur[: nderiv + 1]
    for j in range(2, k + 1):
        t = z - diag[j - 1]
        c = coupl[j - 2]
        nxt = [t * cur[0] - c * prev[0]]
        for d in range(1, nderiv + 1):
            nxt.append(t * cur[d] + d * cur[d - 1] - c * prev[d])
        prev, cur = cur, nxt
    return cur


def _scalar(v, z):
    return complex(v) if np.ndim(z) == 0 else v


def eval_P(csj: CentrosymmetricJacobi, z, k: int):
    """``P_k(z)``: leading principal minor of ``zI - J_cs`` of size k."""
    if not 0 <= k <= csj.n0 + 1:
        raise ValueError(f"k must lie in 0..{csj.n0 + 1}")
    return _scalar(_run(z, csj.b, _p_couplings(csj), k)[0], z)


def eval_PD(csj: CentrosymmetricJacobi, z, k: int):
    """``P^D_k(z)``: leading principal minor of ``zI - J_cs^D`` of size k."""
    n0 = csj.n0
    if k == 0:
        return _scalar(np.ones_like(np.asarray(z, dtype=complex)), z)
    if n0 < 2 or not 0 <= k <= n0 - 1:
        raise ValueError(f"k must lie in 0..{max(n0 - 1, 0)}")
    return _scalar(_run(z, csj.b[1:], _pd_couplings(csj), k)[0], z)


def _poly_coeffs(diag, coupl, k) -> np.ndarray:
    prev = np.array([1.0])
    if k == 0:
        return prev
    cur = np.array([-diag[0], 1.0])
    for j in range(2, k + 1):
        nxt = npoly.polysub(npoly.polymul(cur, [-diag[j - 1], 1.0]), coupl[j - 2] * prev)
        prev, cur = cur, nxt
    return cur


def balance(A: np.ndarray, radix: float = 2.0, max_iter: int = 100) -> np.ndarray:
    """Parlett-Reinsch diagonal similarity scaling of a (stack of) square matrices."""
    A = np.array(A, dtype=float, copy=True)
    stacked = A.ndim == 3
    if not stacked:
        A = A[None]
    n = A.shape[-1]
    sq = radix * radix
    for _ in range(max_iter):
        done = True
        for i in range(n):
            c = np.abs(A[:, :, i]).sum(axis=1) - np.abs(A[:, i, i])
            r = np.abs(A[:, i, :]).sum(axis=1) - np.abs(A[:, i, i])
            active = (c > 0) & (r > 0)
            s = c + r
            f = np.ones_like(c)
            while True:
                up = active & (c < r / radix)
                if not up.any():
                    break
                f[up] *= radix
                c[up] *= sq
            while True:
                down = active & (c > r * radix)
                if not down.any():
                    break
                f[down] /= radix
                c[down] /= sq
            change = active & ((c + r) / f < 0.95 * s)
            if change.any():
                done = False
                fi = np.where(change, f, 1.0)
                A[:, i, :] /= fi[:, None]
                A[:, :, i] *= fi[:, None]
        if done:
            break
    return A if stacked else A[0]


def companion_roots(monic_coeffs: np.ndarray) -> np.ndarray:
    """Roots of monic polynomials (ascending coefficients, one row per polynomial)."""
    C = np.atleast_2d(np.asarray(monic_coeffs, dtype=float))
    deg = C.shape[1] - 1
    if deg == 0:
        return np.zeros((C.shape[0], 0), dtype=complex)
    comp = np.zeros((C.shape[0], deg, deg))
    comp[:, 1:, :-1] = np.eye(deg - 1)
    comp[:, :, -1] = -C[:, :-1] / C[:, -1:]
    return np.linalg.eigvals(balance(comp)).astype(complex)


@dataclass(frozen=True)
class DecimationData:
    source: CentrosymmetricJacobi
    a_product: float
    P_coeffs: np.ndarray = field(repr=False)
    R_coeffs: np.ndarray
    PD_coeffs: np.ndarray

    @property
    def n0(self) -> int:
        return self.source.n0

    def P(self, z, nderiv=0):
        vals = _run(z, self.source.b, _p_couplings(self.source), self.n0, nderiv)
        return vals if nderiv else vals[0]

    def R(self, z):
        v = 1.0 - self.P(z) / self.a_product
        return _scalar(v, z)

    def R_derivs(self, z, nderiv=2):
        vals = self.P(z, nderiv)
        out = [1.0 - vals[0] / self.a_product] + [-v / self.a_product for v in vals[1:]]
        return out

    def PD(self, z):
        if self.n0 == 1:
            return _scalar(np.ones_like(np.asarray(z, dtype=complex)), z)
        return eval_PD(self.source, z, self.n0 - 1)

    def phi(self, z):
        return _scalar(-self.a_product / np.asarray(self.PD(z)), z)

    def psi(self, z):
        return _scalar(np.asarray(self.phi(z)) * np.asarray(self.R(z)), z)

    @cached_property
    def exceptional(self) -> SpectrumMultiset:
        return exceptional_set(self)

    @cached_property
    def critical(self) -> np.ndarray:
        return critical_points(self)


def decimation_data(csj: CentrosymmetricJacobi) -> DecimationData:
    if csj.structural_zero:
        raise ValueError("the identity CSJ has no decimation function")
    A = csj.a_product()
    P = _poly_coeffs(csj.b, _p_couplings(csj), csj.n0)
    R = -P / A
    R[0] += 1.0
    if csj.n0 >= 2:
        PD = _poly_coeffs(csj.b[1:], _pd_couplings(csj), csj.n0 - 1)
    else:
        PD = np.array([1.0])
    return DecimationData(csj, A, P, R, PD)


def chebyshev_R(k0: int, z):
    """``1 - (-1)^k0 T_k0(z - 1)`` via the Chebyshev three-term recurrence."""
    if k0 < 1:
        raise ValueError("k0 must be >= 1")
    x = np.asarray(z, dtype=complex) - 1.0
    prev, cur = np.ones_like(x), x
    for _ in range(2, k0 + 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return _scalar(1.0 - (-1) ** k0 * cur, z)


def _newton_polish(dd: DecimationData, roots: np.ndarray, target: np.ndarray, steps: int = 6) -> np.ndarray:
    """Newton on ``R(z) - target`` with recurrence evaluation; a step is kept only if it helps."""
    z = roots.copy()
    for _ in range(steps):
        val, der = dd.R_derivs(z, 1)
        g = val - target
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(der != 0, g / der, 0.0)
        cand = z - step
        gc = dd.R(cand) - target
        better = np.abs(gc) < np.abs(g)
        if not better.any():
            break
        z = np.where(better, cand, z)
    return z


def _snap_clusters(dd: DecimationData, z: np.ndarray, lam: complex) -> np.ndarray:
    """Replace clusters of nearly equal roots by the critical point they straddle."""
    n = len(z)
    if n < 2 or len(dd.critical) == 0:
        return z
    order = np.argsort(z.real)
    z = z[order]
    groups, cur = [], [0]
    for i in range(1, n):
        if abs(z[i] - z[cur[-1]]) <= CLUSTER_RTOL * (1.0 + abs(z[i])):
            cur.append(i)
        else:
            groups.append(cur)
            cur = [i]
    groups.append(cur)
    out = z.copy()
    scale = max(1.0, abs(lam))
    for g in groups:
        if len(g) < 2:
            continue
        centre = z[g].mean()
        zc = dd.critical[np.argmin(np.abs(dd.critical - centre))]
        if abs(zc - centre) > CLUSTER_RTOL * (1.0 + abs(centre)) * 10:
            continue
        if abs(dd.R(zc) - lam) <= CRITICAL_SNAP_RTOL * scale:
            out[g] = zc
    return out


def _preimages_batch(dd: DecimationData, lams: np.ndarray) -> np.ndarray:
    lams = np.asarray(lams, dtype=complex).ravel()
    n0 = dd.n0
    # P_n0(z) - (1 - lam) * prod(a) = 0, monic of degree n0
    rows = np.tile(dd.P_coeffs.astype(complex), (len(lams), 1))
    rows[:, 0] -= (1.0 - lams) * dd.a_product
    if np.all(np.abs(rows.imag) == 0):
        roots = companion_roots(rows.real)
    else:
        roots = np.stack([np.roots(r[::-1]) for r in rows]).astype(complex)
    roots = roots.reshape(len(lams), n0)
    polished = _newton_polish(dd, roots, lams[:, None])
    # Newton must not merge neighbouring simple roots; fall back where it moved too far
    moved = np.abs(polished - roots)
    spacing = np.full_like(moved, np.inf)
    if n0 >= 2:
        for i in range(n0):
            others = np.delete(roots, i, axis=1)
            spacing[:, i] = np.min(np.abs(others - roots[:, i : i + 1]), axis=1)
    polished = np.where(moved < 0.5 * spacing, polished, roots)
    out = np.empty_like(polished)
    for r in range(len(lams)):
        out[r] = _snap_clusters(dd, polished[r], lams[r])
    return out


def preimages(dd: DecimationData, lam, real: bool = False) -> np.ndarray:
    """All ``n0`` solutions of ``R(z) = lam`` with multiplicity, sorted.

    With ``real=True`` the imaginary parts are required to be below
    ``REAL_PROJECTION_TOL`` and are then dropped.
    """
    roots = _preimages_batch(dd, np.array([lam]))[0]
    return _finish(roots, lam, real)


def preimages_many(dd: DecimationData, lams, real: bool = False) -> np.ndarray:
    """Row ``i`` holds the sorted preimages of ``lams[i]``."""
    lams = np.asarray(lams)
    if lams.size == 0:
        return np.zeros((0, dd.n0), dtype=float if real else complex)
    roots = _preimages_batch(dd, lams)
    return np.stack([_finish(r, l, real) for r, l in zip(roots, lams)])


def _finish(roots, lam, real):
    if real:
        worst = np.max(np.abs(roots.imag)) if len(roots) else 0.0
        if worst > REAL_PROJECTION_TOL:
            raise PreimageError(f"preimages of {lam} are not real (|Im| = {worst:.3e})")
        return np.sort(roots.real)
    return roots[np.lexsort((roots.imag, roots.real))]


def critical_points(dd: DecimationData) -> np.ndarray:
    """Roots of ``R'`` (companion matrix, then Newton on ``R'``)."""
    if dd.n0 < 2:
        return np.zeros(0, dtype=complex)
    dP = npoly.polyder(dd.P_coeffs)
    monic = dP / dP[-1]
    z = companion_roots(monic)[0]
    for _ in range(6):
        _, d1, d2 = dd.R_derivs(z, 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(d2 != 0, d1 / d2, 0.0)
        cand = z - step
        better = np.abs(dd.R_derivs(cand, 1)[1]) < np.abs(d1)
        if not better.any():
            break
        z = np.where(better, cand, z)
    return z[np.lexsort((z.imag, z.real))]


def exceptional_set(dd: DecimationData) -> SpectrumMultiset:
    """Spectrum of the interior block ``J_cs^D`` (empty for ``n0 = 1``)."""
    if dd.n0 < 2:
        return SpectrumMultiset.from_values([])
    JD = dd.source.interior()
    try:
        return eigenvalues(JD)
    except NotSymmetrizableError:
        log.debug("interior block not symmetrizable; using roots of P^D")
        roots = companion_roots(dd.PD_coeffs / dd.PD_coeffs[-1])[0]
        vals = [complex(r) if abs(r.imag) > REAL_PROJECTION_TOL else float(r.real) for r in roots]
        return SpectrumMultiset.from_values(vals)


def exceptional_points(dd: DecimationData) -> np.ndarray:
    return dd.exceptional.expanded().astype(complex)


def verify_det_identity(csj: CentrosymmetricJacobi, z, dd: DecimationData | None = None) -> float:
    """Residual of ``det(zI-J) det(zI-J^D) = (prod a)^2 R (R - 2)``.

    Relative to the larger side, or absolute when both sides vanish (below 1e-10).
    """
    if csj.n0 < 2:
        raise ValueError("the determinant identity needs n0 >= 2")
    dd = dd or decimation_data(csj)
    z = complex(z)
    J = csj.materialize()
    n = J.shape[0]
    lhs = np.linalg.det(z * np.eye(n) - J) * np.linalg.det(z * np.eye(n - 2) - J[1:-1, 1:-1])
    R = dd.R(z)
    rhs = dd.a_product**2 * R * (R - 2.0)
    denom = max(abs(lhs), abs(rhs))
    return float(abs(lhs - rhs) / denom) if denom > 1e-10 else float(abs(lhs - rhs))
