"""Self-similar path Laplacians and their spectra by decimation and by direct solve."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .decimation import DecimationData, decimation_data, preimages_many
from .eigen import eigenvalues, tql_eigenvalues
from .multiset import SpectrumMultiset, compare_spectra
from .operators import (
    CentrosymmetricJacobi,
    OperatorError,
    PiecewiseJacobi,
    ProbabilisticLaplacian,
    laplacian_from_csj,
    new_csj,
    substitute_operator,
)

__all__ = [
    "DimensionCountError",
    "InclusionReport",
    "SelfSimilarSequence",
    "SpectrumMultiset",
    "compare_spectra",
    "decimated_spectrum_path",
    "dense_spectrum_path",
    "eigenvalues",
    "self_similar",
    "self_similar_csj",
    "spectrum_inclusion_report",
]

ENDPOINT_TOL = 1e-12
INCLUSION_TOL = 1e-8


class DimensionCountError(RuntimeError):
    """A decimated level does not have ``k0^m + 1`` eigenvalues."""


@dataclass(frozen=True)
class SelfSimilarSequence:
    seed: CentrosymmetricJacobi
    level: int
    realized: PiecewiseJacobi

    @property
    def k0(self) -> int:
        return self.seed.n0

    @property
    def size(self) -> int:
        return self.realized.size


def _check_seed(seed: CentrosymmetricJacobi) -> ProbabilisticLaplacian:
    if not isinstance(seed, CentrosymmetricJacobi):
        raise OperatorError("seed must be a centrosymmetric Jacobi matrix")
    return laplacian_from_csj(seed)


def self_similar(seed: CentrosymmetricJacobi, level: int) -> SelfSimilarSequence:
    """``Delta^(level)``, built by substituting the current level into the seed's path."""
    if level < 1:
        raise ValueError("level must be >= 1")
    model = _check_seed(seed)
    # level 1 is the seed substituted into the one-edge path, which is the seed itself
    realized = substitute_operator(laplacian_from_csj(new_csj([-1.0], [1.0, 1.0])), seed)
    cur = seed
    for _ in range(level - 1):
        realized = substitute_operator(model, cur)
        cur = realized.as_csj()
    return SelfSimilarSequence(seed, level, realized)


def self_similar_csj(seed: CentrosymmetricJacobi, level: int) -> CentrosymmetricJacobi:
    """Same operator as ``self_similar(seed, level)`` in path order, without dense matrices."""
    if level < 1:
        raise ValueError("level must be >= 1")
    _check_seed(seed)
    k0 = seed.n0
    right = [-seed.a[k] for k in range(k0)]  # p(k, k+1)
    left = [-seed.a[k0 - 1 - k] for k in range(k0)]  # p(k+1, k)
    up = np.array(seed.a)  # J[i, i+1]
    down = up[::-1].copy()  # J[i+1, i]
    diag = np.array(seed.b)
    for _ in range(level - 1):
        n0 = len(up)
        ups, downs, diags = [], [], []
        for k in range(k0):
            u, d = up.copy(), down.copy()
            u[0] *= right[k]
            d[-1] *= left[k]
            ups.append(u)
            downs.append(d)
            diags.append(diag[:n0])
        diags.append(diag[-1:])
        up, down, diag = np.concatenate(ups), np.concatenate(downs), np.concatenate(diags)
    if np.max(np.abs(down - up[::-1])) > 1e-12:
        raise OperatorError("substituted path lost centrosymmetry")
    return new_csj(up.tolist(), diag.tolist())


def dense_spectrum_path(seed: CentrosymmetricJacobi, level: int) -> SpectrumMultiset:
    """``sigma(Delta^(level))`` by symmetrizing the path operator and running QL."""
    csj = self_similar_csj(seed, level)
    up = np.array(csj.a)
    # symmetric tridiagonal form: off-diagonal sqrt(J[i,i+1] J[i+1,i])
    off = np.sqrt(up * up[::-1])
    vals = tql_eigenvalues(csj.b, off)
    return SpectrumMultiset.from_values(vals.tolist())


def _level_one(seed: CentrosymmetricJacobi) -> list[float]:
    vals = eigenvalues(seed.materialize()).expanded().tolist()
    out = []
    for v in vals:
        if abs(v) <= ENDPOINT_TOL:
            v = 0.0
        elif abs(v - 2.0) <= ENDPOINT_TOL:
            v = 2.0
        out.append(float(v))
    if out.count(0.0) != 1 or out.count(2.0) != 1:
        raise DimensionCountError("seed spectrum must contain 0 and 2 exactly once")
    return out


def decimated_spectrum_path(
    seed: CentrosymmetricJacobi, level: int, dd: DecimationData | None = None
) -> SpectrumMultiset:
    """``sigma(Delta^(level))`` by iterating preimages under the seed's decimation function.

    Each level keeps the seed spectrum and adds the preimages of every
    eigenvalue of the previous level other than 0 and 2.
    """
    if level < 1:
        raise ValueError("level must be >= 1")
    _check_seed(seed)
    dd = dd or decimation_data(seed)
    k0 = seed.n0
    base = _level_one(seed)
    base_tags = ["inherited-sigma(J_cs)"] * len(base)
    vals, tags = list(base), list(base_tags)
    for m in range(2, level + 1):
        interior = [v for v in vals if v != 0.0 and v != 2.0]
        if len(interior) != len(vals) - 2:
            raise DimensionCountError(f"level {m - 1}: 0 and 2 are not simple eigenvalues")
        pre = preimages_many(dd, np.array(interior), real=True)
        vals = pre.ravel().tolist() + base
        tags = [
            f"preimage-of({lam!r}, branch {j})" for lam in interior for j in range(k0)
        ] + base_tags
        if len(vals) != k0**m + 1:
            raise DimensionCountError(f"level {m}: {len(vals)} eigenvalues, expected {k0**m + 1}")
    return SpectrumMultiset.from_values(vals, tags)


@dataclass
class InclusionReport:
    sigma_J: SpectrumMultiset
    sigma_p: SpectrumMultiset
    lower: np.ndarray
    upper: np.ndarray
    lower_missing: list = field(default_factory=list)
    upper_violations: list = field(default_factory=list)
    exceptional_hits: list = field(default_factory=list)
    tol: float = INCLUSION_TOL

    @property
    def ok(self) -> bool:
        return not self.lower_missing and not self.upper_violations

    def to_json(self) -> dict:
        return {
            "sigma_J": self.sigma_J.to_json(),
            "sigma_p": self.sigma_p.to_json(),
            "lower_size": int(len(self.lower)),
            "upper_size": int(len(self.upper)),
            "lower_missing": [float(v) for v in self.lower_missing],
            "upper_violations": [float(v) for v in self.upper_violations],
            "exceptional_hits": [float(v) for v in self.exceptional_hits],
            "ok": self.ok,
        }


def _near(x: float, pts: np.ndarray, tol: float) -> bool:
    return len(pts) > 0 and float(np.min(np.abs(pts - x))) <= tol * (1.0 + abs(x))


def spectrum_inclusion_report(
    J: PiecewiseJacobi, lap: ProbabilisticLaplacian, dd: DecimationData, tol: float = INCLUSION_TOL
) -> InclusionReport:
    """Check ``R^-1(sigma(Delta_p) minus {0,2})`` within ``sigma(J)`` within ``R^-1(sigma(Delta_p) and {0,2})``."""
    sJ = eigenvalues(J.matrix)
    sp = eigenvalues(lap.matrix)
    inner = [float(v) for v in sp.values if abs(v) > tol and abs(v - 2.0) > tol]
    lower = preimages_many(dd, np.array(inner), real=True).ravel()
    edge = preimages_many(dd, np.array([0.0, 2.0]), real=True).ravel()
    upper = np.concatenate([lower, edge])
    missing = [float(v) for v in lower if not _near(v, sJ.values, tol)]
    violations = [float(v) for v in sJ.values if not _near(v, upper, tol)]
    hits = [float(v) for v in sJ.values if _near(v, edge, tol)]
    return InclusionReport(sJ, sp, np.sort(lower), np.sort(upper), missing, violations, hits, tol)
