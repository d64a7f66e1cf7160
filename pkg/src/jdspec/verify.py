"""Seeded randomized checks of the recurrence, determinant, Schur and spectral identities."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import families
from .decimation import (
    DecimationData,
    companion_roots,
    critical_points,
    decimation_data,
    eval_P,
    eval_PD,
    exceptional_points,
    verify_det_identity,
)
from .eigen import eigenvalues
from .graphs import DirectedWeightedGraph, sierpinski_model_graph
from .multiset import compare_spectra
from .operators import (
    CentrosymmetricJacobi,
    NotSymmetrizableError,
    kolmogorov_measure,
    laplacian_from_csj,
    laplacian_from_graph,
    new_csj,
    substitute_operator,
    symmetrize,
)
from .schur import (
    decompose,
    schur_complement,
    verify_eigenvector_lifting,
    verify_renormalization,
    verify_spectral_similarity,
)
from .spectra import decimated_spectrum_path, self_similar

SUITES = (
    "recurrences",
    "det-identity",
    "schur-identity",
    "similarity",
    "renormalization",
    "oracle",
    "critical-points",
    "measure",
)
IDENTITY_TOL = 1e-8
Z_PER_INSTANCE = 20
DIRICHLET_GAP = 1e-3
CRITICAL_TOL = 1e-9


@dataclass
class CheckResult:
    name: str
    max_residual: float
    tol: float
    count: int
    note: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.tol)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        note = f"  ({self.note})" if self.note else ""
        return f"{status}  {self.name:<44} max={self.max_residual:.3e}  tol={self.tol:.0e}  n={self.count}{note}"


# -- populations ------------------------------------------------------------


def random_csj(rng: np.random.Generator, n0_max: int = 8, mixed_signs: bool = False) -> CentrosymmetricJacobi:
    """Random CSJ with ``|a(i)|`` in [0.1, 2] and palindromic ``b`` in [-1, 1].

    Unless ``mixed_signs`` is set, ``a(i)`` and ``a(n0+1-i)`` share a sign,
    so every product ``a(i) a(n0+1-i)`` is positive and the matrix is a
    symmetrizable Jacobi matrix.
    """
    n0 = int(rng.integers(2, n0_max + 1))
    mags = rng.uniform(0.1, 2.0, n0)
    if mixed_signs:
        signs = rng.choice([-1.0, 1.0], n0)
    else:
        signs = np.empty(n0)
        for i in range((n0 + 1) // 2):
            signs[i] = signs[n0 - 1 - i] = rng.choice([-1.0, 1.0])
    half = rng.uniform(-1.0, 1.0, n0 // 2 + 1)
    b = [half[min(k, n0 - k)] for k in range(n0 + 1)]
    return new_csj((signs * mags).tolist(), b)


def csj_population(seed: int, samples: int, mixed_signs: bool = False) -> list[CentrosymmetricJacobi]:
    rng = np.random.default_rng(seed)
    return [random_csj(rng, mixed_signs=mixed_signs) for _ in range(samples)]


def random_z(rng: np.random.Generator, count: int, re=(-4.0, 4.0), im=1.0) -> np.ndarray:
    """Half real points, half complex points with ``0.05 <= |Im z| <= im``."""
    x = rng.uniform(re[0], re[1], count)
    y = rng.uniform(0.05, im, count) * rng.choice([-1.0, 1.0], count)
    y[: count // 2] = 0.0
    return x + 1j * y


def admissible_z(rng, count, avoid: np.ndarray, gap: float, **kw) -> np.ndarray:
    out = []
    while len(out) < count:
        for z in random_z(rng, count, **kw):
            if len(avoid) == 0 or np.min(np.abs(avoid - z)) >= gap:
                out.append(z)
    return np.array(out[:count])


def oracle_instances() -> list[tuple[str, CentrosymmetricJacobi]]:
    """Seeds covering k0 = 2, 3, 4 used by the oracle, renormalization and lifting checks."""
    return [
        ("k0-2 standard", families.standard(2)),
        ("k0-3 pq p=0.4", families.pq_model(0.4)),
        ("k0-3 pq p=0.5", families.pq_model(0.5)),
        ("k0-4 p=0.3", families.k0_4(0.3)),
        ("k0-4 p=0.5", families.k0_4(0.5)),
        ("k0-4 p=0.75", families.k0_4(0.75)),
    ]


def similarity_instances():
    for level in range(3):
        lap = laplacian_from_graph(sierpinski_model_graph(level))
        for name, csj in (("3x3 standard", families.standard(2)), ("k0-4 p=0.3", families.k0_4(0.3))):
            yield f"sierpinski-{level} / {name}", lap, csj


def level_two(seed: CentrosymmetricJacobi):
    """``(J, Delta_p, dd)`` with J the level-two operator over the seed's own path."""
    J = self_similar(seed, 2).realized
    return J, laplacian_from_csj(seed), decimation_data(seed)


# -- individual identities -------------------------------------------------


def _rel(a, b) -> float:
    d = max(abs(a), abs(b))
    return abs(a - b) / d if d > 1e-10 else abs(a - b)


def recurrence_residuals(csj: CentrosymmetricJacobi, z: complex) -> tuple[float, float, float]:
    """Residuals of the determinant forms of ``P_{n0+1}``, ``P^D_{n0-1}`` and the product identity
    ``P^D_{n0-1} P_{n0-1} - P^D_{n0-2} P_{n0} = a(n0) a(1) (a(2)...a(n0-1))^2``."""
    n0 = csj.n0
    J = csj.materialize()
    n = n0 + 1
    full = _rel(eval_P(csj, z, n0 + 1), np.linalg.det(z * np.eye(n) - J))
    dir_ = _rel(eval_PD(csj, z, n0 - 1), np.linalg.det(z * np.eye(n - 2) - J[1:-1, 1:-1]))
    lhs = eval_PD(csj, z, n0 - 1) * eval_P(csj, z, n0 - 1) - eval_PD(csj, z, n0 - 2) * eval_P(csj, z, n0)
    inner = np.prod(csj.a[1:-1]) if n0 > 2 else 1.0
    rhs = csj.a[-1] * csj.a[0] * inner**2
    # cancellation in the left side scales with the size of its terms
    scale = max(abs(eval_PD(csj, z, n0 - 1) * eval_P(csj, z, n0 - 1)), abs(rhs), 1.0)
    return full, dir_, abs(lhs - rhs) / scale


def schur_residual(csj: CentrosymmetricJacobi, dd: DecimationData, z: complex) -> float:
    """Entrywise residual of the boundary Schur complement against ``phi (R I - Delta_0)``."""
    bd = decompose(csj.materialize(), [0, csj.n0])
    sc = schur_complement(bd, z, exceptional_points(dd))
    d0 = np.array([[1.0, -1.0], [-1.0, 1.0]])
    rhs = dd.phi(z) * (dd.R(z) * np.eye(2) - d0)
    return float(np.max(np.abs(sc - rhs)))


def simple_real_roots(coeffs: np.ndarray, tol: float = 1e-8) -> bool:
    roots = companion_roots(coeffs / coeffs[-1])[0]
    scale = max(1.0, float(np.max(np.abs(roots))))
    if np.max(np.abs(roots.imag)) > tol * scale:
        return False
    r = np.sort(roots.real)
    return bool(np.all(np.diff(r) > tol * scale))


def critical_value_excess(dd: DecimationData) -> float:
    """How far the worst real critical value reaches into ``(CRITICAL_TOL, 2 - CRITICAL_TOL)``."""
    worst = 0.0
    for zc in critical_points(dd):
        scale = max(1.0, abs(zc))
        if abs(zc.imag) > 1e-8 * scale:
            continue
        v = float(np.real(dd.R(zc.real)))
        depth = min(v, 2.0 - v)
        worst = max(worst, depth)
    return worst


# -- suites ----------------------------------------------------------------


def suite_recurrences(samples: int, seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    worst = [0.0, 0.0, 0.0]
    count = 0
    for csj in csj_population(seed, samples):
        for z in random_z(rng, Z_PER_INSTANCE):
            for i, r in enumerate(recurrence_residuals(csj, z)):
                worst[i] = max(worst[i], r)
            count += 1
    return [
        CheckResult("P_{n0+1} equals det(zI - J_cs)", worst[0], IDENTITY_TOL, count),
        CheckResult("P^D_{n0-1} equals det(zI - J^D)", worst[1], IDENTITY_TOL, count),
        CheckResult("P^D P - P^D P product identity", worst[2], IDENTITY_TOL, count),
    ]


def suite_det_identity(samples: int, seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed + 1)
    worst, count = 0.0, 0
    for csj in csj_population(seed, samples):
        dd = decimation_data(csj)
        for z in random_z(rng, Z_PER_INSTANCE):
            worst = max(worst, verify_det_identity(csj, z, dd))
            count += 1
    return [CheckResult("det(zI-J) det(zI-J^D) = A^2 R (R-2)", worst, IDENTITY_TOL, count)]


def suite_schur_identity(samples: int, seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed + 2)
    worst, count = 0.0, 0
    for csj in csj_population(seed, samples):
        dd = decimation_data(csj)
        for z in admissible_z(rng, Z_PER_INSTANCE, exceptional_points(dd), DIRICHLET_GAP):
            worst = max(worst, schur_residual(csj, dd, z))
            count += 1
    return [CheckResult("Schur(J_cs) = phi (R I - Delta_0)", worst, IDENTITY_TOL, count)]


def suite_similarity(samples: int, seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed + 3)
    out = []
    for name, lap, csj in similarity_instances():
        J = substitute_operator(lap, csj)
        dd = decimation_data(csj)
        worst = 0.0
        zs = admissible_z(rng, Z_PER_INSTANCE, exceptional_points(dd), DIRICHLET_GAP, re=(-0.5, 2.5))
        for z in zs:
            worst = max(worst, verify_spectral_similarity(J, lap, dd, z))
        out.append(CheckResult(f"similarity {name}", worst, IDENTITY_TOL, len(zs)))
    return out


def suite_renormalization(samples: int, seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed + 4)
    out = []
    for name, s in oracle_instances():
        J, lap, dd = level_two(s)
        sigma = eigenvalues(J.matrix).values.astype(complex)
        avoid = np.concatenate([sigma, exceptional_points(dd)])
        worst = 0.0
        zs = admissible_z(rng, Z_PER_INSTANCE, avoid, DIRICHLET_GAP, re=(-0.5, 2.5))
        zs = zs.real + 1j * np.where(zs.imag == 0, 0.1, zs.imag)
        for z in zs:
            worst = max(worst, verify_renormalization(J, lap, dd, z, spectrum=sigma))
        out.append(CheckResult(f"renormalization {name}", worst, IDENTITY_TOL, len(zs)))
    for name, s in oracle_instances():
        J, lap, dd = level_two(s)
        worst, n = verify_eigenvector_lifting(J, lap, dd)
        out.append(CheckResult(f"eigenvector lifting {name}", worst, IDENTITY_TOL, n))
    return out


def suite_oracle(samples: int, seed: int) -> list[CheckResult]:
    out = []
    for name, s in oracle_instances():
        worst, bad = 0.0, []
        for level in range(1, 5):
            dec = decimated_spectrum_path(s, level)
            dense = eigenvalues(self_similar(s, level).realized.matrix)
            rep = compare_spectra(dec, dense)
            d = rep.max_distance if rep.ok else np.inf
            worst = max(worst, d)
            if dec.total != s.n0**level + 1 or dense.total != s.n0**level + 1:
                bad.append(level)
        worst = np.inf if bad else worst
        note = f"dimension count fails at levels {bad}" if bad else "levels 1-4"
        out.append(CheckResult(f"decimated vs dense {name}", worst, IDENTITY_TOL, 4, note))
    return out


def suite_critical_points(samples: int, seed: int) -> list[CheckResult]:
    worst, used, skipped = 0.0, 0, 0
    for csj in csj_population(seed, samples):
        dd = decimation_data(csj)
        if not simple_real_roots(dd.P_coeffs):
            skipped += 1
            continue
        worst = max(worst, critical_value_excess(dd))
        used += 1
    note = f"{skipped} instances without n0 simple real roots skipped"
    return [CheckResult("critical values outside (0, 2)", worst, CRITICAL_TOL, used, note)]


def _measure_residual(M: np.ndarray) -> tuple[float, float]:
    """Detailed-balance residual and spectrum agreement of the symmetrized matrix."""
    pi = kolmogorov_measure(M)
    flux = pi.values[:, None] * M
    bal = float(np.max(np.abs(flux - flux.T)) / np.max(np.abs(flux)))
    ours = np.sort(eigenvalues(symmetrize(M, pi)).expanded())
    ref = np.sort(np.linalg.eigvals(M).real)
    return bal, float(np.max(np.abs(ours - ref)))


def suite_measure(samples: int, seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed + 7)
    bal, spec, count = 0.0, 0.0, 0
    mats = [laplacian_from_graph(sierpinski_model_graph(lv)).matrix for lv in range(3)]
    for p in rng.uniform(0.05, 0.95, max(samples // 10, 3)):
        mats.append(self_similar(families.k0_4(float(p)), 2).realized.matrix)
    for csj in csj_population(seed, samples):
        mats.append(csj.materialize())
    for M in mats:
        b, s = _measure_residual(M)
        bal, spec = max(bal, b), max(spec, s)
        count += 1
    cyc = DirectedWeightedGraph(3, ((0, 1, 0.7), (1, 2, 0.7), (2, 0, 0.7), (0, 2, 0.3), (2, 1, 0.3), (1, 0, 0.3)))
    try:
        kolmogorov_measure(laplacian_from_graph(cyc).matrix)
        rejected = np.inf
    except NotSymmetrizableError:
        rejected = 0.0
    return [
        CheckResult("detailed balance of computed measure", bal, IDENTITY_TOL, count),
        CheckResult("symmetrized spectrum matches input", spec, IDENTITY_TOL, count),
        CheckResult("non-reversible 3-cycle rejected", rejected, 0.0, 1),
    ]


SUITE_FUNCS: dict[str, Callable[[int, int], list[CheckResult]]] = {
    "recurrences": suite_recurrences,
    "det-identity": suite_det_identity,
    "schur-identity": suite_schur_identity,
    "similarity": suite_similarity,
    "renormalization": suite_renormalization,
    "oracle": suite_oracle,
    "critical-points": suite_critical_points,
    "measure": suite_measure,
}


def run_suite(name: str, samples: int = 50, seed: int = 0) -> list[CheckResult]:
    if name == "all":
        out = []
        for s in SUITES:
            out.extend(run_suite(s, samples, seed))
        return out
    if name not in SUITE_FUNCS:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    return [_tag(name, r) for r in SUITE_FUNCS[name](samples, seed)]


def _tag(suite: str, r: CheckResult) -> CheckResult:
    r.name = f"[{suite}] {r.name}"
    return r
