"""Seed Laplacians of the small path families and their closed-form spectra."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .operators import CentrosymmetricJacobi, OperatorError, new_csj

FAMILIES = ("k0-3", "k0-4", "k0-5")
GAP_P1 = 2.0 / 3.0


def seed_from_probabilities(probs) -> CentrosymmetricJacobi:
    """Seed ``I - P`` on the path 0..k0 where ``probs[k-1]`` is the chance to step right from k.

    The end vertices step inward with probability one.
    """
    probs = [float(p) for p in probs]
    for p in probs:
        if not 0.0 < p < 1.0:
            raise OperatorError(f"transition probability {p} outside (0, 1)")
    return new_csj([-1.0] + [-p for p in probs], [1.0] * (len(probs) + 2))


def standard(k0: int) -> CentrosymmetricJacobi:
    """Simple random walk Laplacian on the (k0+1)-point path."""
    if k0 < 1:
        raise OperatorError("k0 must be positive")
    return seed_from_probabilities([0.5] * (k0 - 1))


def pq_model(p: float) -> CentrosymmetricJacobi:
    return seed_from_probabilities([p, 1.0 - p])


def k0_4(p: float) -> CentrosymmetricJacobi:
    return seed_from_probabilities([p, 0.5, 1.0 - p])


def k0_5(p1: float, p2: float) -> CentrosymmetricJacobi:
    return seed_from_probabilities([p1, p2, 1.0 - p2, 1.0 - p1])


def family_seed(family: str, p=None, p1=None, p2=None) -> CentrosymmetricJacobi:
    if family == "k0-3":
        return pq_model(_need(p, "p"))
    if family == "k0-4":
        return k0_4(_need(p, "p"))
    if family == "k0-5":
        return k0_5(_need(p1, "p1"), _need(p2, "p2"))
    raise OperatorError(f"unknown family {family!r}")


def _need(v, name):
    if v is None:
        raise OperatorError(f"parameter {name} is required")
    return float(v)


def k0_4_spectrum(p: float) -> np.ndarray:
    s = math.sqrt(1.0 - p)
    return np.array([0.0, 1.0 - s, 1.0, 1.0 + s, 2.0])


def k0_4_dirichlet(p: float) -> np.ndarray:
    s = math.sqrt(p)
    return np.array([1.0 - s, 1.0, 1.0 + s])


def k0_4_R(p: float, z):
    return 2.0 * z * (2.0 - z) * (z - 1.0) ** 2 / (p * (1.0 - p))


def k0_4_preimages_of_two(p: float) -> np.ndarray:
    a, b = math.sqrt(1.0 - p), math.sqrt(p)
    return np.sort([1.0 - a, 1.0 - b, 1.0 + b, 1.0 + a])


def k0_5_spectrum(p2: float) -> np.ndarray:
    """Eigenvalues at ``p1 = 2/3`` as functions of ``p2``, in formula order."""
    r = math.sqrt(9 * p2**2 - 6 * p2 + 9) / 6
    return np.array([0.0, (1 + p2) / 2 - r, (1 + p2) / 2 + r, (3 - p2) / 2 - r, (3 - p2) / 2 + r, 2.0])


def k0_5_dirichlet(p2: float) -> np.ndarray:
    r = math.sqrt(9 * p2**2 - 24 * p2 + 24) / 6
    return np.array([(2 - p2) / 2 - r, (2 - p2) / 2 + r, (2 + p2) / 2 - r, (2 + p2) / 2 + r])


@dataclass(frozen=True)
class GapClosure:
    p2: float
    eigenvalue: float
    bracket: tuple[float, float]
    iterations: int


def gap_closure(xtol: float = 1e-13, grid: int = 199) -> GapClosure:
    """Value of ``p2`` where the lowest Dirichlet eigenvalue meets ``lambda_2`` (``p1 = 2/3``).

    A sign change of ``lambda^D_1 - lambda_2`` is bracketed on an open grid
    over (0, 1) and refined by bisection.
    """

    def gap(p2):
        return k0_5_dirichlet(p2)[0] - k0_5_spectrum(p2)[1]

    ps = np.linspace(0.0, 1.0, grid + 2)[1:-1]
    vals = [gap(p) for p in ps]
    for lo, hi, flo, fhi in zip(ps[:-1], ps[1:], vals[:-1], vals[1:]):
        if flo == 0.0:
            return GapClosure(float(lo), float(k0_5_spectrum(lo)[1]), (float(lo), float(lo)), 0)
        if flo * fhi < 0:
            root, res = bisect(gap, lo, hi, xtol=xtol, full_output=True)
            return GapClosure(float(root), float(k0_5_spectrum(root)[1]), (float(lo), float(hi)), res.iterations)
    raise ArithmeticError("no gap closure found in (0, 1)")
