import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jdspec import families
from jdspec.decimation import (
    balance,
    chebyshev_R,
    companion_roots,
    critical_points,
    decimation_data,
    eval_P,
    eval_PD,
    exceptional_set,
    preimages,
    preimages_many,
    verify_det_identity,
)
from jdspec.eigen import eigenvalues
from jdspec.operators import delta0, new_csj
from jdspec.verify import critical_value_excess, random_csj, simple_real_roots

STD3 = families.standard(2)


def random_jacobi(seed):
    return random_csj(np.random.default_rng(seed))


def test_eval_P_examples():
    assert eval_P(delta0(), 0.0, 1) == -1
    for z in (0.3, 1.7 + 0.2j, -2.0):
        assert abs(eval_P(STD3, z, 2) - ((z - 1) ** 2 - 0.5)) < 1e-14
    with pytest.raises(ValueError):
        eval_P(STD3, 0.0, 4)


def test_eval_PD_examples():
    for z in (0.3, 2.2):
        assert abs(eval_PD(STD3, z, 1) - (z - 1)) < 1e-15
    p = 0.3
    c = families.k0_4(p)
    for r in (1 - math.sqrt(p), 1.0, 1 + math.sqrt(p)):
        assert abs(eval_PD(c, r, 3)) < 1e-14
    assert eval_PD(delta0(), 0.7, 0) == 1
    with pytest.raises(ValueError):
        eval_PD(STD3, 0.0, 2)


@pytest.mark.parametrize("seed", range(10))
def test_recurrences_match_determinants(seed):
    c = random_jacobi(seed)
    rng = np.random.default_rng(100 + seed)
    J = c.materialize()
    n = c.size
    for z in rng.uniform(-3, 3, 20) + 1j * rng.uniform(-1, 1, 20):
        full = np.linalg.det(z * np.eye(n) - J)
        dirichlet = np.linalg.det(z * np.eye(n - 2) - J[1:-1, 1:-1])
        assert abs(eval_P(c, z, n) - full) <= 1e-10 * abs(full)
        assert abs(eval_PD(c, z, c.n0 - 1) - dirichlet) <= 1e-10 * abs(dirichlet)


def test_decimation_data_delta0():
    dd = decimation_data(delta0())
    for z in (0.2, 1.5 + 1j):
        assert abs(dd.R(z) - z) < 1e-15
        assert dd.phi(z) == 1
    assert dd.exceptional.total == 0


def test_decimation_data_standard():
    dd = decimation_data(STD3)
    for z in np.linspace(-1, 3, 9):
        assert abs(dd.R(z) - 2 * z * (2 - z)) < 1e-13
    assert np.allclose(dd.R_coeffs, [0, 4, -2])
    assert dd.R_coeffs[-1] == pytest.approx(-1 / dd.a_product)
    assert np.allclose(dd.exceptional.values, [1.0])


@pytest.mark.parametrize("p", [0.25, 0.5, 0.75])
def test_decimation_data_k0_4(p):
    dd = decimation_data(families.k0_4(p))
    for z in np.linspace(-1, 3, 17):
        R = dd.R(z)
        assert abs(R - families.k0_4_R(p, z)) <= 1e-12 * (1 + abs(R))
    assert np.allclose(dd.exceptional.expanded(), families.k0_4_dirichlet(p), atol=1e-12)


def test_psi_is_phi_times_R():
    dd = decimation_data(families.k0_4(0.3))
    z = 0.4 + 0.3j
    assert dd.psi(z) == pytest.approx(dd.phi(z) * dd.R(z))


def test_chebyshev_examples():
    for z in (0.1, 1.3, 2.7):
        assert chebyshev_R(2, z) == pytest.approx(2 * z * (2 - z))
        assert chebyshev_R(1, z) == pytest.approx(z)
    assert chebyshev_R(5, 1.0) == pytest.approx(1.0)


@pytest.mark.parametrize("k0", range(1, 9))
def test_standard_laplacians_are_chebyshev(k0):
    dd = decimation_data(families.standard(k0))
    for z in np.random.default_rng(k0).uniform(-1, 3, 25):
        R = dd.R(z)
        assert abs(R - chebyshev_R(k0, z)) <= 1e-9 * max(1, abs(R))


def test_preimage_examples():
    dd = decimation_data(STD3)
    assert np.allclose(preimages(dd, 1.0, real=True), [1 - math.sqrt(2) / 2, 1 + math.sqrt(2) / 2], atol=1e-14)
    for p in (0.2, 0.4, 0.5, 0.6, 0.8):
        dd = decimation_data(families.k0_4(p))
        assert np.max(np.abs(preimages(dd, 0.0, real=True) - [0, 1, 1, 2])) <= 1e-10
        assert np.max(np.abs(preimages(dd, 2.0, real=True) - families.k0_4_preimages_of_two(p))) <= 1e-10


def test_real_projection_refuses_complex_roots():
    from jdspec.decimation import PreimageError

    dd = decimation_data(STD3)
    with pytest.raises(PreimageError):
        preimages(dd, 3.0, real=True)
    assert np.all(np.abs(preimages(dd, 3.0).imag) > 0.1)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.floats(-2.5, 2.5), st.floats(-1, 1))
def test_preimage_round_trip(seed, x, y):
    c = random_jacobi(seed)
    dd = decimation_data(c)
    z0 = complex(x, y)
    pre = preimages(dd, dd.R(z0))
    assert len(pre) == c.n0
    assert np.min(np.abs(pre - z0)) <= 1e-8 * max(1.0, abs(z0))


def test_preimages_many_matches_single():
    dd = decimation_data(families.k0_4(0.3))
    lams = np.linspace(0.05, 1.95, 7)
    many = preimages_many(dd, lams, real=True)
    for lam, row in zip(lams, many):
        assert np.allclose(row, preimages(dd, lam, real=True), atol=1e-14)


def test_critical_point_examples():
    assert np.allclose(critical_points(decimation_data(STD3)), [1.0])
    dd = decimation_data(families.k0_4(0.5))
    zc = critical_points(dd)
    s = 1 / math.sqrt(2)
    assert np.allclose(zc, [1 - s, 1, 1 + s], atol=1e-12)
    assert np.allclose([dd.R(z) for z in zc], [2, 0, 2], atol=1e-12)
    assert len(critical_points(decimation_data(delta0()))) == 0


@pytest.mark.parametrize("seed", range(20))
def test_critical_values_avoid_open_interval(seed):
    dd = decimation_data(random_jacobi(seed))
    assert simple_real_roots(dd.P_coeffs)
    assert critical_value_excess(dd) <= 1e-9


def test_mixed_sign_counterexample_to_critical_exclusion():
    # a(1) a(2) < 0: P_2 still has simple real roots, yet R(z_c) = 1/2
    c = new_csj([1.0, -1.0], [0.0, math.sqrt(6.0), 0.0])
    dd = decimation_data(c)
    assert simple_real_roots(dd.P_coeffs)
    (zc,) = critical_points(dd)
    assert dd.R(zc) == pytest.approx(0.5)
    assert critical_value_excess(dd) == pytest.approx(0.5)


def test_det_identity_examples():
    assert verify_det_identity(STD3, 0.3) <= 1e-12
    for z in eigenvalues(STD3.materialize()).values:
        assert verify_det_identity(STD3, z) <= 1e-10
    with pytest.raises(ValueError):
        verify_det_identity(delta0(), 0.5)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.booleans(), st.floats(-4, 4), st.floats(-1, 1))
def test_det_identity_property(seed, mixed, x, y):
    # the identity is purely algebraic, so it holds for mixed sign patterns too
    c = random_csj(np.random.default_rng(seed), mixed_signs=mixed)
    assert verify_det_identity(c, complex(x, y)) <= 1e-8


def test_exceptional_set_examples():
    assert np.allclose(exceptional_set(decimation_data(STD3)).values, [1.0])
    for p2 in (0.2, 0.5, 0.8):
        dd = decimation_data(families.k0_5(2 / 3, p2))
        got = dd.exceptional.expanded()
        assert np.max(np.abs(got - np.sort(families.k0_5_dirichlet(p2)))) <= 1e-10


def test_exceptional_set_falls_back_for_mixed_signs():
    c = new_csj([1.0, -1.0, 1.0, 0.5], [0.0, 0.3, 0.1, 0.3, 0.0])
    dd = decimation_data(c)
    ref = np.sort_complex(np.linalg.eigvals(c.interior()))
    got = np.sort_complex(dd.exceptional.expanded().astype(complex))
    assert np.allclose(got, ref, atol=1e-10)


@pytest.mark.parametrize("seed", range(15))
def test_root_partition(seed):
    c = random_jacobi(seed)
    dd = decimation_data(c)
    roots = np.sort(np.concatenate([preimages(dd, 0.0).real, preimages(dd, 2.0).real]))
    both = np.sort(np.concatenate([eigenvalues(c.materialize()).expanded(), dd.exceptional.expanded()]))
    assert np.max(np.abs(roots - both)) <= 1e-8 * max(1.0, np.max(np.abs(both)))


@pytest.mark.parametrize("p", [0.3, 0.5])
def test_shared_eigenvalues_are_critical(p):
    c = families.k0_4(p)
    dd = decimation_data(c)
    shared = [z for z in eigenvalues(c.materialize()).values if np.min(np.abs(dd.exceptional.values - z)) < 1e-9]
    assert shared
    for z in shared:
        assert abs(dd.R_derivs(z, 1)[1]) <= 1e-7


def test_balance_preserves_spectrum():
    A = np.array([[1.0, 1e6, 0.0], [1e-6, 2.0, 1e4], [0.0, 1e-4, 3.0]])
    B = balance(A)
    assert np.allclose(np.sort(np.linalg.eigvals(B).real), np.sort(np.linalg.eigvals(A).real))
    assert np.max(np.abs(B)) < np.max(np.abs(A))


def test_companion_roots_batch():
    roots = companion_roots(np.array([[2.0, -3.0, 1.0], [-6.0, 1.0, 1.0]]))
    assert np.allclose(np.sort(roots[0].real), [1, 2])
    assert np.allclose(np.sort(roots[1].real), [-3, 2])
