import numpy as np
import pytest

from jdspec import families
from jdspec.decimation import decimation_data, exceptional_points
from jdspec.graphs import path_model_graph, sierpinski_model_graph
from jdspec.operators import delta0, laplacian_from_csj, laplacian_from_graph, substitute_operator
from jdspec.schur import (
    InadmissibleError,
    decompose,
    lift_eigenvector,
    model_decomposition,
    schur_complement,
    substituted_schur,
    verify_eigenvector_lifting,
    verify_renormalization,
    verify_spectral_similarity,
)
from jdspec.verify import csj_population, schur_residual

STD3 = families.standard(2)


def test_decompose_block_structure():
    c = families.k0_4(0.3)
    bd = decompose(c.materialize(), [0, 4])
    assert np.array_equal(bd.S, np.eye(2))
    assert np.array_equal(bd.Q, c.interior())
    assert np.array_equal(bd.reassemble(), c.materialize())
    assert np.array_equal(bd.inclusion().T @ c.materialize() @ bd.inclusion(), bd.S)
    with pytest.raises(ValueError):
        decompose(c.materialize(), range(5))
    with pytest.raises(ValueError):
        decompose(c.materialize(), [])


def test_model_block_is_diagonal_for_sierpinski():
    lap = laplacian_from_graph(sierpinski_model_graph(1))
    J = substitute_operator(lap, STD3)
    Q = model_decomposition(J).Q
    assert np.array_equal(Q, np.diag(np.diag(Q)))


def test_schur_of_standard_block():
    bd = decompose(STD3.materialize(), [0, 2])
    sc = schur_complement(bd, 3.0)
    assert np.allclose(sc, [[7 / 4, -1 / 4], [-1 / 4, 7 / 4]], atol=1e-15)
    dd = decimation_data(STD3)
    assert dd.R(3.0) == pytest.approx(-6) and dd.phi(3.0) == pytest.approx(-0.25)
    d0 = delta0().materialize()
    assert np.allclose(sc, dd.phi(3.0) * (dd.R(3.0) * np.eye(2) - d0), atol=1e-15)


def test_schur_rejects_exceptional_point():
    bd = decompose(STD3.materialize(), [0, 2])
    with pytest.raises(InadmissibleError):
        schur_complement(bd, 1.0)


def test_schur_identity_random_population():
    rng = np.random.default_rng(7)
    for c in csj_population(3, 30):
        dd = decimation_data(c)
        exc = exceptional_points(dd)
        for z in rng.uniform(-3, 3, 10) + 1j * rng.uniform(-1, 1, 10):
            if np.min(np.abs(exc - z)) < 1e-3:
                continue
            assert schur_residual(c, dd, z) <= 1e-10 * (1 + abs(z) ** c.n0)


def test_schur_identity_mixed_signs():
    rng = np.random.default_rng(8)
    for c in csj_population(4, 20, mixed_signs=True):
        dd = decimation_data(c)
        exc = exceptional_points(dd)
        for z in rng.uniform(-3, 3, 5) + 1j * rng.uniform(0.2, 1, 5):
            if np.min(np.abs(exc - z)) < 1e-3:
                continue
            assert schur_residual(c, dd, z) <= 1e-8 * (1 + abs(z) ** c.n0)


def test_similarity_examples():
    lap = laplacian_from_graph(path_model_graph(2, [0.5]))
    J = substitute_operator(lap, STD3)
    assert verify_spectral_similarity(J, lap, decimation_data(STD3), 2.5) <= 1e-10
    lap = laplacian_from_graph(sierpinski_model_graph(1))
    c = families.k0_4(0.3)
    J = substitute_operator(lap, c)
    assert verify_spectral_similarity(J, lap, decimation_data(c), 0.11 + 0.2j) <= 1e-8
    J = substitute_operator(lap, delta0())
    assert verify_spectral_similarity(J, lap, decimation_data(delta0()), 0.4) <= 1e-15


def test_similarity_rejects_exceptional_point():
    lap = laplacian_from_graph(sierpinski_model_graph(1))
    J = substitute_operator(lap, STD3)
    with pytest.raises(InadmissibleError):
        verify_spectral_similarity(J, lap, decimation_data(STD3), 1.0)


@pytest.mark.parametrize("level", [0, 1, 2])
def test_substitution_commutes_with_schur(level):
    lap = laplacian_from_graph(sierpinski_model_graph(level))
    c = families.k0_4(0.3)
    J = substitute_operator(lap, c)
    for z in (0.37 + 0.1j, 2.4, -0.3 + 0.5j):
        lhs = schur_complement(model_decomposition(J), z)
        assert np.max(np.abs(lhs - substituted_schur(lap, c, z))) <= 1e-9


def test_renormalization_examples():
    lap = laplacian_from_csj(STD3)
    J = substitute_operator(lap, STD3)
    dd = decimation_data(STD3)
    assert verify_renormalization(J, lap, dd, 0.5 + 0.5j) <= 1e-10
    assert verify_renormalization(J, lap, dd, 3.0) <= 1e-10
    with pytest.raises(InadmissibleError):
        verify_renormalization(J, lap, dd, 1.0)
    with pytest.raises(InadmissibleError):
        verify_renormalization(J, lap, dd, 0.0)


def test_renormalization_on_sierpinski():
    lap = laplacian_from_graph(sierpinski_model_graph(2))
    c = families.pq_model(0.3)
    J = substitute_operator(lap, c)
    assert verify_renormalization(J, lap, decimation_data(c), 0.8 + 0.3j) <= 1e-9


def test_lifting_sign():
    # the eliminated block carries +(zI - Q)^{-1} X f0
    lap = laplacian_from_csj(STD3)
    J = substitute_operator(lap, STD3)
    bd = model_decomposition(J)
    f0 = np.array([1.0, 0.0, -1.0])  # eigenvector of the 3-point Laplacian for eigenvalue 1
    z = 1 - np.sqrt(2) / 2
    f = lift_eigenvector(bd, f0, z)
    assert np.linalg.norm(J.matrix @ f - z * f) <= 1e-12 * np.linalg.norm(f)
    g = f.copy()
    g[list(bd.eliminated)] *= -1
    assert np.linalg.norm(J.matrix @ g - z * g) > 0.1


@pytest.mark.parametrize("level", [0, 1])
def test_lifting_on_sierpinski(level):
    lap = laplacian_from_graph(sierpinski_model_graph(level))
    c = families.k0_4(0.3)
    worst, n = verify_eigenvector_lifting(substitute_operator(lap, c), lap, decimation_data(c))
    assert n > 0 and worst <= 1e-8
