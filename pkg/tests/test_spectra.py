import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jdspec import families
from jdspec.decimation import decimation_data
from jdspec.graphs import path_model_graph, sierpinski_model_graph
from jdspec.multiset import SpectrumMultiset, compare_spectra
from jdspec.operators import OperatorError, delta0, laplacian_from_graph, new_csj, substitute_operator
from jdspec.spectra import (
    decimated_spectrum_path,
    dense_spectrum_path,
    eigenvalues,
    self_similar,
    self_similar_csj,
    spectrum_inclusion_report,
)


def test_self_similar_delta0_is_fixed():
    for level in (1, 2, 5):
        seq = self_similar(delta0(), level)
        assert np.array_equal(seq.realized.matrix, delta0().materialize())


def test_self_similar_standard_gives_standard_path():
    seq = self_similar(families.standard(2), 2)
    assert np.array_equal(seq.realized.path_matrix(), families.standard(4).materialize())


def test_self_similar_k0_4_level_3_structure():
    seq = self_similar(families.k0_4(0.3), 3)
    M = seq.realized.path_matrix()
    assert M.shape == (65, 65) and seq.size == 65
    assert np.max(np.abs(M.sum(axis=1))) <= 1e-14
    assert np.max(np.abs(M - M[::-1, ::-1])) <= 1e-15
    assert seq.realized.as_csj().is_probabilistic_laplacian()


def test_self_similar_rejects_non_laplacian_seed():
    with pytest.raises(OperatorError):
        self_similar(new_csj([-0.5, -0.5], [1, 1, 1]), 2)


@pytest.mark.parametrize("seed", [families.standard(2), families.pq_model(0.2), families.k0_5(0.6, 0.3)])
@pytest.mark.parametrize("level", [1, 2, 3])
def test_path_builder_agrees_with_graph_substitution(seed, level):
    dense = self_similar(seed, level).realized.path_matrix()
    assert np.array_equal(self_similar_csj(seed, level).materialize(), dense)


def test_decimated_examples():
    got = decimated_spectrum_path(families.standard(2), 2).expanded()
    s = math.sqrt(2) / 2
    assert np.allclose(got, [0, 1 - s, 1, 1 + s, 2], atol=1e-14)
    dense = eigenvalues(families.standard(4).materialize()).expanded()
    assert np.allclose(got, dense, atol=1e-12)
    for level in (1, 3, 6):
        assert np.array_equal(decimated_spectrum_path(delta0(), level).expanded(), [0, 2])


def test_decimated_provenance():
    spec = decimated_spectrum_path(families.standard(2), 2)
    assert spec.provenance[0] == "inherited-sigma(J_cs)"
    assert spec.provenance[1].startswith("preimage-of(1.0")


@pytest.mark.parametrize("level", [1, 2, 3, 4])
def test_decimated_matches_dense_k0_4(level):
    seed = families.k0_4(0.3)
    dec = decimated_spectrum_path(seed, level)
    dense = eigenvalues(self_similar(seed, level).realized.matrix)
    rep = compare_spectra(dec, dense)
    assert rep.ok and rep.max_distance <= 1e-8
    assert dec.total == 4**level + 1


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([2, 3, 4, 5]), st.floats(0.02, 0.98), st.floats(0.02, 0.98), st.integers(1, 3))
def test_spectral_range_and_endpoints(k0, p, q, level):
    probs = {2: [0.5], 3: [p, 1 - p], 4: [p, 0.5, 1 - p], 5: [p, q, 1 - q, 1 - p]}[k0]
    seed = families.seed_from_probabilities(probs)
    spec = decimated_spectrum_path(seed, level)
    x = spec.expanded()
    assert len(x) == k0**level + 1
    assert x.min() >= -1e-10 and x.max() <= 2 + 1e-10
    assert x[0] == 0.0 and x[-1] == 2.0
    rep = compare_spectra(spec, dense_spectrum_path(seed, level))
    assert rep.ok


def test_eigenvalue_branches_are_continuous():
    ps = np.arange(0.01, 1.0, 0.01)
    rows = np.array([eigenvalues(families.k0_4(p).materialize()).expanded() for p in ps])
    assert np.max(np.abs(np.diff(rows, axis=0))) <= 0.1


def test_inclusion_sierpinski_standard():
    lap = laplacian_from_graph(sierpinski_model_graph(1))
    c = families.standard(2)
    rep = spectrum_inclusion_report(substitute_operator(lap, c), lap, decimation_data(c))
    assert rep.ok
    assert rep.exceptional_hits


def test_inclusion_path_with_k0_4_block():
    lap = laplacian_from_graph(path_model_graph(2, [0.5]))
    c = families.k0_4(0.5)
    rep = spectrum_inclusion_report(substitute_operator(lap, c), lap, decimation_data(c))
    assert rep.ok
    # sigma(Delta_p) minus {0, 2} is {1}, whose preimages under a degree-4 R are 4 points
    assert len(rep.lower) == 4


def test_inclusion_with_delta0_block():
    lap = laplacian_from_graph(sierpinski_model_graph(1))
    rep = spectrum_inclusion_report(substitute_operator(lap, delta0()), lap, decimation_data(delta0()))
    assert rep.ok
    assert np.allclose(rep.sigma_J.values, rep.sigma_p.values)


def test_multiset_basics():
    a = SpectrumMultiset.from_values([2.0, 0.0, 1.0, 1.0 + 1e-12])
    assert list(a.multiplicities) == [1, 2, 1] and a.total == 4
    assert compare_spectra(a, a).ok
    b = SpectrumMultiset.from_values([2.0, 0.0, 1.0, 1.001])
    rep = compare_spectra(a, b)
    assert not rep.ok and rep.unmatched_a and rep.unmatched_b
    assert rep.multiplicity_disagreements


def test_multiset_serialization():
    a = SpectrumMultiset.from_values([0.0, 0.5, 0.5, 2.0])
    assert a.to_json() == {"values": [0.0, 0.5, 2.0], "multiplicities": [1, 2, 1]}
    lines = a.to_csv().splitlines()
    assert lines[0] == "index,value,multiplicity,provenance"
    assert lines[2] == "1,0.5,2,direct"
