"""Spectral decimation for piecewise centrosymmetric Jacobi operators on substitution graphs."""

from .decimation import (
    DecimationData,
    chebyshev_R,
    critical_points,
    decimation_data,
    eval_P,
    eval_PD,
    exceptional_set,
    preimages,
    verify_det_identity,
)
from .eigen import eigenvalues
from .graphs import (
    DirectedWeightedGraph,
    SubstitutionGraph,
    path_model_graph,
    sierpinski_model_graph,
    substitute_graph,
)
from .multiset import SpectrumMultiset, compare_spectra
from .operators import (
    CentrosymmetricJacobi,
    PiecewiseJacobi,
    ProbabilisticLaplacian,
    VertexMeasure,
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
    verify_renormalization,
    verify_spectral_similarity,
)
from .spectra import decimated_spectrum_path, self_similar, spectrum_inclusion_report

__version__ = "0.1.0"
