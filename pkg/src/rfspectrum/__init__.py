"""Expected random-feature kernels, their large-dimensional equivalents, and
the spectra and clustering behavior they induce on Gaussian mixtures."""
from .cluster import accuracy, cluster_once, clustering_experiment, kmeans, spectral_embed
from .equivalent import (
    EquivalentCoefficients,
    Taxonomy,
    build_equivalent,
    build_spiked,
    classify,
    coefficients,
    ratio_to_lrelu,
    recompose_spiked,
)
from .gmm import (
    ClassStatistics,
    DataSet,
    MixtureModel,
    class_statistics,
    estimate_tau,
    fit_empirical_model,
    sample_mixture,
    statistic_norms,
)
from .kernels import KINDS, ActivationKind, KernelMatrix, center, monte_carlo_gram, parse_activation, phi_entry, phi_matrix
from .spectrum import eig_sym, esd_histogram, limiting_density, stieltjes_solve

__version__ = "0.1.0"

__all__ = [
    "ActivationKind", "ClassStatistics", "DataSet", "EquivalentCoefficients", "KINDS", "KernelMatrix",
    "MixtureModel", "Taxonomy", "accuracy", "build_equivalent", "build_spiked", "center", "class_statistics",
    "classify", "cluster_once", "clustering_experiment", "coefficients", "eig_sym", "esd_histogram",
    "estimate_tau", "fit_empirical_model", "kmeans", "limiting_density", "monte_carlo_gram", "parse_activation",
    "phi_entry", "phi_matrix", "ratio_to_lrelu", "recompose_spiked", "sample_mixture", "spectral_embed",
    "statistic_norms", "stieltjes_solve",
]
