"""Fidelity metrics for synthetic multivariate time series."""
from .correlation import FeatureCorrMatrix, feature_corr_matrix, matrix_similarity, pairwise_report
from .distances import aed, amplitudes, awd, channel_wasserstein, estimate_amplitude, wasserstein1d
from .embedding import PcaBasis, conditional_probabilities, fit_pca, pca_project, tsne, tsne_embed
from .features import FEATURE_NAMES, feature_matrix, feature_vector

__all__ = [
    "FEATURE_NAMES",
    "FeatureCorrMatrix",
    "PcaBasis",
    "aed",
    "amplitudes",
    "awd",
    "channel_wasserstein",
    "conditional_probabilities",
    "estimate_amplitude",
    "feature_corr_matrix",
    "feature_matrix",
    "feature_vector",
    "fit_pca",
    "matrix_similarity",
    "pairwise_report",
    "pca_project",
    "tsne",
    "tsne_embed",
    "wasserstein1d",
]
