"""Localized spectral similarity search on Gaussian kernel graphs."""

from .baselines import BaselineRanking, kernel_nn_rank, nn_rank
from .kernel import (
    KernelConfig,
    KernelGraph,
    NormalizedOperator,
    apply_operator,
    build_gaussian_kernel,
    degrees,
    median_heuristic,
    normalize_row_stochastic,
    normalize_symmetric,
)
from .linalg import ConvergenceError, qr_thin, symmetric_evd_dense
from .scoring import (
    LocalizedSelection,
    Ranking,
    ScoreVector,
    SimilarityResult,
    build_localized_embedding,
    find_kernel_similarities,
    rank,
    rank_of,
    score,
    select_top_coordinates,
)
from .solver import EigenBasis, SolverConfig, compute_eigenbasis, evd_dense_full, evd_randomized, residual_check

__version__ = "0.1.0"
