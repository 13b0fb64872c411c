"""Lasso-weighted k-means: feature-weighted clustering that zeroes irrelevant features."""

__version__ = "0.1.0"

from .baselines import SparseKMeans, WKMeans, fit_kmeans, fit_sparse_kmeans, fit_wkmeans
from .core import (Assignment, Centroids, DataMatrix, DegenerateDataError, FitResult,
                   InvalidArgumentError, LwkConfig, LwkError, WeightVector, standardize)
from .datagen import gen_data1_analog, gen_example1, gen_example2, gen_mixture, gen_toy1_analog
from .lwk import LWKMeans, fit, fit_multi, lambda0_estimate, lambda_max, select_alpha, update_weights
from .metrics import cer, mcc, relevance_from_weights
from .regpath import auto_grid, select_lambda_plateau, sweep

__all__ = [
    "Assignment", "Centroids", "DataMatrix", "DegenerateDataError", "FitResult",
    "InvalidArgumentError", "LWKMeans", "LwkConfig", "LwkError", "SparseKMeans", "WKMeans",
    "WeightVector", "auto_grid", "cer", "fit", "fit_kmeans", "fit_multi", "fit_sparse_kmeans",
    "fit_wkmeans", "gen_data1_analog", "gen_example1", "gen_example2", "gen_mixture",
    "gen_toy1_analog", "lambda0_estimate", "lambda_max", "mcc", "relevance_from_weights", "select_alpha", "select_lambda_plateau",
    "standardize", "sweep", "update_weights",
]
