"""Comparison algorithms: Lloyd k-means, WK-means and sparse k-means."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array

from ._seeding import rng_for, run_parallel
from .core import (
    Centroids,
    ConfigError,
    DegenerateDataError,
    FitResult,
    InvalidArgumentError,
    InvalidEpsilonError,
    InvalidIterationError,
    InvalidKError,
    InvalidRestartsError,
    WeightVector,
    as_values,
    check_beta,
)
from .lwk import (
    _has_converged,
    best_of,
    centroids_with_repair,
    compute_dispersions,
    nearest_centers,
    initial_centroids,
    update_assignments,
    update_centroids,
)


class DegenerateWeightsError(DegenerateDataError):
    """No feature has a positive between-cluster score."""


class InvalidBoundError(ConfigError):
    code = "invalid-s"


def _check_common(values, k, epsilon, max_iter, min_k=2):
    n = values.shape[0]
    if int(k) != k or k < min_k or k > n:
        raise InvalidKError(f"k must be an integer in [{min_k}, {n}], got {k}")
    if not np.isfinite(epsilon) or epsilon <= 0:
        raise InvalidEpsilonError(f"epsilon must be positive, got {epsilon}")
    if int(max_iter) < 1:
        raise InvalidIterationError(f"max_iter must be positive, got {max_iter}")


def _lloyd(values, centers, mult, epsilon, max_iter):
    """Lloyd iterations under the fixed per-feature multipliers ``mult``.

    Returns ``(labels, centers, trace, iterations, converged)``; ``trace`` holds
    the weighted within-cluster sum of squares after each assignment step.
    """
    labels = nearest_centers(values, centers, mult)
    trace = [float(compute_dispersions(values, labels, centers).d @ mult)]
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        centers = centroids_with_repair(values, labels, centers, mult)
        labels = nearest_centers(values, centers, mult)
        trace.append(float(compute_dispersions(values, labels, centers).d @ mult))
        if _has_converged(trace[-2], trace[-1], epsilon):
            converged = True
            break
    return labels, centers, trace, it, converged


def fit_kmeans(X, k, epsilon=1e-6, max_iter=100, seed=0, key=(0,)) -> FitResult:
    """Lloyd's k-means from ``k`` random data points. ``k=1`` is allowed."""
    values = as_values(X)
    _check_common(values, k, epsilon, max_iter, min_k=1)
    p = values.shape[1]
    rng = rng_for(seed, *key)
    centers = initial_centroids(values, int(k), rng)
    ones = np.ones(p)
    labels, centers, trace, it, converged = _lloyd(values, centers, ones, epsilon, max_iter)
    d = compute_dispersions(values, labels, centers).d
    return FitResult(labels, Centroids(centers), WeightVector(ones), trace, it, converged,
                     dispersions=d, seed=seed)


def fit_kmeans_multi(X, k, epsilon=1e-6, max_iter=100, seed=0, n_restarts=20,
                     stream=None, n_jobs=None):
    """Best (lowest within-cluster sum of squares) of ``n_restarts`` k-means runs."""
    values = as_values(X)
    if int(n_restarts) < 1:
        raise InvalidRestartsError(f"n_restarts must be positive, got {n_restarts}")
    prefix = () if stream is None else (stream,)
    tasks = [(values, k, epsilon, max_iter, seed, (*prefix, j)) for j in range(int(n_restarts))]
    results = run_parallel(fit_kmeans, tasks, n_jobs)
    return best_of(results), results


def wkmeans_weights(D, beta) -> np.ndarray:
    """``w_l = 1 / sum_t (D_l / D_t) ** (1/(beta-1))``.

    When some ``D_l`` are zero the weight is shared equally among those
    features, which is the limit of the formula as they shrink to zero.
    """
    d = np.asarray(D, dtype=float)
    beta = check_beta(beta)
    zero = d <= 0
    if np.any(zero):
        return zero / zero.sum()
    e = 1.0 / (beta - 1)
    # Dividing by the smallest D keeps the powers in floating-point range.
    inv = (d.min() / d) ** e
    return inv / inv.sum()


def fit_wkmeans(X, k, beta=4, epsilon=1e-6, max_iter=100, seed=0, key=(0,)) -> FitResult:
    """Huang's weighted k-means, minimizing ``sum_l w_l**beta * D_l`` with ``sum w = 1``."""
    values = as_values(X)
    _check_common(values, k, epsilon, max_iter)
    beta = check_beta(beta)
    p = values.shape[1]
    rng = rng_for(seed, *key)
    centers = initial_centroids(values, int(k), rng)
    weights = np.full(p, 1.0 / p)
    labels = update_assignments(values, centers, weights, 0.0, beta)
    d = compute_dispersions(values, labels, centers).d
    current = float(weights**beta @ d)
    trace = [current]
    weight_sums = [float(weights.sum())]
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        previous = current
        centers = update_centroids(values, labels, centers, weights, 0.0, beta).centers
        d = compute_dispersions(values, labels, centers).d
        weights = wkmeans_weights(d, beta)
        weight_sums.append(float(weights.sum()))
        labels = update_assignments(values, centers, weights, 0.0, beta)
        d = compute_dispersions(values, labels, centers).d
        current = float(weights**beta @ d)
        trace.append(current)
        if _has_converged(previous, current, epsilon):
            converged = True
            break
    return FitResult(labels, Centroids(centers), WeightVector(weights), trace, it, converged,
                     dispersions=d, seed=seed, weight_sum_trace=weight_sums)


@dataclass(frozen=True)
class SparseKmConfig:
    """Sparse k-means settings; ``s`` bounds the L1 norm of the unit-L2 weights."""

    k: int
    s: float
    max_iter: int = 20
    epsilon: float = 1e-6
    seed: int = 0
    n_restarts: int = 20


def validate_sparse_config(cfg: SparseKmConfig, X) -> SparseKmConfig:
    values = as_values(X)
    _check_common(values, cfg.k, cfg.epsilon, cfg.max_iter)
    p = values.shape[1]
    if not (1.0 < cfg.s <= np.sqrt(p)):
        raise InvalidBoundError(f"s must satisfy 1 < s <= sqrt(p) = {np.sqrt(p):.6g}, got {cfg.s}")
    if int(cfg.n_restarts) < 1:
        raise InvalidRestartsError(f"n_restarts must be positive, got {cfg.n_restarts}")
    return cfg


def between_cluster_scores(X, labels) -> np.ndarray:
    """Per-feature between-cluster sum of squares, ``TSS_l - WCSS_l``."""
    values = as_values(X)
    labels = np.asarray(labels)
    centers = update_centroids(values, labels).centers
    total = ((values - values.mean(axis=0)) ** 2).sum(axis=0)
    within = compute_dispersions(values, labels, centers).d
    return total - within


def _l1_ratio(a, delta):
    w = np.maximum(a - delta, 0.0)
    norm = np.sqrt(w @ w)
    return w.sum() / norm, w, norm


def sparse_weights(scores, s, n_bisect=200) -> np.ndarray:
    """Maximize ``w @ scores`` over ``w >= 0``, ``||w||_2 <= 1``, ``||w||_1 <= s``.

    The maximizer is a normalized soft threshold of the positive scores; its
    threshold is found by bisection so the L1 bound is met.
    """
    a = np.asarray(scores, dtype=float)
    if not np.any(a > 0):
        raise DegenerateWeightsError("no feature has a positive between-cluster score")
    # The maximizer is scale-free; unit max keeps the norms in range.
    a = np.maximum(a, 0.0) / a.max()
    ratio, w, norm = _l1_ratio(a, 0.0)
    if ratio <= s:
        return w / norm
    top = a == a.max()
    m = int(top.sum())
    if s * s <= m:
        # Thresholding cannot push the ratio below sqrt(m) for m tied leaders;
        # spreading the L1 budget evenly over them is then optimal.
        return top * (s / m)
    lo, hi = 0.0, 1.0
    for _ in range(n_bisect):
        mid = 0.5 * (lo + hi)
        if _l1_ratio(a, mid)[0] <= s:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-15:
            break
    if hi >= 1.0:
        return top / np.sqrt(m)
    _, w, norm = _l1_ratio(a, hi)
    w = w / norm
    # Guard the last ulp so both bounds hold exactly.
    if w.sum() > s:
        w *= s / w.sum()
    return w


def fit_sparse_kmeans(X, cfg: SparseKmConfig, key=(0,)) -> FitResult:
    """Witten-Tibshirani sparse k-means.

    Alternates k-means on the weight-scaled data with the closed-form weight
    maximization. ``objective_trace`` stores ``-sum_l w_l * a_l`` so that, as for
    the other algorithms, it never increases.
    """
    values = as_values(X)
    cfg = validate_sparse_config(cfg, values)
    p = values.shape[1]
    rng = rng_for(cfg.seed, *key)
    weights = np.full(p, 1.0 / np.sqrt(p))
    centers = initial_centroids(values, int(cfg.k), rng)
    labels, centers, _, _, _ = _lloyd(values, centers, weights, cfg.epsilon, 100)
    scores = between_cluster_scores(values, np.asarray(labels))
    trace = [float(-(weights @ scores))]
    converged = False
    it = 0
    while it < cfg.max_iter:
        it += 1
        previous = trace[-1]
        weights = sparse_weights(scores, cfg.s)
        # Warm start at the current partition's means so the step cannot lose ground.
        centers = update_centroids(values, labels, centers).centers
        labels, centers, _, _, _ = _lloyd(values, centers, weights, cfg.epsilon, 100)
        scores = between_cluster_scores(values, np.asarray(labels))
        trace.append(float(-(weights @ scores)))
        if _has_converged(previous, trace[-1], cfg.epsilon):
            converged = True
            break
    centers = update_centroids(values, labels, centers).centers
    return FitResult(labels, Centroids(centers), WeightVector(weights), trace, it, converged,
                     dispersions=compute_dispersions(values, labels, centers).d, seed=cfg.seed)


def _multi(fit_one, n_restarts, n_jobs, args_for):
    results = run_parallel(fit_one, [args_for(j) for j in range(n_restarts)], n_jobs)
    return best_of(results), results


def fit_wkmeans_multi(X, k, beta=4, epsilon=1e-6, max_iter=100, seed=0, n_restarts=20, n_jobs=None):
    values = as_values(X)
    return _multi(fit_wkmeans, int(n_restarts), n_jobs,
                  lambda j: (values, k, beta, epsilon, max_iter, seed, (j,)))


def fit_sparse_kmeans_multi(X, cfg: SparseKmConfig, n_jobs=None):
    values = as_values(X)
    return _multi(fit_sparse_kmeans, int(cfg.n_restarts), n_jobs, lambda j: (values, cfg, (j,)))


class _BaselineEstimator(ClusterMixin, BaseEstimator):
    def _store(self, best, results):
        self.result_ = best
        self.restarts_ = results
        self.labels_ = best.labels.copy()
        self.cluster_centers_ = best.centroids.centers.copy()
        self.weights_ = best.weights.weights.copy()
        self.objective_ = best.objective
        self.n_iter_ = best.iterations
        return self


class WKMeans(_BaselineEstimator):
    """sklearn-style wrapper around :func:`fit_wkmeans` with restarts."""

    def __init__(self, n_clusters=2, beta=4, tol=1e-6, max_iter=100, n_init=20,
                 random_state=0, n_jobs=None):
        self.n_clusters = n_clusters
        self.beta = beta
        self.tol = tol
        self.max_iter = max_iter
        self.n_init = n_init
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        values = check_array(X, dtype=float)
        return self._store(*fit_wkmeans_multi(values, self.n_clusters, self.beta, self.tol,
                                              self.max_iter, self.random_state or 0,
                                              self.n_init, self.n_jobs))


class SparseKMeans(_BaselineEstimator):
    """sklearn-style wrapper around :func:`fit_sparse_kmeans` with restarts."""

    def __init__(self, n_clusters=2, s=1.5, tol=1e-6, max_iter=20, n_init=20,
                 random_state=0, n_jobs=None):
        self.n_clusters = n_clusters
        self.s = s
        self.tol = tol
        self.max_iter = max_iter
        self.n_init = n_init
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        values = check_array(X, dtype=float)
        cfg = SparseKmConfig(self.n_clusters, self.s, self.max_iter, self.tol,
                             self.random_state or 0, self.n_init)
        return self._store(*fit_sparse_kmeans_multi(values, cfg, self.n_jobs))


__all__ = [
    "DegenerateWeightsError",
    "InvalidArgumentError",
    "SparseKMeans",
    "SparseKmConfig",
    "WKMeans",
    "between_cluster_scores",
    "fit_kmeans",
    "fit_kmeans_multi",
    "fit_sparse_kmeans",
    "fit_sparse_kmeans_multi",
    "fit_wkmeans",
    "fit_wkmeans_multi",
    "sparse_weights",
    "validate_sparse_config",
    "wkmeans_weights",
]
