"""Lasso-weighted k-means.

The objective over labels ``U``, centers ``Z`` and feature weights ``W`` is::

    (1/n) * sum_l (w_l**beta + lam/p**2 * w_l) * D_l  -  alpha * sum_l w_l

with ``D_l`` the within-cluster sum of squares of feature ``l``. Each block has
an exact minimizer: nearest center under the weighted distance for ``U``,
cluster means for ``Z``, and a soft-thresholded closed form for ``W``, which is
what lets irrelevant features receive weights of exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._seeding import ALPHA_STREAM, rng_for, run_parallel
from .core import (
    Assignment,
    Centroids,
    DegenerateDataError,
    FitResult,
    InvalidArgumentError,
    LwkConfig,
    ShapeMismatchError,
    WeightVector,
    as_labels,
    as_values,
    check_beta,
    penalized_feature_multiplier,
    validate_config,
)


@dataclass(frozen=True, eq=False)
class Dispersions:
    """Per-feature within-cluster sums of squares ``D_l``."""

    d: np.ndarray

    def __post_init__(self):
        d = np.array(self.d, dtype=float)
        if d.ndim != 1 or np.any(d < 0) or not np.all(np.isfinite(d)):
            raise InvalidArgumentError("dispersions must be a finite nonnegative vector")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    def __array__(self, dtype=None, copy=None):
        return self.d if dtype is None else self.d.astype(dtype)


def soft_threshold(x, y):
    """Shrink ``x`` toward zero by ``y``; values inside ``[-y, y]`` become 0."""
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr < 0):
        raise InvalidArgumentError(f"threshold must be nonnegative, got {y}")
    x_arr = np.asarray(x, dtype=float)
    out = np.sign(x_arr) * np.maximum(np.abs(x_arr) - y_arr, 0.0)
    return float(out) if out.ndim == 0 else out


def _multipliers(W, lam, beta, p):
    return penalized_feature_multiplier(np.asarray(W, dtype=float), lam, p, beta)


def _check_shapes(values, labels=None, centers=None, weights=None):
    n, p = values.shape
    if labels is not None and labels.shape != (n,):
        raise ShapeMismatchError(f"expected {n} labels, got {labels.shape}")
    if centers is not None and (centers.ndim != 2 or centers.shape[1] != p):
        raise ShapeMismatchError(f"centers must have {p} columns, got shape {centers.shape}")
    if labels is not None and centers is not None and labels.size and labels.max() >= centers.shape[0]:
        raise ShapeMismatchError("a label refers to a missing centroid")
    if weights is not None and weights.shape != (p,):
        raise ShapeMismatchError(f"expected {p} weights, got {weights.shape}")


def compute_dispersions(X, A, Z) -> Dispersions:
    """``D_l = sum_i (x_il - z_{label(i), l})**2`` for every feature ``l``."""
    values = as_values(X)
    labels = as_labels(A)
    centers = np.asarray(Z, dtype=float)
    _check_shapes(values, labels, centers)
    resid = values - centers[labels]
    return Dispersions(np.einsum("ij,ij->j", resid, resid))


def _distance_matrix(values, centers, mult):
    out = np.empty((values.shape[0], centers.shape[0]))
    for j, z in enumerate(centers):
        diff = values - z
        out[:, j] = (diff * diff) @ mult
    return out


def nearest_centers(values, centers, mult) -> Assignment:
    """Labels of the nearest center under per-feature multipliers ``mult``.

    Ties go to the lowest cluster index (``argmin`` semantics).
    """
    return Assignment(np.argmin(_distance_matrix(values, centers, mult), axis=1), centers.shape[0])


def centroids_with_repair(values, labels, current, mult) -> np.ndarray:
    labels = as_labels(labels)
    k, p = current.shape
    counts = np.bincount(labels, minlength=k).astype(float)
    sums = np.zeros((k, p))
    np.add.at(sums, labels, values)
    nonempty = counts > 0
    centers = np.zeros((k, p))
    centers[nonempty] = sums[nonempty] / counts[nonempty, None]
    empty = np.flatnonzero(~nonempty)
    if empty.size:
        diff = values - current[labels]
        far = (diff * diff) @ mult
        order = np.argsort(-far, kind="stable")
        for j, i in zip(empty, order):
            centers[j] = values[i]
    return centers


def penalized_distances(X, Z, W, lam, beta=4) -> np.ndarray:
    """``n x k`` matrix of weighted squared distances to each center."""
    values = as_values(X)
    centers = np.asarray(Z, dtype=float)
    weights = np.asarray(W, dtype=float)
    _check_shapes(values, centers=centers, weights=weights)
    return _distance_matrix(values, centers, _multipliers(weights, lam, beta, values.shape[1]))


def update_assignments(X, Z, W, lam, beta=4) -> Assignment:
    """Send every point to its nearest center under the penalized distance.

    Ties go to the lowest cluster index.
    """
    values = as_values(X)
    centers = np.asarray(Z, dtype=float)
    weights = np.asarray(W, dtype=float)
    _check_shapes(values, centers=centers, weights=weights)
    return nearest_centers(values, centers, _multipliers(weights, lam, beta, values.shape[1]))


def update_centroids(X, A, Z=None, W=None, lam=0.0, beta=4) -> Centroids:
    """Cluster means of the assigned points.

    An empty cluster gets the point lying farthest (penalized distance, using
    ``W``) from its own current center; ``Z`` gives the current centers and
    defaults to the means of the non-empty clusters. Several empty clusters
    take distinct points in decreasing order of distance.
    """
    values = as_values(X)
    labels = as_labels(A)
    if isinstance(A, Assignment):
        k = A.k
    elif Z is not None:
        k = np.asarray(Z).shape[0]
    else:
        k = int(labels.max()) + 1
    _check_shapes(values, labels)
    p = values.shape[1]
    if Z is None:
        current = centroids_with_repair(values, labels, np.zeros((k, p)), np.zeros(p))
    else:
        current = np.asarray(Z, dtype=float)
        _check_shapes(values, labels, current)
    weights = np.ones(p) if W is None else np.asarray(W, dtype=float)
    mult = _multipliers(weights, lam, beta, p)
    return Centroids(centroids_with_repair(values, labels, current, mult))


def update_weights(D, alpha, lam, beta, n, p) -> WeightVector:
    """Minimize the objective in ``W`` for fixed dispersions.

    ``w_l = [S(n*alpha/D_l, lam/p**2) / beta] ** (1/(beta-1))`` and ``w_l = 0``
    when ``D_l = 0``.
    """
    d = np.asarray(D, dtype=float)
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        raise InvalidArgumentError("dispersions must be finite and nonnegative")
    if alpha < 0 or lam < 0:
        raise InvalidArgumentError("alpha and lambda must be nonnegative")
    beta = check_beta(beta)
    w = np.zeros_like(d)
    pos = d > 0
    with np.errstate(over="ignore", divide="ignore"):
        ratio = n * alpha / d[pos]
    if not np.all(np.isfinite(ratio)):
        raise DegenerateDataError("a dispersion is too close to zero for a finite weight")
    # alpha >= 0 makes the ratio nonnegative, so the threshold is one-sided.
    shrunk = np.maximum(ratio - lam / float(p) ** 2, 0.0)
    w[pos] = (shrunk / beta) ** (1.0 / (beta - 1))
    return WeightVector(w)


def alpha_from_dispersions(D, n, beta) -> float:
    """``alpha = (sum_l [n / (beta*D_l)]**(1/(beta-1))) ** -(beta-1)`` over ``D_l > 0``."""
    d = np.asarray(D, dtype=float)
    beta = check_beta(beta)
    pos = d[d > 0]
    if pos.size == 0:
        raise DegenerateDataError("every feature has zero within-cluster dispersion")
    total = np.sum((n / (beta * pos)) ** (1.0 / (beta - 1)))
    return float(total ** (-(beta - 1)))


ALPHA_METHODS = ("exact", "kmeans")


def select_alpha(X, k, beta=4, seed=0, restarts=20, method="exact", n_jobs=None) -> float:
    """Data-driven alpha for which the fitted weights sum to at most one.

    ``method="exact"`` uses, for every feature, the globally optimal 1-D
    k-means dispersion of that feature alone. No clustering can do better on a
    single feature, so ``sum(w) <= 1`` holds at every weight update.

    ``method="kmeans"`` uses the dispersions of the best of ``restarts`` plain
    k-means runs on all features. It is cheaper, but later iterations can beat
    those dispersions on some features and push ``sum(w)`` slightly above one.
    """
    values = as_values(X)
    n = values.shape[0]
    if method == "exact":
        from ._kmeans1d import optimal_dispersions

        d = optimal_dispersions(values, int(k))
    elif method == "kmeans":
        from .baselines import fit_kmeans_multi

        best, _ = fit_kmeans_multi(values, k, seed=seed, n_restarts=restarts,
                                   stream=ALPHA_STREAM, n_jobs=n_jobs)
        d = best.dispersions
    else:
        raise InvalidArgumentError(f"unknown alpha method {method!r}; expected one of {ALPHA_METHODS}")
    return alpha_from_dispersions(d, n, beta)


def lambda_max(D, alpha, n, p) -> float:
    """Smallest ``lam`` for which the weight update zeroes every weight."""
    d = np.asarray(D, dtype=float)
    pos = d[d > 0]
    if pos.size == 0:
        return 0.0
    return float(p) ** 2 * float(np.max(n * alpha / pos))


def lambda0_estimate(X, alpha) -> float:
    """Sample estimate of the largest ``lam`` that keeps some weight bounded away from zero.

    The consistency argument admits ``lam < alpha * p**2 / (4 * var)`` for the
    variance ``var`` of a suitable feature. That feature is not identifiable
    from data, so the largest feature variance is used, which gives the
    conservative end of the range. Diagnostic only; nothing enforces it.
    """
    values = as_values(X)
    p = values.shape[1]
    var = float(np.max(values.var(axis=0)))
    if var <= 0:
        raise DegenerateDataError("every feature is constant")
    return float(alpha) * p**2 / (4.0 * var)


def objective(X, A, Z, W, lam, alpha, beta=4) -> float:
    values = as_values(X)
    weights = np.asarray(W, dtype=float)
    _check_shapes(values, weights=weights)
    d = compute_dispersions(values, A, Z).d
    return _objective_from_dispersions(d, weights, lam, alpha, beta, *values.shape)


def _objective_from_dispersions(d, w, lam, alpha, beta, n, p):
    mult = w**beta + (lam / float(p) ** 2) * w
    return float(mult @ d / n - alpha * w.sum())


def _has_converged(previous, current, epsilon):
    # Relative to the objective's magnitude, capped at the absolute test.
    return abs(previous - current) <= epsilon * min(1.0, abs(previous))


def initial_centroids(values, k, rng) -> np.ndarray:
    idx = rng.choice(values.shape[0], size=k, replace=False)
    return values[np.sort(idx)].copy()


def _start(values, cfg, key, init=None):
    p = values.shape[1]
    if init is None:
        centers = initial_centroids(values, cfg.k, rng_for(cfg.seed, *key))
    else:
        centers = np.array(init, dtype=float)
        _check_shapes(values, centers=centers)
    weights = np.full(p, 1.0 / p)
    labels = update_assignments(values, centers, weights, cfg.lam, cfg.beta)
    return centers, weights, labels


def first_dispersions(X, cfg: LwkConfig, key=(0,)) -> Dispersions:
    """Dispersions seen by the first weight update of the run ``fit(X, cfg, key)``."""
    values = as_values(X)
    cfg = validate_config(cfg, values)
    centers, weights, labels = _start(values, cfg, key)
    centers = update_centroids(values, labels, centers, weights, cfg.lam, cfg.beta)
    return compute_dispersions(values, labels, centers)


def fit(X, cfg: LwkConfig, key=(0,), init=None) -> FitResult:
    """One LW-k-means run.

    Starts from ``k`` distinct data points (or ``init``) and uniform weights
    ``1/p``, assigns points to their nearest start, then sweeps centers,
    weights and labels until the objective settles. ``key`` selects the random
    stream derived from ``cfg.seed``.
    """
    values = as_values(X)
    cfg = validate_config(cfg, values)
    n, p = values.shape
    alpha = cfg.alpha
    if alpha is None:
        alpha = select_alpha(values, cfg.k, cfg.beta, cfg.seed, cfg.n_restarts, cfg.alpha_method)
    lam, beta = cfg.lam, cfg.beta
    centers, weights, labels = _start(values, cfg, key, init)
    d = compute_dispersions(values, labels, centers).d
    current = _objective_from_dispersions(d, weights, lam, alpha, beta, n, p)

    trace = [current]
    substeps = [("init", current)]
    weight_sums = [float(weights.sum())]
    converged = degenerate = False
    iterations = 0
    while iterations < cfg.max_iter:
        iterations += 1
        previous = current

        centers = update_centroids(values, labels, centers, weights, lam, beta).centers
        d = compute_dispersions(values, labels, centers).d
        substeps.append(("centroids", _objective_from_dispersions(d, weights, lam, alpha, beta, n, p)))

        weights = update_weights(d, alpha, lam, beta, n, p).weights
        weight_sums.append(float(weights.sum()))
        value = _objective_from_dispersions(d, weights, lam, alpha, beta, n, p)
        substeps.append(("weights", value))
        if not np.any(weights > 0):
            # Every distance would be zero; keep the labels and stop.
            degenerate = True
            current = value
            trace.append(current)
            break

        labels = update_assignments(values, centers, weights, lam, beta)
        d = compute_dispersions(values, labels, centers).d
        current = _objective_from_dispersions(d, weights, lam, alpha, beta, n, p)
        substeps.append(("assignments", current))
        trace.append(current)
        if _has_converged(previous, current, cfg.epsilon):
            converged = True
            break

    return FitResult(
        assignment=labels,
        centroids=Centroids(centers),
        weights=WeightVector(weights),
        objective_trace=trace,
        iterations=iterations,
        converged=converged,
        alpha_used=float(alpha),
        dispersions=d,
        degenerate=degenerate,
        seed=cfg.seed,
        substep_trace=substeps,
        weight_sum_trace=weight_sums,
    )


def fit_multi(X, cfg: LwkConfig, n_jobs=None, key_prefix=()):
    """Run ``cfg.n_restarts`` independent fits; return ``(best, all_results)``.

    Alpha is resolved once and shared by every restart. Restart ``j`` draws
    from the stream ``(cfg.seed, *key_prefix, j)`` so results do not depend on
    scheduling. The best run has the lowest final objective; degenerate runs
    only win when every run is degenerate.
    """
    values = as_values(X)
    cfg = validate_config(cfg, values)
    if cfg.alpha is None:
        cfg = replace(cfg, alpha=select_alpha(values, cfg.k, cfg.beta, cfg.seed, cfg.n_restarts,
                                              cfg.alpha_method, n_jobs=n_jobs))
    tasks = [(values, cfg, (*key_prefix, j)) for j in range(cfg.n_restarts)]
    results = run_parallel(fit, tasks, n_jobs)
    return best_of(results), results


def best_of(results):
    def rank(item):
        j, r = item
        return (r.degenerate, r.objective, j)

    return min(enumerate(results), key=rank)[1]


class LWKMeans(ClusterMixin, TransformerMixin, BaseEstimator):
    """Lasso-weighted k-means clustering with automatic feature selection.

    Parameters
    ----------
    n_clusters : int, default=2
    lam : float, default=0.0
        Sparsity strength. Larger values zero out more feature weights.
    beta : int, default=4
        Even exponent applied to the weights.
    alpha : float or None, default=None
        Reward on the total weight. ``None`` derives it from the data with
        ``alpha_method``.
    alpha_method : {"exact", "kmeans"}, default="exact"
        ``"exact"`` uses per-feature optimal one-dimensional dispersions,
        ``"kmeans"`` the dispersions of the best of ``n_init`` k-means runs.
    tol : float, default=1e-6
    max_iter : int, default=100
    n_init : int, default=20
        Number of restarts; the run with the lowest objective is kept.
    random_state : int, default=0
    n_jobs : int or None, default=None
        Workers used for restarts. Results never depend on it.

    Attributes
    ----------
    labels_ : ndarray of shape (n_samples,)
    cluster_centers_ : ndarray of shape (n_clusters, n_features)
    weights_ : ndarray of shape (n_features,)
    alpha_ : float
    objective_ : float
    n_iter_ : int
    converged_ : bool
    degenerate_ : bool
        True when the best run ended with every weight at zero.
    result_ : FitResult
    restarts_ : list of FitResult
    """

    def __init__(self, n_clusters=2, lam=0.0, beta=4, alpha=None, alpha_method="exact",
                 tol=1e-6, max_iter=100, n_init=20, random_state=0, n_jobs=None):
        self.n_clusters = n_clusters
        self.lam = lam
        self.beta = beta
        self.alpha = alpha
        self.alpha_method = alpha_method
        self.tol = tol
        self.max_iter = max_iter
        self.n_init = n_init
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _config(self):
        seed = 0 if self.random_state is None else self.random_state
        return LwkConfig(k=self.n_clusters, lam=self.lam, beta=self.beta, alpha=self.alpha,
                         epsilon=self.tol, max_iter=self.max_iter, seed=seed,
                         n_restarts=self.n_init, alpha_method=self.alpha_method)

    def fit(self, X, y=None):
        values = check_array(X, dtype=float)
        best, results = fit_multi(values, self._config(), n_jobs=self.n_jobs)
        self.result_ = best
        self.restarts_ = results
        self.labels_ = best.labels.copy()
        self.cluster_centers_ = best.centroids.centers.copy()
        self.weights_ = best.weights.weights.copy()
        self.alpha_ = best.alpha_used
        self.objective_ = best.objective
        self.n_iter_ = best.iterations
        self.converged_ = best.converged
        self.degenerate_ = best.degenerate
        self.n_features_in_ = values.shape[1]
        return self

    def _distances(self, X):
        check_is_fitted(self, "cluster_centers_")
        values = check_array(X, dtype=float)
        if values.shape[1] != self.n_features_in_:
            raise ShapeMismatchError(
                f"X has {values.shape[1]} features, estimator was fitted with {self.n_features_in_}")
        return penalized_distances(values, self.cluster_centers_, self.weights_, self.lam, self.beta)

    def predict(self, X):
        return np.argmin(self._distances(X), axis=1)

    def transform(self, X):
        """Penalized squared distances to every cluster center."""
        return self._distances(X)

    def get_support(self, indices=False):
        """Mask (or indices) of features with a strictly positive weight."""
        check_is_fitted(self, "weights_")
        mask = self.weights_ > 0
        return np.flatnonzero(mask) if indices else mask
