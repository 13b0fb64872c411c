"""Shared types, configuration checks and the penalized per-feature multiplier."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np


class LwkError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(LwkError, ValueError):
    code = "invalid-argument"


class ShapeMismatchError(LwkError, ValueError):
    code = "shape-mismatch"


class DegenerateDataError(LwkError):
    """The data carries no usable dispersion (e.g. every point sits on its centroid)."""

    code = "degenerate-data"


class ConfigError(LwkError, ValueError):
    """Base class for configuration validation failures."""

    code = "invalid-config"


class InvalidKError(ConfigError):
    code = "invalid-k"


class InvalidBetaError(ConfigError):
    code = "invalid-beta"


class InvalidEpsilonError(ConfigError):
    code = "invalid-epsilon"


class InvalidLambdaError(ConfigError):
    code = "invalid-lambda"


class InvalidAlphaError(ConfigError):
    code = "invalid-alpha"


class InvalidIterationError(ConfigError):
    code = "invalid-max-iter"


class InvalidRestartsError(ConfigError):
    code = "invalid-restarts"


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """An ``n x p`` real data matrix plus the statistics used to standardize it.

    ``feature_means`` and ``feature_scales`` describe the *original* columns, so
    ``values * feature_scales + feature_means`` undoes standardization.
    Columns whose original scale was zero are only centered; they are listed in
    ``zero_variance``.
    """

    values: np.ndarray
    standardized: bool = False
    feature_means: np.ndarray | None = None
    feature_scales: np.ndarray | None = None
    zero_variance: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise InvalidArgumentError(f"data must be 2-dimensional, got ndim={values.ndim}")
        n, p = values.shape
        if n < 2:
            raise InvalidArgumentError(f"need at least 2 observations, got {n}")
        if p < 1:
            raise InvalidArgumentError("need at least 1 feature")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("data contains non-finite entries")
        object.__setattr__(self, "values", _frozen(values))
        means = np.zeros(p) if self.feature_means is None else self.feature_means
        scales = np.ones(p) if self.feature_scales is None else self.feature_scales
        zv = np.zeros(p, dtype=bool) if self.zero_variance is None else self.zero_variance
        for name, arr in (("feature_means", means), ("feature_scales", scales), ("zero_variance", zv)):
            if np.shape(arr) != (p,):
                raise ShapeMismatchError(f"{name} must have length {p}")
        object.__setattr__(self, "feature_means", _frozen(means))
        object.__setattr__(self, "feature_scales", _frozen(scales))
        object.__setattr__(self, "zero_variance", _frozen(zv, dtype=bool))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)

    def inverse_transform(self) -> np.ndarray:
        """Return the data on its original scale."""
        return self.values * self.feature_scales + self.feature_means


@dataclass(frozen=True, eq=False)
class Assignment:
    """Hard partition of ``n`` points into ``k`` clusters, stored as labels."""

    labels: np.ndarray
    k: int

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise InvalidArgumentError("labels must be 1-dimensional")
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            if not np.all(labels == np.round(labels)):
                raise InvalidArgumentError("labels must be integers")
        labels = labels.astype(np.int64)
        k = int(self.k)
        if k < 1:
            raise InvalidArgumentError(f"k must be positive, got {k}")
        if labels.size and (labels.min() < 0 or labels.max() >= k):
            raise InvalidArgumentError(f"labels must lie in [0, {k})")
        object.__setattr__(self, "labels", _frozen(labels, dtype=np.int64))
        object.__setattr__(self, "k", k)

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.labels if dtype is None else self.labels.astype(dtype)

    def __len__(self):
        return self.n

    def to_onehot(self) -> np.ndarray:
        """The ``n x k`` membership matrix with one-hot rows."""
        u = np.zeros((self.n, self.k), dtype=np.int8)
        u[np.arange(self.n), self.labels] = 1
        return u

    @classmethod
    def from_onehot(cls, u) -> "Assignment":
        u = np.asarray(u)
        if u.ndim != 2 or not np.all(u.sum(axis=1) == 1) or not np.all((u == 0) | (u == 1)):
            raise InvalidArgumentError("membership matrix rows must be one-hot")
        return cls(np.argmax(u, axis=1), u.shape[1])

    def counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


@dataclass(frozen=True, eq=False)
class Centroids:
    centers: np.ndarray

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float)
        if centers.ndim != 2:
            raise InvalidArgumentError("centers must be a k x p matrix")
        if not np.all(np.isfinite(centers)):
            raise InvalidArgumentError("centers contain non-finite entries")
        object.__setattr__(self, "centers", _frozen(centers))

    @property
    def k(self) -> int:
        return self.centers.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.centers if dtype is None else self.centers.astype(dtype)


@dataclass(frozen=True, eq=False)
class WeightVector:
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1:
            raise InvalidArgumentError("weights must be 1-dimensional")
        if not np.all(np.isfinite(w)):
            raise InvalidArgumentError("weights contain non-finite entries")
        if np.any(w < 0):
            raise InvalidArgumentError("weights must be nonnegative")
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def p(self) -> int:
        return self.weights.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.weights if dtype is None else self.weights.astype(dtype)


@dataclass(frozen=True)
class LwkConfig:
    """Parameters of one LW-k-means run.

    ``lam`` is the raw sparsity parameter; the algorithm divides it by ``p**2``
    internally. ``alpha=None`` derives alpha from the data with ``alpha_method``.
    """

    k: int
    lam: float = 0.0
    beta: int = 4
    alpha: float | None = None
    epsilon: float = 1e-6
    max_iter: int = 100
    seed: int = 0
    n_restarts: int = 20
    alpha_method: str = "exact"


@dataclass(frozen=True, eq=False)
class FitResult:
    assignment: Assignment
    centroids: Centroids
    weights: WeightVector
    objective_trace: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    alpha_used: float = float("nan")
    dispersions: np.ndarray | None = None
    degenerate: bool = False
    seed: int | None = None
    # (stage, objective) after the initial assignment and each sub-step.
    substep_trace: list = field(default_factory=list)
    weight_sum_trace: list = field(default_factory=list)

    @property
    def objective(self) -> float:
        return self.objective_trace[-1] if self.objective_trace else float("nan")

    @property
    def labels(self) -> np.ndarray:
        return self.assignment.labels


def as_values(X) -> np.ndarray:
    """Float matrix view of a DataMatrix or any 2-D array-like."""
    if isinstance(X, DataMatrix):
        return X.values
    values = np.asarray(X, dtype=float)
    if values.ndim != 2:
        raise InvalidArgumentError(f"data must be 2-dimensional, got ndim={values.ndim}")
    return values


def as_labels(A) -> np.ndarray:
    if isinstance(A, Assignment):
        return A.labels
    return np.asarray(A, dtype=np.int64)


def check_beta(beta) -> int:
    if isinstance(beta, (bool, np.bool_)) or not float(beta).is_integer():
        raise InvalidBetaError(f"beta must be an even integer >= 2, got {beta!r}")
    beta = int(beta)
    if beta < 2 or beta % 2:
        raise InvalidBetaError(f"beta must be an even integer >= 2, got {beta}")
    return beta


def penalized_feature_multiplier(w, lam, p, beta=4):
    """``w**beta + (lam / p**2) * w``, the factor scaling feature ``l``'s squared distance.

    Works elementwise on arrays of weights.
    """
    w_arr = np.asarray(w, dtype=float)
    if not np.all(np.isfinite(w_arr)) or not np.isfinite(lam):
        raise InvalidArgumentError("weights and lambda must be finite")
    if np.any(w_arr < 0):
        raise InvalidArgumentError("weights must be nonnegative")
    if lam < 0:
        raise InvalidArgumentError("lambda must be nonnegative")
    if int(p) < 1:
        raise InvalidArgumentError("p must be a positive integer")
    beta = check_beta(beta)
    out = w_arr**beta + (lam / float(p) ** 2) * w_arr
    return float(out) if out.ndim == 0 else out


def standardize(X, ddof: int = 0) -> DataMatrix:
    """Center every column and scale it to unit standard deviation.

    ``ddof=0`` (population convention) is the default; pass ``ddof=1`` for the
    sample convention. Zero-variance columns are centered only and flagged.
    Standardizing an already standardized matrix keeps the original statistics.
    """
    if ddof not in (0, 1):
        raise InvalidArgumentError("ddof must be 0 or 1")
    values = as_values(X)
    n = values.shape[0]
    if n < 2:
        raise InvalidArgumentError("standardization needs at least 2 observations")
    means = values.mean(axis=0)
    centered = values - means
    scales = np.sqrt((centered**2).sum(axis=0) / (n - ddof))
    # Columns with only rounding-level spread are treated as constant.
    zero = scales <= 1e-12 * np.maximum(1.0, np.abs(means))
    safe = np.where(zero, 1.0, scales)
    out = centered / safe
    out[:, zero] = 0.0
    if isinstance(X, DataMatrix) and X.standardized:
        # Compose with the earlier transform so inverse_transform still reaches raw data.
        means = X.feature_means + X.feature_scales * means
        safe = X.feature_scales * safe
        zero = zero | X.zero_variance
    return DataMatrix(out, standardized=True, feature_means=means,
                      feature_scales=np.where(zero, 1.0, safe), zero_variance=zero)


def validate_config(cfg: LwkConfig, X) -> LwkConfig:
    """Check ``cfg`` against the data and return a normalized copy."""
    n = as_values(X).shape[0]
    if isinstance(cfg.k, (bool, np.bool_)) or not float(cfg.k).is_integer():
        raise InvalidKError(f"k must be an integer, got {cfg.k!r}")
    k = int(cfg.k)
    if k < 2:
        raise InvalidKError(f"k must be at least 2, got {k}")
    if k > n:
        raise InvalidKError(f"k={k} exceeds the number of observations n={n}")
    beta = check_beta(cfg.beta)
    eps = float(cfg.epsilon)
    if not np.isfinite(eps) or eps <= 0:
        raise InvalidEpsilonError(f"epsilon must be positive, got {cfg.epsilon}")
    lam = float(cfg.lam)
    if not np.isfinite(lam) or lam < 0:
        raise InvalidLambdaError(f"lambda must be nonnegative and finite, got {cfg.lam}")
    alpha = cfg.alpha
    if alpha is not None:
        alpha = float(alpha)
        if not np.isfinite(alpha) or alpha < 0:
            raise InvalidAlphaError(f"alpha must be nonnegative and finite, got {cfg.alpha}")
    if int(cfg.max_iter) < 1:
        raise InvalidIterationError(f"max_iter must be positive, got {cfg.max_iter}")
    if int(cfg.n_restarts) < 1:
        raise InvalidRestartsError(f"n_restarts must be positive, got {cfg.n_restarts}")
    if cfg.alpha_method not in ("exact", "kmeans"):
        raise InvalidAlphaError(f"alpha_method must be 'exact' or 'kmeans', got {cfg.alpha_method!r}")
    return replace(cfg, k=k, lam=lam, beta=beta, alpha=alpha, epsilon=eps,
                   max_iter=int(cfg.max_iter), seed=int(cfg.seed), n_restarts=int(cfg.n_restarts))
