"""Regularization paths: LW-k-means restarts over a grid of sparsity values.

For every ``lam`` in the grid the weight vectors of ``t`` restarts are reduced
element-wise to their mean and median; the median path is robust to the odd
restart stuck in a poor local optimum.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._seeding import run_parallel
from .core import InvalidArgumentError, LwkConfig, as_values, validate_config
from .lwk import first_dispersions, fit, lambda_max, select_alpha
from .metrics import cer


@dataclass(frozen=True, eq=False)
class PathPoint:
    lam: float
    mean_weights: np.ndarray
    median_weights: np.ndarray
    n_selected_mean: float
    degenerate_fraction: float
    mean_cer: float | None = None
    median_cer: float | None = None
    weights: np.ndarray | None = None
    objectives: np.ndarray | None = None

    @property
    def n_selected_median(self) -> int:
        """Number of features whose median weight is positive."""
        return int(np.count_nonzero(self.median_weights > 0))


@dataclass(frozen=True)
class LambdaPlateau:
    """A run of consecutive grid points selecting the same number of features."""

    indices: tuple
    lams: tuple
    n_features: int

    @property
    def lam_high(self) -> float:
        return max(self.lams)

    @property
    def lam_low(self) -> float:
        return min(self.lams)

    @property
    def recommended(self) -> float:
        """The middle grid value of the plateau."""
        return float(self.lams[len(self.lams) // 2])


def auto_grid(X, cfg: LwkConfig, alpha=None, n_points=30, ratio=1e-3) -> np.ndarray:
    """Descending log-spaced grid from ``lam_max`` down to ``lam_max * ratio``.

    ``lam_max`` is the largest threshold among the initializations used at the
    first grid point, so every restart there starts with all weights zeroed.
    """
    values = as_values(X)
    cfg = validate_config(cfg, values)
    if alpha is None:
        alpha = cfg.alpha if cfg.alpha is not None else select_alpha(
            values, cfg.k, cfg.beta, cfg.seed, cfg.n_restarts, cfg.alpha_method)
    n, p = values.shape
    top = max(lambda_max(first_dispersions(values, cfg, (0, j)).d, alpha, n, p)
              for j in range(cfg.n_restarts))
    if top <= 0:
        raise InvalidArgumentError("data has no dispersion to threshold")
    return np.geomspace(top, top * ratio, int(n_points))


def _aggregate(lam, results, truth):
    weights = np.array([r.weights.weights for r in results])
    point = dict(
        lam=float(lam),
        mean_weights=weights.mean(axis=0),
        median_weights=np.median(weights, axis=0),
        n_selected_mean=float(np.mean((weights > 0).sum(axis=1))),
        degenerate_fraction=float(np.mean([r.degenerate for r in results])),
        weights=weights,
        objectives=np.array([r.objective for r in results]),
    )
    if truth is not None:
        errors = np.array([cer(r.assignment, truth) for r in results])
        point.update(mean_cer=float(errors.mean()), median_cer=float(np.median(errors)))
    return PathPoint(**point)


def sweep(X, cfg: LwkConfig, lambdas, truth=None, n_jobs=None):
    """One :class:`PathPoint` per grid value, in grid order.

    Restart ``j`` at grid index ``i`` uses the random stream ``(cfg.seed, i, j)``.
    Alpha is resolved once for the whole path.
    """
    values = as_values(X)
    lams = np.asarray(lambdas, dtype=float).ravel()
    if lams.size == 0:
        raise InvalidArgumentError("lambda grid is empty")
    if np.any(~np.isfinite(lams)) or np.any(lams < 0):
        raise InvalidArgumentError("lambda grid values must be finite and nonnegative")
    cfg = validate_config(cfg, values)
    if cfg.alpha is None:
        cfg = replace(cfg, alpha=select_alpha(values, cfg.k, cfg.beta, cfg.seed,
                                              cfg.n_restarts, cfg.alpha_method, n_jobs=n_jobs))
    tasks = [(values, replace(cfg, lam=float(lam)), (i, j))
             for i, lam in enumerate(lams) for j in range(cfg.n_restarts)]
    results = run_parallel(fit, tasks, n_jobs)
    t = cfg.n_restarts
    return [_aggregate(lam, results[i * t:(i + 1) * t], truth) for i, lam in enumerate(lams)]


def select_lambda_plateau(path, counts=None, p=None):
    """Longest run of consecutive grid points sharing the same feature count.

    ``counts`` defaults to the number of features with positive median weight.
    Only counts strictly between 0 and ``p`` qualify: a run keeping every
    feature has selected nothing. Ties go to the run met first along the
    grid. Returns ``None`` when no run spans at least two grid points.
    """
    if counts is None:
        counts = [pt.n_selected_median for pt in path]
    if p is None:
        p = path[0].median_weights.shape[0] if path else None
    counts = list(counts)
    qualifies = lambda c: c > 0 and (p is None or c < p)
    best = None
    start = 0
    for i in range(1, len(counts) + 1):
        if i == len(counts) or counts[i] != counts[start]:
            length = i - start
            if qualifies(counts[start]) and length >= 2 and (best is None or length > best[1] - best[0]):
                best = (start, i)
            start = i
    if best is None:
        return None
    idx = tuple(range(*best))
    lams = tuple(path[i].lam for i in idx)
    return LambdaPlateau(indices=idx, lams=lams, n_features=int(counts[best[0]]))
