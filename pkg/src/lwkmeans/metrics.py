"""Partition agreement (CER), feature-selection quality (MCC) and dispersion summaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import InvalidArgumentError, ShapeMismatchError, as_labels, as_values


@dataclass(frozen=True, eq=False)
class RelevanceVector:
    """Boolean flag per feature: selected (or truly informative) or not."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.array(self.bits)
        if bits.ndim != 1:
            raise InvalidArgumentError("relevance vector must be 1-dimensional")
        bits = bits.astype(bool)
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @property
    def p(self) -> int:
        return self.bits.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.bits if dtype is None else self.bits.astype(dtype)


def _encode(labels):
    _, codes = np.unique(labels, return_inverse=True)
    return codes.ravel()


def confusion_matrix(a, b) -> np.ndarray:
    a, b = _encode(as_labels(a)), _encode(as_labels(b))
    table = np.zeros((a.max() + 1, b.max() + 1), dtype=np.int64)
    np.add.at(table, (a, b), 1)
    return table


def cer(a, b, method="matching") -> float:
    """Classification error rate between two partitions of the same points.

    ``method="matching"`` (default): share of points left unmatched by the best
    one-to-one pairing of clusters. ``method="pairwise"``: share of point pairs
    that one partition puts together and the other separates.
    """
    la, lb = as_labels(a), as_labels(b)
    if la.shape != lb.shape:
        raise ShapeMismatchError(f"partitions differ in length: {la.shape[0]} vs {lb.shape[0]}")
    n = la.shape[0]
    if n == 0:
        raise InvalidArgumentError("partitions are empty")
    if method == "matching":
        table = confusion_matrix(la, lb)
        rows, cols = linear_sum_assignment(table, maximize=True)
        return float(1.0 - table[rows, cols].sum() / n)
    if method == "pairwise":
        if n < 2:
            return 0.0
        table = confusion_matrix(la, lb).astype(float)
        pairs = lambda c: float((c * (c - 1) / 2).sum())
        together_both = pairs(table)
        together_a = pairs(table.sum(axis=1))
        together_b = pairs(table.sum(axis=0))
        disagree = together_a + together_b - 2 * together_both
        return disagree / (n * (n - 1) / 2)
    raise InvalidArgumentError(f"unknown CER method {method!r}")


def relevance_from_weights(W) -> RelevanceVector:
    """A feature counts as selected iff its weight is strictly positive."""
    return RelevanceVector(np.asarray(W, dtype=float) > 0)


def mcc(truth, pred) -> float:
    """Matthews correlation between two boolean vectors; 0 if any margin is empty."""
    t = np.asarray(truth, dtype=bool)
    q = np.asarray(pred, dtype=bool)
    if t.shape != q.shape:
        raise ShapeMismatchError(f"relevance vectors differ in length: {t.shape} vs {q.shape}")
    tp = float(np.sum(t & q))
    tn = float(np.sum(~t & ~q))
    fp = float(np.sum(~t & q))
    fn = float(np.sum(t & ~q))
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0:
        return 0.0
    return (tp * tn - fp * fn) / np.sqrt(denom)


@dataclass(frozen=True)
class DispersionSummary:
    within: np.ndarray
    total: np.ndarray

    @property
    def between(self) -> np.ndarray:
        return self.total - self.within


def feature_dispersion_summary(X, A) -> DispersionSummary:
    """Per-feature within-cluster (at cluster means) and total sums of squares."""
    values = as_values(X)
    labels = _encode(as_labels(A))
    if labels.shape[0] != values.shape[0]:
        raise ShapeMismatchError("labels and data differ in length")
    k = labels.max() + 1
    counts = np.bincount(labels, minlength=k).astype(float)
    sums = np.zeros((k, values.shape[1]))
    np.add.at(sums, labels, values)
    means = sums / counts[:, None]
    resid = values - means[labels]
    within = (resid**2).sum(axis=0)
    total = ((values - values.mean(axis=0)) ** 2).sum(axis=0)
    return DispersionSummary(within=within, total=total)
