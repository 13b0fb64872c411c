"""Globally optimal k-means on a single feature (dynamic programming on sorted values)."""

import numpy as np


def _prefix(x):
    s1 = np.concatenate(([0.0], np.cumsum(x)))
    s2 = np.concatenate(([0.0], np.cumsum(x * x)))
    return s1, s2


def _sse(s1, s2, j, i):
    # Sum of squares of sorted x[j:i] about its mean; j < i elementwise.
    m = i - j
    tot = s1[i] - s1[j]
    return np.maximum(s2[i] - s2[j] - tot * tot / m, 0.0)


def _dense(x, k):
    n = x.size
    s1, s2 = _prefix(x)
    idx = np.arange(n + 1)
    j, i = np.meshgrid(idx, idx, indexing="ij")
    valid = j < i
    cost = np.full((n + 1, n + 1), np.inf)
    cost[valid] = _sse(s1, s2, j[valid], i[valid])
    best = cost[0].copy()
    for _ in range(1, k):
        best = np.min(best[:, None] + cost, axis=0)
    return float(best[n])


def _divide_and_conquer(x, k):
    n = x.size
    s1, s2 = _prefix(x)
    prev = np.full(n + 1, np.inf)
    prev[1:] = _sse(s1, s2, np.zeros(n, dtype=np.int64), np.arange(1, n + 1))
    prev[0] = 0.0
    for _ in range(1, k):
        cur = np.full(n + 1, np.inf)
        cur[0] = 0.0
        # Optimal split points are monotone in i, so each row is solved by recursion.
        stack = [(1, n, 0, n - 1)]
        while stack:
            lo, hi, olo, ohi = stack.pop()
            if lo > hi:
                continue
            mid = (lo + hi) // 2
            js = np.arange(olo, min(ohi, mid - 1) + 1)
            if js.size == 0:
                opt = olo
            else:
                vals = prev[js] + _sse(s1, s2, js, np.full(js.size, mid))
                pos = int(np.argmin(vals))
                cur[mid] = vals[pos]
                opt = int(js[pos])
            stack.append((lo, mid - 1, olo, opt))
            stack.append((mid + 1, hi, opt, ohi))
        prev = cur
    return float(prev[n])


def optimal_sse(x, k) -> float:
    """Minimum within-cluster sum of squares of ``x`` split into ``k`` groups."""
    x = np.sort(np.asarray(x, dtype=float))
    if k <= 1 or x.size <= 1:
        return float(((x - x.mean()) ** 2).sum()) if k <= 1 else 0.0
    if k >= np.unique(x).size:
        return 0.0
    # Center first so the prefix-sum formula stays accurate.
    x = x - x.mean()
    if x.size <= 1500:
        return _dense(x, k)
    return _divide_and_conquer(x, k)


def optimal_dispersions(values, k) -> np.ndarray:
    """Per-column optimal 1-D k-means dispersion."""
    values = np.asarray(values, dtype=float)
    return np.array([optimal_sse(values[:, l], k) for l in range(values.shape[1])])
