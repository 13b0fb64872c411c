from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lwkmeans.core import InvalidArgumentError, LwkConfig, standardize
from lwkmeans.datagen import gen_example1, gen_toy1_analog
from lwkmeans.lwk import first_dispersions, fit, lambda_max, select_alpha
from lwkmeans.metrics import mcc, relevance_from_weights
from lwkmeans.regpath import PathPoint, _aggregate, auto_grid, select_lambda_plateau, sweep


@pytest.fixture(scope="module")
def toy1():
    X, A, R = gen_toy1_analog(0)
    return standardize(X.values).values, A, R


@pytest.fixture(scope="module")
def toy1_path(toy1):
    Z, A, _ = toy1
    cfg = LwkConfig(k=3, n_restarts=10)
    return sweep(Z, cfg, auto_grid(Z, cfg), truth=A)


def _point(lam, median):
    median = np.asarray(median, dtype=float)
    return PathPoint(lam, median, median, float((median > 0).sum()), 0.0)


class TestSweep:
    def test_single_point_matches_fit(self):
        X = gen_example1(0)[0].values
        cfg = LwkConfig(k=4, lam=0.0, n_restarts=1, alpha=0.05)
        (pt,) = sweep(X, cfg, [0.3])
        ref = fit(X, replace(cfg, lam=0.3), key=(0, 0))
        np.testing.assert_array_equal(pt.mean_weights, ref.weights.weights)
        np.testing.assert_array_equal(pt.median_weights, ref.weights.weights)
        assert pt.mean_cer is None and pt.median_cer is None

    def test_beyond_threshold(self, toy1):
        Z, A, _ = toy1
        cfg = LwkConfig(k=3, n_restarts=4)
        top = auto_grid(Z, cfg)[0]
        (pt,) = sweep(Z, cfg, [top * 1.01], truth=A)
        assert pt.n_selected_mean == 0 and pt.degenerate_fraction == 1.0
        assert pt.n_selected_median == 0

    def test_grid_top_zeroes_every_restart(self, toy1):
        Z, _, _ = toy1
        cfg = LwkConfig(k=3, n_restarts=4)
        alpha = select_alpha(Z, 3)
        top = auto_grid(Z, cfg, alpha=alpha)[0]
        n, p = Z.shape
        assert top == max(lambda_max(first_dispersions(Z, cfg, (0, j)).d, alpha, n, p) for j in range(4))

    def test_auto_grid_shape(self, toy1):
        g = auto_grid(toy1[0], LwkConfig(k=3, n_restarts=2), n_points=12)
        assert g.size == 12 and np.all(np.diff(g) < 0)
        assert g[-1] == pytest.approx(g[0] * 1e-3)

    def test_deterministic_across_jobs(self, toy1):
        Z, A, _ = toy1
        cfg = LwkConfig(k=3, n_restarts=4)
        grid = [0.2, 0.05, 0.01]
        a = sweep(Z, cfg, grid, truth=A, n_jobs=1)
        b = sweep(Z, cfg, grid, truth=A, n_jobs=4)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x.weights, y.weights)
            assert x.median_cer == y.median_cer

    def test_cer_fields_in_range(self, toy1_path):
        for pt in toy1_path:
            assert 0.0 <= pt.mean_cer <= 1.0 and 0.0 <= pt.median_cer <= 1.0
            assert np.all(pt.mean_weights >= 0)

    def test_median_is_elementwise(self, toy1_path):
        for pt in toy1_path[::5]:
            w = np.sort(pt.weights, axis=0)
            t = w.shape[0]
            ref = 0.5 * (w[(t - 1) // 2] + w[t // 2])
            np.testing.assert_array_equal(pt.median_weights, ref)

    @pytest.mark.parametrize("grid", [[], [np.nan], [-0.1, 0.2]])
    def test_rejects_bad_grid(self, grid):
        with pytest.raises(InvalidArgumentError):
            sweep(np.random.default_rng(0).normal(size=(10, 2)), LwkConfig(k=2), grid)


class TestMedianRobustness:
    @settings(max_examples=30)
    @given(st.integers(0, 9), st.integers(0, 2**32 - 1))
    def test_outlier_restarts_leave_median(self, n_bad, seed):
        # The weights that stay are already sorted, so the median slots keep their values.
        rng = np.random.default_rng(seed)
        t, p = 20, 5
        good = np.sort(rng.uniform(0.5, 1.0, size=(t, p)), axis=0)
        base = np.median(good, axis=0)
        bad = good.copy()
        bad[:n_bad] = 0.0
        mean_shift = good.mean(axis=0) - bad.mean(axis=0)
        np.testing.assert_array_equal(np.median(bad, axis=0), base)
        assert n_bad == 0 or np.all(mean_shift > 0)

    def test_aggregate_with_adversarial_restart(self, toy1):
        Z, _, _ = toy1
        cfg = LwkConfig(k=3, lam=0.05, n_restarts=1, alpha=select_alpha(Z, 3))
        runs = [fit(Z, cfg, key=(0, j)) for j in range(20)]
        clean = _aggregate(0.05, runs[:19] + [runs[0]], None)
        zeroed = replace(runs[1], weights=type(runs[1].weights)(np.zeros(Z.shape[1])))
        dirty = _aggregate(0.05, runs[:19] + [zeroed], None)
        np.testing.assert_array_equal(clean.median_weights, dirty.median_weights)
        assert not np.array_equal(clean.mean_weights, dirty.mean_weights)


class TestPlateau:
    def test_longest_run(self):
        path = [_point(l, [1.0] * c + [0.0] * (10 - c)) for l, c in zip([5, 4, 3, 2, 1], [0, 4, 4, 4, 10])]
        pl = select_lambda_plateau(path)
        assert pl.indices == (1, 2, 3) and pl.n_features == 4
        assert (pl.lam_high, pl.lam_low, pl.recommended) == (4, 2, 3)

    def test_counts_override(self):
        path = [_point(l, [0.0]) for l in (5, 4, 3, 2, 1)]
        pl = select_lambda_plateau(path, counts=[0, 4, 4, 4, 10], p=10)
        assert pl.indices == (1, 2, 3)

    def test_distinct_counts(self):
        path = [_point(l, [0.0]) for l in (4, 3, 2, 1)]
        assert select_lambda_plateau(path, counts=[0, 1, 2, 3], p=5) is None

    def test_first_run_wins_ties(self):
        path = [_point(l, [0.0]) for l in range(6)]
        pl = select_lambda_plateau(path, counts=[1, 1, 2, 2, 0, 0], p=4)
        assert pl.indices == (0, 1)

    def test_full_and_empty_runs_ignored(self):
        path = [_point(l, [0.0]) for l in range(7)]
        assert select_lambda_plateau(path, counts=[0, 0, 0, 3, 3, 3, 3], p=3) is None

    def test_toy1_plateau(self, toy1, toy1_path):
        _, _, R = toy1
        counts = [pt.n_selected_median for pt in toy1_path]
        assert counts[0] == 0
        pl = select_lambda_plateau(toy1_path)
        assert pl is not None and pl.n_features == 4
        mid = toy1_path[pl.indices[len(pl.indices) // 2]]
        assert mid.lam == pl.recommended
        assert mcc(R, relevance_from_weights(mid.median_weights)) == 1.0
