import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.metrics import matthews_corrcoef

from lwkmeans.core import InvalidArgumentError, ShapeMismatchError
from lwkmeans.lwk import lambda_max, update_weights
from lwkmeans.metrics import (
    RelevanceVector,
    cer,
    confusion_matrix,
    feature_dispersion_summary,
    mcc,
    relevance_from_weights,
)

labelings = st.lists(st.integers(0, 4), min_size=1, max_size=40)


class TestCer:
    def test_identical(self):
        assert cer([0, 1, 2, 1], [0, 1, 2, 1]) == 0.0

    def test_label_swap(self):
        assert cer([0, 0, 1, 1], [1, 1, 0, 0]) == 0.0

    def test_one_of_four(self):
        assert cer([0, 0, 1, 1], [0, 1, 1, 1]) == 0.25

    def test_different_cluster_counts(self):
        # Best injective matching leaves the third cluster unmatched.
        assert cer([0, 0, 1, 1, 1, 1], [0, 0, 1, 1, 2, 2]) == pytest.approx(2 / 6)

    def test_length_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            cer([0, 1], [0, 1, 1])

    def test_unknown_method(self):
        with pytest.raises(InvalidArgumentError):
            cer([0, 1], [0, 1], method="rand")

    @given(labelings)
    def test_self_is_zero(self, a):
        assert cer(a, a) == 0.0
        assert cer(a, a, method="pairwise") == 0.0

    @given(labelings, st.permutations(range(5)), st.permutations(range(5)))
    def test_relabeling_invariant(self, a, pa, pb):
        a = np.array(a)
        b = np.roll(a, 1)
        ref = cer(a, b)
        assert cer(np.array(pa)[a], np.array(pb)[b]) == pytest.approx(ref)
        assert cer(np.array(pa)[a], np.array(pb)[b], "pairwise") == pytest.approx(cer(a, b, "pairwise"))

    @given(st.integers(1, 40).flatmap(lambda n: st.tuples(
        st.lists(st.integers(0, 3), min_size=n, max_size=n),
        st.lists(st.integers(0, 3), min_size=n, max_size=n))))
    def test_bounds_and_symmetry(self, case):
        a, b = case
        for method in ("matching", "pairwise"):
            v = cer(a, b, method)
            assert 0.0 <= v <= 1.0
        if len(set(a)) == len(set(b)):
            assert cer(a, b) == pytest.approx(cer(b, a))
        assert cer(a, b, "pairwise") == pytest.approx(cer(b, a, "pairwise"))

    def test_pairwise_by_enumeration(self):
        rng = np.random.default_rng(0)
        a, b = rng.integers(0, 3, 15), rng.integers(0, 2, 15)
        pairs = [(i, j) for i in range(15) for j in range(i + 1, 15)]
        disagree = sum((a[i] == a[j]) != (b[i] == b[j]) for i, j in pairs)
        assert cer(a, b, "pairwise") == pytest.approx(disagree / len(pairs))

    def test_confusion_counts(self):
        table = confusion_matrix([0, 0, 1, 1], [0, 1, 1, 1])
        np.testing.assert_array_equal(table, [[1, 1], [0, 2]])


class TestRelevance:
    @pytest.mark.parametrize("w,expected", [
        ((0.7587, 0.0), (True, False)),
        ((0.0, 0.0, 0.0), (False, False, False)),
        ((1e-300, 0.0), (True, False)),
    ])
    def test_cases(self, w, expected):
        np.testing.assert_array_equal(relevance_from_weights(w).bits, expected)

    def test_vector_is_readonly(self):
        r = RelevanceVector([1, 0, 1])
        assert r.p == 3
        with pytest.raises(ValueError):
            r.bits[0] = False

    def test_all_false_exactly_past_threshold(self):
        D = np.array([3.0, 1.0, 7.0])
        n, p, alpha = 10, 3, 0.2
        top = lambda_max(D, alpha, n, p)
        assert not relevance_from_weights(update_weights(D, alpha, top, 4, n, p).weights).bits.any()
        below = np.nextafter(top, 0)
        assert relevance_from_weights(update_weights(D, alpha, below, 4, n, p).weights).bits.any()


class TestMcc:
    def test_perfect(self):
        assert mcc([1, 1, 0, 0, 1], [1, 1, 0, 0, 1]) == 1.0

    def test_inverse(self):
        t = np.array([1, 1, 0, 0, 1], dtype=bool)
        assert mcc(t, ~t) == -1.0

    def test_zero(self):
        assert mcc([1, 1, 0, 0], [1, 0, 1, 0]) == 0.0

    def test_empty_margin_is_zero(self):
        assert mcc([1, 1, 1], [1, 0, 1]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            mcc([1, 0], [1, 0, 1])

    @pytest.mark.filterwarnings("ignore:A single label")
    @given(st.integers(2, 30).flatmap(lambda n: st.tuples(
        st.lists(st.booleans(), min_size=n, max_size=n), st.lists(st.booleans(), min_size=n, max_size=n))))
    def test_matches_sklearn_and_symmetric(self, case):
        t, q = map(np.array, case)
        assert mcc(t, q) == pytest.approx(mcc(q, t))
        assert mcc(t, q) == pytest.approx(matthews_corrcoef(t, q), abs=1e-12)
        if t.any() and not t.all():
            assert mcc(t, t) == 1.0


class TestDispersionSummary:
    def test_one_cluster(self):
        X = np.random.default_rng(1).normal(size=(12, 3))
        s = feature_dispersion_summary(X, np.zeros(12, dtype=int))
        np.testing.assert_allclose(s.within, s.total)

    def test_separated_clusters(self):
        X = np.array([[0.0, 1.0], [0.0, -1.0], [5.0, 2.0], [5.0, -2.0]])
        s = feature_dispersion_summary(X, [0, 0, 1, 1])
        assert s.within[0] == 0.0
        assert s.total[0] == pytest.approx(25.0)

    def test_decomposition(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(20, 3))
        labels = rng.integers(0, 2, 20)
        s = feature_dispersion_summary(X, labels)
        # Within = total minus size-weighted squared offsets of the group means.
        grand = X.mean(axis=0)
        between = sum((labels == c).sum() * (X[labels == c].mean(axis=0) - grand) ** 2 for c in (0, 1))
        np.testing.assert_allclose(s.within, 20 * X.var(axis=0) - between, atol=1e-9)
        assert np.all(s.within <= s.total + 1e-9)
