from fractions import Fraction

import numpy as np
import pytest

from venncal.isotonic import (
    build_csd,
    dedup_weighted,
    fit_isotonic,
    gcm_corners,
    lower_prob_curve,
    lower_prob_scan,
    upper_prob_curve,
    upper_prob_scan,
)


def random_points(rng, max_k=8, ties=True):
    k = int(rng.integers(1, max_k + 1))
    if ties:
        scores = rng.integers(0, max(2, k), size=k).astype(float)
    else:
        scores = rng.normal(size=k)
    labels = rng.integers(0, 2, size=k)
    return dedup_weighted(scores, labels)


class TestDedup:
    def test_no_duplicates(self):
        pts = dedup_weighted([1, 2, 3], [0, 0, 1])
        assert pts.scores.tolist() == [1, 2, 3]
        assert pts.weights.tolist() == [1, 1, 1]
        assert pts.mean_labels.tolist() == [0, 0, 1]

    def test_duplicates_merge(self):
        pts = dedup_weighted([1, 1, 2], [0, 1, 1])
        assert pts.scores.tolist() == [1, 2]
        assert pts.weights.tolist() == [2, 1]
        assert pts.mean_labels.tolist() == [0.5, 1.0]

    def test_singleton(self):
        pts = dedup_weighted([5], [1])
        assert pts.scores.tolist() == [5]
        assert pts.weights.tolist() == [1]
        assert pts.mean_labels.tolist() == [1.0]

    def test_unsorted_input(self):
        pts = dedup_weighted([3, 1, 1, 2], [1, 0, 1, 0])
        assert pts.scores.tolist() == [1, 2, 3]
        assert pts.weights.tolist() == [2, 1, 1]
        assert pts.label_sums.tolist() == [1.0, 0.0, 1.0]

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty calibration set"):
            dedup_weighted([], [])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="length mismatch"):
            dedup_weighted([1, 2], [0])

    def test_nan_rejected(self):
        with pytest.raises(ValueError, match="NaN"):
            dedup_weighted([1, float("nan")], [0, 1])


class TestCsd:
    def test_unit_weights(self):
        pts = dedup_weighted([1, 2, 3], [0, 0, 1])
        csd = build_csd(pts)
        assert csd.tolist() == [[0, 0], [1, 0], [2, 0], [3, 1]]

    def test_merged_weights(self):
        pts = dedup_weighted([1, 1, 2], [0, 1, 1])
        csd = build_csd(pts)
        assert csd.tolist() == [[0, 0], [2, 1], [3, 2]]

    def test_single_point(self):
        pts = dedup_weighted([1], [0])
        assert build_csd(pts).tolist() == [[0, 0], [1, 0]]


class TestFitIsotonic:
    def test_single_pooled_block(self):
        pts = dedup_weighted([1, 2], [1, 0])
        assert fit_isotonic(pts).tolist() == [0.5, 0.5]

    def test_already_monotone(self):
        pts = dedup_weighted([1, 2, 3], [0, 1, 1])
        assert fit_isotonic(pts).tolist() == [0, 1, 1]

    def test_weighted_instance(self):
        # w=(1,2,1,1), y'=(0,1,0,1): pooling the middle pair gives 2/3
        scores = [1, 2, 2, 3, 4]
        labels = [0, 1, 1, 0, 1]
        fit = fit_isotonic(dedup_weighted(scores, labels))
        assert np.allclose(fit, [0, 2 / 3, 2 / 3, 1], atol=1e-12)

    def test_matches_brute_force(self):
        from oracles import brute_force_isotonic

        rng = np.random.default_rng(13)
        for _ in range(200):
            pts = random_points(rng)
            assert np.allclose(fit_isotonic(pts), brute_force_isotonic(pts), atol=1e-9)

    def test_nondecreasing_and_level_set_means(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            pts = random_points(rng, max_k=12)
            fit = fit_isotonic(pts)
            assert np.all(np.diff(fit) >= -1e-15)
            for v in np.unique(fit):
                mask = fit == v
                mean = np.sum(pts.mean_labels[mask] * pts.weights[mask]) / np.sum(
                    pts.weights[mask])
                assert abs(mean - v) <= 1e-12

    def test_corner_slopes_increase(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            pts = random_points(rng, max_k=12)
            corners, _ = gcm_corners(build_csd(pts))
            slopes = np.diff(corners[:, 1]) / np.diff(corners[:, 0])
            assert np.all(np.diff(slopes) > 0)


class TestProbCurves:
    def test_table_rows_upper(self):
        up = upper_prob_curve(dedup_weighted([1, 2, 3], [0, 0, 1]))
        assert np.allclose(up, [1 / 3, 1 / 2, 1], atol=1e-15)
        up = upper_prob_curve(dedup_weighted([1, 2, 3], [1, 1, 1]))
        assert up.tolist() == [1, 1, 1]
        up = upper_prob_curve(dedup_weighted([1, 2, 3, 4], [1, 0, 1, 0]))
        assert np.allclose(up, [3 / 5, 3 / 5, 2 / 3, 2 / 3], atol=1e-15)

    def test_table_rows_lower(self):
        lo = lower_prob_curve(dedup_weighted([1, 2, 3], [0, 0, 1]))
        assert np.allclose(lo, [0, 0, 1 / 2], atol=1e-15)
        lo = lower_prob_curve(dedup_weighted([1, 2, 3], [0, 0, 0]))
        assert lo.tolist() == [0, 0, 0]
        lo = lower_prob_curve(dedup_weighted([1, 2, 3, 4], [1, 1, 0, 1]))
        assert np.allclose(lo, [1 / 2, 1 / 2, 1 / 2, 3 / 5], atol=1e-15)

    def test_constant_label_extremes(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            k = int(rng.integers(1, 10))
            scores = rng.normal(size=k)
            assert lower_prob_curve(dedup_weighted(scores, np.zeros(k))).tolist() == [0.0] * k
            assert upper_prob_curve(dedup_weighted(scores, np.ones(k))).tolist() == [1.0] * k

    def test_monotone_and_separated(self):
        rng = np.random.default_rng(21)
        for _ in range(300):
            pts = random_points(rng, max_k=12)
            lo = lower_prob_curve(pts)
            up = upper_prob_curve(pts)
            assert np.all(np.diff(lo) >= -1e-15)
            assert np.all(np.diff(up) >= -1e-15)
            assert np.all(lo < up)

    def test_symmetry_identity_exact(self):
        rng = np.random.default_rng(99)
        for _ in range(300):
            k = int(rng.integers(1, 13))
            scores = rng.integers(0, max(2, k), size=k).astype(float)
            labels = rng.integers(0, 2, size=k)
            lo = lower_prob_scan(dedup_weighted(scores, labels))
            up = upper_prob_scan(dedup_weighted(-scores, 1 - labels))
            k2 = len(lo.values)
            for i in range(k2):
                lhs = Fraction(int(lo.num[i]), int(lo.den[i]))
                rhs = 1 - Fraction(int(up.num[k2 - 1 - i]), int(up.den[k2 - 1 - i]))
                assert lhs == rhs

    def test_push_counts_linear(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            pts = random_points(rng, max_k=30, ties=False)
            k = len(pts)
            for scan in (lower_prob_scan(pts), upper_prob_scan(pts)):
                assert scan.corner_pushes <= 2 * k + 2
                assert scan.sweep_pushes <= 2 * k + 2

    def test_slope_components_reproduce_values(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            pts = random_points(rng, max_k=10)
            for scan in (lower_prob_scan(pts), upper_prob_scan(pts)):
                assert np.array_equal(scan.num / scan.den, scan.values)
                assert np.all(scan.den >= 1)

    def test_curves_match_per_score_refits_at_scale(self):
        # the sweep must agree with one full refit per distinct score: insert
        # the test point just beside the score and read the fit at its slot
        rng = np.random.default_rng(7)
        for trial in range(12):
            k = 150
            if trial % 2:
                scores = rng.normal(size=k)
            else:
                scores = rng.integers(0, 40, size=k).astype(float)
            labels = rng.integers(0, 2, size=k)
            pts = dedup_weighted(scores, labels)
            up = upper_prob_curve(pts)
            lo = lower_prob_curve(pts)
            gaps = np.diff(np.concatenate([[pts.scores[0] - 2], pts.scores,
                                           [pts.scores[-1] + 2]]))
            for i, s in enumerate(pts.scores):
                left = s - 0.25 * gaps[i]
                right = s + 0.25 * gaps[i + 1]
                ref1 = dedup_weighted(np.append(scores, left), np.append(labels, 1.0))
                fit1 = fit_isotonic(ref1)
                assert abs(fit1[np.searchsorted(ref1.scores, left)] - up[i]) <= 1e-9
                ref0 = dedup_weighted(np.append(scores, right), np.append(labels, 0.0))
                fit0 = fit_isotonic(ref0)
                assert abs(fit0[np.searchsorted(ref0.scores, right)] - lo[i]) <= 1e-9
