import math

import numpy as np
import pytest

from venncal.metrics import brier_loss, evaluate, log_loss


class TestLogLoss:
    def test_no_information_point(self):
        assert log_loss(0.5, 0) == 1.0
        assert log_loss(0.5, 1) == 1.0

    def test_perfect_prediction(self):
        assert log_loss(1.0, 1) == 0.0
        assert log_loss(0.0, 0) == 0.0

    def test_categorical_mistake_is_infinite(self):
        assert log_loss(0.0, 1) == math.inf
        assert log_loss(1.0, 0) == math.inf

    def test_binary_logarithm(self):
        assert log_loss(0.25, 1) == pytest.approx(2.0)

    def test_range_validation(self):
        with pytest.raises(ValueError):
            log_loss(1.5, 1)
        with pytest.raises(ValueError):
            log_loss(-0.1, 0)
        with pytest.raises(ValueError):
            log_loss(0.5, 2)


class TestBrierLoss:
    def test_no_information_point(self):
        assert brier_loss(0.5, 0) == 1.0
        assert brier_loss(0.5, 1) == 1.0

    def test_perfect_prediction(self):
        assert brier_loss(1.0, 1) == 0.0
        assert brier_loss(0.0, 0) == 0.0

    def test_maximal_mistake(self):
        assert brier_loss(0.0, 1) == 4.0
        assert brier_loss(1.0, 0) == 4.0


class TestEvaluate:
    def test_simple_means(self):
        rep = evaluate([1.0, 0.5], [1, 0])
        assert rep.mean_log_loss == 0.5
        assert rep.mean_brier_loss == 0.5
        assert rep.n == 2 and rep.n_infinite == 0

    def test_no_information_vector(self):
        rep = evaluate([0.5] * 10, [0, 1] * 5)
        assert rep.mean_log_loss == 1.0
        assert rep.mean_brier_loss == 1.0

    def test_infinite_propagates(self):
        rep = evaluate([0.0, 0.9], [1, 1])
        assert rep.mean_log_loss == math.inf
        assert rep.n_infinite == 1
        assert math.isfinite(rep.mean_brier_loss)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(1)
        p = rng.uniform(size=50)
        y = rng.integers(0, 2, size=50)
        perm = rng.permutation(50)
        a = evaluate(p, y)
        b = evaluate(p[perm], y[perm])
        assert a.mean_log_loss == pytest.approx(b.mean_log_loss, abs=1e-12)
        assert a.mean_brier_loss == pytest.approx(b.mean_brier_loss, abs=1e-12)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            evaluate([0.5], [0, 1])


def test_both_losses_are_proper():
    # expected loss under true probability q is minimized at p = q
    p_grid = np.linspace(0.0, 1.0, 101)
    for q in np.arange(0.1, 0.95, 0.1):
        exp_log = q * np.array([log_loss(p, 1) for p in p_grid]) + (1 - q) * np.array(
            [log_loss(p, 0) for p in p_grid])
        exp_brier = q * np.array([brier_loss(p, 1) for p in p_grid]) + (1 - q) * np.array(
            [brier_loss(p, 0) for p in p_grid])
        assert abs(p_grid[np.argmin(exp_log)] - q) <= 0.005
        assert abs(p_grid[np.argmin(exp_brier)] - q) <= 0.005
