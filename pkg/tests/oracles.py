"""Independent reference implementations used to check the fast paths.

Everything here is deliberately naive: exhaustive enumeration, insert-and-
refit, and grid search.  None of it shares code with the algorithms under
test beyond `dedup_weighted` for input normalization.
"""

import itertools

import numpy as np

from venncal.isotonic import WeightedPoints, dedup_weighted


def brute_force_isotonic(points: WeightedPoints) -> np.ndarray:
    """Exhaustive isotonic fit: try every partition into contiguous blocks,
    solve each by weighted block means, keep the feasible minimizer."""
    k = len(points)
    y = points.mean_labels
    w = points.weights.astype(float)
    best = None
    best_sse = np.inf
    for cuts in itertools.product((0, 1), repeat=k - 1):
        bounds = [0] + [i + 1 for i, c in enumerate(cuts) if c] + [k]
        fit = np.empty(k)
        prev = -np.inf
        feasible = True
        for a, b in zip(bounds[:-1], bounds[1:]):
            v = float(np.sum(y[a:b] * w[a:b]) / np.sum(w[a:b]))
            if v < prev - 1e-14:
                feasible = False
                break
            fit[a:b] = v
            prev = v
        if not feasible:
            continue
        sse = float(np.sum(w * (fit - y) ** 2))
        if sse < best_sse:
            best_sse = sse
            best = fit
    return best


def pooled_fit_at(scores, labels, s: float) -> float:
    """Isotonic fit of (scores, labels) evaluated at s, which must occur in scores."""
    from venncal.isotonic import fit_isotonic

    points = dedup_weighted(scores, labels)
    fitted = fit_isotonic(points)
    idx = np.searchsorted(points.scores, s)
    assert points.scores[idx] == s
    return float(fitted[idx])


def refit_interval(calib_scores, calib_labels, s: float) -> tuple[float, float]:
    """Interval by definition: refit with (s, 0) and with (s, 1) appended."""
    scores = np.append(np.asarray(calib_scores, dtype=float), s)
    labels = np.asarray(calib_labels, dtype=float)
    p0 = pooled_fit_at(scores, np.append(labels, 0.0), s)
    p1 = pooled_fit_at(scores, np.append(labels, 1.0), s)
    return p0, p1


def platt_objective(a, b, scores, labels, k_pos, k_neg):
    t_pos = (k_pos + 1.0) / (k_pos + 2.0)
    t_neg = 1.0 / (k_neg + 2.0)
    t = np.where(np.asarray(labels, dtype=float) == 1.0, t_pos, t_neg)
    z = a * np.asarray(scores, dtype=float) + b
    return float(np.sum(np.logaddexp(0.0, -z) + t * z))


def grid_platt(scores, labels) -> tuple[float, float, float]:
    """Grid search over a in [-50, 0), b in [-50, 50], refined to 1e-3 cells.

    The objective is convex, so each refinement pass keeps the true minimum
    within one coarse cell of the best grid point; the final local grid has
    1e-3 resolution.  Returns (a, b, objective).
    """
    y = np.asarray(labels, dtype=float)
    k_pos = int(np.sum(y == 1.0))
    k_neg = len(y) - k_pos
    lo_a, hi_a = -50.0, -1e-3
    lo_b, hi_b = -50.0, 50.0
    best = None
    for step in (1.0, 0.1, 0.01, 1e-3):
        a_grid = np.arange(lo_a, hi_a + step / 2, step)
        b_grid = np.arange(lo_b, hi_b + step / 2, step)
        for a in a_grid:
            for b in b_grid:
                val = platt_objective(a, b, scores, y, k_pos, k_neg)
                if best is None or val < best[2]:
                    best = (float(a), float(b), val)
        lo_a, hi_a = best[0] - 2 * step, min(best[0] + 2 * step, -1e-3)
        lo_b, hi_b = best[1] - 2 * step, best[1] + 2 * step
    return best
