"""Built-in scoring algorithms so the calibration pipeline runs end to end.

A scorer maps feature vectors to real scores, higher meaning more likely to
be labelled 1.  Three kinds are provided: a ridge-regularized logistic model
trained by gradient descent (its score is the raw linear predictor, not the
squashed probability; calibration is invariant to monotone transforms and
raw scores avoid saturation), a one-feature decision stump, and a constant
scorer emitting the empirical positive rate.  All training is deterministic
given the spec and the data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from venncal.exceptions import DegenerateModelError

__all__ = [
    "ScorerSpec",
    "LogisticScorer",
    "StumpScorer",
    "ConstantScorer",
    "train_scorer",
    "scorer_from_dict",
]

KINDS = ("logistic", "stump", "constant")


@dataclass(frozen=True)
class ScorerSpec:
    """Scorer kind plus hyperparameters (only logistic uses them)."""

    kind: str = "logistic"
    learning_rate: float = 1.0
    max_iter: int = 1000
    ridge: float = 1e-4

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scorer kind {self.kind!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.max_iter <= 0:
            raise ValueError("max_iter must be positive")
        if self.ridge <= 0:
            raise ValueError("ridge must be positive")


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return X


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class _Scorer:
    n_features: int

    def _check_width(self, X: np.ndarray) -> None:
        if X.shape[1] != self.n_features:
            raise ValueError(
                f"feature dimension mismatch: scorer expects {self.n_features}, got {X.shape[1]}")

    def score(self, x) -> float:
        return float(self.score_many(np.asarray(x, dtype=float)[None, :])[0])

    def probability(self, x) -> float:
        return float(self.probability_many(np.asarray(x, dtype=float)[None, :])[0])


@dataclass
class LogisticScorer(_Scorer):
    weights: np.ndarray
    intercept: float
    loss_history: list[float]

    @property
    def n_features(self) -> int:
        return len(self.weights)

    def score_many(self, X) -> np.ndarray:
        X = _as_matrix(X)
        self._check_width(X)
        return X @ self.weights + self.intercept

    def probability_many(self, X) -> np.ndarray:
        return _sigmoid(self.score_many(X))

    def to_dict(self) -> dict:
        return {"kind": "logistic", "weights": self.weights.tolist(),
                "intercept": self.intercept}


@dataclass
class StumpScorer(_Scorer):
    feature: int
    threshold: float
    high_is_one: bool

    @property
    def n_features(self) -> int:
        return self._n_features

    def __post_init__(self):
        self._n_features = self.feature + 1  # patched by train_scorer

    def score_many(self, X) -> np.ndarray:
        X = _as_matrix(X)
        self._check_width(X)
        above = X[:, self.feature] > self.threshold
        return (above == self.high_is_one).astype(float)

    probability_many = score_many

    def to_dict(self) -> dict:
        return {"kind": "stump", "feature": self.feature, "threshold": self.threshold,
                "high_is_one": self.high_is_one, "n_features": self._n_features}


@dataclass
class ConstantScorer(_Scorer):
    value: float
    _n_features: int = 1

    @property
    def n_features(self) -> int:
        return self._n_features

    def score_many(self, X) -> np.ndarray:
        X = _as_matrix(X)
        self._check_width(X)
        return np.full(len(X), self.value)

    probability_many = score_many

    def to_dict(self) -> dict:
        return {"kind": "constant", "value": self.value, "n_features": self._n_features}


def _train_logistic(spec: ScorerSpec, X: np.ndarray, y: np.ndarray) -> LogisticScorer:
    if len(np.unique(y)) < 2:
        raise DegenerateModelError("logistic scorer needs both classes present")
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    ridge = spec.ridge

    def loss(w, b):
        z = X @ w + b
        return float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * ridge * np.dot(w, w))

    history = [loss(w, b)]
    for _ in range(spec.max_iter):
        z = X @ w + b
        resid = _sigmoid(z) - y
        g_w = X.T @ resid / n + ridge * w
        g_b = float(np.mean(resid))
        gnorm2 = float(np.dot(g_w, g_w) + g_b * g_b)
        if gnorm2 < 1e-16:  # gradient norm below 1e-8
            break
        step = spec.learning_rate
        base = history[-1]
        accepted = False
        while step >= 1e-20:
            w_new = w - step * g_w
            b_new = b - step * g_b
            val = loss(w_new, b_new)
            if val <= base - 1e-4 * step * gnorm2:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break  # no descent step left at working precision
        w, b = w_new, b_new
        history.append(val)
    return LogisticScorer(w, b, history)


def _train_stump(X: np.ndarray, y: np.ndarray) -> StumpScorer:
    n, d = X.shape
    n_ones = int(np.sum(y))
    n_zeros = n - n_ones
    best = None  # (errors, feature, threshold, orientation_rank)
    for j in range(d):
        xj = X[:, j]
        order = np.argsort(xj, kind="stable")
        xs = xj[order]
        ys = y[order]
        cut = np.nonzero(xs[1:] != xs[:-1])[0] + 1  # split before position t
        if len(cut) == 0:
            continue
        ones_left = np.cumsum(ys)[cut - 1]
        zeros_left = cut - ones_left
        thresholds = 0.5 * (xs[cut - 1] + xs[cut])
        err_high1 = ones_left + (n_zeros - zeros_left)
        err_high0 = zeros_left + (n_ones - ones_left)
        for t in range(len(cut)):
            for rank, (err, high) in enumerate(((err_high1[t], True), (err_high0[t], False))):
                cand = (int(err), j, float(thresholds[t]), rank)
                if best is None or cand < best:
                    best = cand
                    best_high = high
    if best is None:
        raise DegenerateModelError("stump scorer found no usable split (all features constant)")
    _, feature, threshold, _ = best
    stump = StumpScorer(feature, threshold, best_high)
    stump._n_features = d
    return stump


def train_scorer(spec: ScorerSpec, X, y):
    """Train the scorer described by `spec` on features X and binary labels y."""
    X = _as_matrix(X)
    y = np.asarray(y, dtype=float)
    if len(X) == 0:
        raise ValueError("empty training set")
    if len(X) != len(y):
        raise ValueError("X and y must have the same number of rows")
    if spec.kind == "logistic":
        return _train_logistic(spec, X, y)
    if spec.kind == "stump":
        return _train_stump(X, y)
    scorer = ConstantScorer(float(np.mean(y)))
    scorer._n_features = X.shape[1]
    return scorer


def scorer_from_dict(d: dict):
    """Rebuild a trained scorer from its serialized form."""
    kind = d.get("kind")
    if kind == "logistic":
        return LogisticScorer(np.asarray(d["weights"], dtype=float),
                              float(d["intercept"]), [])
    if kind == "stump":
        stump = StumpScorer(int(d["feature"]), float(d["threshold"]), bool(d["high_is_one"]))
        stump._n_features = int(d["n_features"])
        return stump
    if kind == "constant":
        scorer = ConstantScorer(float(d["value"]))
        scorer._n_features = int(d["n_features"])
        return scorer
    raise ValueError(f"unknown scorer kind {kind!r}")
