"""Interval calibrator: turn raw scores into lower/upper probability pairs.

Construction sorts and deduplicates the calibration scores, then tabulates
the lower and upper probability curves in linear time.  A query for a test
score s answers from the tables: an exact hit on the i-th distinct score
returns (lower[i], upper[i]); a score strictly between two distinct scores
returns the lower value of its left neighbour and the upper value of its
right neighbour; outside the score range the missing side falls back to the
boundary conventions 0 and 1.  This reproduces, for every s, the isotonic
fit at s of the calibration set with (s, 0) respectively (s, 1) appended.

Queries go through `numpy.searchsorted` on the key array; `search_tree`
materializes the equivalent midpoint-balanced binary search tree (internal
nodes keyed by distinct scores, leaves holding interval payloads) for
inspection and cross-checking.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from venncal.isotonic import (
    WeightedPoints,
    dedup_weighted,
    lower_prob_scan,
    upper_prob_scan,
)
from venncal.merging import merge_brier, merge_log

__all__ = ["ProbInterval", "IvapCalibrator", "TreeNode", "tree_size", "tree_depth"]


@dataclass(frozen=True)
class ProbInterval:
    """Lower/upper probability pair; always p0 < p1."""

    p0: float
    p1: float


@dataclass
class TreeNode:
    """Node of the lookup tree; leaves carry interval payloads and no key."""

    p0: float
    p1: float
    key: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.key is None


def tree_size(node: TreeNode | None) -> int:
    if node is None:
        return 0
    return 1 + tree_size(node.left) + tree_size(node.right)


def tree_depth(node: TreeNode | None) -> int:
    """Maximum number of nodes on a root-to-leaf path."""
    if node is None:
        return 0
    return 1 + max(tree_depth(node.left), tree_depth(node.right))


class IvapCalibrator:
    """Calibration rule mapping any test score to a probability interval.

    Immutable after construction; concurrent queries need no locking.
    """

    FORMAT = "venncal.ivap"
    VERSION = 1

    def __init__(self, points: WeightedPoints, p0: np.ndarray, p1: np.ndarray,
                 push_counts: tuple[int, int, int, int] | None = None):
        self.points = points
        self.p0 = p0
        self.p1 = p1
        # (lower corner, lower sweep, upper corner, upper sweep) stack pushes
        self.push_counts = push_counts
        self._tree: TreeNode | None = None

    @classmethod
    def fit(cls, scores, labels) -> "IvapCalibrator":
        """Build the rule from calibration scores and binary labels.

        Scores must be finite; labels must be 0 or 1.  Construction is
        O(k log k) for the sort and O(k) afterwards.
        """
        s = np.asarray(scores, dtype=float)
        y = np.asarray(labels, dtype=float)
        if s.size and not np.isfinite(s).all():
            raise ValueError("calibration scores must be finite")
        if y.size and not np.isin(y, (0.0, 1.0)).all():
            raise ValueError("labels must be 0 or 1")
        points = dedup_weighted(s, y)
        lo = lower_prob_scan(points)
        up = upper_prob_scan(points)
        counts = (lo.corner_pushes, lo.sweep_pushes, up.corner_pushes, up.sweep_pushes)
        return cls(points, lo.values, up.values, counts)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def n_positive(self) -> int:
        return int(round(float(np.sum(self.points.label_sums))))

    @property
    def n_negative(self) -> int:
        return int(np.sum(self.points.weights)) - self.n_positive

    def predict_intervals(self, scores) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized interval query; returns (lower, upper) arrays."""
        s = np.asarray(scores, dtype=float)
        if not np.isfinite(s).all():
            raise ValueError("test scores must be finite")
        keys = self.points.scores
        k = len(keys)
        idx = np.searchsorted(keys, s, side="left")
        clipped = np.minimum(idx, k - 1)
        exact = (idx < k) & (keys[clipped] == s)
        lo = np.where(idx >= 1, self.p0[np.maximum(idx - 1, 0)], 0.0)
        hi = np.where(idx < k, self.p1[clipped], 1.0)
        lo = np.where(exact, self.p0[clipped], lo)
        hi = np.where(exact, self.p1[clipped], hi)
        return lo, hi

    def predict_interval(self, score: float) -> ProbInterval:
        lo, hi = self.predict_intervals(np.asarray([score], dtype=float))
        return ProbInterval(float(lo[0]), float(hi[0]))

    def predict(self, score: float, loss: str = "log") -> float:
        """Single precise probability for one test score."""
        interval = self.predict_interval(score)
        return merge_interval(interval.p0, interval.p1, loss)

    def predict_many(self, scores, loss: str = "log") -> np.ndarray:
        lo, hi = self.predict_intervals(scores)
        if loss == "log":
            return merge_log(lo[None, :], hi[None, :])
        if loss == "brier":
            return merge_brier(lo[None, :], hi[None, :])
        raise ValueError(f"unknown loss {loss!r}")

    # ---- explicit search tree ------------------------------------------

    def search_tree(self) -> TreeNode:
        """Midpoint-balanced lookup tree over the distinct scores (cached).

        The tree has one internal node per distinct score and k'+1 leaves,
        2k'+1 nodes in total; querying it is equivalent to the array path.
        """
        if self._tree is None:
            self._tree = self._build_tree(1, len(self.points))
        return self._tree

    def _payload(self, lower_idx: int, upper_idx: int) -> tuple[float, float]:
        # 1-based indices with the boundary conventions lower[0]=0, upper[k'+1]=1
        k = len(self.points)
        lo = 0.0 if lower_idx == 0 else float(self.p0[lower_idx - 1])
        hi = 1.0 if upper_idx == k + 1 else float(self.p1[upper_idx - 1])
        return lo, hi

    def _build_tree(self, a: int, b: int) -> TreeNode:
        keys = self.points.scores
        if b == a:
            lo, hi = self._payload(a, a)
            return TreeNode(lo, hi, key=float(keys[a - 1]),
                            left=TreeNode(*self._payload(a - 1, a)),
                            right=TreeNode(*self._payload(a, a + 1)))
        if b == a + 1:
            lo, hi = self._payload(a, a)
            return TreeNode(lo, hi, key=float(keys[a - 1]),
                            left=TreeNode(*self._payload(a - 1, a)),
                            right=self._build_tree(b, b))
        c = (a + b) // 2
        lo, hi = self._payload(c, c)
        return TreeNode(lo, hi, key=float(keys[c - 1]),
                        left=self._build_tree(a, c - 1),
                        right=self._build_tree(c + 1, b))

    def query_tree(self, score: float) -> ProbInterval:
        """Answer one query by walking the explicit tree."""
        if not np.isfinite(score):
            raise ValueError("test scores must be finite")
        node = self.search_tree()
        while not node.is_leaf:
            if score < node.key:
                node = node.left
            elif score > node.key:
                node = node.right
            else:
                return ProbInterval(node.p0, node.p1)
        return ProbInterval(node.p0, node.p1)

    # ---- serialization --------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": self.FORMAT,
            "version": self.VERSION,
            "scores": self.points.scores.tolist(),
            "weights": self.points.weights.tolist(),
            "label_sums": self.points.label_sums.tolist(),
            "p0": self.p0.tolist(),
            "p1": self.p1.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IvapCalibrator":
        if d.get("format") != cls.FORMAT:
            raise ValueError(f"not an interval-calibrator record: {d.get('format')!r}")
        if d.get("version") != cls.VERSION:
            raise ValueError(f"unsupported version {d.get('version')!r}")
        points = WeightedPoints(
            np.asarray(d["scores"], dtype=float),
            np.asarray(d["weights"], dtype=np.int64),
            np.asarray(d["label_sums"], dtype=float),
        )
        return cls(points, np.asarray(d["p0"], dtype=float), np.asarray(d["p1"], dtype=float))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)

    @classmethod
    def load(cls, path) -> "IvapCalibrator":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def merge_interval(p0: float, p1: float, loss: str = "log") -> float:
    """Collapse one interval to a point probability under the given loss."""
    if loss == "log":
        return float(p1 / ((1.0 - p0) + p1))
    if loss == "brier":
        return float(p1 + 0.5 * p0 * p0 - 0.5 * p1 * p1)
    raise ValueError(f"unknown loss {loss!r}")
