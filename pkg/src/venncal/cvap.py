"""Cross calibration: K fold-wise interval calibrators merged minimax-optimally.

The training set is split into K folds of near-equal size (contiguous by
default; a seeded shuffle on request).  For each fold, a scorer is trained
on the complement and an interval calibrator is built from the fold's scores
under that scorer, so no observation ever calibrates a scorer that saw it.
A prediction computes K intervals and merges them with the minimax rule for
the configured loss.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from venncal.data import Dataset
from venncal.exceptions import DegenerateModelError
from venncal.ivap import IvapCalibrator
from venncal.merging import merge_brier, merge_log
from venncal.scorers import ScorerSpec, scorer_from_dict, train_scorer

__all__ = ["FoldAssignment", "assign_folds", "CvapCalibrator"]


@dataclass(frozen=True)
class FoldAssignment:
    """Maps each of n observations to one of K folds.

    Contiguous mode gives the first (n mod K) folds ceil(n/K) observations
    and the rest floor(n/K), so every fold size is within 1 of n/K.
    Randomized mode shuffles that assignment with a seeded Fisher-Yates
    permutation (numpy Generator.shuffle), preserving the size multiset.
    """

    n: int
    n_folds: int
    fold_of: np.ndarray
    mode: str
    seed: int | None = None

    def indices(self, fold: int) -> np.ndarray:
        return np.nonzero(self.fold_of == fold)[0]

    def complement(self, fold: int) -> np.ndarray:
        return np.nonzero(self.fold_of != fold)[0]

    def sizes(self) -> np.ndarray:
        return np.bincount(self.fold_of, minlength=self.n_folds)


def assign_folds(n: int, n_folds: int, mode: str = "contiguous",
                 seed: int | None = None) -> FoldAssignment:
    """Assign n observations to K folds; 2 <= K <= n required."""
    if n_folds < 2:
        raise ValueError(f"need at least 2 folds, got {n_folds}")
    if n_folds > n:
        raise ValueError(f"cannot split {n} observations into {n_folds} folds")
    if mode not in ("contiguous", "randomized"):
        raise ValueError(f"unknown fold mode {mode!r}")
    base, extra = divmod(n, n_folds)
    sizes = np.full(n_folds, base, dtype=np.int64)
    sizes[:extra] += 1
    fold_of = np.repeat(np.arange(n_folds, dtype=np.int64), sizes)
    if mode == "randomized":
        rng = np.random.default_rng(seed)
        rng.shuffle(fold_of)
    return FoldAssignment(n, n_folds, fold_of, mode, seed)


class CvapCalibrator:
    """K fold-wise scorers and interval calibrators plus the merge rule.

    Immutable after construction; fold models are independent, so queries
    are safe to run concurrently and the merge is a pure function of the K
    intervals.
    """

    FORMAT = "venncal.cvap"
    VERSION = 1

    def __init__(self, folds: FoldAssignment, scorers: list, rules: list[IvapCalibrator],
                 merge_loss: str = "log", train_indices: list[np.ndarray] | None = None):
        self.folds = folds
        self.scorers = scorers
        self.rules = rules
        self.merge_loss = merge_loss
        # per-fold proper-training rows, kept for leakage audits
        self.train_indices = train_indices

    @classmethod
    def fit(cls, dataset: Dataset, n_folds: int = 5, spec: ScorerSpec | None = None,
            mode: str = "contiguous", seed: int | None = None,
            merge_loss: str = "log") -> "CvapCalibrator":
        """Train K scorers on fold complements and calibrate each on its fold.

        Raises DegenerateModelError when any fold or fold complement contains
        a single class; a silent fallback would corrupt comparisons.
        """
        if merge_loss not in ("log", "brier"):
            raise ValueError(f"unknown merge loss {merge_loss!r}")
        spec = spec or ScorerSpec()
        folds = assign_folds(len(dataset), n_folds, mode, seed)
        scorers = []
        rules = []
        train_indices = []
        for k in range(n_folds):
            fold_idx = folds.indices(k)
            rest_idx = folds.complement(k)
            y_rest = dataset.y[rest_idx]
            y_fold = dataset.y[fold_idx]
            if y_rest.min() == y_rest.max():
                raise DegenerateModelError(
                    f"degenerate fold {k}: proper training part has a single class")
            if y_fold.min() == y_fold.max():
                raise DegenerateModelError(
                    f"degenerate fold {k}: calibration part has a single class")
            scorer = train_scorer(spec, dataset.X[rest_idx], y_rest)
            rule = IvapCalibrator.fit(scorer.score_many(dataset.X[fold_idx]), y_fold)
            scorers.append(scorer)
            rules.append(rule)
            train_indices.append(rest_idx)
        return cls(folds, scorers, rules, merge_loss, train_indices)

    @property
    def n_folds(self) -> int:
        return self.folds.n_folds

    def predict_intervals_many(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Per-fold intervals for a feature matrix: two (K, n) arrays."""
        lows = []
        highs = []
        for scorer, rule in zip(self.scorers, self.rules):
            lo, hi = rule.predict_intervals(scorer.score_many(X))
            lows.append(lo)
            highs.append(hi)
        return np.stack(lows), np.stack(highs)

    def predict_many(self, X, loss: str | None = None) -> np.ndarray:
        loss = loss or self.merge_loss
        lo, hi = self.predict_intervals_many(X)
        if loss == "log":
            return np.atleast_1d(merge_log(lo, hi))
        if loss == "brier":
            return np.atleast_1d(merge_brier(lo, hi))
        raise ValueError(f"unknown loss {loss!r}")

    def predict(self, x, loss: str | None = None) -> float:
        return float(self.predict_many(np.asarray(x, dtype=float)[None, :], loss)[0])

    # ---- serialization --------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": self.FORMAT,
            "version": self.VERSION,
            "n_folds": self.folds.n_folds,
            "fold_of": self.folds.fold_of.tolist(),
            "fold_mode": self.folds.mode,
            "fold_seed": self.folds.seed,
            "merge_loss": self.merge_loss,
            "scorers": [s.to_dict() for s in self.scorers],
            "rules": [r.to_dict() for r in self.rules],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CvapCalibrator":
        if d.get("format") != cls.FORMAT:
            raise ValueError(f"not a cross-calibrator record: {d.get('format')!r}")
        if d.get("version") != cls.VERSION:
            raise ValueError(f"unsupported version {d.get('version')!r}")
        fold_of = np.asarray(d["fold_of"], dtype=np.int64)
        folds = FoldAssignment(len(fold_of), int(d["n_folds"]), fold_of,
                               d["fold_mode"], d["fold_seed"])
        scorers = [scorer_from_dict(s) for s in d["scorers"]]
        rules = [IvapCalibrator.from_dict(r) for r in d["rules"]]
        return cls(folds, scorers, rules, d["merge_loss"])

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)

    @classmethod
    def load(cls, path) -> "CvapCalibrator":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))
