"""Probability calibration toolkit.

Turns raw classifier scores into calibrated probabilities: an interval
calibrator built on weighted isotonic regression answers lower/upper
probability queries in logarithmic time, a cross-calibrated variant merges
fold-wise intervals minimax-optimally, and classic baselines (regularized
sigmoid fitting, direct isotonic lookup) plus proper-loss metrics and a CLI
support end-to-end comparisons.
"""

from venncal.baselines import DirectIsotonic, PlattCalibrator
from venncal.cvap import CvapCalibrator, FoldAssignment, assign_folds
from venncal.data import (
    Dataset,
    SplitSpec,
    generate_synthetic,
    load_csv,
    split_proper_calibration,
)
from venncal.exceptions import DataError, DegenerateModelError
from venncal.isotonic import (
    WeightedPoints,
    build_csd,
    dedup_weighted,
    fit_isotonic,
    gcm_corners,
    lower_prob_curve,
    upper_prob_curve,
)
from venncal.ivap import IvapCalibrator, ProbInterval
from venncal.merging import merge_brier, merge_log
from venncal.metrics import EvalReport, brier_loss, evaluate, log_loss
from venncal.scorers import ScorerSpec, train_scorer

__version__ = "0.1.0"

__all__ = [
    "CvapCalibrator",
    "DataError",
    "Dataset",
    "DegenerateModelError",
    "DirectIsotonic",
    "EvalReport",
    "FoldAssignment",
    "IvapCalibrator",
    "PlattCalibrator",
    "ProbInterval",
    "ScorerSpec",
    "SplitSpec",
    "WeightedPoints",
    "assign_folds",
    "brier_loss",
    "build_csd",
    "dedup_weighted",
    "evaluate",
    "fit_isotonic",
    "gcm_corners",
    "generate_synthetic",
    "load_csv",
    "log_loss",
    "lower_prob_curve",
    "merge_brier",
    "merge_log",
    "split_proper_calibration",
    "train_scorer",
    "upper_prob_curve",
    "__version__",
]
