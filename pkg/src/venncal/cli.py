"""Command-line front end for reproducible calibration experiments.

Subcommands: `synth` writes a synthetic dataset, `calibrate` trains one
calibration method and writes per-row probabilities, `evaluate` scores a
prediction file against labels, and `compare` runs every method on the same
split and emits a methods-by-losses table.  Every run that writes
predictions also writes a `<out>.manifest.json` recording the settings and
package version, and all output is deterministic: identical flags produce
byte-identical files.

Exit codes: 0 success, 2 usage error, 3 data error, 4 degenerate model.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

import venncal
from venncal.baselines import DirectIsotonic, PlattCalibrator
from venncal.cvap import CvapCalibrator, assign_folds
from venncal.data import (
    Dataset,
    SplitSpec,
    apply_imputation,
    compute_imputation,
    generate_synthetic,
    load_csv,
    read_calibration_scores,
    read_test_scores,
    split_proper_calibration,
)
from venncal.exceptions import DataError, DegenerateModelError
from venncal.ivap import IvapCalibrator
from venncal.merging import merge_brier, merge_log
from venncal.metrics import evaluate
from venncal.scorers import ScorerSpec, train_scorer

METHODS = ("underlying", "platt", "isotonic", "ivap", "cvap")
TUNE_RIDGE_GRID = (1e-6, 1e-4, 1e-2, 1.0)


class UsageError(Exception):
    """Configuration problem detectable before any work starts."""


def _fmt(x: float) -> str:
    return repr(float(x))


def _sub_seed(seed: int, stream: int) -> int:
    """Named sub-stream of the run seed: 0 = split, 1 = folds."""
    child = np.random.SeedSequence(seed).spawn(2)[stream]
    return int(child.generate_state(1)[0])


def _parse_ratio(text: str) -> tuple[int, int]:
    parts = text.split(":")
    if len(parts) != 2:
        raise UsageError(f"--ratio must look like M:K, got {text!r}")
    try:
        a, b = int(parts[0]), int(parts[1])
    except ValueError:
        raise UsageError(f"--ratio must hold integers, got {text!r}") from None
    if a < 1 or b < 1:
        raise UsageError(f"--ratio parts must be positive, got {text!r}")
    return a, b


def _write_manifest(out_path: str, command: str, settings: dict) -> None:
    manifest = {
        "command": command,
        "package": "venncal",
        "package_version": venncal.__version__,
        "numpy_version": np.__version__,
        "settings": settings,
    }
    with open(out_path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_predictions(path: str, p: np.ndarray,
                       intervals: tuple[np.ndarray, np.ndarray] | None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if intervals is None:
            fh.write("p\n")
            for v in p:
                fh.write(f"{_fmt(v)}\n")
        else:
            lo, hi = intervals
            fh.write("p0,p1,p\n")
            for l, h, v in zip(lo, hi, p):
                fh.write(f"{_fmt(l)},{_fmt(h)},{_fmt(v)}\n")


# ---- synth ----------------------------------------------------------------


def cmd_synth(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    ds = generate_synthetic(args.n, args.seed)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write("x,label\n")
        for x, y in zip(ds.X[:, 0], ds.y):
            fh.write(f"{_fmt(x)},{int(y)}\n")
    _write_manifest(args.out, "synth", {"n": args.n, "seed": args.seed})
    return 0


# ---- calibrate ------------------------------------------------------------


def _scorer_spec(args) -> ScorerSpec:
    return ScorerSpec(kind=args.scorer, learning_rate=args.learning_rate,
                      max_iter=args.max_iter, ridge=args.ridge)


def _tuned_ridge(train_ds: Dataset, n_folds: int, spec: ScorerSpec,
                 seed: int | None) -> float:
    """Pick the ridge coefficient minimizing cumulative Brier loss over folds."""
    folds = assign_folds(len(train_ds), n_folds, "contiguous", seed)
    best = None
    for ridge in TUNE_RIDGE_GRID:
        candidate = ScorerSpec(kind=spec.kind, learning_rate=spec.learning_rate,
                               max_iter=spec.max_iter, ridge=ridge)
        total = 0.0
        try:
            for k in range(n_folds):
                rest = folds.complement(k)
                fold = folds.indices(k)
                scorer = train_scorer(candidate, train_ds.X[rest], train_ds.y[rest])
                p = np.clip(scorer.probability_many(train_ds.X[fold]), 0.0, 1.0)
                total += float(np.sum(4.0 * (train_ds.y[fold] - p) ** 2))
        except DegenerateModelError:
            continue
        if best is None or total < best[0]:
            best = (total, ridge)
    if best is None:
        raise DegenerateModelError("ridge tuning failed on every fold")
    return best[1]


def _load_feature_data(args) -> tuple[Dataset, Dataset]:
    train_ds = load_csv(args.train, args.label_column, header=not args.no_header,
                        positive_label=args.positive_label)
    test_ds = load_csv(args.test, args.label_column, header=not args.no_header,
                       like=train_ds)
    stats = compute_imputation(train_ds, np.arange(len(train_ds)))
    return apply_imputation(train_ds, stats), apply_imputation(test_ds, stats)


def _predict_with_method(method: str, args, train_ds: Dataset, test_ds: Dataset,
                         spec: ScorerSpec):
    """Run one calibration method; returns (p, intervals-or-None)."""
    merge_loss = args.merge
    if method == "cvap":
        n_folds = args.folds if args.folds else (sum(_parse_ratio(args.ratio))
                                                 if args.ratio else 5)
        mode = "randomized" if args.randomize_folds else "contiguous"
        model = CvapCalibrator.fit(train_ds, n_folds, spec, mode=mode,
                                   seed=_sub_seed(args.seed, 1), merge_loss=merge_loss)
        lo, hi = model.predict_intervals_many(test_ds.X)
        p = model.predict_many(test_ds.X)
        # merged interval endpoints: geometric means of the K fold intervals
        merged_lo = 1.0 - np.exp(np.mean(np.log(np.maximum(1.0 - lo, 1e-300)), axis=0))
        merged_hi = np.exp(np.mean(np.log(np.maximum(hi, 1e-300)), axis=0))
        return p, (merged_lo, merged_hi)

    if args.all_mode:
        proper, calibration = train_ds, train_ds
    else:
        if not args.ratio:
            raise UsageError(f"method {method!r} needs --ratio (or --all-mode)")
        split = SplitSpec(ratio=_parse_ratio(args.ratio),
                          permute=args.randomize_split, seed=_sub_seed(args.seed, 0))
        proper, calibration = split_proper_calibration(train_ds, split)
    scorer = train_scorer(spec, proper.X, proper.y)
    if args.sigmoid_scores:
        calib_scores = scorer.probability_many(calibration.X)
        test_scores = scorer.probability_many(test_ds.X)
    else:
        calib_scores = scorer.score_many(calibration.X)
        test_scores = scorer.score_many(test_ds.X)

    if method == "underlying":
        return scorer.probability_many(test_ds.X), None
    if method == "platt":
        model = PlattCalibrator.fit(calib_scores, calibration.y)
        return model.predict_many(test_scores), None
    if method == "isotonic":
        model = DirectIsotonic.fit(calib_scores, calibration.y,
                                   dummy_endpoints=args.dummy_endpoints)
        return model.predict_many(test_scores), None
    if method == "ivap":
        rule = IvapCalibrator.fit(calib_scores, calibration.y)
        lo, hi = rule.predict_intervals(test_scores)
        merge = merge_log if merge_loss == "log" else merge_brier
        return merge(lo[None, :], hi[None, :]), (lo, hi)
    raise UsageError(f"unknown method {method!r}")


def _predict_from_score_files(method: str, args):
    merge = merge_log if args.merge == "log" else merge_brier
    if method == "cvap":
        if not args.calib_scores or len(args.calib_scores) < 2:
            raise UsageError("cvap on score files needs one --calib-scores file per fold")
        if not args.scores_in or len(args.scores_in) != len(args.calib_scores):
            raise UsageError("cvap needs one --scores-in file per fold, aligned by row")
        if args.folds and args.folds != len(args.calib_scores):
            raise UsageError("--folds disagrees with the number of score files")
        lows, highs = [], []
        n_rows = None
        for calib_path, test_path in zip(args.calib_scores, args.scores_in):
            scores, labels = read_calibration_scores(calib_path)
            rule = IvapCalibrator.fit(scores, labels)
            test_scores = read_test_scores(test_path)
            if n_rows is None:
                n_rows = len(test_scores)
            elif len(test_scores) != n_rows:
                raise DataError("per-fold test score files have different lengths")
            lo, hi = rule.predict_intervals(test_scores)
            lows.append(lo)
            highs.append(hi)
        lo = np.stack(lows)
        hi = np.stack(highs)
        merged_lo = 1.0 - np.exp(np.mean(np.log(np.maximum(1.0 - lo, 1e-300)), axis=0))
        merged_hi = np.exp(np.mean(np.log(np.maximum(hi, 1e-300)), axis=0))
        return merge(lo, hi), (merged_lo, merged_hi)

    if not args.scores_in or len(args.scores_in) != 1:
        raise UsageError("expected exactly one --scores-in file")
    test_scores = read_test_scores(args.scores_in[0])
    if method == "underlying":
        if test_scores.min() < 0.0 or test_scores.max() > 1.0:
            raise DataError("underlying scores must already be probabilities in [0, 1]")
        return test_scores, None
    if not args.calib_scores or len(args.calib_scores) != 1:
        raise UsageError(f"method {method!r} expects exactly one --calib-scores file")
    scores, labels = read_calibration_scores(args.calib_scores[0])
    if method == "platt":
        return PlattCalibrator.fit(scores, labels).predict_many(test_scores), None
    if method == "isotonic":
        model = DirectIsotonic.fit(scores, labels, dummy_endpoints=args.dummy_endpoints)
        return model.predict_many(test_scores), None
    if method == "ivap":
        rule = IvapCalibrator.fit(scores, labels)
        lo, hi = rule.predict_intervals(test_scores)
        return merge(lo[None, :], hi[None, :]), (lo, hi)
    raise UsageError(f"unknown method {method!r}")


def _calibrate_settings(args) -> dict:
    return {
        "method": getattr(args, "method", None),
        "train": args.train,
        "test": args.test,
        "label_column": args.label_column,
        "calib_scores": args.calib_scores,
        "scores_in": args.scores_in,
        "ratio": args.ratio,
        "folds": args.folds,
        "merge": args.merge,
        "scorer": args.scorer,
        "learning_rate": args.learning_rate,
        "max_iter": args.max_iter,
        "ridge": args.ridge,
        "all_mode": args.all_mode,
        "seed": args.seed,
        "randomize_split": args.randomize_split,
        "randomize_folds": args.randomize_folds,
        "sigmoid_scores": args.sigmoid_scores,
        "dummy_endpoints": args.dummy_endpoints,
        "tune": args.tune,
        "intervals": getattr(args, "intervals", None),
    }


def cmd_calibrate(args) -> int:
    if args.intervals and args.method not in ("ivap", "cvap"):
        raise UsageError("--intervals is only available for ivap and cvap")
    if args.calib_scores or (args.scores_in and args.method == "underlying"):
        p, intervals = _predict_from_score_files(args.method, args)
    else:
        if not args.train or not args.test:
            raise UsageError("calibrate needs --train and --test (or score files)")
        train_ds, test_ds = _load_feature_data(args)
        spec = _scorer_spec(args)
        if args.tune and args.scorer == "logistic":
            n_folds = args.folds if args.folds else (sum(_parse_ratio(args.ratio))
                                                     if args.ratio else 5)
            ridge = _tuned_ridge(train_ds, n_folds, spec, args.seed)
            spec = ScorerSpec(kind=spec.kind, learning_rate=spec.learning_rate,
                              max_iter=spec.max_iter, ridge=ridge)
        p, intervals = _predict_with_method(args.method, args, train_ds, test_ds, spec)
    _write_predictions(args.out, np.asarray(p), intervals if args.intervals else None)
    _write_manifest(args.out, "calibrate", _calibrate_settings(args))
    return 0


# ---- evaluate -------------------------------------------------------------


def _read_prediction_column(path: str, column: str) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [c.strip() for c in rows[0]]
    if column not in header:
        raise DataError(f"{path}: no column {column!r} in header {header!r}")
    j = header.index(column)
    out = np.empty(len(rows) - 1)
    for i, row in enumerate(rows[1:]):
        try:
            out[i] = float(row[j])
        except (ValueError, IndexError):
            raise DataError(f"{path}: line {i + 2}: bad value in column {column!r}") from None
    return out


def cmd_evaluate(args) -> int:
    p = _read_prediction_column(args.pred, args.pred_column)
    truth = load_csv(args.truth, args.label_column, header=not args.no_header,
                     positive_label=args.positive_label)
    if len(p) != len(truth):
        raise DataError(f"row count mismatch: {len(p)} predictions vs {len(truth)} labels")
    report = evaluate(p, truth.y)
    print(f"n          {report.n}")
    print(f"MLL        {_fmt(report.mean_log_loss)}")
    print(f"MBL        {_fmt(report.mean_brier_loss)}")
    print(f"infinite   {report.n_infinite}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report.as_dict(), fh, sort_keys=True)
            fh.write("\n")
    return 0


# ---- compare --------------------------------------------------------------


def cmd_compare(args) -> int:
    if not args.ratio and not args.all_mode:
        raise UsageError("compare needs --ratio (or --all-mode with --folds)")
    if args.all_mode and not args.folds:
        raise UsageError("compare with --all-mode needs --folds for the cross method")
    train_ds, test_ds = _load_feature_data(args)
    spec = _scorer_spec(args)
    if args.tune and args.scorer == "logistic":
        n_folds = args.folds if args.folds else sum(_parse_ratio(args.ratio))
        ridge = _tuned_ridge(train_ds, n_folds, spec, args.seed)
        spec = ScorerSpec(kind=spec.kind, learning_rate=spec.learning_rate,
                          max_iter=spec.max_iter, ridge=ridge)
    rows = []
    for method in METHODS:
        p, _ = _predict_with_method(method, args, train_ds, test_ds, spec)
        report = evaluate(np.clip(np.asarray(p), 0.0, 1.0), test_ds.y)
        rows.append((method, report))

    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write("method,mll,mbl,n,n_infinite\n")
        for method, rep in rows:
            fh.write(f"{method},{_fmt(rep.mean_log_loss)},{_fmt(rep.mean_brier_loss)},"
                     f"{rep.n},{rep.n_infinite}\n")
    text_path = args.out + ".txt"
    with open(text_path, "w", encoding="utf-8") as fh:
        fh.write(f"{'method':<12}{'MLL':>12}{'MBL':>12}{'inf':>6}\n")
        for method, rep in rows:
            mll = "inf" if rep.mean_log_loss == float("inf") else f"{rep.mean_log_loss:.4f}"
            fh.write(f"{method:<12}{mll:>12}{rep.mean_brier_loss:>12.4f}{rep.n_infinite:>6}\n")
    settings = _calibrate_settings(args)
    del settings["method"], settings["intervals"]
    _write_manifest(args.out, "compare", settings)
    return 0


# ---- parser ---------------------------------------------------------------


def _add_common_model_flags(sub) -> None:
    sub.add_argument("--train", help="training CSV (features + label column)")
    sub.add_argument("--test", help="test CSV with the same columns")
    sub.add_argument("--label-column", default="label")
    sub.add_argument("--no-header", action="store_true")
    sub.add_argument("--positive-label", default=None,
                     help="raw label value to map to 1 (default: lexicographically larger)")
    sub.add_argument("--ratio", default=None, help="proper:calibration split, e.g. 2:1")
    sub.add_argument("--folds", type=int, default=None, help="fold count for the cross method")
    sub.add_argument("--merge", choices=("log", "brier"), default="log")
    sub.add_argument("--scorer", choices=("logistic", "stump", "constant"), default="logistic")
    sub.add_argument("--learning-rate", type=float, default=1.0)
    sub.add_argument("--max-iter", type=int, default=1000)
    sub.add_argument("--ridge", type=float, default=1e-4)
    sub.add_argument("--all-mode", action="store_true",
                     help="use the full training set as both proper and calibration parts")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--randomize-split", action="store_true")
    sub.add_argument("--randomize-folds", action="store_true")
    sub.add_argument("--sigmoid-scores", action="store_true",
                     help="calibrate sigmoid outputs instead of raw linear scores")
    sub.add_argument("--dummy-endpoints", action="store_true",
                     help="regularize direct isotonic with two synthetic extreme points")
    sub.add_argument("--tune", action="store_true",
                     help="grid search the ridge coefficient by cumulative Brier loss over folds")
    sub.add_argument("--calib-scores", nargs="*", default=None,
                     help="precomputed calibration score,label file(s); bypasses --train")
    sub.add_argument("--scores-in", nargs="*", default=None,
                     help="precomputed test score file(s); bypasses --test")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="venncal",
                                     description="Probability calibration toolkit")
    subs = parser.add_subparsers(dest="command", required=True)

    synth = subs.add_parser("synth", help="write a synthetic dataset CSV")
    synth.add_argument("--n", type=int, required=True)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True)
    synth.set_defaults(func=cmd_synth)

    cal = subs.add_parser("calibrate", help="run one calibration method")
    cal.add_argument("--method", choices=METHODS, required=True)
    _add_common_model_flags(cal)
    cal.add_argument("--intervals", action="store_true",
                     help="write p0,p1,p instead of a single probability column")
    cal.add_argument("--out", required=True)
    cal.set_defaults(func=cmd_calibrate)

    ev = subs.add_parser("evaluate", help="score a prediction file against labels")
    ev.add_argument("--pred", required=True)
    ev.add_argument("--truth", required=True)
    ev.add_argument("--label-column", default="label")
    ev.add_argument("--no-header", action="store_true")
    ev.add_argument("--positive-label", default=None)
    ev.add_argument("--pred-column", default="p")
    ev.add_argument("--out", default=None, help="also write the report as JSON")
    ev.set_defaults(func=cmd_evaluate)

    comp = subs.add_parser("compare", help="run all methods on one split")
    _add_common_model_flags(comp)
    comp.add_argument("--out", required=True)
    comp.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return 3
    except DegenerateModelError as exc:
        print(f"degenerate model: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        # bad values that surfaced past ingestion, e.g. out-of-range predictions
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
