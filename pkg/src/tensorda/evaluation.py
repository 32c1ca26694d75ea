"""Cross-validated evaluation: folds, metrics, nested tuning, and records.

The tuner exploits the deflation structure: one fit at the maximum block
count per (theta, fold) scores every truncation, so the block count needs no
refits of its own.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import check_labels, check_tensor_stack
from .bttda import BTTDA
from .pipeline import BTTDAClassifier, fit_feature_pipeline
from .streams import seed_sequence, generator

__all__ = [
    "MetricsRecord",
    "TuningResult",
    "TuningError",
    "stratified_kfold",
    "score_metric",
    "tune_hyperparameters",
    "run_evaluation",
    "DEFAULT_THETA_GRID",
]

# Reference protocol defaults: 11-point theta grid, up to 16 blocks, 5 folds.
DEFAULT_THETA_GRID = tuple(round(0.1 * i, 1) for i in range(11))
DEFAULT_MAX_BLOCKS = 16


class TuningError(RuntimeError):
    """A fit failed during hyperparameter search; carries (theta, fold)."""


@dataclass(frozen=True)
class MetricsRecord:
    """One evaluation row, ready for deterministic CSV emission."""

    dataset: str
    subject: str
    session: str
    fold: int
    theta: float
    blocks: int
    metric: str
    value: float

    def __post_init__(self):
        if self.metric in ("roc_auc", "accuracy"):
            if not 0.0 <= self.value <= 1.0:
                raise ValueError(f"{self.metric} must lie in [0, 1]; got {self.value}")
        elif self.metric == "nmse":
            if self.value < 0.0:
                raise ValueError(f"nmse must be nonnegative; got {self.value}")
        else:
            raise ValueError(f"unknown metric {self.metric!r}")

    def csv_row(self):
        return (
            f"{self.dataset},{self.subject},{self.session},{self.fold},"
            f"{self.theta!r},{self.blocks},{self.metric},{self.value!r}"
        )


@dataclass(frozen=True)
class TuningResult:
    theta: float
    n_blocks: int
    mean_scores: dict  # (theta, blocks) -> mean validation score


def stratified_kfold(y, k, seed):
    """Deterministic stratified folds as ``(train_idx, test_idx)`` pairs.

    Every class is shuffled with its own slice of the seed stream and dealt
    round-robin, so per-fold class counts stay within one sample of
    proportional. Classes smaller than ``k`` raise ``ValueError``.
    """
    y = np.asarray(y)
    if k < 2:
        raise ValueError("need at least 2 folds")
    classes = np.unique(y)
    rng = generator(seed)
    test_members = [[] for _ in range(k)]
    for label in classes:
        members = np.flatnonzero(y == label)
        if members.shape[0] < k:
            raise ValueError(f"class {label!r} has fewer samples than folds")
        members = rng.permutation(members)
        for fold in range(k):
            test_members[fold].append(members[fold::k])
    folds = []
    all_idx = np.arange(y.shape[0])
    for fold in range(k):
        test = np.sort(np.concatenate(test_members[fold]))
        train = np.setdiff1d(all_idx, test, assume_unique=True)
        folds.append((train, test))
    return folds


def score_metric(scores, y, kind):
    """ROC-AUC from ranked scores (ties count half) or plain accuracy.

    ``kind="roc_auc"`` expects one real score per sample and exactly two
    classes, orienting the score toward the larger label.
    ``kind="accuracy"`` expects predicted labels.
    """
    y = np.asarray(y)
    scores = np.asarray(scores)
    if kind == "roc_auc":
        classes = np.unique(y)
        if classes.shape[0] != 2:
            raise ValueError("roc_auc requires exactly two classes")
        positive = y == classes[1]
        n_pos = int(positive.sum())
        n_neg = y.shape[0] - n_pos
        ranks = _average_ranks(scores.astype(np.float64))
        u_stat = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
        return float(u_stat / (n_pos * n_neg))
    if kind == "accuracy":
        return float(np.mean(scores == y))
    raise ValueError(f"unknown metric kind {kind!r}")


def _average_ranks(values):
    """1-based ranks with ties assigned the mean of their rank span."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0])
    i = 0
    while i < values.shape[0]:
        j = i
        while j + 1 < values.shape[0] and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def tune_hyperparameters(
    X,
    y,
    theta_grid=DEFAULT_THETA_GRID,
    max_blocks=DEFAULT_MAX_BLOCKS,
    inner_k=5,
    seed=0,
    **fit_params,
):
    """Nested-CV selection of ``(theta, n_blocks)``.

    For each theta the block model is fitted once per inner fold at
    ``max_blocks`` blocks and every truncation ``1..max_blocks`` is scored
    (theta=1 truncates to a single block). The winner maximizes the mean inner
    validation score; ties prefer fewer blocks, then smaller theta.
    """
    X = check_tensor_stack(X)
    y, classes = check_labels(y, X.shape[0], min_classes=2)
    theta_grid = [float(t) for t in theta_grid]
    if not theta_grid or max_blocks < 1:
        raise ValueError("theta grid and block budget must be nonempty")
    if len(theta_grid) == 1 and max_blocks == 1:
        return TuningResult(theta_grid[0], 1, {(theta_grid[0], 1): np.nan})

    binary = classes.shape[0] == 2
    folds = stratified_kfold(y, inner_k, seed_sequence(seed, 0))
    fold_scores = {}
    for theta in theta_grid:
        # theta=1 admits a single full-rank block; skip the pointless budget.
        blocks_budget = 1 if theta == 1.0 else max_blocks
        for fold, (train, test) in enumerate(folds):
            try:
                extractor = BTTDA(
                    n_blocks=blocks_budget, theta=theta, **fit_params
                ).fit(X[train], y[train])
            except Exception as exc:
                raise TuningError(
                    f"fit failed at theta={theta} fold={fold}: {exc}"
                ) from exc
            for blocks in range(1, extractor.n_blocks_ + 1):
                train_features = extractor.transform_blocks(X[train], blocks)
                test_features = extractor.transform_blocks(X[test], blocks)
                pipeline = fit_feature_pipeline(train_features, y[train])
                if binary:
                    score = score_metric(
                        pipeline.decision_function(test_features), y[test], "roc_auc"
                    )
                else:
                    score = score_metric(
                        pipeline.predict(test_features), y[test], "accuracy"
                    )
                fold_scores.setdefault((theta, blocks), []).append(score)

    mean_scores = {key: float(np.mean(vals)) for key, vals in fold_scores.items()}
    best = min(
        mean_scores.items(), key=lambda item: (-item[1], item[0][1], item[0][0])
    )
    (theta_star, blocks_star), _ = best
    return TuningResult(theta_star, blocks_star, mean_scores)


def run_evaluation(
    X,
    y,
    outer_k=5,
    theta_grid=DEFAULT_THETA_GRID,
    max_blocks=DEFAULT_MAX_BLOCKS,
    inner_k=5,
    seed=0,
    dataset="synthetic",
    subject="",
    session="",
    folds=None,
    return_models=False,
    **fit_params,
):
    """Nested-CV evaluation emitting one scored record per outer fold plus the
    training NMSE trajectory of each refit model.

    Every stage that learns parameters (feature extraction, whitening,
    selection, LDA) is fitted strictly on the outer-train split.
    """
    X = check_tensor_stack(X)
    y, classes = check_labels(y, X.shape[0], min_classes=2)
    binary = classes.shape[0] == 2
    metric_kind = "roc_auc" if binary else "accuracy"
    if folds is None:
        folds = stratified_kfold(y, outer_k, seed_sequence(seed, 0))

    records = []
    models = []
    for fold, (train, test) in enumerate(folds):
        tuning = tune_hyperparameters(
            X[train],
            y[train],
            theta_grid=theta_grid,
            max_blocks=max_blocks,
            inner_k=inner_k,
            seed=seed_sequence(seed, 1, fold),
            **fit_params,
        )
        model = BTTDAClassifier(
            n_blocks=tuning.n_blocks, theta=tuning.theta, **fit_params
        ).fit(X[train], y[train])
        if binary:
            value = score_metric(model.decision_function(X[test]), y[test], "roc_auc")
        else:
            value = score_metric(model.predict(X[test]), y[test], "accuracy")
        records.append(
            MetricsRecord(
                dataset, subject, session, fold, tuning.theta,
                tuning.n_blocks, metric_kind, value,
            )
        )
        for blocks, train_nmse in enumerate(model.bttda_.train_nmse_, start=1):
            records.append(
                MetricsRecord(
                    dataset, subject, session, fold, tuning.theta,
                    blocks, "nmse", float(train_nmse),
                )
            )
        models.append(model)
    if return_models:
        return records, models
    return records
