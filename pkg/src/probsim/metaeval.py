"""Meta-classification: can a 1-NN recover a dataset's problem of origin?

Works on 2D embedded coordinates or directly on k-dimensional meta-rows.
Similarity between fingerprints is the (regularised) inverse Euclidean
distance.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .rng import RngStream

META_SIZES = (5, 10, 20, 40, 60)
META_REPEATS = 5


@dataclass(frozen=True)
class LearningCurve:
    sizes: tuple[int, ...]
    accuracies: np.ndarray  # (len(sizes), repeats)

    @property
    def means(self) -> np.ndarray:
        return self.accuracies.mean(axis=1)


@dataclass(frozen=True)
class ConfusionMatrix:
    class_names: tuple[str, ...]
    percentages: np.ndarray  # (C, C), rows sum to 100 (or 0 without support)
    support: np.ndarray  # (C,) true-label counts


def nn1_meta(train_points, train_labels, query_points) -> np.ndarray:
    """Exact Euclidean 1-NN; distance ties go to the lowest train index."""
    train = np.asarray(train_points, dtype=np.float64)
    query = np.asarray(query_points, dtype=np.float64)
    labels = np.asarray(train_labels)
    if train.ndim != 2 or query.ndim != 2 or train.shape[1] != query.shape[1]:
        raise ValueError("train and query points must share one dimension")
    if len(train) < 1 or len(labels) != len(train):
        raise ValueError("need one label per training point")
    diff = query[:, None, :] - train[None, :, :]
    d2 = (diff**2).sum(axis=-1)
    return labels[np.argmin(d2, axis=1)]


def inverse_similarity(x_i, x_j) -> float:
    """Similarity 1 / (1e-12 + Euclidean distance); symmetric and positive."""
    a = np.asarray(x_i, dtype=np.float64)
    b = np.asarray(x_j, dtype=np.float64)
    return float(1.0 / (1e-12 + np.sqrt(((a - b) ** 2).sum())))


def _curve_splits(n: int, sizes, repeats: int, rng: RngStream):
    for si, size in enumerate(sizes):
        if size >= n:
            raise ValueError(f"meta-train size {size} must be below n={n}")
        for rep in range(repeats):
            gen = rng.child("size", si).child("repeat", rep).generator()
            train_idx = np.sort(gen.choice(n, size=size, replace=False))
            mask = np.ones(n, dtype=bool)
            mask[train_idx] = False
            yield si, rep, train_idx, np.flatnonzero(mask)


def learning_curve_detail(points, labels, sizes=META_SIZES, repeats=META_REPEATS, rng=None):
    """Learning curve plus the raw (true, predicted) pairs per cell.

    Train subsets are uniform random over instances (not stratified by
    problem), evaluation is on the complement.
    """
    pts = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels)
    if rng is None:
        rng = RngStream(0)
    sizes = tuple(sizes)
    acc = np.empty((len(sizes), repeats))
    cells: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}
    for si, rep, tr, te in _curve_splits(len(pts), sizes, repeats, rng):
        pred = nn1_meta(pts[tr], labels[tr], pts[te])
        truth = labels[te]
        acc[si, rep] = float(np.mean(pred == truth))
        cells[(si, rep)] = (truth, pred)
    return LearningCurve(sizes=sizes, accuracies=acc), cells


def learning_curve(points, labels, sizes=META_SIZES, repeats=META_REPEATS, rng=None) -> LearningCurve:
    curve, _ = learning_curve_detail(points, labels, sizes, repeats, rng)
    return curve


def confusion(true_labels, predicted_labels, class_names) -> ConfusionMatrix:
    """Row-normalised percentage confusion matrix.

    Rows without support stay all-zero (flagged through `support`).
    """
    true_labels = np.asarray(true_labels)
    predicted_labels = np.asarray(predicted_labels)
    if true_labels.shape != predicted_labels.shape:
        raise ValueError("label vectors must have equal length")
    names = tuple(class_names)
    index = {name: i for i, name in enumerate(names)}
    c = len(names)
    counts = np.zeros((c, c))
    for t, p in zip(true_labels, predicted_labels):
        counts[index[t], index[p]] += 1
    support = counts.sum(axis=1)
    pct = np.zeros((c, c))
    rows = support > 0
    pct[rows] = 100.0 * counts[rows] / support[rows, None]
    return ConfusionMatrix(class_names=names, percentages=pct, support=support.astype(np.int64))


def write_learning_curves_csv(rows: list[tuple], path) -> None:
    """Rows are (embedding, variant, size, repeat, accuracy)."""
    with open(str(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["embedding", "variant", "size", "repeat", "accuracy"])
        for method, variant, size, rep, acc in rows:
            writer.writerow([method, variant, size, rep, format(acc, ".17g")])


def write_confusion_csv(conf: ConfusionMatrix, path) -> None:
    with open(str(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["true\\predicted"] + list(conf.class_names))
        for i, name in enumerate(conf.class_names):
            writer.writerow([name] + [format(v, ".17g") for v in conf.percentages[i]])
