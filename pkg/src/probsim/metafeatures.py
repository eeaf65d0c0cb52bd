"""Classifier-performance fingerprints of datasets.

Each dataset instance is evaluated into a 5 x 6 accuracy grid (training
sizes x classifiers).  A grid collapses to a 6-vector under one of three
variants: A (raw accuracies), N (per-size-row standardization) or R
(per-size-row average ranks, rank 1 = best); rows are transformed first
and then averaged over the five training sizes.  Stacking the vectors of
all instances gives the meta-dataset used for embedding and
meta-classification.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .classifiers import ClassifierSpec, accuracy, fit, predict
from .problems import ClassificationProblem, DatasetInstance, balanced_subsample
from .rng import RngStream

VARIANTS = ("A", "N", "R")
TRAIN_SIZES = (100, 300, 1000, 3000, 10000)
TEST_SIZE = 10000


@dataclass(frozen=True)
class AccuracyGrid:
    """Test accuracies, rows = ascending training sizes, cols = classifiers."""

    values: np.ndarray
    instance_id: str
    problem_name: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError("grid must be 2-D (sizes x classifiers)")
        if not np.isfinite(v).all() or v.min() < 0.0 or v.max() > 1.0:
            raise ValueError("grid entries must be finite accuracies in [0, 1]")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class MetaDataset:
    variant: str
    rows: np.ndarray  # (n, k)
    meta_labels: tuple[str, ...]
    instance_ids: tuple[str, ...]

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if len(self.meta_labels) != len(self.rows) or len(self.instance_ids) != len(self.rows):
            raise ValueError("labels/ids must match row count")


def rank_row(values) -> np.ndarray:
    """Average ranks, 1 = highest value; exact ties share the mean rank."""
    v = np.asarray(values, dtype=np.float64)
    order = np.argsort(-v, kind="stable")
    ranks = np.empty(len(v))
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def znorm_row(values) -> np.ndarray:
    """Zero mean, unit population variance; all-zero if (near-)constant."""
    v = np.asarray(values, dtype=np.float64)
    centered = v - v.mean()
    sd = np.sqrt((centered**2).mean())
    if sd < 1e-12:
        return np.zeros_like(v)
    return centered / sd


def collapse_grid(grid: AccuracyGrid, variant: str) -> np.ndarray:
    """Transform each size row (identity/znorm/rank), then average columns."""
    if variant == "A":
        rows = grid.values
    elif variant == "N":
        rows = np.stack([znorm_row(r) for r in grid.values])
    elif variant == "R":
        rows = np.stack([rank_row(r) for r in grid.values])
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return rows.mean(axis=0)


def assemble_meta(grids: list[AccuracyGrid], variant: str) -> MetaDataset:
    shapes = {g.values.shape for g in grids}
    if len(shapes) != 1:
        raise ValueError("all grids must share one shape")
    rows = np.stack([collapse_grid(g, variant) for g in grids])
    return MetaDataset(
        variant=variant,
        rows=rows,
        meta_labels=tuple(g.problem_name for g in grids),
        instance_ids=tuple(g.instance_id for g in grids),
    )


def evaluate_grid(
    instance: DatasetInstance,
    problem: ClassificationProblem,
    specs: list[ClassifierSpec],
    sizes=TRAIN_SIZES,
    test_size: int = TEST_SIZE,
    rng: RngStream | None = None,
) -> AccuracyGrid:
    """Fit every classifier at every training size against one shared test set.

    The balanced test sample is drawn once per instance; for each size all
    classifiers see the identical balanced training sample.
    """
    if rng is None:
        rng = RngStream(instance.seed)
    sizes = tuple(sizes)
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("training sizes must be ascending")
    test_set = balanced_subsample(problem, instance.test_subjects, test_size, rng.child("testset"))
    x_test = problem.features[test_set.indices]
    y_test = problem.labels[test_set.indices]
    values = np.empty((len(sizes), len(specs)))
    for si, size in enumerate(sizes):
        train_set = balanced_subsample(
            problem, instance.train_subjects, size, rng.child("trainset", si)
        )
        x_train = problem.features[train_set.indices]
        y_train = problem.labels[train_set.indices]
        for ci, spec in enumerate(specs):
            model = fit(spec, x_train, y_train)
            values[si, ci] = accuracy(predict(model, x_test), y_test)
    return AccuracyGrid(values=values, instance_id=instance.instance_id, problem_name=instance.problem_name)


def write_meta_csv(meta: MetaDataset, path) -> None:
    with open(str(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        k = meta.rows.shape[1]
        writer.writerow(["instance_id", "problem"] + [f"c{i}" for i in range(k)])
        for i in range(len(meta.rows)):
            writer.writerow(
                [meta.instance_ids[i], meta.meta_labels[i]]
                + [format(v, ".17g") for v in meta.rows[i]]
            )


def read_meta_csv(path, variant: str) -> MetaDataset:
    with open(str(path), newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        k = len(header) - 2
        ids, labels, rows = [], [], []
        for rec in reader:
            ids.append(rec[0])
            labels.append(rec[1])
            rows.append([float(v) for v in rec[2:]])
    return MetaDataset(
        variant=variant,
        rows=np.array(rows, dtype=np.float64).reshape(len(rows), k),
        meta_labels=tuple(labels),
        instance_ids=tuple(ids),
    )
