"""Data model for classification problems with subject structure.

A *classification problem* is a full feature table whose rows belong to
subjects (images, patients, ...).  Sampling operations never mix subjects
between train and test sides, and sample draws are class-balanced.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .rng import RngStream


class ProblemFormatError(ValueError):
    """Raised when a problem CSV or problem definition is malformed."""


@dataclass(eq=False)
class ClassificationProblem:
    """Feature table with per-sample subject IDs and class labels.

    Labels are contiguous integers 0..C-1; `label_names` keeps the original
    tokens (sorted order defines the index mapping).  Instances are treated
    as immutable after construction.
    """

    name: str
    features: np.ndarray  # (N, d) float64
    labels: np.ndarray  # (N,) int64 in 0..C-1
    subjects: np.ndarray  # (N,) str tokens
    label_names: tuple[str, ...] = ()

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.subjects = np.asarray(self.subjects)
        n = self.features.shape[0]
        if self.features.ndim != 2 or n < 1 or self.features.shape[1] < 1:
            raise ProblemFormatError(f"{self.name}: feature matrix must be N x d with N,d >= 1")
        if self.labels.shape != (n,) or self.subjects.shape != (n,):
            raise ProblemFormatError(f"{self.name}: labels/subjects length must match feature rows")
        if not np.isfinite(self.features).all():
            raise ProblemFormatError(f"{self.name}: non-finite feature values")
        present = np.unique(self.labels)
        c = len(present)
        if c < 2:
            raise ProblemFormatError(f"{self.name}: needs at least 2 classes, found {c}")
        if present[0] != 0 or present[-1] != c - 1:
            raise ProblemFormatError(f"{self.name}: labels must be contiguous 0..C-1")
        if not self.label_names:
            self.label_names = tuple(str(i) for i in range(c))
        if len(self.label_names) != c:
            raise ProblemFormatError(f"{self.name}: label_names length != class count")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1

    @property
    def subject_ids(self) -> np.ndarray:
        """Sorted unique subject tokens."""
        return np.unique(self.subjects)


@dataclass(frozen=True)
class DatasetInstance:
    """One subject-split draw of a problem; `problem_name` is its meta-label."""

    problem_name: str
    repeat_index: int
    train_subjects: frozenset
    test_subjects: frozenset
    seed: int

    @property
    def instance_id(self) -> str:
        return f"{self.problem_name}-r{self.repeat_index:02d}"


@dataclass(frozen=True)
class SampleSet:
    """Row indices drawn from one side of a subject split."""

    indices: np.ndarray
    target_size: int


def load_problem_csv(path, name: str | None = None) -> ClassificationProblem:
    """Read a problem CSV (`subject_id,label,f0,...,f{d-1}`).

    Labels are re-indexed to contiguous 0..C-1 preserving the sorted order
    of the original label tokens.  Errors carry the offending column name
    or the 1-based file line number.
    """
    path = str(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ProblemFormatError(f"{path}: empty file") from None
        if len(header) < 3:
            raise ProblemFormatError(f"{path}: header needs subject_id,label and at least one feature column")
        expected = ["subject_id", "label"] + [f"f{i}" for i in range(len(header) - 2)]
        for col, (got, want) in enumerate(zip(header, expected)):
            if got.strip() != want:
                raise ProblemFormatError(f"{path}: header column {col} must be '{want}', found '{got.strip()}'")
        d = len(header) - 2
        subjects: list[str] = []
        tokens: list[str] = []
        rows: list[list[float]] = []
        for rec in reader:
            line = reader.line_num
            if not rec:
                continue
            if len(rec) != d + 2:
                raise ProblemFormatError(f"{path}: line {line}: expected {d + 2} fields, found {len(rec)}")
            subjects.append(rec[0])
            tokens.append(rec[1])
            try:
                vals = [float(v) for v in rec[2:]]
            except ValueError:
                raise ProblemFormatError(f"{path}: line {line}: non-numeric feature value") from None
            if not all(math.isfinite(v) for v in vals):
                raise ProblemFormatError(f"{path}: line {line}: non-finite feature value")
            rows.append(vals)
    if not rows:
        raise ProblemFormatError(f"{path}: no data rows")
    label_names = sorted(set(tokens))
    index = {tok: i for i, tok in enumerate(label_names)}
    labels = np.array([index[t] for t in tokens], dtype=np.int64)
    if name is None:
        name = path.rsplit("/", 1)[-1]
        name = name[:-4] if name.endswith(".csv") else name
    return ClassificationProblem(
        name=name,
        features=np.array(rows, dtype=np.float64),
        labels=labels,
        subjects=np.array(subjects),
        label_names=tuple(label_names),
    )


def write_problem_csv(problem: ClassificationProblem, path) -> None:
    """Write a problem CSV that `load_problem_csv` round-trips bit-exactly."""
    with open(str(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subject_id", "label"] + [f"f{i}" for i in range(problem.n_features)])
        for i in range(problem.n_samples):
            row = [str(problem.subjects[i]), problem.label_names[problem.labels[i]]]
            row += [format(v, ".17g") for v in problem.features[i]]
            writer.writerow(row)


def subject_split(
    problem: ClassificationProblem, train_fraction: float, rng: RngStream, repeat_index: int = 0
) -> DatasetInstance:
    """Uniform random subject partition with round-half-up train count."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    ids = problem.subject_ids
    n_sub = len(ids)
    if n_sub < 2:
        raise ValueError(f"{problem.name}: need at least 2 subjects to split, found {n_sub}")
    n_train = int(math.floor(train_fraction * n_sub + 0.5))
    if not 1 <= n_train <= n_sub - 1:
        raise ValueError(
            f"{problem.name}: train fraction {train_fraction} leaves an empty side for {n_sub} subjects"
        )
    perm = rng.generator().permutation(n_sub)
    train = frozenset(ids[perm[:n_train]].tolist())
    test = frozenset(ids[perm[n_train:]].tolist())
    return DatasetInstance(
        problem_name=problem.name,
        repeat_index=repeat_index,
        train_subjects=train,
        test_subjects=test,
        seed=rng.token(),
    )


def balanced_subsample(
    problem: ClassificationProblem, subjects: frozenset | set, m: int, rng: RngStream
) -> SampleSet:
    """Draw up to `m` rows from the given subjects with balanced class counts.

    Per-class quota is floor(m/C) with the remainder handed to a random
    class subset; classes whose pool is too small contribute what they have
    and the deficit is redistributed round-robin to classes with spare
    capacity.  Sampling is without replacement.
    """
    c_total = problem.n_classes
    if m < c_total:
        raise ValueError(f"sample size {m} below class count {c_total}")
    member = np.isin(problem.subjects, sorted(subjects))
    pools = [np.flatnonzero(member & (problem.labels == c)) for c in range(c_total)]
    present = [c for c in range(c_total) if len(pools[c]) > 0]
    if len(present) < 2:
        raise ValueError("subject set holds fewer than 2 classes; cannot train a classifier")
    gen = rng.generator()

    quota = [m // c_total] * c_total
    remainder = m - (m // c_total) * c_total
    if remainder:
        lucky = gen.choice(c_total, size=remainder, replace=False)
        for c in lucky:
            quota[c] += 1

    # Clamp to pool sizes, then push the deficit round-robin onto classes
    # that still have unsampled rows.
    alloc = [min(quota[c], len(pools[c])) for c in range(c_total)]
    deficit = m - sum(alloc)
    while deficit > 0:
        spare = [c for c in range(c_total) if alloc[c] < len(pools[c])]
        if not spare:
            break
        for c in spare:
            if deficit == 0:
                break
            alloc[c] += 1
            deficit -= 1

    parts = []
    for c in range(c_total):
        if alloc[c] == 0:
            continue
        pool = pools[c]
        if alloc[c] == len(pool):
            parts.append(pool)
        else:
            parts.append(gen.choice(pool, size=alloc[c], replace=False))
    indices = np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)
    return SampleSet(indices=np.sort(indices), target_size=m)
