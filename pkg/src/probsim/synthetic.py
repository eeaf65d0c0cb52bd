"""Reproducible synthetic classification problems with subject structure.

Data are Gaussian class-conditionals: class means drawn once per problem
at a controlled pairwise distance, each subject adding a private mean
offset, and covariances drawn per style.  The built-in suite provides six
structurally diverse problems: one high-dimensional 7-class outlier, a
near-duplicate 2-class pair related by a fixed monotone feature warp, and
three low-dimensional 2-class problems with graded mutual similarity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problems import ClassificationProblem
from .rng import RngStream

COVARIANCE_STYLES = ("spherical", "diagonal-random", "full-random", "class-distinct")

# Overall variance ratio between the last and first class under the
# class-distinct style (scales are geometrically spaced in between).
CLASS_DISTINCT_RATIO = 9.0


@dataclass(frozen=True)
class ProblemSpec:
    """Generator parameters for one synthetic problem.

    `class_separation` is the mean pairwise distance between class means in
    units of the (average) within-class standard deviation; `subject_shift`
    is the standard deviation of each subject's private mean offset.
    """

    name: str
    n_subjects: int
    samples_per_subject: int
    C: int
    d: int
    class_separation: float
    subject_shift: float
    covariance_style: str = "spherical"

    def __post_init__(self):
        if self.n_subjects < 4:
            raise ValueError("need at least 4 subjects so a 70/30 split keeps both sides non-empty")
        if self.C < 2 or self.d < 2:
            raise ValueError("need C >= 2 and d >= 2")
        if self.samples_per_subject < self.C:
            raise ValueError("samples_per_subject must cover every class at least once")
        if self.class_separation < 0 or self.subject_shift < 0:
            raise ValueError("class_separation and subject_shift must be >= 0")
        if self.covariance_style not in COVARIANCE_STYLES:
            raise ValueError(f"unknown covariance_style {self.covariance_style!r}")


def _class_means(spec: ProblemSpec, gen: np.random.Generator) -> np.ndarray:
    raw = gen.standard_normal((spec.C, spec.d))
    raw -= raw.mean(axis=0)
    diff = raw[:, None, :] - raw[None, :, :]
    dist = np.sqrt((diff**2).sum(-1))
    mean_dist = dist[np.triu_indices(spec.C, k=1)].mean()
    if spec.class_separation == 0.0 or mean_dist == 0.0:
        return np.zeros_like(raw)
    return raw * (spec.class_separation / mean_dist)


def _random_spd_factor(d: int, gen: np.random.Generator) -> np.ndarray:
    """Cholesky factor of a random SPD matrix normalised to tr/d = 1."""
    a = gen.standard_normal((d, d)) / np.sqrt(d)
    sigma = a @ a.T + 0.05 * np.eye(d)
    sigma *= d / np.trace(sigma)
    return np.linalg.cholesky(sigma)


def _covariance_factors(spec: ProblemSpec, rng: RngStream) -> list[np.ndarray]:
    """Per-class Cholesky factors L with Sigma = L L^T."""
    style = spec.covariance_style
    if style == "spherical":
        eye = np.eye(spec.d)
        return [eye] * spec.C
    if style == "diagonal-random":
        gen = rng.child("cov", 0).generator()
        s2 = np.exp(gen.uniform(np.log(0.25), np.log(4.0), size=spec.d))
        s2 /= s2.mean()
        return [np.diag(np.sqrt(s2))] * spec.C
    if style == "full-random":
        factor = _random_spd_factor(spec.d, rng.child("cov", 0).generator())
        return [factor] * spec.C
    # class-distinct: fresh shape per class, overall scale spanning a fixed ratio
    factors = []
    for c in range(spec.C):
        base = _random_spd_factor(spec.d, rng.child("cov", c).generator())
        scale = CLASS_DISTINCT_RATIO ** (c / (spec.C - 1) / 2.0)
        factors.append(base * scale)
    return factors


def generate_problem(
    spec: ProblemSpec, rng: RngStream, cov_rng: RngStream | None = None
) -> ClassificationProblem:
    """Draw one problem; a pure function of (spec, rng, cov_rng).

    `cov_rng` overrides the stream the covariances are drawn from, letting
    two problems share the exact same covariance shape while everything
    else (means, subjects, noise) differs.
    """
    means = _class_means(spec, rng.child("means").generator())
    factors = _covariance_factors(spec, cov_rng if cov_rng is not None else rng)
    offsets = spec.subject_shift * rng.child("subjects").generator().standard_normal(
        (spec.n_subjects, spec.d)
    )

    sps = spec.samples_per_subject
    labels_one = np.arange(sps, dtype=np.int64) % spec.C
    feats = np.empty((spec.n_subjects * sps, spec.d))
    labels = np.empty(spec.n_subjects * sps, dtype=np.int64)
    subjects = np.empty(spec.n_subjects * sps, dtype=object)
    for s in range(spec.n_subjects):
        gen = rng.child("samples", s).generator()
        z = gen.standard_normal((sps, spec.d))
        block = slice(s * sps, (s + 1) * sps)
        rows = means[labels_one] + offsets[s]
        for c in range(spec.C):
            sel = labels_one == c
            rows[sel] += z[sel] @ factors[c].T
        feats[block] = rows
        labels[block] = labels_one
        subjects[block] = f"s{s:03d}"
    return ClassificationProblem(
        name=spec.name,
        features=feats,
        labels=labels,
        subjects=subjects.astype(str),
    )


def monotone_warp(features: np.ndarray) -> np.ndarray:
    """Fixed invertible per-feature distortion: signed power 0.8, then an
    affine rescale restoring each feature's original mean and deviation."""
    warped = np.sign(features) * np.abs(features) ** 0.8
    mu_w = warped.mean(axis=0)
    sd_w = warped.std(axis=0)
    sd_w[sd_w < 1e-12] = 1.0
    mu_o = features.mean(axis=0)
    sd_o = features.std(axis=0)
    return (warped - mu_w) / sd_w * sd_o + mu_o


# Built-in suite: one high-dimensional 7-class problem (isolated in every
# representation), one near-duplicate pair (same draws, second copy
# monotonically warped: same accuracy level, slightly shifted pattern) and
# a trio of low-dimensional 2-class problems whose last two share one
# covariance shape at different separations (same classifier pattern,
# different level) while the first stands apart from both.
SUITE_SPECS: tuple[ProblemSpec, ...] = (
    ProblemSpec("wide7", n_subjects=20, samples_per_subject=2100, C=7, d=96,
                class_separation=2.4, subject_shift=0.45, covariance_style="diagonal-random"),
    ProblemSpec("twin_plain", n_subjects=12, samples_per_subject=3500, C=2, d=16,
                class_separation=2.0, subject_shift=0.15, covariance_style="diagonal-random"),
    ProblemSpec("twin_warped", n_subjects=12, samples_per_subject=3500, C=2, d=16,
                class_separation=2.0, subject_shift=0.15, covariance_style="diagonal-random"),
    ProblemSpec("trio_a", n_subjects=20, samples_per_subject=2000, C=2, d=29,
                class_separation=2.9, subject_shift=0.35, covariance_style="diagonal-random"),
    ProblemSpec("trio_b", n_subjects=20, samples_per_subject=2000, C=2, d=30,
                class_separation=0.55, subject_shift=0.25, covariance_style="full-random"),
    ProblemSpec("trio_c", n_subjects=24, samples_per_subject=1700, C=2, d=30,
                class_separation=0.85, subject_shift=0.25, covariance_style="full-random"),
)


def builtin_suite(root_seed: int) -> list[ClassificationProblem]:
    """The six-problem suite; a pure function of the root seed."""
    rng = RngStream(root_seed)
    problems = []
    for idx, spec in enumerate(SUITE_SPECS):
        if spec.name == "twin_warped":
            base = problems[idx - 1]
            problems.append(
                ClassificationProblem(
                    name=spec.name,
                    features=monotone_warp(base.features),
                    labels=base.labels.copy(),
                    subjects=base.subjects.copy(),
                    label_names=base.label_names,
                )
            )
        elif spec.name == "trio_c":
            problems.append(
                generate_problem(
                    spec, rng.child("problem", idx), cov_rng=rng.child("problem", idx - 1)
                )
            )
        else:
            problems.append(generate_problem(spec, rng.child("problem", idx)))
    return problems
