"""Six simple supervised classifiers, implemented from first principles.

All are deterministic functions of their training data: ties anywhere
(discriminant scores, distances, impurity gains, majority votes) break
toward the lowest index.  Models are immutable; `fit` and `predict` are
pure and safe to call concurrently.

Heavy inner products (the 1-NN distance ranking and the logistic-regression
gradient loop) run in float32 for speed; all model parameters, decision
scores and losses stay in float64.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import kernels

CLASSIFIER_KINDS = (
    "nearest-mean",
    "linear-discriminant",
    "quadratic-discriminant",
    "logistic-regression",
    "one-nearest-neighbor",
    "decision-tree",
)

_DEFAULT_HYPERS: dict[str, dict[str, Any]] = {
    "nearest-mean": {},
    "linear-discriminant": {"shrinkage": 0.1},
    "quadratic-discriminant": {"shrinkage": 0.1},
    "logistic-regression": {"l2": 1e-3, "iterations": 500, "step_size": 0.1},
    "one-nearest-neighbor": {},
    "decision-tree": {"max_depth": 20, "min_samples_split": 2},
}


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str
    hyperparameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in CLASSIFIER_KINDS:
            raise ValueError(f"unknown classifier kind {self.kind!r}")
        merged = dict(_DEFAULT_HYPERS[self.kind])
        unknown = set(self.hyperparameters) - set(merged)
        if unknown:
            raise ValueError(f"{self.kind}: unknown hyperparameters {sorted(unknown)}")
        merged.update(self.hyperparameters)
        object.__setattr__(self, "hyperparameters", merged)

    def to_config(self) -> dict:
        return {"kind": self.kind, **self.hyperparameters}

    @staticmethod
    def from_config(cfg: dict) -> "ClassifierSpec":
        cfg = dict(cfg)
        kind = cfg.pop("kind")
        return ClassifierSpec(kind, cfg)


def default_specs() -> list[ClassifierSpec]:
    """The six classifiers in canonical column order."""
    return [ClassifierSpec(kind) for kind in CLASSIFIER_KINDS]


@dataclass(frozen=True)
class TrainedModel:
    kind: str
    params: Any
    classes_seen: np.ndarray  # original label values, ascending
    n_features: int


def _shrunk_covariance(sigma: np.ndarray, shrinkage: float) -> np.ndarray:
    """Blend the MLE covariance toward a scaled identity.

    The target scale is tr(Sigma)/d; a degenerate all-zero covariance
    (single sample or exact duplicates) falls back to the identity so the
    factorization below never fails.
    """
    d = sigma.shape[0]
    target = float(np.trace(sigma)) / d
    if target <= 0.0:
        target = 1.0
    return (1.0 - shrinkage) * sigma + shrinkage * target * np.eye(d)


@dataclass(frozen=True)
class _GaussianParams:
    means: np.ndarray
    weights: np.ndarray | None = None  # LDA: (K, d) rows of mu^T Sigma^-1
    offsets: np.ndarray | None = None  # LDA: -(1/2) mu^T Sigma^-1 mu
    precisions: np.ndarray | None = None  # QDA: (K, d, d)
    logdets: np.ndarray | None = None  # QDA: (K,)


@dataclass(frozen=True)
class _LogisticParams:
    mu: np.ndarray
    sd: np.ndarray
    w: np.ndarray
    b: np.ndarray
    loss_trace: np.ndarray


@dataclass(frozen=True)
class _NeighborParams:
    x32: np.ndarray  # training rows sorted by label, float32
    norms32: np.ndarray
    labels: np.ndarray  # compact labels, ascending


def _fit_nearest_mean(x, y, k, hp):
    means = np.stack([x[y == c].mean(axis=0) for c in range(k)])
    return _GaussianParams(means=means)


def _fit_lda(x, y, k, hp):
    means = np.stack([x[y == c].mean(axis=0) for c in range(k)])
    pooled = np.zeros((x.shape[1], x.shape[1]))
    for c in range(k):
        diff = x[y == c] - means[c]
        pooled += diff.T @ diff
    pooled /= x.shape[0]
    reg = _shrunk_covariance(pooled, hp["shrinkage"])
    weights = np.linalg.solve(reg, means.T).T
    offsets = -0.5 * np.einsum("cd,cd->c", weights, means)
    return _GaussianParams(means=means, weights=weights, offsets=offsets)


def _fit_qda(x, y, k, hp):
    d = x.shape[1]
    means = np.empty((k, d))
    precisions = np.empty((k, d, d))
    logdets = np.empty(k)
    for c in range(k):
        rows = x[y == c]
        means[c] = rows.mean(axis=0)
        diff = rows - means[c]
        sigma = diff.T @ diff / len(rows)
        reg = _shrunk_covariance(sigma, hp["shrinkage"])
        chol = np.linalg.cholesky(reg)
        inv_chol = np.linalg.inv(chol)
        precisions[c] = inv_chol.T @ inv_chol
        logdets[c] = 2.0 * np.log(np.diag(chol)).sum()
    return _GaussianParams(means=means, precisions=precisions, logdets=logdets)


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _fit_logistic(x, y, k, hp):
    m, d = x.shape
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    sd = np.where(sd < 1e-12, 1.0, sd)
    xs32 = ((x - mu) / sd).astype(np.float32)
    onehot = np.zeros((m, k))
    onehot[np.arange(m), y] = 1.0
    w = np.zeros((d, k))
    b = np.zeros(k)
    l2 = float(hp["l2"])
    step = float(hp["step_size"])
    losses = np.empty(int(hp["iterations"]))
    for it in range(int(hp["iterations"])):
        logits = (xs32 @ w.astype(np.float32)).astype(np.float64) + b
        p = _softmax_rows(logits)
        losses[it] = (
            -np.log(np.maximum(p[np.arange(m), y], 1e-300)).mean() + 0.5 * l2 * (w**2).sum()
        )
        g = (p - onehot) / m
        grad_w = (xs32.T @ g.astype(np.float32)).astype(np.float64) + l2 * w
        grad_b = g.sum(axis=0)
        w = w - step * grad_w
        b = b - step * grad_b
    return _LogisticParams(mu=mu, sd=sd, w=w, b=b, loss_trace=losses)


def _fit_one_nn(x, y, k, hp):
    order = np.argsort(y, kind="stable")  # equidistant ties then resolve to lowest class
    x32 = np.ascontiguousarray(x[order], dtype=np.float32)
    return _NeighborParams(x32=x32, norms32=(x32**2).sum(axis=1), labels=y[order])


def _fit_tree(x, y, k, hp):
    return kernels.build_tree(x, y, k, hp["max_depth"], hp["min_samples_split"])


_FITTERS = {
    "nearest-mean": _fit_nearest_mean,
    "linear-discriminant": _fit_lda,
    "quadratic-discriminant": _fit_qda,
    "logistic-regression": _fit_logistic,
    "one-nearest-neighbor": _fit_one_nn,
    "decision-tree": _fit_tree,
}


def fit(spec: ClassifierSpec, features: np.ndarray, labels: np.ndarray) -> TrainedModel:
    """Train one classifier; deterministic given (spec, data)."""
    x = np.ascontiguousarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValueError("features must be (m, d) with one label per row")
    if x.shape[0] < 2:
        raise ValueError("need at least 2 training samples")
    if not np.isfinite(x).all():
        raise ValueError("non-finite training features")
    classes_seen, y_compact = np.unique(y, return_inverse=True)
    if len(classes_seen) < 2:
        raise ValueError("training set holds a single class")
    params = _FITTERS[spec.kind](x, y_compact, len(classes_seen), spec.hyperparameters)
    return TrainedModel(
        kind=spec.kind, params=params, classes_seen=classes_seen, n_features=x.shape[1]
    )


def _scores_nearest_mean(params, x):
    d2 = np.stack([((x - mu) ** 2).sum(axis=1) for mu in params.means], axis=1)
    return -d2


def _scores_lda(params, x):
    return x @ params.weights.T + params.offsets


def _scores_qda(params, x):
    k = len(params.means)
    scores = np.empty((x.shape[0], k))
    for c in range(k):
        diff = x - params.means[c]
        quad = np.einsum("qd,de,qe->q", diff, params.precisions[c], diff)
        scores[:, c] = -0.5 * (params.logdets[c] + quad)
    return scores


def _scores_logistic(params, x):
    return ((x - params.mu) / params.sd) @ params.w + params.b


def _predict_one_nn(params, x):
    q = x.shape[0]
    out = np.empty(q, dtype=np.int64)
    x32 = np.ascontiguousarray(x, dtype=np.float32)
    chunk = max(1, int(4e7) // max(1, params.x32.shape[0]))
    for lo in range(0, q, chunk):
        hi = min(q, lo + chunk)
        # argmin of |t|^2 - 2 q.t ranks squared distances; float32 keeps the
        # (memory-bound) products fast and ties resolve to the lowest index,
        # i.e. the lowest class, because rows are sorted by label.
        scores = params.norms32[None, :] - 2.0 * (x32[lo:hi] @ params.x32.T)
        out[lo:hi] = params.labels[np.argmin(scores, axis=1)]
    return out


def predict(model: TrainedModel, features: np.ndarray) -> np.ndarray:
    """Predict labels; ties in scores break toward the lowest class index."""
    x = np.ascontiguousarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.n_features:
        raise ValueError(
            f"query dimension {x.shape[1] if x.ndim == 2 else '?'} != trained {model.n_features}"
        )
    if x.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    if model.kind == "one-nearest-neighbor":
        compact = _predict_one_nn(model.params, x)
    elif model.kind == "decision-tree":
        compact = kernels.predict_tree(model.params, x)
    else:
        scores = {
            "nearest-mean": _scores_nearest_mean,
            "linear-discriminant": _scores_lda,
            "quadratic-discriminant": _scores_qda,
            "logistic-regression": _scores_logistic,
        }[model.kind](model.params, x)
        compact = np.argmax(scores, axis=1)
    return model.classes_seen[compact]


def accuracy(predicted: np.ndarray, truth: np.ndarray) -> float:
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape or predicted.ndim != 1 or len(truth) < 1:
        raise ValueError("predicted and truth must be equal-length non-empty vectors")
    return float(np.mean(predicted == truth))
