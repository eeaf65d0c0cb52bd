"""2D embeddings of meta-datasets: classical MDS and t-SNE.

MDS is the deterministic Torgerson construction: eigendecomposition of the
double-centered squared-distance matrix, top two components scaled by the
square root of their eigenvalues.  t-SNE is the exact O(n^2) algorithm with
per-row perplexity calibration by binary search, early exaggeration,
momentum and per-parameter adaptive gains; because its optimization is
stochastic in the initialization, it is restarted several times and the
run with smallest final KL divergence wins.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .metafeatures import MetaDataset
from .rng import RngStream


class TsneDiverged(RuntimeError):
    """A single optimization run produced non-finite coordinates."""


@dataclass(frozen=True)
class DistanceMatrix:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("distance matrix must be square")
        if not np.isfinite(v).all() or (v < 0).any():
            raise ValueError("distances must be finite and non-negative")
        if np.abs(v - v.T).max() > 1e-12 or np.abs(np.diag(v)).max() != 0.0:
            raise ValueError("distance matrix must be symmetric with zero diagonal")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class Embedding2D:
    method: str  # "mds" | "tsne"
    coords: np.ndarray  # (n, 2)
    source_variant: str
    seed: int
    error: float | None = None  # final KL divergence; None for mds

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=np.float64)
        if c.ndim != 2 or c.shape[1] != 2 or not np.isfinite(c).all():
            raise ValueError("coords must be finite (n, 2)")
        object.__setattr__(self, "coords", c)


@dataclass(frozen=True)
class TsneConfig:
    perplexity: float = 5.0
    restarts: int = 10
    iterations: int = 1000
    learning_rate: float = 100.0
    momentum_start: float = 0.5
    momentum_final: float = 0.8
    momentum_switch_iter: int = 250
    exaggeration: float = 4.0
    exaggeration_iters: int = 100

    def validate_for(self, n: int) -> None:
        if not 1.0 <= self.perplexity <= (n - 1) / 3.0:
            raise ValueError(
                f"perplexity {self.perplexity} outside [1, (n-1)/3] for n={n}"
            )
        if self.restarts < 1 or self.iterations < 1:
            raise ValueError("restarts and iterations must be >= 1")


def pairwise_distances(meta: MetaDataset | np.ndarray) -> DistanceMatrix:
    """Euclidean distances between meta-dataset rows."""
    rows = meta.rows if isinstance(meta, MetaDataset) else np.asarray(meta, dtype=np.float64)
    if rows.shape[0] < 2:
        raise ValueError("need at least 2 rows")
    diff = rows[:, None, :] - rows[None, :, :]
    return DistanceMatrix(np.sqrt((diff**2).sum(axis=-1)))


def mds_embed(dist: DistanceMatrix, source_variant: str = "A", seed: int = 0) -> Embedding2D:
    """Classical (Torgerson) MDS to 2 dimensions.

    Negative eigenvalues among the top two yield an all-zero coordinate
    column; each column's largest-magnitude entry is made positive so the
    output is reproducible down to the sign.
    """
    n = dist.n
    if n < 3:
        raise ValueError("classical MDS needs at least 3 points")
    d2 = dist.values**2
    j = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * j @ d2 @ j
    evals, evecs = np.linalg.eigh((b + b.T) / 2.0)
    order = np.argsort(evals)[::-1][:2]
    coords = np.zeros((n, 2))
    for col, idx in enumerate(order):
        if evals[idx] > 0:
            coords[:, col] = evecs[:, idx] * np.sqrt(evals[idx])
    for col in range(2):
        i = int(np.argmax(np.abs(coords[:, col])))
        if coords[i, col] < 0:
            coords[:, col] = -coords[:, col]
    return Embedding2D(method="mds", coords=coords, source_variant=source_variant, seed=seed)


def calibrate_row(squared_distances: np.ndarray, perplexity: float):
    """Binary-search the precision beta so the conditional distribution over
    neighbours has entropy log2(perplexity); returns (beta, probabilities)."""
    d2 = np.asarray(squared_distances, dtype=np.float64)
    if (d2 <= 0).all():
        raise ValueError("row has no positive distance; duplicate-only point")
    target = np.log2(perplexity)
    beta = 1.0
    beta_min, beta_max = -np.inf, np.inf
    shift = d2.min()
    p = None
    for _ in range(200):
        w = np.exp(-beta * (d2 - shift))
        s = w.sum()
        p = w / s
        h = (np.log(s) + beta * ((d2 - shift) * p).sum()) / np.log(2.0)
        diff = h - target
        if abs(diff) < 1e-5:
            break
        if diff > 0:  # entropy too high: sharpen
            beta_min = beta
            beta = beta * 2.0 if beta_max == np.inf else 0.5 * (beta + beta_max)
        else:
            beta_max = beta
            beta = beta / 2.0 if beta_min == -np.inf else 0.5 * (beta + beta_min)
    return beta, p


def joint_probabilities(dist: DistanceMatrix, perplexity: float) -> np.ndarray:
    """Symmetrized joint probabilities with zero diagonal.

    Off-diagonal entries are floored at 1e-12 for gradient stability; the
    matrix sums to 1 (checked to 1e-9) before flooring.
    """
    n = dist.n
    d2 = dist.values**2
    cond = np.zeros((n, n))
    mask = ~np.eye(n, dtype=bool)
    for i in range(n):
        _, p = calibrate_row(d2[i][mask[i]], perplexity)
        cond[i][mask[i]] = p
    p_joint = (cond + cond.T) / (2.0 * n)
    total = p_joint.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"joint probabilities sum to {total}, expected 1")
    p_joint[mask] = np.maximum(p_joint[mask], 1e-12)
    return p_joint


def _student_t_q(y: np.ndarray):
    """Unnormalised Student-t similarities and their normalised, floored Q."""
    diff = y[:, None, :] - y[None, :, :]
    num = 1.0 / (1.0 + (diff**2).sum(axis=-1))
    np.fill_diagonal(num, 0.0)
    q = num / num.sum()
    return num, np.maximum(q, 1e-12)


def kl_divergence(p: np.ndarray, y: np.ndarray) -> float:
    """KL(P || Q(y)) over off-diagonal entries."""
    _, q = _student_t_q(y)
    mask = ~np.eye(len(p), dtype=bool)
    pm = p[mask]
    return float((pm * np.log(pm / q[mask])).sum())


def tsne_gradient(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Analytic KL gradient with the Student-t low-dimensional kernel."""
    num, q = _student_t_q(y)
    w = (p - q) * num
    return 4.0 * (np.diag(w.sum(axis=1)) - w) @ y


def tsne_run(p: np.ndarray, config: TsneConfig, rng: RngStream):
    """One gradient-descent run; returns (coords, final KL on unexaggerated P).

    Raises TsneDiverged if coordinates stop being finite (the restart loop
    treats that as a skipped run).
    """
    n = p.shape[0]
    y = 1e-4 * rng.generator().standard_normal((n, 2))
    velocity = np.zeros_like(y)
    gains = np.ones_like(y)
    p_run = p * config.exaggeration
    for it in range(config.iterations):
        if it == config.exaggeration_iters:
            p_run = p
        grad = tsne_gradient(p_run, y)
        momentum = (
            config.momentum_start if it < config.momentum_switch_iter else config.momentum_final
        )
        # Jacobs-style gains: grow while the gradient keeps opposing the
        # velocity sign (consistent descent direction), shrink on flips.
        agree = (grad > 0) != (velocity > 0)
        gains[agree] += 0.2
        gains[~agree] *= 0.8
        np.clip(gains, 0.01, None, out=gains)
        velocity = momentum * velocity - config.learning_rate * gains * grad
        y = y + velocity
        y = y - y.mean(axis=0)
        if not np.isfinite(y).all():
            raise TsneDiverged(f"non-finite coordinates at iteration {it}")
    kl = kl_divergence(p, y)
    if not np.isfinite(kl):
        raise TsneDiverged("non-finite final KL")
    return y, kl


def tsne_best(meta: MetaDataset, config: TsneConfig, rng: RngStream) -> Embedding2D:
    """Best-of-restarts t-SNE; lowest final KL wins, ties to lowest run index."""
    n = len(meta.rows)
    if n < 4:
        raise ValueError("t-SNE needs at least 4 points")
    config.validate_for(n)
    p = joint_probabilities(pairwise_distances(meta), config.perplexity)
    best = None
    for r in range(config.restarts):
        try:
            coords, kl = tsne_run(p, config, rng.child("restart", r))
        except TsneDiverged:
            continue
        if best is None or kl < best[1]:
            best = (coords, kl)
    if best is None:
        raise TsneDiverged("all restarts diverged")
    return Embedding2D(
        method="tsne",
        coords=best[0],
        source_variant=meta.variant,
        seed=rng.root_seed,
        error=best[1],
    )


def write_embedding_csv(emb: Embedding2D, meta: MetaDataset, path) -> None:
    import csv

    with open(str(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instance_id", "problem", "x", "y"])
        for i in range(len(emb.coords)):
            writer.writerow(
                [meta.instance_ids[i], meta.meta_labels[i]]
                + [format(v, ".17g") for v in emb.coords[i]]
            )


def write_embedding_sidecar(emb: Embedding2D, config: TsneConfig | None, path) -> None:
    doc = {
        "method": emb.method,
        "variant": emb.source_variant,
        "seed": emb.seed,
        "config": asdict(config) if config is not None else {},
    }
    if emb.error is not None:
        doc["error"] = emb.error
    with open(str(path), "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_embedding_csv(path):
    """Returns (coords, problems, instance_ids) from an embedding CSV."""
    import csv

    with open(str(path), newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        ids, problems, coords = [], [], []
        for rec in reader:
            ids.append(rec[0])
            problems.append(rec[1])
            coords.append([float(rec[2]), float(rec[3])])
    return np.array(coords), problems, ids
