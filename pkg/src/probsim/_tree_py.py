"""Pure-numpy CART builder; reference semantics for the compiled kernel.

Both backends must produce bit-identical trees.  The contract:

* splits minimise weighted Gini impurity, searched exhaustively over all
  features and all midpoints between consecutive distinct sorted values;
* the comparison score is sum(countL^2)/nL + sum(countR^2)/nR computed in
  float64 from exact integer counts (maximising it minimises impurity);
* candidates whose midpoint rounds onto the upper value are skipped so the
  train-time partition always equals the predict-time rule x <= t;
* equal scores resolve to the lowest feature index, then lowest threshold;
* a node becomes a leaf at depth `max_depth`, below `min_samples_split`
  samples, when pure, or when no valid candidate exists; zero-gain splits
  of impure nodes are allowed (required for XOR-like data);
* leaf label is the majority class, ties to the lowest class index;
* nodes are numbered in preorder (left subtree first).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class TreeArrays:
    """Flat tree: feature[i] < 0 marks a leaf with label leaf_label[i]."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_label: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)


def _best_split(x_node: np.ndarray, y_node: np.ndarray, counts: np.ndarray):
    """Return (feature, threshold, score) of the best split or None."""
    n, d = x_node.shape
    k = len(counts)
    best = None
    best_score = -np.inf
    for f in range(d):
        vals = x_node[:, f]
        order = np.argsort(vals)
        sv = vals[order]
        bounds = np.flatnonzero(sv[:-1] != sv[1:])
        if len(bounds) == 0:
            continue
        onehot = np.zeros((n, k), dtype=np.int64)
        onehot[np.arange(n), y_node[order]] = 1
        cum = np.cumsum(onehot, axis=0)
        cnt_l = cum[bounds]
        cnt_r = counts[None, :] - cnt_l
        n_l = (bounds + 1).astype(np.float64)
        n_r = n - n_l
        score = (cnt_l**2).sum(axis=1) / n_l + (cnt_r**2).sum(axis=1) / n_r
        thr = 0.5 * (sv[bounds] + sv[bounds + 1])
        score = np.where(thr < sv[bounds + 1], score, -np.inf)
        j = int(np.argmax(score))
        if score[j] > best_score:
            best_score = float(score[j])
            best = (f, float(thr[j]), best_score)
    return best


def build_tree(
    x: np.ndarray, y: np.ndarray, n_classes: int, max_depth: int = 20, min_samples_split: int = 2
) -> TreeArrays:
    """Grow a CART tree on float64 features and integer labels 0..K-1."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    leaf_label: list[int] = []

    # Stack entries: (row indices, depth, parent node, is_left_child).
    stack = [(np.arange(len(y)), 0, -1, False)]
    while stack:
        rows, depth, parent, is_left = stack.pop()
        idx = len(feature)
        if parent >= 0:
            if is_left:
                left[parent] = idx
            else:
                right[parent] = idx
        feature.append(-1)
        threshold.append(np.nan)
        left.append(-1)
        right.append(-1)

        y_node = y[rows]
        counts = np.bincount(y_node, minlength=n_classes)
        n = len(rows)
        pure = int((counts.astype(np.int64) ** 2).sum()) == n * n
        split = None
        if depth < max_depth and n >= min_samples_split and not pure:
            split = _best_split(x[rows], y_node, counts)
        if split is None:
            leaf_label.append(int(np.argmax(counts)))
            continue
        leaf_label.append(-1)
        f, t, _ = split
        feature[idx] = f
        threshold[idx] = t
        mask = x[rows, f] <= t
        stack.append((rows[~mask], depth + 1, idx, False))
        stack.append((rows[mask], depth + 1, idx, True))

    return TreeArrays(
        feature=np.array(feature, dtype=np.int32),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int32),
        right=np.array(right, dtype=np.int32),
        leaf_label=np.array(leaf_label, dtype=np.int32),
    )


def predict_tree(tree: TreeArrays, x: np.ndarray) -> np.ndarray:
    """Route rows of `x` to leaves; returns integer labels."""
    q = x.shape[0]
    idx = np.zeros(q, dtype=np.int64)
    while True:
        f = tree.feature[idx]
        active = np.flatnonzero(f >= 0)
        if len(active) == 0:
            break
        node = idx[active]
        go_left = x[active, f[active]] <= tree.threshold[node]
        idx[active] = np.where(go_left, tree.left[node], tree.right[node])
    return tree.leaf_label[idx].astype(np.int64)
