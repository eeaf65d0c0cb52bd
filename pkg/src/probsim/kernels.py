"""Backend selection for the tree-building hot loop.

The compiled Cython kernel is preferred; the pure-numpy builder is the
fallback (same trees, bit for bit).  Set PROBSIM_PURE_TREE=1 to force the
fallback, e.g. to compare outputs or benchmark.
"""

from __future__ import annotations

import os

import numpy as np

from ._tree_py import TreeArrays, build_tree as _build_tree_pure, predict_tree

try:
    from . import _tree_kernel as _compiled
except ImportError:  # pragma: no cover - build-environment dependent
    _compiled = None

if os.environ.get("PROBSIM_PURE_TREE"):
    _compiled = None

TREE_BACKEND = "compiled" if _compiled is not None else "pure"


def build_tree_pure(x, y, n_classes, max_depth=20, min_samples_split=2) -> TreeArrays:
    return _build_tree_pure(x, y, n_classes, max_depth, min_samples_split)


def build_tree_compiled(x, y, n_classes, max_depth=20, min_samples_split=2) -> TreeArrays:
    if _compiled is None:
        raise RuntimeError("compiled tree kernel is not available")
    x = np.ascontiguousarray(x, dtype=np.float64)
    y32 = np.ascontiguousarray(y, dtype=np.int32)
    sidx = np.ascontiguousarray(np.argsort(x, axis=0).T, dtype=np.int32)
    feature, threshold, left, right, leaf = _compiled.build_tree_arrays(
        x, y32, int(n_classes), int(max_depth), int(min_samples_split), sidx
    )
    return TreeArrays(feature=feature, threshold=threshold, left=left, right=right, leaf_label=leaf)


def build_tree(x, y, n_classes, max_depth=20, min_samples_split=2) -> TreeArrays:
    if _compiled is not None:
        return build_tree_compiled(x, y, n_classes, max_depth, min_samples_split)
    return build_tree_pure(x, y, n_classes, max_depth, min_samples_split)


__all__ = [
    "TREE_BACKEND",
    "TreeArrays",
    "build_tree",
    "build_tree_compiled",
    "build_tree_pure",
    "predict_tree",
]
