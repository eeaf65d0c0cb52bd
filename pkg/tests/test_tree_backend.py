import numpy as np
import pytest

from probsim import kernels

HAS_COMPILED = kernels.TREE_BACKEND == "compiled"


def _trees_equal(a, b):
    return (
        np.array_equal(a.feature, b.feature)
        and np.array_equal(a.threshold, b.threshold, equal_nan=True)
        and np.array_equal(a.left, b.left)
        and np.array_equal(a.right, b.right)
        and np.array_equal(a.leaf_label, b.leaf_label)
    )


@pytest.mark.skipif(not HAS_COMPILED, reason="compiled kernel unavailable")
@pytest.mark.parametrize(
    "seed,n,d,k,quantize",
    [(0, 400, 6, 2, False), (1, 997, 3, 5, False), (2, 1500, 12, 3, False),
     (3, 800, 4, 2, True), (4, 64, 2, 2, True)],
)
def test_backends_bit_identical(seed, n, d, k, quantize):
    gen = np.random.default_rng(seed)
    x = gen.standard_normal((n, d))
    if quantize:  # heavy value ties stress the candidate enumeration
        x = np.round(x * 3) / 3
    y = gen.integers(0, k, n)
    assert _trees_equal(
        kernels.build_tree_pure(x, y, k), kernels.build_tree_compiled(x, y, k)
    )


def test_xor_is_shattered():
    x = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    y = np.array([0, 0, 1, 1])
    tree = kernels.build_tree(x, y, 2)
    assert np.array_equal(kernels.predict_tree(tree, x), y)


def test_depth_and_min_split_stops():
    gen = np.random.default_rng(7)
    x = gen.standard_normal((200, 3))
    y = gen.integers(0, 2, 200)
    stump = kernels.build_tree(x, y, 2, max_depth=1)
    depths = {0: 0}
    for i in range(stump.n_nodes):
        for child in (stump.left[i], stump.right[i]):
            if child >= 0:
                depths[child] = depths[i] + 1
    assert max(depths.values()) <= 1
    lazy = kernels.build_tree(x, y, 2, min_samples_split=200)
    assert lazy.n_nodes == 3 or lazy.n_nodes == 1  # at most one split


def test_pure_node_becomes_leaf():
    x = np.arange(10, dtype=float).reshape(-1, 1)
    y = np.zeros(10, dtype=int)
    y[5:] = 1
    tree = kernels.build_tree(x, y, 2)
    assert tree.n_nodes == 3
    assert tree.feature[0] == 0 and 4.0 <= tree.threshold[0] <= 5.0
    assert np.array_equal(kernels.predict_tree(tree, x), y)


def test_permutation_invariance():
    gen = np.random.default_rng(8)
    x = gen.standard_normal((500, 5))
    y = gen.integers(0, 3, 500)
    q = gen.standard_normal((200, 5))
    base = kernels.predict_tree(kernels.build_tree(x, y, 3), q)
    for seed in range(3):
        perm = np.random.default_rng(seed).permutation(len(y))
        shuffled = kernels.predict_tree(kernels.build_tree(x[perm], y[perm], 3), q)
        assert np.array_equal(base, shuffled)


def test_majority_tie_goes_to_lowest_class():
    # one feature value only: no split possible, 2-2 vote
    x = np.ones((4, 1))
    y = np.array([1, 0, 1, 0])
    tree = kernels.build_tree(x, y, 2)
    assert tree.n_nodes == 1
    assert tree.leaf_label[0] == 0
