import numpy as np
import pytest

from probsim.classifiers import (
    CLASSIFIER_KINDS,
    ClassifierSpec,
    accuracy,
    default_specs,
    fit,
    predict,
)
from probsim.problems import balanced_subsample, subject_split
from probsim.rng import RngStream
from probsim.synthetic import ProblemSpec, generate_problem

from oracles import bayes_accuracy_equal_means, oracle_predict


def test_spec_defaults_and_serialization():
    specs = default_specs()
    assert [s.kind for s in specs] == list(CLASSIFIER_KINDS)
    spec = ClassifierSpec("decision-tree", {"max_depth": 5})
    assert spec.hyperparameters["max_depth"] == 5
    assert ClassifierSpec.from_config(spec.to_config()) == spec
    with pytest.raises(ValueError):
        ClassifierSpec("svm")
    with pytest.raises(ValueError):
        ClassifierSpec("nearest-mean", {"bogus": 1})


def test_nearest_mean_basics():
    x = np.array([[0.0, 0.0], [2.0, 2.0]])
    y = np.array([0, 1])
    model = fit(ClassifierSpec("nearest-mean"), x, y)
    assert predict(model, np.array([[0.4, 0.4]]))[0] == 0
    # exactly equidistant -> lowest class index
    assert predict(model, np.array([[1.0, 1.0]]))[0] == 0


def test_one_nn_self_prediction():
    gen = np.random.default_rng(0)
    x = gen.standard_normal((50, 4))
    y = gen.integers(0, 3, 50)
    model = fit(ClassifierSpec("one-nearest-neighbor"), x, y)
    assert accuracy(predict(model, x), y) == 1.0


def test_tree_shatters_xor():
    x = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    y = np.array([0, 0, 1, 1])
    model = fit(ClassifierSpec("decision-tree"), x, y)
    assert accuracy(predict(model, x), y) == 1.0


def test_empty_query_and_dimension_mismatch():
    x = np.random.default_rng(1).standard_normal((10, 3))
    y = np.array([0, 1] * 5)
    model = fit(ClassifierSpec("nearest-mean"), x, y)
    assert predict(model, np.empty((0, 3))).shape == (0,)
    with pytest.raises(ValueError, match="dimension"):
        predict(model, np.zeros((2, 4)))


def test_fit_rejects_degenerate_input():
    with pytest.raises(ValueError, match="single class"):
        fit(ClassifierSpec("nearest-mean"), np.zeros((4, 2)), np.zeros(4, dtype=int))
    with pytest.raises(ValueError, match="2 training samples"):
        fit(ClassifierSpec("nearest-mean"), np.zeros((1, 2)), np.array([0]))
    with pytest.raises(ValueError, match="non-finite"):
        fit(ClassifierSpec("nearest-mean"), np.array([[np.nan, 0], [1, 1]]), np.array([0, 1]))


def test_accuracy_examples():
    assert accuracy(np.array([1, 0, 1]), np.array([1, 0, 1])) == 1.0
    assert accuracy(np.array([1, 0]), np.array([0, 1])) == 0.0
    assert accuracy(np.array([1, 0, 1, 1]), np.array([1, 0, 1, 0])) == 0.75
    with pytest.raises(ValueError):
        accuracy(np.array([1, 0]), np.array([1, 0, 1]))


def test_zero_variance_feature_is_regularized_not_fatal():
    x = np.zeros((20, 3))
    x[:, 0] = np.linspace(0, 1, 20)  # two constant features
    y = (x[:, 0] > 0.5).astype(int)
    for kind in ("linear-discriminant", "quadratic-discriminant", "logistic-regression"):
        model = fit(ClassifierSpec(kind), x, y)
        assert accuracy(predict(model, x), y) >= 0.9


@pytest.mark.parametrize("kind", CLASSIFIER_KINDS)
def test_decision_rule_matches_pointwise_oracle(kind):
    gen = np.random.default_rng(42)
    x = gen.standard_normal((500, 8))
    w = gen.standard_normal((8, 3))
    y = np.argmax(x @ w + 0.5 * gen.standard_normal((500, 3)), axis=1)
    model = fit(ClassifierSpec(kind), x, y)
    queries = gen.standard_normal((1000, 8))
    assert np.array_equal(predict(model, queries), oracle_predict(model, queries))


def _gaussian_problem(style, separation, seed, d=30, per_subject=1400):
    spec = ProblemSpec("g", n_subjects=10, samples_per_subject=per_subject, C=2, d=d,
                       class_separation=separation, subject_shift=0.0, covariance_style=style)
    p = generate_problem(spec, RngStream(seed).child("problem"))
    inst = subject_split(p, 0.7, RngStream(seed).child("split"))
    tr = balanced_subsample(p, inst.train_subjects, 3000, RngStream(seed).child("tr"))
    te = balanced_subsample(p, inst.test_subjects, 4000, RngStream(seed).child("te"))
    return p, (p.features[tr.indices], p.labels[tr.indices],
               p.features[te.indices], p.labels[te.indices])


def test_separable_problem_reaches_99():
    _, (xtr, ytr, xte, yte) = _gaussian_problem("spherical", 10.0, seed=7, d=20)
    for kind in ("linear-discriminant", "quadratic-discriminant", "logistic-regression"):
        acc = accuracy(predict(fit(ClassifierSpec(kind), xtr, ytr), xte), yte)
        assert acc >= 0.99, (kind, acc)


def test_qda_beats_lda_on_equal_means_and_tracks_bayes():
    from probsim.synthetic import CLASS_DISTINCT_RATIO, _random_spd_factor

    p, (xtr, ytr, xte, yte) = _gaussian_problem("class-distinct", 0.0, seed=8)
    lda = accuracy(predict(fit(ClassifierSpec("linear-discriminant"), xtr, ytr), xte), yte)
    qda = accuracy(predict(fit(ClassifierSpec("quadratic-discriminant"), xtr, ytr), xte), yte)
    assert qda - lda >= 0.2

    # independent Bayes-rule oracle: rebuild the generator's true covariances
    rng = RngStream(8).child("problem")
    l0 = _random_spd_factor(30, rng.child("cov", 0).generator())
    l1 = _random_spd_factor(30, rng.child("cov", 1).generator()) * np.sqrt(CLASS_DISTINCT_RATIO)
    bayes = bayes_accuracy_equal_means(l0 @ l0.T, l1 @ l1.T)
    assert abs(qda - bayes) <= 0.05, (qda, bayes)


def test_rigid_transform_invariance():
    gen = np.random.default_rng(3)
    x = gen.standard_normal((200, 5))
    y = gen.integers(0, 3, 200)
    q = gen.standard_normal((300, 5))
    rot, _ = np.linalg.qr(gen.standard_normal((5, 5)))
    shift = gen.standard_normal(5)
    for kind in ("nearest-mean", "linear-discriminant", "quadratic-discriminant", "one-nearest-neighbor"):
        base = predict(fit(ClassifierSpec(kind), x, y), q)
        moved = predict(fit(ClassifierSpec(kind), x @ rot.T + shift, y), q @ rot.T + shift)
        assert np.array_equal(base, moved), kind


def test_row_permutation_invariance():
    gen = np.random.default_rng(4)
    x = gen.standard_normal((300, 4))
    w = gen.standard_normal(4)
    y = (x @ w > 0).astype(int)
    q = gen.standard_normal((250, 4))
    perm = gen.permutation(300)
    for kind in CLASSIFIER_KINDS:
        base = predict(fit(ClassifierSpec(kind), x, y), q)
        shuffled = predict(fit(ClassifierSpec(kind), x[perm], y[perm]), q)
        assert np.array_equal(base, shuffled), kind


def test_logistic_loss_non_increasing():
    gen = np.random.default_rng(5)
    for trial in range(3):
        x = gen.standard_normal((400, 6)) @ gen.standard_normal((6, 6))
        y = (x[:, 0] + 0.3 * gen.standard_normal(400) > 0).astype(int)
        model = fit(ClassifierSpec("logistic-regression"), x, y)
        trace = model.params.loss_trace
        # float32 forward passes add ~1e-7 relative jitter near the plateau
        assert (np.diff(trace) <= 1e-6 * (1.0 + np.abs(trace[:-1]))).all()


def test_qda_equals_lda_under_shared_covariance():
    from dataclasses import replace

    gen = np.random.default_rng(6)
    x = gen.standard_normal((400, 5)) + np.array([1.0, 0, 0, 0, 0])
    y = gen.integers(0, 3, 400)
    lda_model = fit(ClassifierSpec("linear-discriminant"), x, y)
    qda_model = fit(ClassifierSpec("quadratic-discriminant"), x, y)

    # rebuild the pooled covariance exactly as the LDA fitter does
    means = lda_model.params.means
    pooled = np.zeros((5, 5))
    for c in range(3):
        diff = x[y == c] - means[c]
        pooled += diff.T @ diff
    pooled /= len(x)
    from probsim.classifiers import _shrunk_covariance

    reg = _shrunk_covariance(pooled, 0.1)
    chol = np.linalg.cholesky(reg)
    inv_chol = np.linalg.inv(chol)
    shared_precision = inv_chol.T @ inv_chol
    shared_logdet = 2.0 * np.log(np.diag(chol)).sum()
    forced = replace(
        qda_model.params,
        precisions=np.stack([shared_precision] * 3),
        logdets=np.full(3, shared_logdet),
    )
    from probsim.classifiers import TrainedModel

    qda_shared = TrainedModel("quadratic-discriminant", forced, qda_model.classes_seen, 5)
    q = gen.standard_normal((500, 5))
    assert np.array_equal(predict(qda_shared, q), predict(lda_model, q))
