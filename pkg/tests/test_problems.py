import numpy as np
import pytest

from probsim.problems import (
    ClassificationProblem,
    ProblemFormatError,
    balanced_subsample,
    load_problem_csv,
    subject_split,
    write_problem_csv,
)
from probsim.rng import RngStream
from probsim.synthetic import ProblemSpec, generate_problem


def _write(tmp_path, text, name="p.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_small_file_sorted_token_reindexing(tmp_path):
    path = _write(
        tmp_path,
        "subject_id,label,f0,f1\n"
        "s1,b,1.0,2.0\n"
        "s1,a,3.0,4.0\n"
        "s2,b,5.0,6.0\n"
        "s2,a,7.0,8.0\n",
    )
    p = load_problem_csv(path)
    assert p.n_samples == 4 and p.n_classes == 2
    assert p.label_names == ("a", "b")
    assert p.labels.tolist() == [1, 0, 1, 0]  # a -> 0, b -> 1
    assert set(p.subject_ids) == {"s1", "s2"}


def test_load_permuted_rows_same_statistics(tmp_path):
    rows = ["s1,a,1.0,2.5", "s2,b,2.0,0.5", "s1,b,3.0,1.5", "s2,a,4.0,2.0"]
    head = "subject_id,label,f0,f1\n"
    p1 = load_problem_csv(_write(tmp_path, head + "\n".join(rows) + "\n", "a.csv"))
    p2 = load_problem_csv(_write(tmp_path, head + "\n".join(rows[::-1]) + "\n", "b.csv"))
    assert np.array_equal(np.bincount(p1.labels), np.bincount(p2.labels))
    key = lambda p: sorted(map(tuple, np.column_stack([p.subjects, p.labels, p.features]).tolist()))
    assert key(p1) == key(p2)


def test_round_trip_bit_identical(tmp_path):
    spec = ProblemSpec("rt", n_subjects=20, samples_per_subject=10, C=3, d=4,
                       class_separation=1.0, subject_shift=0.5, covariance_style="full-random")
    p = generate_problem(spec, RngStream(3).child("problem"))
    path = tmp_path / "rt.csv"
    write_problem_csv(p, path)
    q = load_problem_csv(path)
    assert np.array_equal(p.features, q.features)
    assert np.array_equal(p.labels, q.labels)
    assert np.array_equal(p.subjects, q.subjects)
    # and write(load(f)) reproduces the file byte for byte
    path2 = tmp_path / "rt2.csv"
    write_problem_csv(q, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_header_error_names_column(tmp_path):
    path = _write(tmp_path, "subject_id,label,f0,feat1\ns1,a,1,2\ns2,b,1,2\n")
    with pytest.raises(ProblemFormatError, match="column 3.*f1.*feat1"):
        load_problem_csv(path)


def test_bad_feature_errors_carry_line_number(tmp_path):
    path = _write(tmp_path, "subject_id,label,f0\ns1,a,1.0\ns2,b,oops\n")
    with pytest.raises(ProblemFormatError, match="line 3"):
        load_problem_csv(path)
    path = _write(tmp_path, "subject_id,label,f0\ns1,a,1.0\ns2,b,inf\n", "q.csv")
    with pytest.raises(ProblemFormatError, match="line 3"):
        load_problem_csv(path)


def test_single_class_file_rejected(tmp_path):
    path = _write(tmp_path, "subject_id,label,f0\ns1,a,1.0\ns2,a,2.0\n")
    with pytest.raises(ProblemFormatError, match="2 classes"):
        load_problem_csv(path)


def _problem(n_subjects=20, per_subject=40, c=2, seed=11):
    spec = ProblemSpec("t", n_subjects=n_subjects, samples_per_subject=per_subject, C=c, d=3,
                       class_separation=1.0, subject_shift=0.1)
    return generate_problem(spec, RngStream(seed).child("problem"))


def test_subject_split_70_30():
    p = _problem()
    inst = subject_split(p, 0.7, RngStream(1).child("split"))
    assert len(inst.train_subjects) == 14 and len(inst.test_subjects) == 6
    assert inst.train_subjects | inst.test_subjects == set(p.subject_ids)
    assert not inst.train_subjects & inst.test_subjects


def test_subject_split_minimal_and_determinism():
    p = _problem(n_subjects=4)
    with pytest.raises(ValueError):
        subject_split(p, 0.05, RngStream(1))  # empty train side
    a = subject_split(p, 0.5, RngStream(2).child("s"))
    b = subject_split(p, 0.5, RngStream(2).child("s"))
    assert a.train_subjects == b.train_subjects and a.test_subjects == b.test_subjects
    assert len(a.train_subjects) == 2


def test_two_subject_half_split():
    p = _problem(n_subjects=4)
    two = frozenset(list(p.subject_ids)[:2])
    # restrict to a 2-subject subproblem by rebuilding
    keep = np.isin(p.subjects, sorted(two))
    q = ClassificationProblem("q", p.features[keep], p.labels[keep], p.subjects[keep])
    inst = subject_split(q, 0.5, RngStream(0).child("s"))
    assert len(inst.train_subjects) == 1 and len(inst.test_subjects) == 1


def test_balanced_even_split():
    p = _problem()
    inst = subject_split(p, 0.7, RngStream(4).child("s"))
    s = balanced_subsample(p, inst.train_subjects, 100, RngStream(4).child("b"))
    counts = np.bincount(p.labels[s.indices])
    assert counts.tolist() == [50, 50]
    assert set(p.subjects[s.indices]) <= inst.train_subjects


def test_balanced_seven_classes_remainder():
    p = _problem(c=7, per_subject=70)
    inst = subject_split(p, 0.7, RngStream(5).child("s"))
    s = balanced_subsample(p, inst.train_subjects, 100, RngStream(5).child("b"))
    counts = np.bincount(p.labels[s.indices], minlength=7)
    assert counts.sum() == 100
    assert counts.max() - counts.min() <= 1 and sorted(set(counts)) in ([14, 15], [14], [15])


def test_balanced_deficit_redistribution():
    # class 1 pool holds 3 samples; m=10 must come out 7/3
    feats = np.arange(26, dtype=float).reshape(13, 2)
    labels = np.array([0] * 10 + [1] * 3)
    subjects = np.array(["s0"] * 13)
    subjects[5:] = "s1"
    p = ClassificationProblem("d", feats, labels, subjects)
    s = balanced_subsample(p, {"s0", "s1"}, 10, RngStream(6).child("b"))
    counts = np.bincount(p.labels[s.indices], minlength=2)
    assert counts.tolist() == [7, 3]
    assert len(np.unique(s.indices)) == 10  # without replacement


def test_balanced_requires_two_classes():
    p = _problem()
    only0 = p.subjects[p.labels == 0]  # impossible by construction; fabricate instead
    feats = np.zeros((6, 2))
    labels = np.array([0, 0, 0, 1, 1, 1])
    subjects = np.array(["a", "a", "a", "b", "b", "b"])
    q = ClassificationProblem("q", feats, labels, subjects)
    with pytest.raises(ValueError, match="2 classes"):
        balanced_subsample(q, {"a"}, 4, RngStream(0))


def test_no_subject_leakage_between_sides():
    p = _problem()
    inst = subject_split(p, 0.7, RngStream(7).child("s"))
    tr = balanced_subsample(p, inst.train_subjects, 200, RngStream(7).child("tr"))
    te = balanced_subsample(p, inst.test_subjects, 200, RngStream(7).child("te"))
    assert not set(tr.indices) & set(te.indices)
    assert set(p.subjects[tr.indices]) <= inst.train_subjects
    assert set(p.subjects[te.indices]) <= inst.test_subjects


def test_balance_property_random_cases():
    p = _problem(c=3, per_subject=60)
    ids = frozenset(p.subject_ids)
    for i, m in enumerate([3, 10, 33, 100, 299]):
        s = balanced_subsample(p, ids, m, RngStream(8).child("b", i))
        counts = np.bincount(p.labels[s.indices], minlength=3)
        assert counts.sum() == m
        assert counts.max() - counts.min() <= 1


def test_sampling_determinism():
    p = _problem()
    ids = frozenset(p.subject_ids)
    a = balanced_subsample(p, ids, 120, RngStream(9).child("b"))
    b = balanced_subsample(p, ids, 120, RngStream(9).child("b"))
    assert np.array_equal(a.indices, b.indices)
