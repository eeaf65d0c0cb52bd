import numpy as np

from probsim.rng import RngStream


def test_same_path_same_sequence():
    a = RngStream(123).child("stage", 4).child("rep", 1)
    b = RngStream(123).child("stage", 4).child("rep", 1)
    assert np.array_equal(a.generator().random(16), b.generator().random(16))
    assert a.token() == b.token()


def test_distinct_paths_differ():
    root = RngStream(123)
    seqs = [
        root.child("a", 0).generator().random(8),
        root.child("a", 1).generator().random(8),
        root.child("b", 0).generator().random(8),
        RngStream(124).child("a", 0).generator().random(8),
    ]
    for i in range(len(seqs)):
        for j in range(i + 1, len(seqs)):
            assert not np.array_equal(seqs[i], seqs[j])


def test_generator_is_fresh_each_call():
    s = RngStream(9).child("x")
    assert np.array_equal(s.generator().random(4), s.generator().random(4))
