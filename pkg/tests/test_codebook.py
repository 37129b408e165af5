import numpy as np
import pytest

from risimaging.analysis import numerical_rank
from risimaging.codebook import (
    as_snapshot_matrix,
    load_codebook,
    random_codebook,
    random_one_bit_codebook,
    save_codebook,
)


def test_single_entry():
    w = as_snapshot_matrix(random_one_bit_codebook(1, 1, 7))
    assert w.shape == (1, 1) and w[0, 0] in (1.0, -1.0)


def test_entries_are_pm_one_and_balanced():
    n, t = 4, 10_000
    w = as_snapshot_matrix(random_one_bit_codebook(n, t, 3))
    assert set(np.unique(w)) == {-1.0, 1.0}
    assert abs(w.mean()) < 3 / np.sqrt(n * t)


def test_same_seed_identical():
    a = random_codebook([9, 16], 50, 123)
    b = random_codebook([9, 16], 50, 123)
    for x, y in zip(a.patterns, b.patterns):
        assert x.tobytes() == y.tobytes()
    c = random_codebook([9, 16], 50, 124)
    assert not np.array_equal(a.patterns[0], c.patterns[0])


def test_panels_use_independent_substreams():
    a = random_codebook([9, 16], 20, 5)
    b = random_codebook([9], 20, 5)
    np.testing.assert_array_equal(a.patterns[0], b.patterns[0])
    assert not np.array_equal(a.patterns[0], a.patterns[1][:, :9])


def test_prefix_consistency():
    short = random_codebook([25], 100, 11).patterns[0]
    long = random_codebook([25], 300, 11).patterns[0]
    np.testing.assert_array_equal(long[:100], short)


def test_patterns_are_read_only():
    w = as_snapshot_matrix(random_one_bit_codebook(3, 3, 0))
    with pytest.raises(ValueError):
        w[0, 0] = 5


def test_two_by_two_distinct_rows_rank():
    w = np.array([[1.0, 1.0], [1.0, -1.0]])
    assert abs(np.linalg.det(w)) == pytest.approx(2.0)
    assert numerical_rank(w).rank == 2


def test_repeated_row_rank_one():
    assert numerical_rank(np.ones((10, 6))).rank == 1


def test_300x225_full_rank():
    w = as_snapshot_matrix(random_one_bit_codebook(225, 300, 0))
    assert numerical_rank(w).rank == 225


def test_bad_index():
    cb = random_codebook([4, 4], 5, 0)
    with pytest.raises(IndexError):
        as_snapshot_matrix(cb, 2)


def test_config_row():
    cb = random_codebook([4, 6], 5, 0)
    np.testing.assert_array_equal(cb.config(1, 3), cb.patterns[1][3])


def test_continuous_phase_option():
    cb = random_codebook([8], 10, 0, one_bit=False, amplitude=0.5)
    assert not cb.one_bit
    np.testing.assert_allclose(np.abs(cb.patterns[0]), 0.5)


def test_invalid_sizes():
    with pytest.raises(ValueError):
        random_codebook([4], 0, 0)
    with pytest.raises(ValueError):
        random_codebook([0], 3, 0)


def test_text_round_trip(tmp_path):
    cb = random_codebook([4, 6], 7, 99)
    path = tmp_path / "cb.txt"
    save_codebook(path, cb)
    lines = path.read_text().splitlines()
    assert lines[0] == "# seed 99" and lines[1] == "# ris 0"
    assert len(lines[2].split()) == 4
    back = load_codebook(path)
    assert back.seed == 99 and back.num_panels == 2
    for x, y in zip(cb.patterns, back.patterns):
        np.testing.assert_array_equal(x, y)


def test_text_rejects_bad_entries(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("1 -1\n1 0\n")
    with pytest.raises(ValueError, match=":2:"):
        load_codebook(path)
