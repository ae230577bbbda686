import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from corrnet.corr import (PEARSON, SPEARMAN, avg_mse, corr_matrix, corr_pair, load_corr, mse,
                          nodes_from_pairs, save_corr, unflatten, upper_tri)
from corrnet.errors import DegenerateSeriesError, ShapeError, TruncationError, VersionMismatchError


def naive_ranks(row):
    """Average ranks (1-based) with ties sharing the mean of their positions."""
    n = len(row)
    ranks = [0.0] * n
    for i in range(n):
        less = sum(1 for v in row if v < row[i])
        equal = sum(1 for v in row if v == row[i])
        ranks[i] = less + (equal + 1) / 2.0
    return ranks


def naive_pearson(u, v):
    n = len(u)
    mu = sum(u) / n
    mv = sum(v) / n
    cov = sum((u[k] - mu) * (v[k] - mv) for k in range(n))
    su = math.sqrt(sum((a - mu) ** 2 for a in u))
    sv = math.sqrt(sum((b - mv) ** 2 for b in v))
    return cov / (su * sv)


def oracle_matrix(x, method):
    rows = [list(map(float, r)) for r in x]
    if method == SPEARMAN:
        rows = [naive_ranks(r) for r in rows]
    n = len(rows)
    return np.array([[1.0 if i == j else naive_pearson(rows[i], rows[j]) for j in range(n)]
                     for i in range(n)])


def random_matrix(gen, ties=False):
    n = int(gen.integers(2, 13))
    length = int(gen.integers(3, 51))
    x = gen.normal(size=(n, length))
    if ties:
        x = np.round(x * 2) / 2
        x[:, 0] = x[:, 0] + 5.0  # keep each row non-constant
    return x


def test_pair_examples():
    assert corr_pair([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0, abs=1e-15)
    assert corr_pair([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-15)
    assert corr_pair([1, 2, 3], [1, 4, 9], SPEARMAN) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("method", [PEARSON, SPEARMAN])
def test_matrix_matches_oracle(method, gen):
    for k in range(100):
        x = random_matrix(gen, ties=method == SPEARMAN and k % 2 == 0)
        assert np.max(np.abs(corr_matrix(x, method) - oracle_matrix(x, method))) <= 1e-12


def test_identical_rows_and_permutation(gen):
    x = gen.normal(size=(5, 40))
    x[3] = x[1]
    r = corr_matrix(x)
    assert r[1, 3] == pytest.approx(1.0, abs=1e-15)
    perm = gen.permutation(5)
    assert np.allclose(corr_matrix(x[perm]), r[np.ix_(perm, perm)], atol=1e-15)


def test_degenerate_row_named():
    x = np.ones((3, 10))
    x[0] = np.arange(10)
    with pytest.raises(DegenerateSeriesError, match="degenerate series") as info:
        corr_matrix(x)
    assert info.value.row == 1


def test_upper_tri_order_and_inverse():
    r = np.array([[1.0, 0.1, 0.2], [0.1, 1.0, 0.3], [0.2, 0.3, 1.0]])
    assert upper_tri(r).tolist() == [0.1, 0.2, 0.3]
    assert np.array_equal(unflatten([0.1, 0.2, 0.3]), r)
    assert upper_tri(np.eye(100)).size == 4950
    assert nodes_from_pairs(4950) == 100
    with pytest.raises(ShapeError, match="bad vector length"):
        unflatten(np.zeros(4))


def test_mse_examples():
    v = np.array([0.2, -0.4])
    assert mse(v, v) == 0.0
    assert mse([0, 0], [1, 1]) == 1.0
    assert mse([1, -1, 0], [0, 0, 0]) == pytest.approx(2 / 3, abs=1e-15)
    assert avg_mse([0, 0, 0]) == 0.0
    assert avg_mse([0.1, 0.3]) == pytest.approx(0.2, abs=1e-15)
    with pytest.raises(ShapeError, match="length mismatch"):
        mse([1, 2], [1, 2, 3])


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 8), st.integers(3, 30)),
              elements=st.floats(-1e3, 1e3, allow_nan=False)),
       st.sampled_from([PEARSON, SPEARMAN]))
def test_matrix_properties(x, method):
    if np.any(np.ptp(x, axis=1) < 1e-6):
        return
    r = corr_matrix(x, method)
    assert np.array_equal(r, r.T)
    assert np.all(np.diag(r) == 1.0)
    assert np.all(np.abs(r) <= 1.0)
    if method == PEARSON:
        assert np.linalg.eigvalsh(r).min() >= -1e-9
    assert np.array_equal(unflatten(upper_tri(r)), r)


def test_corr_file_round_trip(tmp_path, gen):
    r = corr_matrix(gen.normal(size=(7, 30)))
    p = tmp_path / "r.cncm"
    save_corr(r, p)
    assert load_corr(p).tobytes() == r.tobytes()
    raw = bytearray(p.read_bytes())
    (tmp_path / "t.cncm").write_bytes(raw[:-1])
    with pytest.raises(TruncationError):
        load_corr(tmp_path / "t.cncm")
    raw[4] = 99
    (tmp_path / "v.cncm").write_bytes(bytes(raw))
    with pytest.raises(VersionMismatchError):
        load_corr(tmp_path / "v.cncm")
