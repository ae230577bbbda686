import numpy as np
import pytest
from scipy.stats import binom
from hypothesis import given, settings, strategies as st

from corrnet.errors import ConnectivityError, ParameterError, SelectionError
from corrnet.netgen import Graph, gen_er, gen_sf, select_nodes


def test_er_small_is_connected_and_deterministic():
    a = gen_er(4, 3.0, seed=7)
    b = gen_er(4, 3.0, seed=7)
    assert a.is_connected()
    assert a.edges == b.edges
    assert a.to_text() == b.to_text()


def test_er_p_one_gives_single_edge():
    g = gen_er(2, 2.0, seed=0)
    assert g.edges == ((0, 1),)


def test_er_mean_degree_over_seeds():
    degs = [gen_er(100, 6.0, seed=s).mean_degree for s in range(100)]
    assert abs(np.mean(degs) - 6.0) <= 0.5


def test_er_unreachable_connectivity():
    with pytest.raises(ConnectivityError, match="connectivity unreachable"):
        gen_er(50, 0.2, seed=1, max_attempts=5)


@pytest.mark.parametrize("n,k", [(0, 1.0), (10, 0.0), (10, 11.0)])
def test_er_bad_parameters(n, k):
    with pytest.raises(ParameterError):
        gen_er(n, k, seed=0)


def test_ba_tree():
    g = gen_sf(5, 1, seed=3)
    assert g.edge_count == 4
    assert g.is_connected()
    assert g.degree_sequence.min() == 1


def test_ba_min_degree_one():
    assert gen_sf(100, 1, seed=11).degree_sequence.min() == 1


def test_ba_heavier_tail_than_er():
    # a connected G(1000, 4/1000) is vanishingly rare, so the ER side uses its
    # exact degree law: Binomial(N - 1, <k> / N)
    sf = gen_sf(1000, 2, seed=5)
    frac_sf = np.mean(sf.degree_sequence >= 20)
    frac_er = binom.sf(19, 999, sf.mean_degree / 1000)
    assert frac_sf > 100 * frac_er


@pytest.mark.parametrize("n,m", [(3, 3), (5, 0)])
def test_ba_bad_parameters(n, m):
    with pytest.raises(ParameterError, match="bad BA parameters"):
        gen_sf(n, m, seed=0)


def test_select_ties_and_extremes():
    # selection reads only the degree sequence; [5, 3, 3, 1] is not graphical
    # on 4 nodes, so it is attached to a placeholder graph
    sub = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2)])
    fake = Graph(4, sub.edges, sub.adjacency, np.array([5, 3, 3, 1]))
    assert select_nodes(fake, 2, "HD").indices.tolist() == [0, 1]
    assert select_nodes(fake, 1, "LD").indices.tolist() == [3]
    assert select_nodes(fake, 4, "HD").indices.tolist() == [0, 1, 2, 3]
    with pytest.raises(SelectionError, match="selection too large"):
        select_nodes(fake, 5, "HD")


def test_text_round_trip(tmp_path):
    g = gen_sf(40, 2, seed=9)
    p = tmp_path / "g.txt"
    g.save(p)
    h = Graph.load(p)
    assert h.edges == g.edges
    assert p.read_text() == g.to_text()


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 25), st.floats(1.0, 6.0), st.integers(0, 2**31 - 1))
def test_er_structure(n, k, seed):
    k = min(k, n)
    try:
        g = gen_er(n, k, seed, max_attempts=200)
    except ConnectivityError:
        return
    a = g.adjacency
    assert np.array_equal(a, a.T)
    assert not a.diagonal().any()
    assert set(np.unique(a)) <= {0, 1}
    assert np.array_equal(g.degree_sequence, a.sum(axis=1))
    assert g.is_connected()
    assert a.sum() == 2 * g.edge_count


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 30), st.data())
def test_ba_structure(n, data):
    m = data.draw(st.integers(1, n - 1))
    g = gen_sf(n, m, data.draw(st.integers(0, 1000)))
    assert g.is_connected()
    assert g.degree_sequence.min() >= m
    # clique of m+1 then m edges per new node
    assert g.edge_count == m * (m + 1) // 2 + m * (n - m - 1)


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 20), st.integers(0, 10**6))
def test_relabel_preserves_sorted_degrees(n, seed):
    g = gen_sf(n, 1, seed)
    perm = np.random.default_rng(seed).permutation(n)
    h = g.relabel(perm)
    assert sorted(h.degree_sequence.tolist()) == sorted(g.degree_sequence.tolist())
    assert np.array_equal(h.degree_sequence[perm], g.degree_sequence)
