import math

import numpy as np
import pytest

from twochoices import graphs


def test_complete_smallest():
    g = graphs.complete_graph(2)
    assert g.num_edges == 1
    assert list(g.degrees) == [1, 1]


def test_complete_k4():
    g = graphs.complete_graph(4)
    assert g.num_edges == 6
    assert set(g.degrees) == {3}
    g.validate()


def test_complete_k100_edge_count():
    # n(n-1)/2 edges, all degrees n-1
    g = graphs.complete_graph(100)
    assert g.num_edges == 100 * 99 // 2 == 4950
    assert g.degrees.min() == g.degrees.max() == 99


def test_complete_rejects_small():
    with pytest.raises(ValueError):
        graphs.complete_graph(1)


def test_erdos_renyi_mean_degree():
    g = graphs.erdos_renyi(100, 2 * math.log(100), seed=1)
    g.validate()
    mean_degree = 2 * g.num_edges / g.n
    assert 7 <= mean_degree <= 12


def test_erdos_renyi_p_clamps_to_one():
    g = graphs.erdos_renyi(3, 2.0, seed=5)
    assert g.num_edges == 3  # K_3


def test_erdos_renyi_deterministic():
    a = graphs.erdos_renyi(60, 6.0, seed=99)
    b = graphs.erdos_renyi(60, 6.0, seed=99)
    assert a.same_edges(b)
    c = graphs.erdos_renyi(60, 6.0, seed=100)
    assert not a.same_edges(c)


def test_erdos_renyi_generation_failure():
    with pytest.raises(graphs.GenerationError):
        graphs.erdos_renyi(80, 0.05, seed=0)


def test_random_regular_degrees():
    g = graphs.random_regular(10, 3, seed=7)
    assert set(g.degrees) == {3}
    g.validate()


def test_random_regular_edge_count():
    g = graphs.random_regular(200, 10, seed=1)
    assert g.num_edges == 200 * 10 // 2 == 1000
    assert g.is_connected()


def test_random_regular_parity_error():
    with pytest.raises(ValueError):
        graphs.random_regular(5, 3, seed=0)


def test_random_regular_d_bounds():
    with pytest.raises(ValueError):
        graphs.random_regular(10, 2, seed=0)
    with pytest.raises(ValueError):
        graphs.random_regular(4, 4, seed=0)


def test_random_regular_deterministic():
    a = graphs.random_regular(50, 4, seed=11)
    b = graphs.random_regular(50, 4, seed=11)
    assert a.same_edges(b)


@pytest.mark.parametrize(
    "make",
    [
        lambda: graphs.complete_graph(17),
        lambda: graphs.erdos_renyi(75, 8.0, seed=2),
        lambda: graphs.random_regular(64, 5, seed=3),
    ],
)
def test_generated_graph_invariants(make):
    g = make()
    g.validate()
    assert 2 * g.num_edges == int(g.degrees.sum())


def test_from_edges_rejects_self_loop():
    with pytest.raises(ValueError, match="self-loop"):
        graphs.Graph.from_edges(3, [(0, 0), (0, 1), (1, 2)])


def test_from_edges_rejects_duplicate():
    with pytest.raises(ValueError, match="duplicate"):
        graphs.Graph.from_edges(3, [(0, 1), (1, 0), (1, 2)])


def test_from_edges_rejects_disconnected():
    with pytest.raises(ValueError):
        graphs.Graph.from_edges(4, [(0, 1), (2, 3)])


def test_edge_list_round_trip(tmp_path):
    g = graphs.erdos_renyi(30, 5.0, seed=4)
    path = tmp_path / "g.txt"
    graphs.write_edge_list(g, path)
    h = graphs.read_edge_list(path)
    assert g.same_edges(h)
    first = path.read_text().splitlines()[0]
    assert first == f"{g.n} {g.num_edges}"


def test_edge_list_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("3\n0 1\n1 2\n")
    with pytest.raises(ValueError, match="header"):
        graphs.read_edge_list(path)


def test_edge_list_rejects_wrong_count(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("3 2\n0 1\n")
    with pytest.raises(ValueError, match="m="):
        graphs.read_edge_list(path)


def test_neighbors_sorted():
    g = graphs.erdos_renyi(40, 6.0, seed=8)
    for v in range(g.n):
        nbrs = g.neighbors(v)
        assert np.all(np.diff(nbrs) > 0)
