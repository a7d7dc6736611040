import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polya_net import graph
from polya_net.errors import (
    Disconnected,
    IndexOutOfRange,
    InvalidParameter,
    NonConvergence,
    SelfLoop,
)


def test_build_two_node_complete():
    net = graph.build_network(2, [(0, 1)])
    assert net.node_count == 2
    assert net.edges == ((0, 1),)
    assert net.closed_neighbors[0] == (0, 1)


def test_build_triangle_closed_neighborhoods_cover_everything():
    net = graph.build_network(3, [(0, 1), (1, 2), (0, 2)])
    for i in range(3):
        assert net.closed_neighbors[i] == (0, 1, 2)


def test_build_dedupes_reversed_and_repeated_edges():
    net = graph.build_network(3, [(0, 1), (1, 0), (1, 2), (1, 2)])
    assert net.edges == ((0, 1), (1, 2))


@pytest.mark.parametrize("n,edges,err", [
    (2, [(0, 0)], SelfLoop),
    (2, [(0, 2)], IndexOutOfRange),
    (3, [(0, 1)], Disconnected),
])
def test_build_rejects_bad_input(n, edges, err):
    with pytest.raises(err):
        graph.build_network(n, edges)


def test_neighborhood_sets():
    net = graph.generate_star(4)
    nb = net.neighborhood(1)
    assert nb.open == {0}
    assert nb.closed == {0, 1}
    with pytest.raises(IndexOutOfRange):
        net.neighborhood(9)


@pytest.mark.parametrize("net,kind", [
    (graph.generate_complete(5), "complete"),
    (graph.generate_cycle(4), "regular"),
    (graph.generate_star(4), "irregular"),
    (graph.generate_complete(1), "complete"),
])
def test_classify(net, kind):
    assert graph.classify(net) == kind


@pytest.mark.parametrize("net,expected", [
    (graph.generate_complete(5), 4.0),
    (graph.generate_cycle(6), 2.0),
    (graph.generate_star(10), 3.0),
])
def test_largest_eigenvalue_known_graphs(net, expected):
    assert graph.largest_eigenvalue(net) == pytest.approx(expected, abs=1e-8)


def test_star_eigenvalue_solves_characteristic_equation():
    # a hub with k leaves has lambda^2 = k: check the returned value directly
    for n in (4, 10, 17):
        lam = graph.largest_eigenvalue(graph.generate_star(n))
        assert lam ** 2 == pytest.approx(n - 1, abs=1e-7)


def test_largest_eigenvalue_convergence_guard():
    with pytest.raises(NonConvergence):
        graph.largest_eigenvalue(graph.generate_star(30), tol=1e-13, max_steps=2)
    with pytest.raises(InvalidParameter):
        graph.largest_eigenvalue(graph.generate_complete(3), tol=0.0)


def test_generate_complete_edge_count():
    assert len(graph.generate_complete(3).edges) == 3


def test_barabasi_albert_m1_is_tree():
    net = graph.generate_barabasi_albert(5, 1, seed=3)
    assert len(net.edges) == 4  # connected with n-1 edges


@pytest.mark.parametrize("n,m", [(100, 2), (50, 3), (20, 1)])
def test_barabasi_albert_edge_count_matches_generation_rule(n, m):
    # seed clique contributes m*(m-1)/2 edges, every later node adds m
    net = graph.generate_barabasi_albert(n, m, seed=7)
    assert len(net.edges) == m * (m - 1) // 2 + m * (n - m)


def test_barabasi_albert_reproducible():
    a = graph.generate_barabasi_albert(30, 2, seed=5)
    b = graph.generate_barabasi_albert(30, 2, seed=5)
    c = graph.generate_barabasi_albert(30, 2, seed=6)
    assert a.edges == b.edges
    assert a.edges != c.edges


def test_generate_dispatch_and_errors():
    assert graph.generate("cycle", 5).degrees == (2,) * 5
    with pytest.raises(InvalidParameter):
        graph.generate("ba", 5, m=None)
    with pytest.raises(InvalidParameter):
        graph.generate("mesh", 5)
    with pytest.raises(InvalidParameter):
        graph.generate_barabasi_albert(5, 5, seed=0)


def test_edge_list_round_trip(tmp_path):
    net = graph.generate_barabasi_albert(12, 2, seed=9)
    path = tmp_path / "g.edges"
    graph.write_edge_list(net, path)
    back = graph.read_edge_list(path)
    assert back.node_count == net.node_count
    assert back.edges == net.edges


@st.composite
def generated_networks(draw):
    kind = draw(st.sampled_from(["complete", "cycle", "star", "ba"]))
    if kind == "complete":
        return graph.generate_complete(draw(st.integers(2, 12)))
    if kind == "cycle":
        return graph.generate_cycle(draw(st.integers(3, 12)))
    if kind == "star":
        return graph.generate_star(draw(st.integers(2, 12)))
    n = draw(st.integers(3, 14))
    m = draw(st.integers(1, min(3, n - 1)))
    return graph.generate_barabasi_albert(n, m, seed=draw(st.integers(0, 100)))


@settings(max_examples=40, deadline=None)
@given(generated_networks())
def test_classify_consistent_with_degree_sequence(net):
    degrees = graph.degree_sequence(net.edges, net.node_count)
    assert tuple(degrees) == net.degrees
    kind = graph.classify(net)
    if kind == "complete":
        assert all(d == net.node_count - 1 for d in degrees)
    elif kind == "regular":
        assert len(set(degrees)) == 1
    else:
        assert len(set(degrees)) > 1


@settings(max_examples=40, deadline=None)
@given(generated_networks())
def test_spectral_radius_sandwich_and_stability(net):
    lam = graph.largest_eigenvalue(net)
    d_max = max(net.degrees)
    d_avg = sum(net.degrees) / net.node_count
    assert max(d_avg, np.sqrt(d_max)) - 1e-8 <= lam <= d_max + 1e-8
    # tightening the tolerance must not move the converged value
    assert lam == pytest.approx(graph.largest_eigenvalue(net, tol=1e-12), abs=1e-8)
    # independent dense eigensolver agrees
    assert lam == pytest.approx(np.linalg.eigvalsh(net.adjacency).max(), abs=1e-8)
