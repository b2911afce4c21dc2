import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from lapcem import kernels
from lapcem.errors import InputShapeError, NumericalFailure
from lapcem.graph import (
    Graph,
    complete_graph,
    component_count,
    degree_profile,
    empty_graph,
    from_adjacency,
    from_edges,
    graph_from_bits,
    is_connected,
    laplacian,
    laplacian_spectral_radius,
    n_slots,
    path_graph,
    relabel,
    slot_pairs,
    star_graph,
)


@st.composite
def graphs(draw, min_n=1, max_n=12):
    n = draw(st.integers(min_n, max_n))
    bits = draw(st.lists(st.integers(0, 1), min_size=n_slots(n), max_size=n_slots(n)))
    return Graph(n, np.array(bits, dtype=np.uint8))


def test_slot_order_is_row_wise():
    assert slot_pairs(4) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def test_bits_to_adjacency():
    g = graph_from_bits(4, [1, 0, 0, 1, 0, 1])  # path 0-1-2-3
    expected = np.array([[0, 1, 0, 0], [1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 0]])
    assert np.array_equal(g.adjacency(), expected)
    assert g.edges() == [(0, 1), (1, 2), (2, 3)]
    assert g == path_graph(4)


@pytest.mark.parametrize("bits", [[1, 0], [1, 0, 2], [0] * 7])
def test_bad_bit_vectors_rejected(bits):
    with pytest.raises(InputShapeError):
        graph_from_bits(3, bits)


def test_graph_is_immutable():
    g = complete_graph(3)
    with pytest.raises(ValueError):
        g.edge_bits[0] = 0


@pytest.mark.parametrize("a", [
    [[0, 1], [0, 0]],
    [[1, 0], [0, 0]],
    [[0, 1, 0], [1, 0, 1]],
])
def test_bad_adjacency_rejected(a):
    with pytest.raises(InputShapeError):
        from_adjacency(a)


@given(graphs())
def test_adjacency_round_trip(g):
    assert from_adjacency(g.adjacency()) == g
    assert g.num_edges == g.adjacency().sum() // 2


def test_reference_edge_counts(reference_graphs):
    # counted directly from the stored 0/1 rows
    from conftest import DATA

    for name, g in reference_graphs.items():
        ones = sum(ch == "1" for ch in (DATA / f"{name}.txt").read_text())
        assert g.num_edges * 2 == ones
    assert reference_graphs["graph2"].n == 12
    assert reference_graphs["graph2"].num_edges == 21


def test_degree_profile_path():
    p = degree_profile(path_graph(4))
    assert p.degrees.tolist() == [1, 2, 2, 1]
    assert np.allclose(p.neighbor_avg, [2.0, 1.5, 1.5, 2.0])


def test_isolated_vertex_has_zero_average():
    p = degree_profile(from_edges(3, [(0, 1)]))
    assert p.degrees.tolist() == [1, 1, 0]
    assert p.neighbor_avg[2] == 0.0


def test_reference_degrees_match_row_sums(reference_graphs):
    for g in reference_graphs.values():
        d, m = oracles.degree_stats(oracles.to_nx(g.adjacency()))
        p = degree_profile(g)
        assert p.degrees.tolist() == [d[v] for v in range(g.n)]
        assert np.allclose(p.neighbor_avg, [m[v] for v in range(g.n)], atol=1e-14)


@given(st.integers(3, 14), st.data())
def test_regular_graphs_have_m_equal_d(n, data):
    # circulant graphs are regular
    offsets = data.draw(st.sets(st.integers(1, n // 2), max_size=3))
    edges = {tuple(sorted((v, (v + s) % n))) for v in range(n) for s in offsets}
    p = degree_profile(from_edges(n, edges))
    assert np.all(p.degrees == p.degrees[0])
    if p.degrees[0]:
        assert np.allclose(p.neighbor_avg, p.degrees)


@given(graphs())
def test_laplacian_rows_sum_to_zero(g):
    lap = laplacian(g)
    assert np.allclose(lap.sum(axis=1), 0)
    assert np.array_equal(lap, lap.T)
    assert np.array_equal(np.diag(lap), g.adjacency().sum(axis=1))


def test_components():
    assert component_count(empty_graph(5)) == 5
    assert component_count(from_edges(4, [(0, 1), (2, 3)])) == 2
    assert is_connected(path_graph(7))
    assert not is_connected(from_edges(4, [(0, 1), (1, 2)]))
    assert is_connected(Graph(1, []))


@settings(max_examples=200)
@given(graphs())
def test_component_count_matches_networkx(g):
    import networkx as nx

    assert component_count(g) == nx.number_connected_components(oracles.to_nx(g.adjacency()))


@pytest.mark.parametrize("g, mu", [
    (complete_graph(4), 4.0),
    (path_graph(2), 2.0),
    (path_graph(3), 3.0),
    (star_graph(6), 6.0),
    (empty_graph(3), 0.0),
    (Graph(1, []), 0.0),
])
def test_known_spectral_radii(g, mu):
    res = laplacian_spectral_radius(g)
    assert res.mu == pytest.approx(mu, abs=1e-10)
    assert res.residual <= 1e-10


@pytest.mark.parametrize("n", range(2, 21))
def test_complete_and_star_families(n):
    assert laplacian_spectral_radius(complete_graph(n)).mu == pytest.approx(n, abs=1e-9)
    assert laplacian_spectral_radius(star_graph(n)).mu == pytest.approx(n, abs=1e-9)


def test_reference_spectra_match_lapack(reference_graphs):
    for g in reference_graphs.values():
        res = laplacian_spectral_radius(g, tol=1e-12)
        assert res.mu == pytest.approx(oracles.laplacian_mu(g.adjacency()), abs=1e-10)
        assert res.residual <= 1e-12


@settings(max_examples=150)
@given(graphs(min_n=2, max_n=20))
def test_spectral_radius_matches_lapack(g):
    res = laplacian_spectral_radius(g)
    assert abs(res.mu - oracles.laplacian_mu(g.adjacency())) < 1e-8
    assert 0 <= res.mu <= 2 * max(1, g.adjacency().sum(axis=1).max()) + 1e-9


@settings(max_examples=60)
@given(graphs(min_n=2, max_n=12), st.randoms(use_true_random=False))
def test_relabel_invariance(g, rnd):
    perm = list(range(g.n))
    rnd.shuffle(perm)
    h = relabel(g, perm)
    assert h.num_edges == g.num_edges
    assert sorted(degree_profile(h).degrees) == sorted(degree_profile(g).degrees)
    assert laplacian_spectral_radius(h).mu == pytest.approx(laplacian_spectral_radius(g).mu, abs=1e-9)


def test_unconverged_solver_raises_with_estimate(monkeypatch, reference_graphs):
    monkeypatch.setattr(kernels, "MAX_SWEEPS", 1)
    with pytest.raises(NumericalFailure) as info:
        laplacian_spectral_radius(reference_graphs["graph66"], tol=1e-12)
    assert info.value.best_estimate is not None
    assert 0 < info.value.best_estimate < 40
