import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topocontrol import oracles
from topocontrol.construct import unit_disc_graph
from topocontrol.errors import ModelError
from topocontrol.local import (
    _reduce,
    bridged_local,
    bridged_neighbours,
    reduce_radius,
    reduced_radii,
    remove_asymmetric,
    run_protocol,
    two_hop_view,
)
from topocontrol.model import (
    PointSet,
    connected_components,
    in_T,
    interference_at,
    is_bridged,
    is_connected,
    max_interference,
)

LINE3 = PointSet([0.0, 0.5, 10.0])
LINE4 = PointSet([0.0, 0.2, 9.8, 10.0])


def g3():
    return unit_disc_graph(LINE3, 10.0)


def g4():
    return unit_disc_graph(LINE4, 10.5)


def table_one(view):
    """Line-by-line transcription of the phase-2 pseudocode, ties broken by key."""
    u = view.center
    pts = view.graph.points

    def key(v):
        return pts.edge_key(u, v) if v != u else (0.0, -1, -1)

    nbrs = view.neighbours(u)
    # r'(u) <- r_max(u); every G_max neighbour counts as strictly inside it,
    # including one at exactly r_max
    r_key = (float("inf"),)
    r = float(view.graph.radii[u])
    f = u
    for v in nbrs:
        if key(v) > key(f):
            f = v
    while True:
        if f != u and bridged_local(view, u, f):
            f = u
            for v in nbrs:
                if key(v) < r_key and key(v) > key(f):
                    f = v
            r_key = key(f)
            r = r_key[0]
        else:
            return r


# --- views ------------------------------------------------------------------


def test_view_isolated():
    G = unit_disc_graph(PointSet([0.0, 5.0]), 1.0)
    assert two_hop_view(G, 0).ids.tolist() == [0]
    assert reduce_radius(two_hop_view(G, 0)) == 1.0


def test_view_path():
    G = unit_disc_graph(PointSet([0.0, 1.0, 2.0, 3.0]), 1.0)
    view = two_hop_view(G, 0)
    assert view.ids.tolist() == [0, 1, 2]
    assert 3 not in view
    assert view.neighbours(1) == [0, 2]
    with pytest.raises(ModelError):
        view.dist(0, 3)
    with pytest.raises(ModelError):
        bridged_local(view, 0, 3)


def test_view_complete():
    G = unit_disc_graph(PointSet([(0, 0), (1, 0), (0, 1), (1, 1)]), 5.0)
    for u in range(4):
        assert two_hop_view(G, u).ids.tolist() == [0, 1, 2, 3]


def test_view_unknown_node():
    with pytest.raises(ModelError):
        two_hop_view(g3(), 3)


def test_view_positions_and_radii():
    view = two_hop_view(g3(), 0)
    assert view.positions[2] == (10.0,)
    assert view.max_radii == {0: 10.0, 1: 10.0, 2: 10.0}


# --- bridged ----------------------------------------------------------------


def test_bridged_local_examples():
    view = two_hop_view(g3(), 0)
    assert bridged_local(view, 0, 2)
    assert not bridged_local(view, 0, 1)
    assert bridged_local(two_hop_view(g4(), 0), 0, 3)


def test_bridged_neighbours_matches_literal():
    rng = np.random.default_rng(21)
    for _ in range(300):
        n = int(rng.integers(1, 16))
        pts = PointSet(rng.uniform(0, 1, size=(n, 2)))
        G = unit_disc_graph(pts, float(rng.uniform(0.2, 1.0)))
        for u in range(n):
            view = two_hop_view(G, u)
            fast = bridged_neighbours(view)
            assert fast == {v: bridged_local(view, u, v) for v in view.neighbours(u)}
            for v, flag in fast.items():
                assert flag == is_bridged(G, (u, v)) == oracles.exhaustive_bridged(G, (u, v))


def test_bridged_on_integer_grid_ties():
    rng = np.random.default_rng(22)
    for _ in range(200):
        n = int(rng.integers(2, 14))
        pts = PointSet(rng.integers(0, 4, size=(n, 2)).astype(float))
        G = unit_disc_graph(pts, float(rng.integers(1, 4)))
        for u in range(n):
            view = two_hop_view(G, u)
            for v, flag in bridged_neighbours(view).items():
                assert flag == bridged_local(view, u, v)


# --- phase 2 ----------------------------------------------------------------


def test_reduce_single_neighbour():
    G = unit_disc_graph(PointSet([0.0, 3.0]), 5.0)
    assert reduce_radius(two_hop_view(G, 0)) == 5.0


def test_reduce_three_node_line():
    G = g3()
    assert [reduce_radius(two_hop_view(G, u)) for u in range(3)] == [0.5, 10.0, 9.5]


def test_reduce_four_node_line():
    r = reduced_radii(g4())
    assert r.tolist() == pytest.approx([0.2, 9.6, 9.6, 0.2], rel=1e-12)
    # reduced radii are exact copies of distances
    assert r.tolist() == [LINE4.dist(0, 1), LINE4.dist(1, 2), LINE4.dist(1, 2), LINE4.dist(2, 3)]


def test_reduction_never_reaches_zero():
    # a node's shortest link cannot be bridged, so phase 2 always stops on it or earlier
    rng = np.random.default_rng(29)
    for _ in range(100):
        G = unit_disc_graph(PointSet(rng.uniform(0, 1, size=(30, 2))), 0.3)
        r = reduced_radii(G)
        for u in range(G.n):
            nbrs = G.neighbours(u)
            if nbrs.size:
                assert r[u] >= G.points.distances[u, nbrs].min()


def test_reduce_matches_table_one():
    rng = np.random.default_rng(23)
    for _ in range(300):
        n = int(rng.integers(1, 16))
        pts = PointSet(rng.uniform(0, 1, size=(n, 2)))
        G = unit_disc_graph(pts, float(rng.uniform(0.2, 1.0)))
        for u in range(n):
            view = two_hop_view(G, u)
            assert reduce_radius(view) == table_one(view)


def test_reduce_matches_table_one_with_ties():
    rng = np.random.default_rng(24)
    for _ in range(300):
        n = int(rng.integers(1, 14))
        pts = PointSet(rng.integers(0, 5, size=(n, 2)).astype(float))
        G = unit_disc_graph(pts, float(rng.integers(1, 5)))
        for u in range(n):
            view = two_hop_view(G, u)
            assert reduce_radius(view) == table_one(view)


def test_reduction_count_bounded_by_degree():
    rng = np.random.default_rng(25)
    for _ in range(100):
        G = unit_disc_graph(PointSet(rng.uniform(0, 1, size=(30, 2))), 0.4)
        for u in range(G.n):
            view = two_hop_view(G, u)
            r, steps = _reduce(view)
            assert r <= G.radii[u]
            assert steps <= len(view.neighbours(u)) + 1
            if r > 0 and r != G.radii[u]:
                assert r in {G.points.dist(u, v) for v in view.neighbours(u)}


# --- phase 3 ----------------------------------------------------------------


def test_remove_asymmetric_symmetric_pair():
    G = unit_disc_graph(PointSet([0.0, 1.0]), 2.0)
    assert remove_asymmetric(0, 1.5, {1: 1.5}, two_hop_view(G, 0)) == 1.0


def test_remove_asymmetric_example():
    pts = PointSet([(0, 0), (5, 0), (0, 2)])
    G = unit_disc_graph(pts, 6.0)
    view = two_hop_view(G, 0)
    assert remove_asymmetric(0, 5.0, {1: 3.0, 2: 4.0}, view) == 2.0


def test_remove_asymmetric_no_partner():
    G = unit_disc_graph(PointSet([0.0, 1.0]), 2.0)
    assert remove_asymmetric(0, 1.5, {1: 0.5}, two_hop_view(G, 0)) == 0.0


def test_phase_three_on_three_node_line():
    G = g3()
    r2 = {0: 0.5, 1: 10.0, 2: 9.5}
    final = [remove_asymmetric(u, r2[u], r2, two_hop_view(G, u)) for u in range(3)]
    assert final == [0.5, 9.5, 9.5]


# --- full protocol ----------------------------------------------------------


def test_protocol_pair():
    G = unit_disc_graph(PointSet([(0, 0), (1, 1)]), 2.0)
    assert run_protocol(G).edges == G.edges


def test_protocol_three_node_line():
    G_min = run_protocol(g3())
    assert G_min.radii.tolist() == [0.5, 9.5, 9.5]
    assert set(G_min.edges) == {(0, 1), (1, 2)}
    assert max_interference(G_min) == 2
    assert interference_at(G_min, 0) == 1


def test_protocol_four_node_line():
    G_min = run_protocol(g4())
    assert set(G_min.edges) == {(0, 1), (1, 2), (2, 3)}
    assert [interference_at(G_min, p) for p in range(4)] == [1, 2, 2, 1]
    assert max_interference(G_min) == 2


def test_protocol_keeps_isolated_nodes_edgeless():
    G = unit_disc_graph(PointSet([0.0, 1.0, 50.0]), 2.0)
    G_min = run_protocol(G)
    assert G_min.edges == ((0, 1),)
    assert G_min.radii[2] == 0.0


def test_phase_three_vectorised_matches_loop():
    rng = np.random.default_rng(26)
    for _ in range(100):
        G = unit_disc_graph(PointSet(rng.uniform(0, 1, size=(25, 2))), 0.35)
        r2 = reduced_radii(G)
        expect = [remove_asymmetric(u, r2[u], dict(enumerate(r2)), two_hop_view(G, u)) for u in range(G.n)]
        assert run_protocol(G).radii.tolist() == expect


# --- invariants -------------------------------------------------------------


@st.composite
def max_graphs(draw, n_max=14, grid=False):
    n = draw(st.integers(1, n_max))
    if grid:
        cell = st.integers(0, 5).map(float)
    else:
        cell = st.floats(0, 1, allow_nan=False)
    pts = draw(st.lists(st.tuples(cell, cell), min_size=n, max_size=n))
    r = draw(st.floats(0.05, 1.0) if not grid else st.integers(1, 4).map(float))
    return unit_disc_graph(PointSet(pts), r)


def check_protocol(G):
    G_min = run_protocol(G)
    assert set(G_min.edges) <= set(G.edges)
    assert connected_components(G_min) == connected_components(G)
    if G.points.has_distinct_distances():
        assert in_T(G_min)
    assert max_interference(G_min) <= max_interference(G)
    D = G.points.distances
    for u in range(G.n):
        if G_min.radii[u] > 0:
            # the final radius is used by some bidirectional link
            assert any(D[u, v] == G_min.radii[u] for v in G_min.neighbours(u))
    return G_min


@settings(max_examples=200, deadline=None)
@given(max_graphs())
def test_protocol_invariants(G):
    check_protocol(G)


@settings(max_examples=150, deadline=None)
@given(max_graphs(grid=True))
def test_protocol_invariants_under_ties(G):
    check_protocol(G)


def test_tied_neighbour_survives_reduction():
    # node 1 drops its bridged neighbour 3 by shrinking to 2, but neighbour 2
    # sits at exactly the same distance, so the edge to 3 stays
    pts = PointSet([(1, 2), (3, 0), (1, 0), (3, 2), (3, 1)])
    G = unit_disc_graph(pts, 3.0)
    G_min = run_protocol(G)
    assert G_min.radii[1] == 2.0
    assert (1, 3) in G_min.edges and is_bridged(G_min, (1, 3))
    assert not in_T(G_min)
    assert is_connected(G_min)


def test_connectivity_preserved_on_random_instances():
    rng = np.random.default_rng(27)
    seen = 0
    while seen < 200:
        G = unit_disc_graph(PointSet(rng.uniform(0, 1, size=(40, 2))), 0.3)
        if not is_connected(G):
            continue
        seen += 1
        assert is_connected(run_protocol(G))


def test_order_independence():
    rng = np.random.default_rng(28)
    for _ in range(30):
        G = unit_disc_graph(PointSet(rng.uniform(0, 1, size=(30, 2))), 0.35)
        base = reduced_radii(G)
        for _ in range(3):
            assert np.array_equal(reduced_radii(G, rng.permutation(G.n)), base)


def test_lrr_never_worse_than_opt_on_all_small_layouts():
    # exhaustive over a few hand-picked layouts
    for pts in ([0.0, 1.0, 3.0], [0.0, 1.0, 2.0, 4.0, 8.0], [(0, 0), (1, 0), (0, 1), (3, 3)]):
        points = PointSet(pts)
        G = unit_disc_graph(points, 100.0)
        assert max_interference(run_protocol(G)) >= oracles.brute_force_opt(points)


def test_permutations_of_ids_give_isomorphic_result():
    pts = np.array([[0, 0], [0.4, 0.1], [0.9, 0.0], [0.5, 0.6], [0.1, 0.9]])
    base = run_protocol(unit_disc_graph(PointSet(pts), 0.8))
    for perm in itertools.permutations(range(5)):
        perm = list(perm)
        G_min = run_protocol(unit_disc_graph(PointSet(pts[perm]), 0.8))
        assert np.array_equal(G_min.radii, base.radii[perm])
