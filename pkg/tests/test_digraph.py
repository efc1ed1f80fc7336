"""Digraph construction, connectivity, diameter, and the transmission law."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from qcs import (
    Digraph,
    GraphGenerationError,
    NotStronglyConnectedError,
    diameter,
    generate_random_digraph,
    is_strongly_connected,
    transmission_distribution,
)

from conftest import complete, ring


def floyd_warshall(out_neighbors):
    """Independent all-pairs oracle for small graphs."""
    n = len(out_neighbors)
    inf = float("inf")
    dist = [[0 if i == j else inf for j in range(n)] for i in range(n)]
    for i, nbrs in enumerate(out_neighbors):
        for j in nbrs:
            dist[i][j] = 1
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if dist[i][k] + dist[k][j] < dist[i][j]:
                    dist[i][j] = dist[i][k] + dist[k][j]
    return dist


def matrix_power_distances(out_neighbors):
    """Second oracle: smallest k with (A^k)[i][j] > 0 via boolean powers."""
    n = len(out_neighbors)
    adj = np.zeros((n, n), dtype=bool)
    for i, nbrs in enumerate(out_neighbors):
        adj[i, list(nbrs)] = True
    dist = np.where(np.eye(n, dtype=bool), 0, -1)
    power = np.eye(n, dtype=bool)
    for k in range(1, n):
        power = (power.astype(np.int64) @ adj.astype(np.int64)) > 0
        new = power & (dist < 0)
        dist[new] = k
    return dist


class TestStrongConnectivity:
    def test_directed_ring_is_strongly_connected(self):
        assert is_strongly_connected([(1,), (2,), (0,)])

    def test_one_way_pair_is_not(self):
        assert not is_strongly_connected([(1,), ()])

    def test_two_disjoint_cycles_are_not(self):
        assert not is_strongly_connected([(1,), (0,), (3,), (2,)])

    def test_digraph_constructor_rejects_disconnected(self):
        with pytest.raises(NotStronglyConnectedError):
            Digraph(n=2, out_neighbors=((1,), ()))


class TestDiameter:
    def test_complete_graph_diameter_is_one(self):
        for n in (2, 3, 5, 9):
            assert diameter(complete(n)) == 1

    def test_three_ring_diameter(self):
        assert diameter(ring(3)) == 2

    def test_five_ring_matches_floyd_warshall(self):
        g = ring(5)
        fw = floyd_warshall(g.out_neighbors)
        expect = max(fw[i][j] for i in range(5) for j in range(5))
        assert expect == 4
        assert diameter(g) == expect

    def test_random_graph_diameter_matches_both_oracles(self):
        for seed in range(60):
            n = 3 + seed % 6
            g = generate_random_digraph(n, 0.4, seed=seed)
            fw = floyd_warshall(g.out_neighbors)
            mp = matrix_power_distances(g.out_neighbors)
            want = max(fw[i][j] for i in range(n) for j in range(n))
            assert want == int(mp.max())
            assert g.diameter == want
            assert g.diameter <= n - 1

    def test_dense_path_agrees_with_bfs_path(self):
        # above the dense threshold the matmul layering must stay exact
        g = generate_random_digraph(80, 0.08, seed=5)
        fw_max = int(matrix_power_distances(g.out_neighbors).max())
        assert g.diameter == fw_max


class TestGeneration:
    def test_two_node_complete_at_p_one(self):
        g = generate_random_digraph(2, 1.0, seed=0)
        assert g.out_neighbors == ((1,), (0,))
        assert g.diameter == 1

    def test_twenty_nodes_half_probability(self):
        # dense 20-node draws have tiny diameters, typically 2
        diameters = []
        for seed in range(10):
            g = generate_random_digraph(20, 0.5, seed=seed)
            assert is_strongly_connected(g)
            diameters.append(g.diameter)
        assert all(d <= 3 for d in diameters)
        assert 2 in diameters

    def test_determinism(self):
        a = generate_random_digraph(15, 0.35, seed=42)
        b = generate_random_digraph(15, 0.35, seed=42)
        assert a.out_neighbors == b.out_neighbors
        c = generate_random_digraph(15, 0.35, seed=43)
        assert a.out_neighbors != c.out_neighbors

    def test_sparse_generation_fails_with_overwhelming_probability(self):
        # oracle: strong connectivity needs every out-degree >= 1, so one
        # ER(5, 0.01) draw succeeds with probability at most
        # (1 - 0.99^4)^5; three draws all escaping rejection has
        # probability below 3 * that, far under 1e-3
        p = Fraction(1, 100)
        per_draw_upper = (1 - (1 - p) ** 4) ** 5
        assert 3 * per_draw_upper < Fraction(1, 1000)
        with pytest.raises(GraphGenerationError, match=r"n=5.*edge_prob=0.01.*max_retries=3"):
            generate_random_digraph(5, 0.01, seed=11, max_retries=3)

    def test_generated_invariants(self):
        for seed in range(30):
            g = generate_random_digraph(4 + seed % 5, 0.5, seed=seed)
            assert is_strongly_connected(g)
            assert g.diameter <= g.n - 1
            for j, nbrs in enumerate(g.out_neighbors):
                assert j not in nbrs
                assert list(nbrs) == sorted(set(nbrs))

    def test_in_neighbors_is_exact_transpose(self):
        g = generate_random_digraph(12, 0.3, seed=3)
        for j in range(g.n):
            for l in g.out_neighbors[j]:
                assert j in g.in_neighbors[l]
        assert sum(len(r) for r in g.in_neighbors) == g.edge_count

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            generate_random_digraph(1, 0.5, seed=0)
        with pytest.raises(ValueError):
            generate_random_digraph(5, 0.0, seed=0)
        with pytest.raises(ValueError):
            generate_random_digraph(5, 1.5, seed=0)


class TestTransmissionDistribution:
    def test_degree_one_splits_half_half(self):
        dist = transmission_distribution(ring(3))
        assert dist.rows[0][0] == Fraction(1, 2)
        assert dist.rows[0][1] == Fraction(1, 2)
        assert dist.rows[0][2] == 0

    def test_degree_three_gives_four_quarters(self):
        g = Digraph(n=4, out_neighbors=((1, 2, 3), (0,), (0,), (0,)))
        row = transmission_distribution(g).rows[0]
        assert all(p == Fraction(1, 4) for p in row)

    def test_support_and_exact_unit_mass(self):
        for seed in range(10):
            g = generate_random_digraph(4 + seed, 0.5, seed=seed)
            dist = transmission_distribution(g)
            for j in range(g.n):
                support = dist.support(j)
                assert len(support) == g.out_degrees[j] + 1
                assert j in support
                assert sum(dist.rows[j]) == 1  # exact rational sum
                nonzero = {p for p in dist.rows[j] if p > 0}
                assert nonzero == {Fraction(1, g.out_degrees[j] + 1)}


class TestEdgeListFormat:
    def test_round_trip(self):
        g = generate_random_digraph(9, 0.4, seed=21)
        text = g.to_edge_list_text()
        back = Digraph.from_edge_list_text(text)
        assert back.out_neighbors == g.out_neighbors

    def test_header_shape(self):
        text = ring(3).to_edge_list_text()
        lines = text.strip().splitlines()
        assert lines[0] == "3 3"
        assert len(lines) == 4

    def test_file_round_trip(self, tmp_path):
        g = generate_random_digraph(6, 0.5, seed=2)
        path = tmp_path / "g.txt"
        g.save(path)
        assert Digraph.load(path).out_neighbors == g.out_neighbors

    def test_rejects_malformed(self):
        with pytest.raises(ValueError):
            Digraph.from_edge_list_text("3\n0 1\n")
        with pytest.raises(ValueError):
            Digraph.from_edge_list_text("3 2\n0 1\n")
        with pytest.raises(ValueError):
            Digraph.from_edge_list_text("2 2\n0 1\n0 1\n")
