import numpy as np
import pytest

from commbench.graph import Graph, PlantedPartitionParams, generate_planted_partition
from commbench.spectral import (adjacency_factors, bethe_hessian_select,
                                nonbacktracking_select)
from conftest import make_clique


def test_bh_k4_single_negative_eigenvalue(k4):
    k, emb = bethe_hessian_select(k4)
    assert k == 1
    assert emb.shape == (4, 1)


def test_bh_two_cliques_doubles_spectrum(two_k4):
    k, emb = bethe_hessian_select(two_k4)
    assert k == 2
    assert emb.shape == (8, 2)


def test_bh_star_laplacian_no_negatives():
    star = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
    k, _ = bethe_hessian_select(star)
    assert k == 1


def test_bh_perfect_matching_degenerate_mean_excess_degree():
    matching = Graph.from_edges(6, [(0, 1), (2, 3), (4, 5)])
    k, _ = bethe_hessian_select(matching)
    assert k == 1


def test_nb_two_cliques(two_k4):
    k, emb = nonbacktracking_select(two_k4)
    assert k == 2
    assert emb.shape == (8, 2)


def test_nb_cycle_unit_circle_spectrum():
    for n in (5, 8):
        cyc = Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])
        k, _ = nonbacktracking_select(cyc)
        assert k == 1


def test_nb_er_below_detectability():
    # sparse structureless graphs should report a single community
    hits = 0
    for seed in range(50):
        params = PlantedPartitionParams.uniform(k=1, n=200, p_in=4.0 / 199,
                                                p_out=0.0, seed=seed)
        g, _ = generate_planted_partition(params)
        k, _ = nonbacktracking_select(g)
        hits += (k == 1)
    assert hits >= 45  # >= 90% of 50 seeds


def test_lowrank_k4_rank1(k4):
    vals, vecs = adjacency_factors(k4, 1)
    recon = vals[0] * np.outer(vecs[:, 0], vecs[:, 0])
    off = recon[~np.eye(4, dtype=bool)]
    assert np.allclose(off, 0.75, atol=1e-9)


def test_lowrank_two_cliques_block_structure(two_k4):
    vals, vecs = adjacency_factors(two_k4, 2)
    recon = (vecs * vals) @ vecs.T
    assert recon[0, 1] == pytest.approx(0.75, abs=1e-9)
    assert recon[0, 5] == pytest.approx(0.0, abs=1e-9)


def test_lowrank_full_rank_reconstruction(k4):
    vals, vecs = adjacency_factors(k4, 4)
    recon = (vecs * vals) @ vecs.T
    assert np.allclose(recon, k4.dense_adjacency(), atol=1e-8)


def test_lowrank_rank_bounds(k4):
    with pytest.raises(ValueError):
        adjacency_factors(k4, 0)
    with pytest.raises(ValueError):
        adjacency_factors(k4, 5)


def test_iterative_solver_path_matches_dense():
    # above DENSE_LIMIT the restarted solvers take over; compare on a graph
    # just beyond the threshold against dense results on the same matrix
    from commbench import spectral

    params = PlantedPartitionParams.uniform(k=3, n=520, p_in=0.06, p_out=0.004,
                                            seed=4)
    g, _ = generate_planted_partition(params, largest_component_only=True)
    assert g.n > spectral.DENSE_LIMIT
    k_sparse, _ = bethe_hessian_select(g)
    vals, vecs = adjacency_factors(g, 3)
    assert vals.shape == (3,) and vecs.shape == (g.n, 3)
    assert k_sparse == 3
