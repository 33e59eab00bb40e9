import io

import numpy as np
import pytest
from scipy.stats import chisquare

from commbench.graph import (EdgeListParseError, EmptyGraphError, Graph,
                             PlantedPartitionParams, component_labels,
                             generate_planted_partition, largest_component,
                             load_edge_list)


def test_load_triangle():
    g = load_edge_list(io.StringIO("0 1\n1 2\n2 0"))
    assert g.n == 3 and g.m == 3
    assert g.edges == ((0, 1), (0, 2), (1, 2))


def test_load_simplify_drops_duplicates_and_self_loops():
    g = load_edge_list(io.StringIO("0 1\n0 1\n1 1"), simplify=True)
    assert g.n == 2 and g.m == 1
    assert g.edges == ((0, 1),)


def test_load_rejects_dirty_input_without_simplify():
    with pytest.raises(EdgeListParseError):
        load_edge_list(io.StringIO("0 1\n0 1"))
    with pytest.raises(EdgeListParseError):
        load_edge_list(io.StringIO("0 0"))


def test_load_largest_component_bfs_oracle():
    # K3 plus a separate edge; BFS on the 5-node input identifies the K3
    g = load_edge_list(io.StringIO("0 1\n1 2\n2 0\n3 4"), largest_component=True)
    assert g.n == 3 and g.m == 3


def test_load_malformed_line_reports_line_number():
    with pytest.raises(EdgeListParseError) as err:
        load_edge_list(io.StringIO("0 1\n0 1 2\n"))
    assert err.value.line_no == 2


def test_load_empty_input_is_an_error():
    with pytest.raises(EmptyGraphError):
        load_edge_list(io.StringIO("# only comments\n\n"))


def test_load_string_ids_records_sidecar_names():
    g = load_edge_list(io.StringIO("alice bob\nbob carol"))
    assert g.n == 3 and g.m == 2
    assert g.names == ("alice", "bob", "carol")


def test_comments_and_blank_lines_ignored():
    g = load_edge_list(io.StringIO("# header\n\n0 1\n# mid\n1 2\n"))
    assert g.m == 2


def test_load_idempotent_on_canonical_serialization():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        n = int(rng.integers(2, 16))
        iu, ju = np.triu_indices(n, k=1)
        mask = rng.random(iu.size) < 0.4
        if not mask.any():
            continue
        g = load_edge_list(io.StringIO(
            "".join(f"{i} {j}\n" for i, j in zip(iu[mask], ju[mask]))),
            largest_component=True)
        g2 = load_edge_list(io.StringIO(g.canonical_edge_text()))
        assert g2.n == g.n and g2.edges == g.edges


def test_from_edges_validates():
    with pytest.raises(Exception):
        Graph.from_edges(3, [(0, 0)])
    with pytest.raises(Exception):
        Graph.from_edges(3, [(0, 1), (1, 0)])
    with pytest.raises(Exception):
        Graph.from_edges(2, [(0, 5)])


def test_degree_sum_is_twice_m():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(2, 20))
        iu, ju = np.triu_indices(n, k=1)
        mask = rng.random(iu.size) < 0.3
        g = Graph(n=n, edges=tuple(sorted(zip(iu[mask].tolist(), ju[mask].tolist()))))
        assert int(g.degrees.sum()) == 2 * g.m


def test_component_labels_and_largest_component():
    g = Graph.from_edges(6, [(0, 1), (2, 3), (3, 4)])
    comp = component_labels(g)
    assert comp[0] == comp[1] and comp[2] == comp[3] == comp[4]
    sub, keep = largest_component(g)
    assert sub.n == 3 and list(keep) == [2, 3, 4]


# ---------------------------------------------------------------------------
# Planted partition generator
# ---------------------------------------------------------------------------

def test_planted_extremes_give_disjoint_cliques():
    params = PlantedPartitionParams.uniform(k=2, n=10, p_in=1.0, p_out=0.0, seed=3)
    g, p = generate_planted_partition(params)
    comp = component_labels(g)
    # planted labels must match connected components exactly
    mapping = {}
    for lab, c in zip(p.labels, comp):
        mapping.setdefault(lab, set()).add(int(c))
    assert all(len(v) == 1 for v in mapping.values())


def test_planted_uniform_p_matches_binomial_moments():
    # p_in = p_out = p: M ~ Binomial(N(N-1)/2, p); check 4 sigma over 100 seeds
    n, p = 40, 0.2
    pairs = n * (n - 1) / 2
    total = 0
    for seed in range(100):
        params = PlantedPartitionParams.uniform(k=3, n=n, p_in=p, p_out=p, seed=seed)
        g, _ = generate_planted_partition(params)
        total += g.m
    mean = total / 100
    sigma = np.sqrt(pairs * p * (1 - p) / 100)
    assert abs(mean - pairs * p) < 4 * sigma


def test_planted_k1_reduces_to_er():
    params = PlantedPartitionParams.uniform(k=1, n=120, p_in=0.1, p_out=0.0, seed=9)
    g, p = generate_planted_partition(params)
    assert p.k == 1
    mean_degree = 2 * g.m / g.n
    assert abs(mean_degree - (g.n - 1) * 0.1) < 2.0


def test_generator_determinism():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        seed = int(rng.integers(0, 2**31))
        params = PlantedPartitionParams.uniform(
            k=int(rng.integers(1, 5)), n=int(rng.integers(4, 24)),
            p_in=float(rng.uniform(0.2, 0.9)), p_out=float(rng.uniform(0.0, 0.2)),
            seed=seed)
        g1, p1 = generate_planted_partition(params)
        g2, p2 = generate_planted_partition(params)
        assert g1 == g2 and p1 == p2


def test_label_counts_multinomial_chi_square():
    # group sizes are multinomial(N, q); with uniform q the canonical label
    # order is exchangeable, so per-seed per-group counts pool into one
    # chi-square statistic with 200 * (k - 1) degrees of freedom
    from scipy.stats import chi2

    k, n = 4, 80
    stat = 0.0
    for seed in range(200):
        params = PlantedPartitionParams.uniform(k=k, n=n, p_in=0.3, p_out=0.05,
                                                seed=seed)
        _, p = generate_planted_partition(params)
        sizes = np.bincount(p.as_array(), minlength=k)
        stat += float(((sizes - n / k) ** 2 / (n / k)).sum())
    pval = chi2.sf(stat, df=200 * (k - 1))
    assert pval > 0.001


def test_invalid_params_rejected():
    with pytest.raises(ValueError):
        PlantedPartitionParams.uniform(k=2, n=10, p_in=1.2, p_out=0.0, seed=0)
    with pytest.raises(ValueError):
        PlantedPartitionParams.uniform(k=2, n=10, p_in=0.2, p_out=0.5, seed=0)
    # disassortative allowed with the override
    PlantedPartitionParams.uniform(k=2, n=10, p_in=0.2, p_out=0.5, seed=0,
                                   allow_disassortative=True)
    with pytest.raises(ValueError):
        PlantedPartitionParams(k=2, membership_prior=(0.9, 0.2), p_in=0.5,
                               p_out=0.1, n=10, seed=0)


def test_n_below_k_warns():
    with pytest.warns(UserWarning):
        generate_planted_partition(
            PlantedPartitionParams.uniform(k=8, n=4, p_in=0.9, p_out=0.1, seed=1))
