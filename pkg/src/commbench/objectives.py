"""Partition objective functions: modularity, description length, Bayesian
evidence, and the random-walk map equation.

All functions take an immutable graph and a canonical partition and are pure,
so they double as oracles for the incremental edge-score paths.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import betaln

from .graph import Graph, component_labels
from .partition import BlockStats, Partition, block_stats

__all__ = [
    "ObjectiveUndefinedError",
    "modularity",
    "description_length",
    "bayes_evidence",
    "map_equation",
    "sbm_negloglik",
    "dcsbm_negloglik",
    "mdl_penalty",
]


class ObjectiveUndefinedError(ValueError):
    """Objective requested on a graph where it is undefined (no edges)."""


def _fsum(values) -> float:
    """Correctly-rounded sum; the result is independent of summation order,
    which makes the objectives exactly invariant under label permutations."""
    return math.fsum(map(float, np.ravel(values)))


def _require_edges(graph: Graph, what: str) -> None:
    if graph.m < 1:
        raise ObjectiveUndefinedError(f"{what} is undefined on a graph with no edges")


def _xlogx(x: np.ndarray) -> np.ndarray:
    """Elementwise x * ln(x) with the 0 ln 0 = 0 convention; 0-d safe."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)


def _xlog2x(x: np.ndarray) -> np.ndarray:
    """Elementwise x * log2(x) with the 0 log 0 = 0 convention; 0-d safe."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x > 0, x * np.log2(np.where(x > 0, x, 1.0)), 0.0)


# ---------------------------------------------------------------------------
# Modularity
# ---------------------------------------------------------------------------

def modularity(graph: Graph, partition: Partition) -> float:
    """Newman-Girvan modularity Q = sum_c [e_c/M - (d_c/2M)^2]."""
    _require_edges(graph, "modularity")
    stats = block_stats(graph, partition)
    m = float(graph.m)
    e_within = np.diagonal(stats.e)
    return _fsum(e_within / m - (stats.group_degrees / (2.0 * m)) ** 2)


# ---------------------------------------------------------------------------
# Description length (SBM and degree-corrected SBM)
# ---------------------------------------------------------------------------

def mdl_penalty(k: int, n: int, m: int) -> float:
    """Model-cost term: k(k+1)/2 block parameters at ln M nats each, plus
    n ln k nats for the node labels."""
    return (k * (k + 1) / 2.0) * np.log(m) + n * np.log(k)


def _sbm_block_terms(e: np.ndarray, r_max: np.ndarray) -> np.ndarray:
    """Per-block -[e ln p + (r-e) ln(1-p)] at the MLE p = e/r; 0 ln 0 = 0.

    Blocks with r = 0 contribute 0.  Inputs must be broadcastable; 0-d safe.
    """
    e = np.asarray(e, dtype=np.float64)
    r = np.asarray(r_max, dtype=np.float64)
    safe_r = np.where(r > 0, r, 1.0)
    t1 = _xlogx(e) - e * np.log(safe_r)
    t2 = _xlogx(r - e) - (r - e) * np.log(safe_r)
    return np.where(r > 0, -(t1 + t2), 0.0)


def sbm_negloglik(stats: BlockStats) -> float:
    """-ln of the maximized Bernoulli block likelihood, in nats."""
    terms = _sbm_block_terms(stats.e, stats.r_max)
    return _fsum(np.triu(terms))


def dcsbm_negloglik(stats: BlockStats, labels: np.ndarray) -> float:
    """-ln of the Poisson degree-corrected likelihood at the plug-in estimates
    lambda_rs = e_rs, theta_i = d_i / d_{g_i}, in nats.

    Evaluates -sum_{i<j} [A_ij ln mu_ij - mu_ij] with mu_ij = theta_i theta_j
    lambda_{g_i g_j}; groups with zero total degree take theta = 0.
    """
    d = stats.degrees
    d_g = stats.group_degrees
    u_g = np.bincount(labels, weights=d.astype(np.float64) ** 2, minlength=stats.k)
    e_within = np.diagonal(stats.e).copy()
    a1 = float(_xlogx(d).sum())          # sum_i d_i ln d_i (fixed node order)
    a2 = _fsum(_xlogx(d_g))              # sum_r d_r ln d_r
    a3 = _fsum(np.triu(_xlogx(stats.e)))  # per-edge ln lambda at its block
    m = stats.total_edges()
    cross_mass = m - _fsum(e_within)
    sum_theta_sq = np.divide(u_g, d_g**2, out=np.zeros_like(u_g), where=d_g > 0)
    diag_mass = _fsum(e_within * (1.0 - sum_theta_sq) / 2.0)
    return -(a1 - a2) - a3 + cross_mass + diag_mass


def description_length(graph: Graph, partition: Partition, model: str = "sbm") -> float:
    """Two-part description length: -ln L_ML(G | P, model) + pen(k), in nats."""
    _require_edges(graph, "description length")
    stats = block_stats(graph, partition)
    if model.lower() == "sbm":
        nll = sbm_negloglik(stats)
    elif model.lower() == "dcsbm":
        nll = dcsbm_negloglik(stats, partition.as_array())
    else:
        raise ValueError(f"unknown block model {model!r}; expected 'sbm' or 'dcsbm'")
    return nll + mdl_penalty(partition.k, graph.n, graph.m)


# ---------------------------------------------------------------------------
# Bayesian block evidence with conjugate (uniform Beta) priors
# ---------------------------------------------------------------------------

def bayes_evidence(graph: Graph, partition: Partition) -> float:
    """Log-evidence ln Z = sum_{r<=s} ln B(e+1, r-e+1) + ln pi(P), in nats.

    The partition prior is uniform over k in 1..n with i.i.d. labels given k:
    ln pi(P) = -ln n - n ln k.
    """
    _require_edges(graph, "Bayesian evidence")
    stats = block_stats(graph, partition)
    terms = betaln(stats.e + 1.0, stats.r_max - stats.e + 1.0)
    block_sum = _fsum(np.triu(terms))
    log_prior = -np.log(graph.n) - graph.n * np.log(partition.k)
    return block_sum + float(log_prior)


# ---------------------------------------------------------------------------
# Map equation (two-level random-walk code length)
# ---------------------------------------------------------------------------

def map_equation(graph: Graph, partition: Partition) -> float:
    """Expected two-level code length of a degree-proportional random walk, in bits.

    Disconnected graphs are scored per component (a walker never crosses
    components) and combined as the edge-mass-weighted mean of the component
    code lengths; modules are restricted to each component.
    """
    _require_edges(graph, "map equation")
    comp = component_labels(graph)
    lab = partition.as_array()
    m_total = float(graph.m)
    total = 0.0
    for c in np.unique(comp):
        nodes = np.flatnonzero(comp == c)
        sub_edges = [(i, j) for i, j in graph.edges if comp[i] == c]
        m_c = len(sub_edges)
        if m_c == 0:
            continue  # isolated nodes carry no walk mass
        total += (m_c / m_total) * _component_map_equation(
            nodes, sub_edges, lab, graph.degrees)
    return total


def _component_map_equation(nodes: np.ndarray, edges: list[tuple[int, int]],
                            lab: np.ndarray, degrees: np.ndarray) -> float:
    """Map equation of one connected component, modules = labels restricted."""
    m_c = len(edges)
    two_m = 2.0 * m_c
    mods = {}
    for v in nodes:
        mods.setdefault(int(lab[v]), len(mods))
    k = len(mods)
    deg_mass = np.zeros(k)
    cut = np.zeros(k)
    for v in nodes:
        deg_mass[mods[int(lab[v])]] += degrees[v]
    for i, j in edges:
        a, b = mods[int(lab[i])], mods[int(lab[j])]
        if a != b:
            cut[a] += 1.0
            cut[b] += 1.0
    q = cut / two_m
    p = degrees[nodes].astype(np.float64) / two_m
    q_tot = _fsum(q)
    term1 = float(_xlog2x(np.asarray([q_tot]))[0])
    term2 = -2.0 * _fsum(_xlog2x(q))
    term3 = -_fsum(_xlog2x(p))
    term4 = _fsum(_xlog2x(q + deg_mass / two_m))
    return term1 + term2 + term3 + term4
