"""Pairwise edge score functions built on a fitted partition of an observed graph.

A :class:`ScoreModel` freezes everything needed to score node pairs: the
partition, its block statistics, optional degree propensities, optional
low-rank adjacency factors, and the baseline objective for delta scorers.
In ``COMMON_SBM`` mode every method scores through the smoothed block rule
(l+1)/(r+2); in ``MODEL_SPECIFIC`` mode each method scores with its own
objective:

* modularity and map-equation methods score a candidate edge by the change
  of their objective when the edge is added, partition held fixed;
* description-length methods score by the decrease of the likelihood part
  (the model-cost term depends only on k and M and is held at the baseline,
  so it cancels in the difference);
* the Bayesian method uses the smoothed block rule;
* spectral methods use the rank-k adjacency reconstruction.

Scores are never normalized: the benchmark is rank-based.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

import numpy as np

from . import objectives, spectral
from .detect import Method
from .graph import Graph, component_labels
from .objectives import _xlog2x, _xlogx
from .partition import BlockStats, Partition, block_stats

__all__ = [
    "ScoreMode",
    "ScoreModel",
    "ScoreModelError",
    "build_score_model",
    "score_block_sbm",
    "score_block_dcsbm",
    "score_objective_delta",
    "score_spectral_lowrank",
    "AdjacencyIndicatorScorer",
]


class ScoreMode(str, Enum):
    MODEL_SPECIFIC = "model"
    COMMON_SBM = "sbm"

    @classmethod
    def parse(cls, name: str) -> "ScoreMode":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown score mode {name!r}; expected "
                             f"'model' or 'sbm'") from None


class ScoreModelError(RuntimeError):
    """Score model construction failed (for example missing spectral factors)."""


# scorer kinds, resolved once at build time
_KIND_BLOCK_SBM = "block_sbm"
_KIND_DELTA_Q = "delta_q"
_KIND_DELTA_MDL_SBM = "delta_mdl_sbm"
_KIND_DELTA_MDL_DCSBM = "delta_mdl_dcsbm"
_KIND_DELTA_MAPEQ = "delta_mapeq"
_KIND_LOWRANK = "lowrank"

_MODEL_SPECIFIC_KINDS = {
    Method.Q_LOUVAIN: _KIND_DELTA_Q,
    Method.MAPEQ: _KIND_DELTA_MAPEQ,
    Method.MDL_SBM: _KIND_DELTA_MDL_SBM,
    Method.MDL_DCSBM: _KIND_DELTA_MDL_DCSBM,
    Method.BAYES_SBM: _KIND_BLOCK_SBM,
    Method.SPECTRAL_BH: _KIND_LOWRANK,
    Method.SPECTRAL_NB: _KIND_LOWRANK,
}

_DELTA_BASELINES = {
    _KIND_DELTA_Q: lambda g, p: objectives.modularity(g, p),
    _KIND_DELTA_MDL_SBM: lambda g, p: objectives.description_length(g, p, "sbm"),
    _KIND_DELTA_MDL_DCSBM: lambda g, p: objectives.description_length(g, p, "dcsbm"),
    _KIND_DELTA_MAPEQ: lambda g, p: objectives.map_equation(g, p),
}


@dataclass(frozen=True)
class ScoreModel:
    """Immutable scoring context; safe to evaluate concurrently."""

    mode: ScoreMode
    method: Method
    graph: Graph
    partition: Partition
    stats: BlockStats
    kind: str
    theta: np.ndarray | None = None
    factors: tuple[np.ndarray, np.ndarray] | None = None
    baseline: float | None = None
    _ctx: dict = field(default_factory=dict, repr=False)

    def score(self, i: int, j: int) -> float:
        return float(self.score_pairs(np.asarray([[i, j]], dtype=np.int64))[0])

    def score_pairs(self, pairs: np.ndarray) -> np.ndarray:
        """Scores for an (n, 2) array of node pairs."""
        pairs = np.asarray(pairs, dtype=np.int64)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise ValueError("pairs must be an (n, 2) array")
        if np.any(pairs[:, 0] == pairs[:, 1]):
            raise ValueError("self-pairs cannot be scored")
        return _SCORERS[self.kind](self, pairs)


def compute_theta(stats: BlockStats, labels: np.ndarray) -> np.ndarray:
    """Degree propensity theta_i = d_i / d_{g_i}; zero for zero-degree groups."""
    d_g = stats.group_degrees[labels]
    return np.divide(stats.degrees, d_g, out=np.zeros_like(stats.degrees, dtype=float),
                     where=d_g > 0)


def build_score_model(method: Method | str, graph: Graph, partition: Partition,
                      mode: ScoreMode | str = ScoreMode.MODEL_SPECIFIC) -> ScoreModel:
    """Freeze the scoring context for a fitted (observed graph, partition) pair."""
    method = Method.parse(method) if isinstance(method, str) else method
    mode = ScoreMode.parse(mode) if isinstance(mode, str) else mode
    if partition.n != graph.n:
        raise ValueError("partition does not cover the observed graph")
    stats = block_stats(graph, partition)
    labels = partition.as_array()
    theta = compute_theta(stats, labels)
    if mode is ScoreMode.COMMON_SBM:
        kind = _KIND_BLOCK_SBM
    else:
        kind = _MODEL_SPECIFIC_KINDS[method]

    factors = None
    if kind == _KIND_LOWRANK:
        try:
            factors = spectral.adjacency_factors(graph, partition.k)
        except spectral.EigensolverError as exc:
            raise ScoreModelError(f"spectral factors unavailable: {exc}") from exc

    baseline = None
    ctx: dict = {}
    if kind in _DELTA_BASELINES:
        baseline = _DELTA_BASELINES[kind](graph, partition)
    if kind == _KIND_DELTA_Q:
        ctx = _q_delta_context(graph, stats)
    elif kind == _KIND_DELTA_MDL_DCSBM:
        ctx = _dc_delta_context(graph, stats, labels)
    elif kind == _KIND_DELTA_MAPEQ:
        ctx = _mapeq_delta_context(graph, partition)
    return ScoreModel(mode=mode, method=method, graph=graph, partition=partition,
                      stats=stats, kind=kind, theta=theta, factors=factors,
                      baseline=baseline, _ctx=ctx)


# ---------------------------------------------------------------------------
# Block scorers
# ---------------------------------------------------------------------------

def _score_block_sbm(model: ScoreModel, pairs: np.ndarray) -> np.ndarray:
    lab = model.partition.as_array()
    gi, gj = lab[pairs[:, 0]], lab[pairs[:, 1]]
    e = model.stats.e[gi, gj]
    r = model.stats.r_max[gi, gj]
    return (e + 1.0) / (r + 2.0)


def _score_block_dcsbm(model: ScoreModel, pairs: np.ndarray) -> np.ndarray:
    lab = model.partition.as_array()
    gi, gj = lab[pairs[:, 0]], lab[pairs[:, 1]]
    ell = model.stats.e[gi, gj]
    th = model.theta
    return th[pairs[:, 0]] * th[pairs[:, 1]] * ell


def score_block_sbm(model: ScoreModel, i: int, j: int) -> float:
    """Smoothed block score (l_{gi,gj} + 1) / (r_{gi,gj} + 2)."""
    if i == j:
        raise ValueError("self-pairs cannot be scored")
    return float(_score_block_sbm(model, np.asarray([[i, j]]))[0])


def score_block_dcsbm(model: ScoreModel, i: int, j: int) -> float:
    """Degree-corrected block score theta_i * theta_j * l_{gi,gj}."""
    if i == j:
        raise ValueError("self-pairs cannot be scored")
    return float(_score_block_dcsbm(model, np.asarray([[i, j]]))[0])


# ---------------------------------------------------------------------------
# Modularity delta
# ---------------------------------------------------------------------------

def _q_delta_context(graph: Graph, stats: BlockStats) -> dict:
    e_within_total = float(np.diagonal(stats.e).sum())
    sum_d2 = float((stats.group_degrees**2).sum())
    return {"e_in": e_within_total, "sum_d2": sum_d2}


def _score_delta_q(model: ScoreModel, pairs: np.ndarray) -> np.ndarray:
    lab = model.partition.as_array()
    stats = model.stats
    m = float(model.graph.m)
    gi, gj = lab[pairs[:, 0]], lab[pairs[:, 1]]
    same = gi == gj
    e_in = model._ctx["e_in"]
    sum_d2 = model._ctx["sum_d2"]
    d_gi = stats.group_degrees[gi]
    d_gj = stats.group_degrees[gj]
    # degree-square sum after the edge lands
    sum_d2_new = np.where(
        same,
        sum_d2 - d_gi**2 + (d_gi + 2.0) ** 2,
        sum_d2 - d_gi**2 - d_gj**2 + (d_gi + 1.0) ** 2 + (d_gj + 1.0) ** 2,
    )
    e_in_new = e_in + same.astype(np.float64)
    m_new = m + 1.0
    q_old = e_in / m - sum_d2 / (4.0 * m * m)
    q_new = e_in_new / m_new - sum_d2_new / (4.0 * m_new * m_new)
    return q_new - q_old


# ---------------------------------------------------------------------------
# Description-length deltas (likelihood part; model cost constant in k and
# held at the baseline M, so it cancels)
# ---------------------------------------------------------------------------

def _score_delta_mdl_sbm(model: ScoreModel, pairs: np.ndarray) -> np.ndarray:
    lab = model.partition.as_array()
    gi, gj = lab[pairs[:, 0]], lab[pairs[:, 1]]
    e = model.stats.e[gi, gj]
    r = model.stats.r_max[gi, gj]
    before = objectives._sbm_block_terms(e, r)
    after = objectives._sbm_block_terms(e + 1.0, r)
    return before - after


def _dc_delta_context(graph: Graph, stats: BlockStats, labels: np.ndarray) -> dict:
    d = stats.degrees.astype(np.float64)
    u_g = np.bincount(labels, weights=d**2, minlength=stats.k)
    return {"u_g": u_g, "e_within": np.diagonal(stats.e).copy()}


def _dc_diag_mass(e_within, dg, ug):
    sum_theta_sq = np.divide(ug, dg**2, out=np.zeros_like(np.asarray(ug, dtype=float)),
                             where=np.asarray(dg) > 0)
    return e_within * (1.0 - sum_theta_sq) / 2.0


def _score_delta_mdl_dcsbm(model: ScoreModel, pairs: np.ndarray) -> np.ndarray:
    """Decrease of the degree-corrected negative log-likelihood when the pair
    is added, with degrees, propensities and block rates all re-estimated."""
    lab = model.partition.as_array()
    stats = model.stats
    d = stats.degrees.astype(np.float64)
    dgv = stats.group_degrees
    u_g = model._ctx["u_g"]
    e_w = model._ctx["e_within"]
    i, j = pairs[:, 0], pairs[:, 1]
    gi, gj = lab[i], lab[j]
    same = gi == gj
    di, dj = d[i], d[j]
    e_b = stats.e[gi, gj]

    # A1 = sum_i d_i ln d_i enters with a minus sign
    d_a1 = (_xlogx(di + 1.0) - _xlogx(di)) + (_xlogx(dj + 1.0) - _xlogx(dj))
    # A2 = sum_r d_r ln d_r
    d_a2 = np.where(
        same,
        _xlogx(dgv[gi] + 2.0) - _xlogx(dgv[gi]),
        (_xlogx(dgv[gi] + 1.0) - _xlogx(dgv[gi]))
        + (_xlogx(dgv[gj] + 1.0) - _xlogx(dgv[gj])),
    )
    # A3 = sum_{r<=s} e ln e
    d_a3 = _xlogx(e_b + 1.0) - _xlogx(e_b)
    # A4 = cross-block edge mass
    d_a4 = np.where(same, 0.0, 1.0)
    # A5 = within-block Poisson mass, groups gi / gj only
    ui_new = u_g[gi] - di**2 + (di + 1.0) ** 2
    uj_new = u_g[gj] - dj**2 + (dj + 1.0) ** 2
    uii_new = u_g[gi] - di**2 - dj**2 + (di + 1.0) ** 2 + (dj + 1.0) ** 2
    old_a5 = _dc_diag_mass(e_w[gi], dgv[gi], u_g[gi]) \
        + np.where(same, 0.0, _dc_diag_mass(e_w[gj], dgv[gj], u_g[gj]))
    new_a5 = np.where(
        same,
        _dc_diag_mass(e_w[gi] + 1.0, dgv[gi] + 2.0, uii_new),
        _dc_diag_mass(e_w[gi], dgv[gi] + 1.0, ui_new)
        + _dc_diag_mass(e_w[gj], dgv[gj] + 1.0, uj_new),
    )
    d_a5 = new_a5 - old_a5
    delta_nll = -d_a1 + d_a2 - d_a3 + d_a4 + d_a5
    return -delta_nll


# ---------------------------------------------------------------------------
# Map-equation delta (per-component code length, edge-mass weighted)
# ---------------------------------------------------------------------------

def _xl2(x: float) -> float:
    return x * np.log2(x) if x > 0 else 0.0


def _mapeq_delta_context(graph: Graph, partition: Partition) -> dict:
    lab = partition.as_array()
    comp = component_labels(graph)
    d = graph.degrees.astype(np.float64)
    n_comp = int(comp.max()) + 1
    m_c = np.zeros(n_comp)
    cut: list[dict[int, float]] = [dict() for _ in range(n_comp)]
    deg: list[dict[int, float]] = [dict() for _ in range(n_comp)]
    for v in range(graph.n):
        c, g = int(comp[v]), int(lab[v])
        deg[c][g] = deg[c].get(g, 0.0) + d[v]
    for i, j in graph.edges:
        c = int(comp[i])
        m_c[c] += 1.0
        a, b = int(lab[i]), int(lab[j])
        if a != b:
            cut[c][a] = cut[c].get(a, 0.0) + 1.0
            cut[c][b] = cut[c].get(b, 0.0) + 1.0
    sd = np.zeros(n_comp)     # sum_i d_i log2 d_i
    tot_c = np.zeros(n_comp)  # sum of module cuts
    sc = np.zeros(n_comp)     # sum xlog2(cut_m)
    se = np.zeros(n_comp)     # sum xlog2(cut_m + deg_m)
    l_c = np.zeros(n_comp)    # component code length (bits)
    for c in range(n_comp):
        members = np.flatnonzero(comp == c)
        sd[c] = float(_xlog2x(d[members]).sum())
        tot_c[c] = sum(cut[c].values())
        sc[c] = sum(_xl2(v) for v in cut[c].values())
        se[c] = sum(_xl2(cut[c].get(g, 0.0) + dm) for g, dm in deg[c].items())
        if m_c[c] > 0:
            l_c[c] = _component_codelen(2.0 * m_c[c], sd[c], 2.0 * m_c[c],
                                        tot_c[c], sc[c], se[c])
    weighted = float((m_c * l_c).sum())
    return {"comp": comp, "m_c": m_c, "cut": cut, "deg": deg, "sd": sd,
            "tot_c": tot_c, "sc": sc, "se": se, "l_c": l_c, "weighted": weighted}


def _component_codelen(t: float, sd: float, sum_d: float,
                       tot_cut: float, sc: float, se: float) -> float:
    """Map equation of one component from scalar aggregates at denominator t."""
    q_tot = tot_cut / t
    log2t = np.log2(t) if t > 0 else 0.0
    node_term = sd / t - (sum_d / t) * log2t
    q_term = sc / t - (tot_cut / t) * log2t
    exit_term = se / t - ((tot_cut + sum_d) / t) * log2t
    return _xl2(q_tot) - 2.0 * q_term - node_term + exit_term


def _score_delta_mapeq(model: ScoreModel, pairs: np.ndarray) -> np.ndarray:
    ctx = model._ctx
    lab = model.partition.labels
    comp = ctx["comp"]
    d = model.graph.degrees
    m_tot = float(model.graph.m)
    out = np.empty(pairs.shape[0])
    base = model.baseline
    for idx in range(pairs.shape[0]):
        i, j = int(pairs[idx, 0]), int(pairs[idx, 1])
        ci, cj = int(comp[i]), int(comp[j])
        if ci == cj:
            new_total = _mapeq_within(ctx, i, j, ci, lab, d, m_tot)
        else:
            new_total = _mapeq_across(ctx, i, j, ci, cj, lab, d, m_tot)
        out[idx] = base - new_total
    return out


def _mapeq_within(ctx, i, j, c, lab, d, m_tot) -> float:
    gi, gj = int(lab[i]), int(lab[j])
    m_c = ctx["m_c"][c]
    t_new = 2.0 * (m_c + 1.0)
    di, dj = float(d[i]), float(d[j])
    sd = ctx["sd"][c] + (_xl2(di + 1.0) - _xl2(di)) + (_xl2(dj + 1.0) - _xl2(dj))
    cut = ctx["cut"][c]
    deg = ctx["deg"][c]
    tot = ctx["tot_c"][c]
    sc = ctx["sc"][c]
    se = ctx["se"][c]
    if gi != gj:
        ca, cb = cut.get(gi, 0.0), cut.get(gj, 0.0)
        sc += (_xl2(ca + 1.0) - _xl2(ca)) + (_xl2(cb + 1.0) - _xl2(cb))
        tot += 2.0
        ea, eb = ca + deg.get(gi, 0.0), cb + deg.get(gj, 0.0)
        se += (_xl2(ea + 2.0) - _xl2(ea)) + (_xl2(eb + 2.0) - _xl2(eb))
    else:
        ea = cut.get(gi, 0.0) + deg.get(gi, 0.0)
        se += _xl2(ea + 2.0) - _xl2(ea)
    l_new = _component_codelen(t_new, sd, t_new, tot, sc, se)
    weighted = ctx["weighted"] - m_c * ctx["l_c"][c] + (m_c + 1.0) * l_new
    return weighted / (m_tot + 1.0)


def _mapeq_across(ctx, i, j, c1, c2, lab, d, m_tot) -> float:
    gi, gj = int(lab[i]), int(lab[j])
    m1, m2 = ctx["m_c"][c1], ctx["m_c"][c2]
    m12 = m1 + m2 + 1.0
    t_new = 2.0 * m12
    di, dj = float(d[i]), float(d[j])
    sd = ctx["sd"][c1] + ctx["sd"][c2] \
        + (_xl2(di + 1.0) - _xl2(di)) + (_xl2(dj + 1.0) - _xl2(dj))
    # merge per-module masses of the two components
    cut = dict(ctx["cut"][c1])
    for g, v in ctx["cut"][c2].items():
        cut[g] = cut.get(g, 0.0) + v
    deg = dict(ctx["deg"][c1])
    for g, v in ctx["deg"][c2].items():
        deg[g] = deg.get(g, 0.0) + v
    deg[gi] = deg.get(gi, 0.0) + 1.0
    deg[gj] = deg.get(gj, 0.0) + 1.0
    if gi != gj:
        cut[gi] = cut.get(gi, 0.0) + 1.0
        cut[gj] = cut.get(gj, 0.0) + 1.0
    tot = sum(cut.values())
    sc = sum(_xl2(v) for v in cut.values())
    se = sum(_xl2(cut.get(g, 0.0) + dm) for g, dm in deg.items())
    l_new = _component_codelen(t_new, sd, t_new, tot, sc, se)
    weighted = ctx["weighted"] - m1 * ctx["l_c"][c1] - m2 * ctx["l_c"][c2] \
        + m12 * l_new
    return weighted / (m_tot + 1.0)


# ---------------------------------------------------------------------------
# Spectral low-rank scorer
# ---------------------------------------------------------------------------

def _score_lowrank(model: ScoreModel, pairs: np.ndarray) -> np.ndarray:
    vals, vecs = model.factors
    vi = vecs[pairs[:, 0], :]
    vj = vecs[pairs[:, 1], :]
    return np.einsum("t,pt,pt->p", vals, vi, vj)


def score_spectral_lowrank(model: ScoreModel, i: int, j: int) -> float:
    """Entry (i, j) of the rank-k eigenreconstruction of the observed adjacency."""
    if model.factors is None:
        raise ScoreModelError("model carries no spectral factors")
    if i == j:
        raise ValueError("self-pairs cannot be scored")
    return float(_score_lowrank(model, np.asarray([[i, j]]))[0])


def score_objective_delta(model: ScoreModel, i: int, j: int) -> float:
    """Objective-based score of the unobserved pair (i, j), partition fixed."""
    if model.kind not in (_KIND_DELTA_Q, _KIND_DELTA_MDL_SBM,
                          _KIND_DELTA_MDL_DCSBM, _KIND_DELTA_MAPEQ):
        raise ScoreModelError(f"model kind {model.kind!r} is not a delta scorer")
    if i == j:
        raise ValueError("self-pairs cannot be scored")
    if model.graph.has_edge(i, j):
        raise ValueError(f"pair ({i}, {j}) is an observed edge")
    return model.score(i, j)


_SCORERS = {
    _KIND_BLOCK_SBM: _score_block_sbm,
    _KIND_DELTA_Q: _score_delta_q,
    _KIND_DELTA_MDL_SBM: _score_delta_mdl_sbm,
    _KIND_DELTA_MDL_DCSBM: _score_delta_mdl_dcsbm,
    _KIND_DELTA_MAPEQ: _score_delta_mapeq,
    _KIND_LOWRANK: _score_lowrank,
}


class AdjacencyIndicatorScorer:
    """Diagnostic scorer: 1 for observed edges, 0 for everything else.

    Perfect at separating observed edges from the rest and blind to missing
    links, it pins the extreme end of the description/prediction tradeoff.
    """

    def __init__(self, graph: Graph):
        self.graph = graph

    def score(self, i: int, j: int) -> float:
        return 1.0 if self.graph.has_edge(i, j) else 0.0

    def score_pairs(self, pairs: np.ndarray) -> np.ndarray:
        pairs = np.asarray(pairs, dtype=np.int64)
        return np.asarray([self.score(int(a), int(b)) for a, b in pairs])
