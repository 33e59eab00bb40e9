"""Community detection drivers.

Seven methods share one entry point, :func:`detect`:

* ``Q_LOUVAIN``   two-phase greedy modularity maximization
* ``MDL_SBM``     agglomerative description-length minimization (Bernoulli blocks)
* ``MDL_DCSBM``   same search over the degree-corrected Poisson likelihood
* ``BAYES_SBM``   same search maximizing the conjugate-prior block evidence
* ``MAPEQ``       two-phase greedy map-equation minimization
* ``SPECTRAL_BH`` Bethe Hessian count + k-means on the eigenvector embedding
* ``SPECTRAL_NB`` non-backtracking count + k-means on the embedding

The agglomerative methods merge from singletons, always applying the best
available merge (candidates are group pairs joined by at least one edge, plus
pools of fully isolated groups), run single-node Kernighan-Lin style
refinement sweeps at each level, and return the partition minimizing the
objective over the whole visited trace.  All methods are deterministic given
(method, graph, seed).
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from sklearn.cluster import KMeans

from . import objectives, spectral
from .graph import Graph, component_labels
from .objectives import mdl_penalty
from .partition import Partition, canonicalize

__all__ = ["Method", "DetectorResult", "DetectError", "detect", "METHOD_OBJECTIVES"]

_MOVE_EPS = 1e-11  # strict-improvement threshold for greedy moves
_KL_SWEEPS = 2     # refinement sweeps per agglomerative level


class Method(str, Enum):
    Q_LOUVAIN = "q_louvain"
    MDL_SBM = "mdl_sbm"
    MDL_DCSBM = "mdl_dcsbm"
    BAYES_SBM = "bayes_sbm"
    MAPEQ = "mapeq"
    SPECTRAL_BH = "spectral_bh"
    SPECTRAL_NB = "spectral_nb"

    @classmethod
    def parse(cls, name: str) -> "Method":
        try:
            return cls(name.strip().lower())
        except ValueError:
            known = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown method {name!r}; known methods: {known}") from None


# optimization direction and public objective per method
METHOD_OBJECTIVES = {
    Method.Q_LOUVAIN: ("max", lambda g, p: objectives.modularity(g, p)),
    Method.MDL_SBM: ("min", lambda g, p: objectives.description_length(g, p, "sbm")),
    Method.MDL_DCSBM: ("min", lambda g, p: objectives.description_length(g, p, "dcsbm")),
    Method.BAYES_SBM: ("max", lambda g, p: objectives.bayes_evidence(g, p)),
    Method.MAPEQ: ("min", lambda g, p: objectives.map_equation(g, p)),
}


class DetectError(RuntimeError):
    """Detection failed (for example an eigensolver did not converge)."""


@dataclass(frozen=True)
class DetectorResult:
    method: Method
    partition: Partition
    k: int
    objective: float
    seed: int
    ms: float

    def to_record(self, labels_path: str | None = None) -> dict:
        rec = {"method": self.method.value, "k": self.k, "objective": self.objective,
               "seed": self.seed, "ms": self.ms}
        if labels_path is not None:
            rec["labels_path"] = labels_path
        return rec


def detect(method: Method | str, graph: Graph, seed: int) -> DetectorResult:
    """Run one detection method; pure function of (method, graph, seed)."""
    method = Method.parse(method) if isinstance(method, str) else method
    if graph.m < 1:
        raise DetectError("detection requires at least one edge")
    t0 = time.perf_counter()
    if method is Method.Q_LOUVAIN:
        labels = _louvain_modularity(graph, seed)
        partition = canonicalize(labels)
        objective = objectives.modularity(graph, partition)
    elif method is Method.MAPEQ:
        labels = _louvain_mapeq(graph, seed)
        partition = canonicalize(labels)
        objective = objectives.map_equation(graph, partition)
    elif method in (Method.MDL_SBM, Method.MDL_DCSBM, Method.BAYES_SBM):
        labels = _agglomerative(graph, method, seed)
        partition = canonicalize(labels)
        objective = METHOD_OBJECTIVES[method][1](graph, partition)
    elif method in (Method.SPECTRAL_BH, Method.SPECTRAL_NB):
        partition, objective = _spectral_detect(graph, method, seed)
    else:  # pragma: no cover
        raise DetectError(f"no implementation for {method}")
    ms = (time.perf_counter() - t0) * 1000.0
    return DetectorResult(method=method, partition=partition, k=partition.k,
                          objective=float(objective), seed=seed, ms=ms)


# ===========================================================================
# Louvain: greedy modularity maximization with aggregation
# ===========================================================================

class _Aggregate:
    """Weighted aggregate of the input graph used by the two-phase optimizers.

    ``adj[u]`` maps neighbor supernodes to edge mass, ``self_w[u]`` is the
    internal mass of supernode u (each internal unit adds 2 to its degree
    mass), ``mass[u]`` the total degree mass.
    """

    def __init__(self, n: int, adj: list[dict[int, float]], self_w: list[float]):
        self.n = n
        self.adj = adj
        self.self_w = self_w
        self.mass = [sum(adj[u].values()) + 2.0 * self_w[u] for u in range(n)]

    @classmethod
    def from_graph(cls, graph: Graph) -> "_Aggregate":
        adj: list[dict[int, float]] = [dict() for _ in range(graph.n)]
        for i, j in graph.edges:
            adj[i][j] = adj[i].get(j, 0.0) + 1.0
            adj[j][i] = adj[j].get(i, 0.0) + 1.0
        return cls(graph.n, adj, [0.0] * graph.n)

    def condense(self, comm: list[int]) -> tuple["_Aggregate", list[int]]:
        """Collapse communities into supernodes; returns (aggregate, dense ids)."""
        ids: dict[int, int] = {}
        for c in comm:
            if c not in ids:
                ids[c] = len(ids)
        dense = [ids[c] for c in comm]
        k = len(ids)
        adj: list[dict[int, float]] = [dict() for _ in range(k)]
        self_w = [0.0] * k
        for u in range(self.n):
            cu = dense[u]
            self_w[cu] += self.self_w[u]
            for v, w in self.adj[u].items():
                cv = dense[v]
                if cu == cv:
                    if u < v:
                        self_w[cu] += w
                else:
                    adj[cu][cv] = adj[cu].get(cv, 0.0) + w
        return _Aggregate(k, adj, self_w), dense


def _local_moves_modularity(agg: _Aggregate, m: float,
                            rng: np.random.Generator) -> tuple[list[int], bool]:
    comm = list(range(agg.n))
    tot = list(agg.mass)
    moved_any = False
    order = [int(u) for u in rng.permutation(agg.n)]
    improving = True
    while improving:
        improving = False
        for u in order:
            a = comm[u]
            k_u = agg.mass[u]
            w_comm: dict[int, float] = {}
            for v, w in agg.adj[u].items():
                w_comm[comm[v]] = w_comm.get(comm[v], 0.0) + w
            w_ua = w_comm.get(a, 0.0)
            tot_a_rest = tot[a] - k_u
            best_gain, best_c = 0.0, a
            for b in sorted(w_comm):
                if b == a:
                    continue
                gain = (w_comm[b] - w_ua) / m \
                    - k_u * (tot[b] - tot_a_rest) / (2.0 * m * m)
                if gain > best_gain + _MOVE_EPS:
                    best_gain, best_c = gain, b
            if best_c != a:
                comm[u] = best_c
                tot[a] -= k_u
                tot[best_c] += k_u
                improving = True
                moved_any = True
    return comm, moved_any


def _louvain_modularity(graph: Graph, seed: int) -> list[int]:
    rng = np.random.default_rng(seed)
    agg = _Aggregate.from_graph(graph)
    m = float(graph.m)
    mapping = list(range(graph.n))  # original node -> current supernode
    while True:
        comm, moved = _local_moves_modularity(agg, m, rng)
        if not moved:
            break
        agg, dense = agg.condense(comm)
        mapping = [dense[comm[s]] for s in mapping]
        if agg.n == 1:
            break
    return mapping


# ===========================================================================
# Map-equation Louvain (per connected component)
# ===========================================================================

def _plogp(x: float) -> float:
    return x * np.log2(x) if x > 0 else 0.0


class _MapEqState:
    """Module-level masses for one component at fixed total edge mass."""

    def __init__(self, agg: _Aggregate, two_m: float):
        self.two_m = two_m
        self.cut = [agg.mass[u] - 2.0 * agg.self_w[u] for u in range(agg.n)]
        self.deg = list(agg.mass)
        self.q_tot = sum(self.cut) / two_m

    def _pair_codelen(self, cut_a, deg_a, cut_b, deg_b, q_tot) -> float:
        two_m = self.two_m
        return (_plogp(q_tot)
                - 2.0 * (_plogp(cut_a / two_m) + _plogp(cut_b / two_m))
                + _plogp((cut_a + deg_a) / two_m) + _plogp((cut_b + deg_b) / two_m))

    def _moved(self, a: int, b: int, k_u: float, self_u: float,
               w_ua: float, w_ub: float):
        cut_a2 = self.cut[a] + 2.0 * w_ua + 2.0 * self_u - k_u
        cut_b2 = self.cut[b] + k_u - 2.0 * self_u - 2.0 * w_ub
        q_tot2 = self.q_tot + (cut_a2 + cut_b2 - self.cut[a] - self.cut[b]) / self.two_m
        return cut_a2, cut_b2, q_tot2

    def gain(self, a: int, b: int, k_u: float, self_u: float,
             w_ua: float, w_ub: float) -> float:
        """Code-length change of moving a supernode from module a to b."""
        cut_a2, cut_b2, q_tot2 = self._moved(a, b, k_u, self_u, w_ua, w_ub)
        old = self._pair_codelen(self.cut[a], self.deg[a],
                                 self.cut[b], self.deg[b], self.q_tot)
        new = self._pair_codelen(cut_a2, self.deg[a] - k_u,
                                 cut_b2, self.deg[b] + k_u, q_tot2)
        return new - old

    def apply(self, a: int, b: int, k_u: float, self_u: float,
              w_ua: float, w_ub: float) -> None:
        cut_a2, cut_b2, q_tot2 = self._moved(a, b, k_u, self_u, w_ua, w_ub)
        self.cut[a], self.cut[b], self.q_tot = cut_a2, cut_b2, q_tot2
        self.deg[a] -= k_u
        self.deg[b] += k_u


def _local_moves_mapeq(agg: _Aggregate, two_m: float,
                       rng: np.random.Generator) -> tuple[list[int], bool]:
    comm = list(range(agg.n))
    state = _MapEqState(agg, two_m)
    moved_any = False
    order = [int(u) for u in rng.permutation(agg.n)]
    improving = True
    while improving:
        improving = False
        for u in order:
            a = comm[u]
            k_u, self_u = agg.mass[u], agg.self_w[u]
            w_comm: dict[int, float] = {}
            for v, w in agg.adj[u].items():
                w_comm[comm[v]] = w_comm.get(comm[v], 0.0) + w
            w_ua = w_comm.get(a, 0.0)
            best_gain, best_c = 0.0, a
            for b in sorted(w_comm):
                if b == a:
                    continue
                gain = state.gain(a, b, k_u, self_u, w_ua, w_comm[b])
                if gain < best_gain - _MOVE_EPS:
                    best_gain, best_c = gain, b
            if best_c != a:
                state.apply(a, best_c, k_u, self_u, w_ua, w_comm[best_c])
                comm[u] = best_c
                improving = True
                moved_any = True
    return comm, moved_any


def _louvain_mapeq(graph: Graph, seed: int) -> list[int]:
    comp = component_labels(graph)
    labels = [0] * graph.n
    offset = 0
    for c in np.unique(comp):
        nodes = [int(v) for v in np.flatnonzero(comp == c)]
        local = {v: i for i, v in enumerate(nodes)}
        edges = [(local[i], local[j]) for i, j in graph.edges if comp[i] == c]
        if not edges:
            for v in nodes:
                labels[v] = offset
                offset += 1
            continue
        sub = Graph(n=len(nodes), edges=tuple(sorted(edges)))
        rng = np.random.default_rng([seed, int(c)])
        agg = _Aggregate.from_graph(sub)
        two_m = 2.0 * len(edges)
        mapping = list(range(sub.n))
        while True:
            comm, moved = _local_moves_mapeq(agg, two_m, rng)
            if not moved:
                break
            agg, dense = agg.condense(comm)
            mapping = [dense[comm[s]] for s in mapping]
            if agg.n == 1:
                break
        for v in nodes:
            labels[v] = offset + mapping[local[v]]
        offset += max(mapping) + 1
    return labels


# ===========================================================================
# Agglomerative block-model search (MDL / Bayes)
# ===========================================================================

class _BlockScore:
    """Block and group terms of one minimized block objective.

    The full objective is ``const + sum_{r<=s} block(e, r_max) +
    sum_r group(...) + level(k)``; merge and move deltas touch only the
    affected rows.  Block counts and pair capacities are small integers, so
    the transcendental parts are precomputed into lookup tables and ``block``
    reduces to gathers.
    """

    uses_groups = False

    def __init__(self, graph: Graph):
        self.n = graph.n
        self.m = graph.m
        self.const = 0.0
        # largest value ever indexed: pair capacities (<= n^2) and r + 2
        size = max(graph.n * graph.n, 2 * graph.m) + 3
        self._ixlogx = objectives._xlogx(np.arange(size, dtype=np.float64))

    def block(self, e: np.ndarray, r_max: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def group(self, dg, ug, e_within) -> np.ndarray:
        return np.zeros_like(np.asarray(dg, dtype=np.float64))

    def level(self, k: int) -> float:
        raise NotImplementedError


class _SbmScore(_BlockScore):
    def block(self, e, r_max):
        t = self._ixlogx
        # -[e ln(e/r) + (r-e) ln(1-e/r)] = -(xlogx(e) + xlogx(r-e) - xlogx(r))
        return -(t[e] + t[r_max - e] - t[r_max])

    def level(self, k):
        return mdl_penalty(k, self.n, self.m)


class _BayesScore(_BlockScore):
    def __init__(self, graph: Graph):
        super().__init__(graph)
        from scipy.special import gammaln
        size = max(graph.n * graph.n, 2 * graph.m) + 3
        self._gammaln = gammaln(np.arange(size, dtype=np.float64))

    def block(self, e, r_max):
        g = self._gammaln
        # -ln B(e+1, r-e+1) = -(lgamma(e+1) + lgamma(r-e+1) - lgamma(r+2))
        return -(g[e + 1] + g[r_max - e + 1] - g[r_max + 2])

    def level(self, k):
        # minimizing -ln Z, so the prior enters as +(ln n + n ln k)
        return float(np.log(self.n) + self.n * np.log(k))


class _DcsbmScore(_BlockScore):
    uses_groups = True

    def __init__(self, graph: Graph):
        super().__init__(graph)
        d = graph.degrees.astype(np.float64)
        self.const = -float(objectives._xlogx(d).sum()) + float(graph.m)

    def block(self, e, r_max):
        return -self._ixlogx[e]

    def group(self, dg, ug, e_within):
        dg = np.asarray(dg)
        ug = np.asarray(ug, dtype=np.float64)
        ew = np.asarray(e_within, dtype=np.float64)
        dgf = dg.astype(np.float64)
        sum_theta_sq = np.where(dg > 0, ug / np.where(dg > 0, dgf, 1.0) ** 2, 0.0)
        # -e_within removes the within part of the constant +M cross mass;
        # the diagonal Poisson mass re-enters scaled by (1 - sum theta^2)/2
        return self._ixlogx[dg] - ew + ew * (1.0 - sum_theta_sq) / 2.0

    def level(self, k):
        return mdl_penalty(k, self.n, self.m)


_SCORES = {
    Method.MDL_SBM: _SbmScore,
    Method.MDL_DCSBM: _DcsbmScore,
    Method.BAYES_SBM: _BayesScore,
}


class _BlockState:
    """Mutable block statistics over which merges and node moves operate.

    ``e`` holds cross-group edge counts with a zero diagonal; within-group
    counts live in ``e_within``.  ``labels`` maps original nodes to the
    current group ids 0..k-1.
    """

    def __init__(self, graph: Graph, score: _BlockScore):
        n = graph.n
        self.graph = graph
        self.score = score
        self.labels = np.arange(n, dtype=np.int64)
        self.k = n
        self.e = np.zeros((n, n), dtype=np.int64)
        for i, j in graph.edges:
            self.e[i, j] += 1
            self.e[j, i] += 1
        self.sizes = np.ones(n, dtype=np.int64)
        self.dg = graph.degrees.astype(np.int64).copy()
        self.ug = self.dg**2
        self.e_within = np.zeros(n, dtype=np.int64)
        self._nbrs = [np.asarray(nb, dtype=np.int64) for nb in graph.neighbors]

    # -- full views ---------------------------------------------------------

    def r_max(self) -> np.ndarray:
        r = np.outer(self.sizes, self.sizes)
        np.fill_diagonal(r, self.sizes * (self.sizes - 1) // 2)
        return r

    def e_matrix(self) -> np.ndarray:
        e = self.e.copy()
        np.fill_diagonal(e, self.e_within)
        return e

    def term_matrix(self) -> np.ndarray:
        return self.score.block(self.e_matrix(), self.r_max())

    def objective(self) -> float:
        terms = self.term_matrix()
        total = float(np.triu(terms).sum())
        if self.score.uses_groups:
            total += float(np.sum(self.score.group(self.dg, self.ug, self.e_within)))
        return total + self.score.level(self.k) + self.score.const

    # -- merge step ----------------------------------------------------------

    def merge_candidates(self, rng: np.random.Generator | None = None,
                         ) -> tuple[np.ndarray, np.ndarray]:
        """Group pairs considered for merging: pairs joined by at least one
        edge, pools of fully isolated groups, and (when an rng is given) one
        random partner per group so non-adjacent structure such as the leaf
        set of a star remains reachable."""
        iu, ju = np.triu_indices(self.k, k=1)
        connected = self.e[iu, ju] > 0
        a, b = iu[connected], ju[connected]
        zero = np.flatnonzero((self.dg == 0) & (self.sizes > 0))
        if zero.size >= 2:
            a = np.concatenate([a, zero[:-1]])
            b = np.concatenate([b, zero[1:]])
        # random partners matter when adjacency alone is restrictive (stars,
        # bipartite-like structure); skip them while the pool is already rich
        if rng is not None and self.k > 2 and a.size < 4 * self.k:
            src = np.arange(self.k)
            offset = rng.integers(1, self.k, size=self.k)
            dst = (src + offset) % self.k
            a = np.concatenate([a, np.minimum(src, dst)])
            b = np.concatenate([b, np.maximum(src, dst)])
        if a.size == 0:  # disconnected remnants: allow consecutive merges
            a = np.arange(self.k - 1)
            b = a + 1
        return a.astype(np.int64), b.astype(np.int64)

    def merge_deltas(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Objective change (excluding the level term) for each candidate pair."""
        terms = self.term_matrix()
        row_sums = terms.sum(axis=1)
        c = a.shape[0]
        idx = np.arange(c)
        new_rows = self.e[a, :] + self.e[b, :]
        sizes_new = self.sizes[a] + self.sizes[b]
        r_new = sizes_new[:, None] * self.sizes[None, :]
        term_new = self.score.block(new_rows, r_new)
        sum_new = term_new.sum(axis=1) - term_new[idx, a] - term_new[idx, b]
        e_diag = self.e_within[a] + self.e_within[b] + self.e[a, b]
        r_diag = sizes_new * (sizes_new - 1) // 2
        diag_term = self.score.block(e_diag, r_diag)
        removed = row_sums[a] + row_sums[b] - terms[a, b]
        delta = sum_new + diag_term - removed
        if self.score.uses_groups:
            g = self.score.group(self.dg, self.ug, self.e_within)
            g_new = self.score.group(self.dg[a] + self.dg[b],
                                     self.ug[a] + self.ug[b], e_diag)
            delta = delta + (g_new - g[a] - g[b])
        return delta

    def merge(self, a: int, b: int) -> None:
        if a > b:
            a, b = b, a
        cross_ab = self.e[a, b]
        new_row = self.e[a, :] + self.e[b, :]
        self.e[a, :] = new_row
        self.e[:, a] = new_row
        self.e[a, a] = 0.0
        self.e_within[a] += self.e_within[b] + cross_ab
        self.sizes[a] += self.sizes[b]
        self.dg[a] += self.dg[b]
        self.ug[a] += self.ug[b]
        keep = np.arange(self.k) != b
        self.e = self.e[np.ix_(keep, keep)]
        self.sizes = self.sizes[keep]
        self.dg = self.dg[keep]
        self.ug = self.ug[keep]
        self.e_within = self.e_within[keep]
        self.labels[self.labels == b] = a
        self.labels[self.labels > b] -= 1
        self.k -= 1

    # -- single-node refinement ----------------------------------------------

    def refine(self, rng: np.random.Generator,
               frontier: set[int] | None = None) -> None:
        """Greedy single-node moves to adjacent groups; never empties a group.

        ``frontier`` restricts the nodes examined initially (neighbors of an
        accepted move re-enter the queue), so refinement after a merge only
        revisits the affected region.  With ``frontier=None`` all nodes are
        examined.
        """
        if self.k < 2:
            return
        from collections import deque

        deg = self.graph.degrees
        terms = self.term_matrix()
        row_sums = terms.sum(axis=1)
        nodes = sorted(frontier) if frontier is not None else range(self.graph.n)
        order = [int(u) for u in rng.permutation(np.asarray(list(nodes), dtype=np.int64))] \
            if len(nodes) else []
        queue = deque(order)
        queued = set(order)
        moves = 0
        limit = 20 * self.graph.n
        while queue and moves < limit:
            u = queue.popleft()
            queued.discard(u)
            a = int(self.labels[u])
            if self.sizes[a] <= 1 or self._nbrs[u].size == 0:
                continue
            nbr_groups = self.labels[self._nbrs[u]]
            c_u = np.bincount(nbr_groups, minlength=self.k)
            targets = np.flatnonzero(c_u)
            targets = targets[targets != a]
            # one random non-adjacent target lets nodes cross non-edges
            # (a star leaf can only improve by joining the other leaves)
            extra = int(rng.integers(0, self.k))
            if extra != a and c_u[extra] == 0:
                targets = np.append(targets, extra)
            if targets.size == 0:
                continue
            deltas = self._move_deltas(a, targets, c_u, int(deg[u]),
                                       terms, row_sums)
            j = int(np.argmin(deltas))
            if deltas[j] < -_MOVE_EPS:
                self._apply_move(u, a, int(targets[j]), c_u, int(deg[u]))
                self._update_term_cache(a, int(targets[j]), terms, row_sums)
                moves += 1
                for v in (u, *self._nbrs[u].tolist()):
                    v = int(v)
                    if v not in queued:
                        queue.append(v)
                        queued.add(v)

    def _move_deltas(self, a: int, targets: np.ndarray, c_u: np.ndarray,
                     d_u: int, terms: np.ndarray, row_sums: np.ndarray) -> np.ndarray:
        sizes2 = self.sizes.copy()
        sizes2[a] -= 1

        # row a with the node removed (diagonal and target column handled apart)
        base_e_a = self.e[a, :] - c_u
        base_e_a[a] = 0
        base_r_a = sizes2[a] * sizes2
        base_r_a[a] = 0
        base_terms_a = self.score.block(base_e_a, base_r_a)
        sum_a_base = float(base_terms_a.sum())
        diag_a = float(self.score.block(
            np.atleast_1d(self.e_within[a] - c_u[a]),
            np.atleast_1d(sizes2[a] * (sizes2[a] - 1) // 2))[0])

        t = targets
        idx = np.arange(t.shape[0])
        new_b = self.e[t, :] + c_u[None, :]
        new_b[:, a] = self.e[t, a] + c_u[a] - c_u[t]
        r_b = (self.sizes[t] + 1)[:, None] * sizes2[None, :]
        term_b = self.score.block(new_b, r_b)
        sum_b = term_b.sum(axis=1) - term_b[idx, t] - term_b[:, a]
        cross_ab = self.score.block(new_b[:, a], (self.sizes[t] + 1) * sizes2[a])
        diag_b = self.score.block(self.e_within[t] + c_u[t],
                                  (self.sizes[t] + 1) * self.sizes[t] // 2)
        added = (sum_a_base - base_terms_a[t]) + sum_b + cross_ab + diag_a + diag_b
        removed = row_sums[a] + row_sums[t] - terms[a, t]
        delta = added - removed
        if self.score.uses_groups:
            g = self.score.group(self.dg, self.ug, self.e_within)
            g_a2 = self.score.group(np.atleast_1d(self.dg[a] - d_u),
                                    np.atleast_1d(self.ug[a] - d_u**2),
                                    np.atleast_1d(self.e_within[a] - c_u[a]))[0]
            g_b2 = self.score.group(self.dg[t] + d_u, self.ug[t] + d_u**2,
                                    self.e_within[t] + c_u[t])
            delta = delta + (g_a2 - g[a]) + (g_b2 - g[t])
        return delta

    def _apply_move(self, u: int, a: int, b: int, c_u: np.ndarray, d_u: int) -> None:
        self.e[a, :] -= c_u
        self.e[:, a] -= c_u
        self.e[b, :] += c_u
        self.e[:, b] += c_u
        self.e[a, a] = 0
        self.e[b, b] = 0
        self.e_within[a] -= c_u[a]
        self.e_within[b] += c_u[b]
        self.sizes[a] -= 1
        self.sizes[b] += 1
        self.dg[a] -= d_u
        self.dg[b] += d_u
        self.ug[a] -= d_u**2
        self.ug[b] += d_u**2
        self.labels[u] = b

    def _update_term_cache(self, a: int, b: int, terms: np.ndarray,
                           row_sums: np.ndarray) -> None:
        """Refresh cached block terms for rows/columns a and b after a move."""
        em = self.e_matrix()
        for g in (a, b):
            old = terms[g, :].copy()
            row_r = self.sizes[g] * self.sizes
            row_r[g] = self.sizes[g] * (self.sizes[g] - 1) // 2
            new = self.score.block(em[g, :], row_r)
            terms[g, :] = new
            terms[:, g] = new
            row_sums += new - old  # column g changed for every row
        # rows a and b were rewritten wholesale; recompute their sums exactly
        row_sums[a] = terms[a, :].sum()
        row_sums[b] = terms[b, :].sum()


def _agglomerative(graph: Graph, method: Method, seed: int) -> list[int]:
    score = _SCORES[method](graph)
    state = _BlockState(graph, score)
    rng = np.random.default_rng(seed)
    best_obj = state.objective()
    best_labels = state.labels.copy()
    while state.k > 1:
        a, b = state.merge_candidates(rng)
        deltas = state.merge_deltas(a, b)
        j = int(np.argmin(deltas))
        lo, hi = min(int(a[j]), int(b[j])), max(int(a[j]), int(b[j]))
        state.merge(lo, hi)
        merged = lo  # merge() keeps the lower index
        members = np.flatnonzero(state.labels == merged)
        frontier: set[int] = set(int(x) for x in members)
        for u in members:
            frontier.update(int(v) for v in state._nbrs[int(u)].tolist())
        state.refine(rng, frontier)
        obj = state.objective()
        if obj < best_obj - 1e-12:
            best_obj = obj
            best_labels = state.labels.copy()
    return [int(x) for x in best_labels]


# ===========================================================================
# Spectral detection: model-order selection + k-means on the embedding
# ===========================================================================

def _spectral_detect(graph: Graph, method: Method, seed: int) -> tuple[Partition, float]:
    try:
        if method is Method.SPECTRAL_BH:
            k, emb = spectral.bethe_hessian_select(graph)
        else:
            k, emb = spectral.nonbacktracking_select(graph)
    except spectral.EigensolverError as exc:
        raise DetectError(str(exc)) from exc
    cap = spectral._spectral_cap(graph)
    if k > cap:
        warnings.warn(f"{method.value}: selector proposed k={k} above the "
                      f"4*ceil(sqrt(M))={cap} guard; capping", stacklevel=2)
        k = cap
        emb = emb[:, :k]
    k = min(k, graph.n)
    if k <= 1:
        labels = [0] * graph.n
        center = emb.mean(axis=0, keepdims=True)
        inertia = float(((emb - center) ** 2).sum())
        return canonicalize(labels), inertia
    km = KMeans(n_clusters=k, n_init=10, random_state=int(seed) % (2**32),
                algorithm="lloyd")
    assignments = km.fit_predict(emb)
    return canonicalize(assignments.tolist()), float(km.inertia_)
