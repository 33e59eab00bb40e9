"""Edge-holdout benchmark engine: sampling, AUC estimation, accuracy curves.

Two tasks share a sampled graph G' = (V, E') with |E'| = alpha * M edges kept:

* PREDICTION: separate missing links (E minus E') from non-edges (pairs
  outside E).
* DESCRIPTION: separate observed edges (E') from all other pairs, missing
  links included.

Both tasks of a (network, method, alpha, replicate) cell share the same split
and the same fitted partition through deterministic seed derivation, so runs
are reproducible and schedule-independent.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np

from .detect import DetectError, Method, detect
from .graph import Graph
from .score import ScoreMode, ScoreModelError, build_score_model

__all__ = [
    "Task",
    "SampledGraph",
    "TaskResult",
    "AccuracyCurve",
    "derive_seed",
    "sample_edges",
    "auc_exact",
    "auc_monte_carlo",
    "run_task",
    "run_task_pair",
    "accuracy_curve",
    "aggregate",
    "best_fraction",
    "DEFAULT_ALPHA_GRID",
    "DEFAULT_MC_SAMPLES",
]

DEFAULT_ALPHA_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))
DEFAULT_MC_SAMPLES = 10_000
# all-pairs budget under which exact AUC is allowed instead of Monte Carlo
EXACT_PAIR_BUDGET = 1_000_000


class Task(str, Enum):
    PREDICTION = "prediction"
    DESCRIPTION = "description"

    @classmethod
    def parse(cls, name: str) -> "Task":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown task {name!r}") from None


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from arbitrary parts; independent of hash order."""
    text = "|".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True)
class SampledGraph:
    """An edge-holdout split of a graph; node set unchanged."""

    graph: Graph
    alpha: float
    observed_edges: tuple[tuple[int, int], ...]
    missing_edges: tuple[tuple[int, int], ...]
    seed: int

    @property
    def observed(self) -> Graph:
        return Graph(n=self.graph.n, edges=self.observed_edges,
                     names=self.graph.names)


def sample_edges(graph: Graph, alpha: float, seed: int) -> SampledGraph:
    """Keep a uniformly random subset of round(alpha * M) edges, clamped to
    [1, M-1] so both sides of the split are nonempty."""
    if graph.m < 2:
        raise ValueError("cannot split a graph with fewer than 2 edges")
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha={alpha} outside (0, 1)")
    m = graph.m
    n_keep = int(np.floor(alpha * m + 0.5))  # round half up
    n_keep = max(1, min(m - 1, n_keep))
    rng = np.random.default_rng(seed)
    keep_idx = rng.choice(m, size=n_keep, replace=False)
    keep_mask = np.zeros(m, dtype=bool)
    keep_mask[keep_idx] = True
    observed = tuple(e for e, k in zip(graph.edges, keep_mask) if k)
    missing = tuple(e for e, k in zip(graph.edges, keep_mask) if not k)
    return SampledGraph(graph=graph, alpha=alpha, observed_edges=observed,
                        missing_edges=missing, seed=seed)


# ---------------------------------------------------------------------------
# AUC estimators
# ---------------------------------------------------------------------------

def auc_exact(positive_scores: Sequence[float],
              negative_scores: Sequence[float]) -> float:
    """Exact AUC: P(pos > neg) + 0.5 P(pos = neg) over all pairs."""
    pos = np.asarray(positive_scores, dtype=np.float64)
    neg = np.asarray(negative_scores, dtype=np.float64)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("AUC undefined: empty positive or negative set")
    neg_sorted = np.sort(neg)
    below = np.searchsorted(neg_sorted, pos, side="left")
    upto = np.searchsorted(neg_sorted, pos, side="right")
    wins = below.sum() + 0.5 * (upto - below).sum()
    return float(wins / (pos.size * neg.size))


def auc_monte_carlo(score_fn: Callable, positives: Sequence, negatives: Sequence,
                    n_samples: int = DEFAULT_MC_SAMPLES, seed: int = 0) -> float:
    """Monte Carlo AUC: mean of 1[s_p > s_n] + 0.5 * 1[s_p = s_n] over
    ``n_samples`` uniform (positive, negative) draws."""
    if len(positives) == 0 or len(negatives) == 0:
        raise ValueError("AUC undefined: empty positive or negative set")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    pi = rng.integers(0, len(positives), size=n_samples)
    ni = rng.integers(0, len(negatives), size=n_samples)
    sp = np.asarray([score_fn(positives[int(t)]) for t in pi], dtype=np.float64)
    sn = np.asarray([score_fn(negatives[int(t)]) for t in ni], dtype=np.float64)
    return float(np.mean((sp > sn) + 0.5 * (sp == sn)))


def _mc_auc_pairs(scorer, pos_pairs: np.ndarray, neg_sampler: Callable,
                  n_samples: int, seed: int) -> float:
    """Monte Carlo AUC where negatives come from a rejection sampler."""
    rng = np.random.default_rng(seed)
    pi = rng.integers(0, pos_pairs.shape[0], size=n_samples)
    sampled_pos = pos_pairs[pi]
    sampled_neg = neg_sampler(rng, n_samples)
    sp = scorer.score_pairs(sampled_pos)
    sn = scorer.score_pairs(sampled_neg)
    return float(np.mean((sp > sn) + 0.5 * (sp == sn)))


def _uniform_nonpair_sampler(n: int, excluded: frozenset) -> Callable:
    """Sampler of uniform node pairs outside ``excluded``, by rejection."""

    def draw(rng: np.random.Generator, count: int) -> np.ndarray:
        out = np.empty((count, 2), dtype=np.int64)
        filled = 0
        while filled < count:
            cand_i = rng.integers(0, n, size=2 * (count - filled) + 8)
            cand_j = rng.integers(0, n, size=cand_i.size)
            for i, j in zip(cand_i, cand_j):
                if i == j:
                    continue
                pair = (int(min(i, j)), int(max(i, j)))
                if pair in excluded:
                    continue
                out[filled] = pair
                filled += 1
                if filled == count:
                    break
        return out

    return draw


def _all_pairs_outside(n: int, excluded: frozenset) -> np.ndarray:
    iu, ju = np.triu_indices(n, k=1)
    pairs = np.stack([iu, ju], axis=1)
    mask = np.asarray([(int(i), int(j)) not in excluded for i, j in pairs])
    return pairs[mask]


# ---------------------------------------------------------------------------
# Benchmark tasks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TaskResult:
    network: str
    method: Method
    task: Task
    mode: ScoreMode
    alpha: float
    replicate: int
    auc: float
    k: int
    seed: int
    ok: bool = True
    error: str | None = None

    def to_record(self) -> dict:
        return {"network": self.network, "method": self.method.value,
                "task": self.task.value, "mode": self.mode.value,
                "alpha": self.alpha, "replicate": self.replicate,
                "auc": self.auc, "k": self.k, "seed": self.seed,
                "ok": self.ok, "error": self.error}

    @classmethod
    def from_record(cls, rec: dict) -> "TaskResult":
        return cls(network=rec["network"], method=Method(rec["method"]),
                   task=Task(rec["task"]), mode=ScoreMode(rec["mode"]),
                   alpha=float(rec["alpha"]), replicate=int(rec["replicate"]),
                   auc=float(rec["auc"]), k=int(rec["k"]), seed=int(rec["seed"]),
                   ok=bool(rec.get("ok", True)), error=rec.get("error"))


def _task_sets(sampled: SampledGraph, task: Task) -> tuple[np.ndarray, frozenset]:
    """Positive pairs and the exclusion set defining the negatives."""
    full = sampled.graph
    if task is Task.PREDICTION:
        positives = np.asarray(sampled.missing_edges, dtype=np.int64)
        excluded = full.edge_set  # negatives are non-edges of the full graph
    else:
        positives = np.asarray(sampled.observed_edges, dtype=np.int64)
        excluded = frozenset(sampled.observed_edges)  # missing links are negatives
    return positives, excluded


def _auc_for_task(scorer, sampled: SampledGraph, task: Task, mc_samples: int,
                  seed: int, exact: bool) -> float:
    positives, excluded = _task_sets(sampled, task)
    if positives.shape[0] == 0:
        raise ValueError("task has no positive pairs")
    n = sampled.graph.n
    if exact:
        if n * (n - 1) // 2 > EXACT_PAIR_BUDGET:
            raise ValueError("graph too large for the exact all-pairs AUC")
        negatives = _all_pairs_outside(n, excluded)
        return auc_exact(scorer.score_pairs(positives),
                         scorer.score_pairs(negatives))
    sampler = _uniform_nonpair_sampler(n, excluded)
    return _mc_auc_pairs(scorer, positives, sampler, mc_samples, seed)


def run_task_pair(graph: Graph, method: Method | str, alpha: float, seed: int,
                  mode: ScoreMode | str = ScoreMode.MODEL_SPECIFIC,
                  mc_samples: int = DEFAULT_MC_SAMPLES, exact: bool = False,
                  network: str = "", replicate: int = 0,
                  ) -> tuple[TaskResult, TaskResult]:
    """Run PREDICTION and DESCRIPTION on one shared split and fit."""
    method = Method.parse(method) if isinstance(method, str) else method
    mode = ScoreMode.parse(mode) if isinstance(mode, str) else mode
    split_seed = derive_seed(seed, "split")
    fit_seed = derive_seed(seed, "fit")
    sampled = sample_edges(graph, alpha, split_seed)
    try:
        fitted = detect(method, sampled.observed, fit_seed)
        scorer = build_score_model(method, sampled.observed, fitted.partition, mode)
    except (DetectError, ScoreModelError) as exc:  # failures become failed records
        results = []
        for task in (Task.PREDICTION, Task.DESCRIPTION):
            results.append(TaskResult(
                network=network, method=method, task=task, mode=mode,
                alpha=alpha, replicate=replicate, auc=float("nan"), k=0,
                seed=seed, ok=False, error=str(exc)))
        return results[0], results[1]
    out = []
    for task in (Task.PREDICTION, Task.DESCRIPTION):
        mc_seed = derive_seed(seed, "auc", task.value)
        auc = _auc_for_task(scorer, sampled, task, mc_samples, mc_seed, exact)
        out.append(TaskResult(network=network, method=method, task=task,
                              mode=mode, alpha=alpha, replicate=replicate,
                              auc=auc, k=fitted.k, seed=seed))
    return out[0], out[1]


def run_task(graph: Graph, method: Method | str, task: Task | str, alpha: float,
             seed: int, mode: ScoreMode | str = ScoreMode.MODEL_SPECIFIC,
             mc_samples: int = DEFAULT_MC_SAMPLES, exact: bool = False,
             network: str = "", replicate: int = 0) -> TaskResult:
    """Run a single task; the paired task shares its split and fit by seed."""
    task = Task.parse(task) if isinstance(task, str) else task
    pred, desc = run_task_pair(graph, method, alpha, seed, mode, mc_samples,
                               exact, network, replicate)
    return pred if task is Task.PREDICTION else desc


@dataclass(frozen=True)
class AccuracyCurve:
    """Mean AUC against the observed-edge fraction for one method and task."""

    method: Method
    task: Task
    mode: ScoreMode
    points: tuple[tuple[float, float, float, int], ...]  # (alpha, mean, stderr, n)

    def alphas(self) -> list[float]:
        return [p[0] for p in self.points]

    def means(self) -> list[float]:
        return [p[1] for p in self.points]


def accuracy_curve(graph: Graph, method: Method | str, task: Task | str,
                   alpha_grid: Sequence[float] = DEFAULT_ALPHA_GRID,
                   replicates: int = 3, seed: int = 0,
                   mode: ScoreMode | str = ScoreMode.MODEL_SPECIFIC,
                   mc_samples: int = DEFAULT_MC_SAMPLES,
                   network: str = "") -> AccuracyCurve:
    """AUC-vs-alpha curve for one network; seeds derive per (alpha, replicate)."""
    method = Method.parse(method) if isinstance(method, str) else method
    task = Task.parse(task) if isinstance(task, str) else task
    mode = ScoreMode.parse(mode) if isinstance(mode, str) else mode
    alpha_grid = _check_grid(alpha_grid)
    points = []
    for a_idx, alpha in enumerate(alpha_grid):
        aucs = []
        for rep in range(replicates):
            task_seed = derive_seed(seed, network, method.value, a_idx, rep)
            res = run_task(graph, method, task, alpha, task_seed, mode,
                           mc_samples, network=network, replicate=rep)
            if res.ok:
                aucs.append(res.auc)
        points.append(_curve_point(alpha, aucs))
    return AccuracyCurve(method=method, task=task, mode=mode, points=tuple(points))


def _check_grid(alpha_grid: Sequence[float]) -> tuple[float, ...]:
    grid = tuple(float(a) for a in alpha_grid)
    if not grid:
        raise ValueError("alpha grid is empty")
    if any(not (0.0 < a < 1.0) for a in grid):
        raise ValueError("alpha grid values must lie in (0, 1)")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("alpha grid must be strictly increasing")
    return grid


def _curve_point(alpha: float, aucs: list[float]) -> tuple[float, float, float, int]:
    n = len(aucs)
    if n == 0:
        return (alpha, float("nan"), float("nan"), 0)
    mean = float(np.mean(aucs))
    stderr = float(np.std(aucs, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return (alpha, mean, stderr, n)


# ---------------------------------------------------------------------------
# Corpus aggregation
# ---------------------------------------------------------------------------

def aggregate(results: Iterable[TaskResult], group_by: str = "method",
              domains: dict[str, str] | None = None) -> dict:
    """Benchmark performance curves: unweighted mean over networks.

    Replicates are averaged within each network first.  ``group_by`` is
    ``"method"`` or ``"method_domain"`` (requires a network -> domain map).
    Failed results are excluded; point counts reflect contributing networks.
    Returns {group key: AccuracyCurve} with key (method, task, mode[, domain]).
    """
    if group_by not in ("method", "method_domain"):
        raise ValueError(f"unknown group_by {group_by!r}")
    if group_by == "method_domain" and domains is None:
        raise ValueError("method_domain grouping requires a domain map")
    per_network: dict = {}
    for r in results:
        if not r.ok or not np.isfinite(r.auc):
            continue
        key = (r.method, r.task, r.mode, r.network, r.alpha)
        per_network.setdefault(key, []).append(r.auc)
    grouped: dict = {}
    for (method, task, mode, network, alpha), aucs in per_network.items():
        if group_by == "method":
            gkey = (method, task, mode)
        else:
            if network not in domains:
                raise ValueError(f"network {network!r} missing from the domain map")
            gkey = (method, task, mode, domains[network])
        grouped.setdefault(gkey, {}).setdefault(alpha, []).append(float(np.mean(aucs)))
    curves = {}
    for gkey, by_alpha in sorted(grouped.items(), key=lambda kv: tuple(map(str, kv[0]))):
        points = tuple(_curve_point(alpha, vals)
                       for alpha, vals in sorted(by_alpha.items()))
        method, task, mode = gkey[0], gkey[1], gkey[2]
        curves[gkey] = AccuracyCurve(method=method, task=task, mode=mode,
                                     points=points)
    return curves


def best_fraction(results: Iterable[TaskResult], task: Task | str = Task.PREDICTION,
                  tol: float = 0.05) -> dict[Method, dict[float, float]]:
    """Fraction of networks where a method is within ``tol`` of the best AUC.

    Computed per alpha on per-network replicate-mean AUCs of the given task.
    """
    task = Task.parse(task) if isinstance(task, str) else task
    per_network: dict = {}
    for r in results:
        if not r.ok or r.task is not task or not np.isfinite(r.auc):
            continue
        per_network.setdefault((r.network, r.alpha), {}) \
            .setdefault(r.method, []).append(r.auc)
    hits: dict = {}
    totals: dict = {}
    methods = set()
    for (network, alpha), by_method in per_network.items():
        means = {m: float(np.mean(v)) for m, v in by_method.items()}
        best = max(means.values())
        methods.update(means)
        totals[alpha] = totals.get(alpha, 0) + 1
        for m, val in means.items():
            if val >= best - tol:
                by_alpha = hits.setdefault(m, {})
                by_alpha[alpha] = by_alpha.get(alpha, 0) + 1
    out: dict[Method, dict[float, float]] = {}
    for m in sorted(methods, key=lambda x: x.value):
        out[m] = {alpha: hits.get(m, {}).get(alpha, 0) / total
                  for alpha, total in sorted(totals.items())}
    return out
