"""Cross-method analytics: community-count trends, output-similarity
clustering of methods, and the prediction/description fit rubric."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.cluster.hierarchy import leaves_list, linkage
from scipy.spatial.distance import squareform

from .bench import AccuracyCurve, Task
from .detect import Method
from .partition import Partition, compare

__all__ = [
    "KTrendBin",
    "SimilarityMatrix",
    "FitLabel",
    "FitDiagnosis",
    "k_size_trend",
    "method_similarity",
    "classify_fit",
    "DEFAULT_KERNEL_SIGMA_SQ",
    "gaussian_kernel",
]

# width of the Gaussian kernel applied to the mean pairwise-AMI matrix
DEFAULT_KERNEL_SIGMA_SQ = 0.3


# ---------------------------------------------------------------------------
# Community count against network size
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KTrendBin:
    method: Method
    lo: float            # bin edge (inclusive), factor-2 bins
    hi: float            # bin edge (exclusive)
    center: float        # geometric mean of member sizes
    mean_k: float
    max_k: int
    reference: float     # sqrt(center), unit constant
    count: int


def k_size_trend(entries: Iterable[tuple[Method | str, int, float]],
                 ) -> list[KTrendBin]:
    """Bin inferred community counts by network size in factor-2 log bins.

    ``entries`` are (method, k, size) triples where size is the node or edge
    count of the fitted network.  Each (method, bin) row reports the mean and
    max k alongside the sqrt-size reference evaluated at the bin's geometric
    mean.
    """
    rows: dict = {}
    for method, k, size in entries:
        method = Method.parse(method) if isinstance(method, str) else method
        if size <= 0:
            raise ValueError("sizes must be positive")
        b = int(np.floor(np.log2(size)))
        rows.setdefault((method, b), []).append((int(k), float(size)))
    out = []
    for (method, b), vals in sorted(rows.items(),
                                    key=lambda kv: (kv[0][0].value, kv[0][1])):
        ks = np.asarray([v[0] for v in vals], dtype=np.float64)
        sizes = np.asarray([v[1] for v in vals])
        center = float(np.exp(np.mean(np.log(sizes))))
        out.append(KTrendBin(method=method, lo=float(2.0**b), hi=float(2.0 ** (b + 1)),
                             center=center, mean_k=float(ks.mean()),
                             max_k=int(ks.max()), reference=float(np.sqrt(center)),
                             count=len(vals)))
    return out


# ---------------------------------------------------------------------------
# Algorithm similarity clustering
# ---------------------------------------------------------------------------

def gaussian_kernel(ami: np.ndarray,
                    sigma_sq: float = DEFAULT_KERNEL_SIGMA_SQ) -> np.ndarray:
    """exp(-(1 - AMI)^2 / (2 sigma^2)): similarity 1 maps to 1, lower AMI decays."""
    return np.exp(-((1.0 - ami) ** 2) / (2.0 * sigma_sq))


@dataclass(frozen=True)
class SimilarityMatrix:
    methods: tuple[Method, ...]     # lexicographic by method id
    ami: np.ndarray                 # mean pairwise AMI over networks
    kernel: np.ndarray              # Gaussian kernel of the AMI matrix
    merges: np.ndarray              # scipy linkage matrix (average linkage)
    leaf_order: tuple[int, ...]     # dendrogram leaf order into ``methods``

    def ordered_methods(self) -> list[Method]:
        return [self.methods[i] for i in self.leaf_order]


def method_similarity(partitions: Mapping, sigma_sq: float = DEFAULT_KERNEL_SIGMA_SQ,
                      ) -> SimilarityMatrix:
    """Cluster methods by the similarity of their outputs across networks.

    ``partitions[method][network]`` holds the method's partition of that
    network; a network enters a pair's mean only when both methods cover it.
    Methods are ordered lexicographically before clustering so the result is
    independent of input order; ties in the dendrogram fall back to that
    ordering.
    """
    methods = sorted((Method.parse(m) if isinstance(m, str) else m
                      for m in partitions), key=lambda m: m.value)
    if len(methods) < 2:
        raise ValueError("method similarity needs at least two methods")
    n = len(methods)
    by_method = {Method.parse(m) if isinstance(m, str) else m: v
                 for m, v in partitions.items()}
    ami = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            pi, pj = by_method[methods[i]], by_method[methods[j]]
            shared = sorted(set(pi) & set(pj))
            if not shared:
                raise ValueError(f"methods {methods[i].value} and {methods[j].value} "
                                 "share no networks")
            vals = [compare(pi[net], pj[net], "AMI") for net in shared]
            ami[i, j] = ami[j, i] = float(np.mean(vals))
    kernel = gaussian_kernel(ami, sigma_sq)
    dist = 1.0 - kernel
    np.fill_diagonal(dist, 0.0)
    condensed = squareform(dist, checks=False)
    merges = linkage(condensed, method="average")
    order = tuple(int(x) for x in leaves_list(merges))
    return SimilarityMatrix(methods=tuple(methods), ami=ami, kernel=kernel,
                            merges=merges, leaf_order=order)


# ---------------------------------------------------------------------------
# Fit classification (prediction/description rubric)
# ---------------------------------------------------------------------------

class FitLabel:
    WELL_FITTED = "well_fitted"
    OVERFIT = "overfit"
    UNDERFIT = "underfit"
    UNEVEN = "uneven"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class FitDiagnosis:
    labels: dict            # method -> FitLabel string
    evidence: dict          # method -> {lp_tercile, ld_tercile, rank_shift}

    def to_record(self) -> dict:
        return {m.value: {"label": self.labels[m], **self.evidence[m]}
                for m in sorted(self.labels, key=lambda x: x.value)}


def _rank_matrix(curves: Mapping, methods: list[Method]) -> np.ndarray:
    """Rank (1 = best mean AUC) per alpha; ties share the average rank."""
    alphas = curves[methods[0]].alphas()
    mat = np.zeros((len(methods), len(alphas)))
    for ai in range(len(alphas)):
        vals = np.asarray([curves[m].means()[ai] for m in methods])
        order = (-vals).argsort(kind="stable")
        ranks = np.empty(len(methods))
        ranks[order] = np.arange(1, len(methods) + 1)
        # average tied ranks so tercile grades ignore method order
        for v in np.unique(vals):
            tied = vals == v
            if tied.sum() > 1:
                ranks[tied] = ranks[tied].mean()
        mat[:, ai] = ranks
    return mat


def _tercile(median_rank: float, n_methods: int) -> str:
    if median_rank <= n_methods / 3.0:
        return "good"
    if median_rank > 2.0 * n_methods / 3.0:
        return "poor"
    return "moderate"


def classify_fit(lp_curves: Mapping, ld_curves: Mapping) -> FitDiagnosis:
    """Label each method's fit behavior from its two benchmark curves.

    Methods are ranked by mean AUC at each alpha; the task grade is the
    tercile (good / moderate / poor) of the median rank across the grid.
    Grades map to labels: good prediction with at most moderate description
    is well fitted; poor prediction with good description overfits; poor at
    both underfits.  A method whose prediction tercile differs between the
    low-alpha and high-alpha halves of the grid is labeled uneven, taking
    precedence.  Anything else is inconclusive.
    """
    methods = sorted((Method.parse(m) if isinstance(m, str) else m
                      for m in lp_curves), key=lambda m: m.value)
    if len(methods) < 3:
        raise ValueError("fit classification needs at least three methods")
    lp = {Method.parse(m) if isinstance(m, str) else m: c for m, c in lp_curves.items()}
    ld = {Method.parse(m) if isinstance(m, str) else m: c for m, c in ld_curves.items()}
    if set(lp) != set(ld):
        raise ValueError("prediction and description curves cover different methods")
    grid = lp[methods[0]].alphas()
    for m in methods:
        if lp[m].alphas() != grid or ld[m].alphas() != grid:
            raise ValueError("curves do not share one alpha grid")
    n = len(methods)
    lp_ranks = _rank_matrix(lp, methods)
    ld_ranks = _rank_matrix(ld, methods)
    n_alpha = len(grid)
    lo_idx = slice(0, n_alpha // 2)
    hi_idx = slice((n_alpha + 1) // 2, n_alpha)
    labels: dict = {}
    evidence: dict = {}
    for mi, m in enumerate(methods):
        lp_grade = _tercile(float(np.median(lp_ranks[mi])), n)
        ld_grade = _tercile(float(np.median(ld_ranks[mi])), n)
        lo = lp_ranks[mi, lo_idx]
        hi = lp_ranks[mi, hi_idx]
        shift = False
        if lo.size and hi.size:
            shift = _tercile(float(np.median(lo)), n) != _tercile(float(np.median(hi)), n)
        if shift:
            label = FitLabel.UNEVEN
        elif lp_grade == "good" and ld_grade in ("poor", "moderate"):
            label = FitLabel.WELL_FITTED
        elif lp_grade == "poor" and ld_grade == "good":
            label = FitLabel.OVERFIT
        elif lp_grade == "poor" and ld_grade == "poor":
            label = FitLabel.UNDERFIT
        else:
            label = FitLabel.INCONCLUSIVE
        labels[m] = label
        evidence[m] = {"lp_tercile": lp_grade, "ld_tercile": ld_grade,
                       "rank_shift": bool(shift)}
    return FitDiagnosis(labels=labels, evidence=evidence)
