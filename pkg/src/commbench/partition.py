"""Hard node partitions, per-block edge statistics, and partition comparison."""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np
from sklearn.metrics import adjusted_mutual_info_score, normalized_mutual_info_score

if TYPE_CHECKING:
    from .graph import Graph

__all__ = [
    "Partition",
    "BlockStats",
    "canonicalize",
    "block_stats",
    "compare",
    "write_partition",
    "read_partition",
]


@dataclass(frozen=True)
class Partition:
    """Hard labeling of nodes 0..n-1 with canonical labels 0..k-1.

    Labels are canonical: each of 0..k-1 occurs at least once, and labels
    are numbered by first appearance.  Build instances via :func:`canonicalize`.
    """

    labels: tuple[int, ...]
    k: int

    @property
    def n(self) -> int:
        return len(self.labels)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.labels, dtype=np.int64)

    def groups(self) -> list[list[int]]:
        """Members of each community, indexed by label."""
        out: list[list[int]] = [[] for _ in range(self.k)]
        for i, g in enumerate(self.labels):
            out[g].append(i)
        return out


def canonicalize(labels: Sequence[int] | np.ndarray, n: int | None = None) -> Partition:
    """Relabel an arbitrary integer labeling to 0..k-1 by first appearance.

    ``n``, when given, is checked against the labeling length.
    """
    labels = list(int(x) for x in labels)
    if n is not None and len(labels) != n:
        raise ValueError(f"labeling has length {len(labels)}, expected {n}")
    if not labels:
        raise ValueError("cannot canonicalize an empty labeling")
    remap: dict[int, int] = {}
    out = []
    for lab in labels:
        if lab not in remap:
            remap[lab] = len(remap)
        out.append(remap[lab])
    return Partition(labels=tuple(out), k=len(remap))


@dataclass(frozen=True)
class BlockStats:
    """Edge counts and capacities between the blocks induced by a partition.

    ``e[r, s]`` counts edges between groups r and s, with within-group edges
    on the diagonal counted once.  ``r_max[r, s]`` is the number of distinct
    node pairs available to the block: n_r * n_s off the diagonal and
    n_r * (n_r - 1) / 2 on it.
    """

    e: np.ndarray          # (k, k) symmetric, float64
    r_max: np.ndarray      # (k, k) symmetric, float64
    sizes: np.ndarray      # (k,) nodes per group
    group_degrees: np.ndarray  # (k,) total degree per group
    degrees: np.ndarray    # (n,) node degrees

    @property
    def k(self) -> int:
        return int(self.sizes.shape[0])

    def total_edges(self) -> float:
        """Sum of e over unordered block pairs; equals M of the source graph."""
        return float(np.triu(self.e).sum())


def block_stats(graph: "Graph", partition: Partition) -> BlockStats:
    """Count edges and pair capacities for every block of ``partition`` on ``graph``."""
    if partition.n != graph.n:
        raise ValueError(f"partition covers {partition.n} nodes, graph has {graph.n}")
    k = partition.k
    lab = partition.as_array()
    e = np.zeros((k, k), dtype=np.float64)
    for i, j in graph.edges:
        a, b = lab[i], lab[j]
        e[a, b] += 1.0
        if a != b:
            e[b, a] += 1.0
    sizes = np.bincount(lab, minlength=k).astype(np.float64)
    r_max = np.outer(sizes, sizes)
    np.fill_diagonal(r_max, sizes * (sizes - 1) / 2.0)
    degrees = graph.degrees.astype(np.float64)
    group_degrees = np.bincount(lab, weights=degrees, minlength=k)
    return BlockStats(e=e, r_max=r_max, sizes=sizes,
                      group_degrees=group_degrees, degrees=degrees)


def compare(p1: Partition, p2: Partition, measure: str = "AMI") -> float:
    """Similarity of two partitions of the same node set.

    AMI is adjusted for chance under the permutation model and normalized by
    max(H1, H2); NMI is the unadjusted I / max(H1, H2).  Both equal 1 for
    identical partitions, including the two-trivial-partitions 0/0 case.
    """
    if p1.n != p2.n:
        raise ValueError(f"partition lengths differ: {p1.n} vs {p2.n}")
    a, b = p1.as_array(), p2.as_array()
    if measure.upper() == "AMI":
        return float(adjusted_mutual_info_score(a, b, average_method="max"))
    if measure.upper() == "NMI":
        return float(normalized_mutual_info_score(a, b, average_method="max"))
    raise ValueError(f"unknown measure {measure!r}; expected 'AMI' or 'NMI'")


def write_partition(path, partition: Partition, names: Sequence[str] | None = None) -> None:
    """Serialize as one ``node_id label`` pair per line (original ids if known)."""
    with open(path, "w", encoding="utf-8") as fh:
        for i, g in enumerate(partition.labels):
            name = names[i] if names is not None else i
            fh.write(f"{name} {g}\n")


def read_partition(path, names: Sequence[str] | None = None) -> Partition:
    """Read a partition written by :func:`write_partition`."""
    index = {str(name): i for i, name in enumerate(names)} if names is not None else None
    pairs: list[tuple[int, int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            node, lab = line.split()
            i = index[node] if index is not None else int(node)
            pairs.append((i, int(lab)))
    pairs.sort()
    labels = [lab for _, lab in pairs]
    return canonicalize(labels)
