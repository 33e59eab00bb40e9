"""Immutable simple-graph container, edge-list I/O, and planted-partition generation."""
from __future__ import annotations

import io
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .partition import Partition, canonicalize

__all__ = [
    "Graph",
    "GraphError",
    "EdgeListParseError",
    "EmptyGraphError",
    "PlantedPartitionParams",
    "load_edge_list",
    "largest_component",
    "generate_planted_partition",
]


class GraphError(ValueError):
    """Invalid graph construction or operation."""


class EmptyGraphError(GraphError):
    """Raised when a graph is empty after cleanup."""


class EdgeListParseError(GraphError):
    """Malformed edge-list input; carries the offending line number."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on nodes 0..n-1.

    Edges are stored as sorted (min, max) pairs in ascending order; no
    self-loops or duplicates.  Instances are immutable and safe to share
    across concurrent tasks.  ``names``, when present, maps dense node ids
    back to the original ids of the input file.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise EmptyGraphError("empty graph: no nodes")
        if self.names is not None and len(self.names) != self.n:
            raise GraphError("names sidecar length does not match node count")

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> tuple[frozenset[int], ...]:
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return tuple(frozenset(s) for s in adj)

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Sorted neighbor tuples, for deterministic iteration."""
        return tuple(tuple(sorted(s)) for s in self.adjacency)

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    @cached_property
    def edge_array(self) -> np.ndarray:
        """Edges as an (m, 2) int64 array."""
        if not self.edges:
            return np.zeros((0, 2), dtype=np.int64)
        return np.asarray(self.edges, dtype=np.int64)

    @cached_property
    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges)

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edge_set

    def dense_adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.float64)
        if self.edges:
            ij = self.edge_array
            a[ij[:, 0], ij[:, 1]] = 1.0
            a[ij[:, 1], ij[:, 0]] = 1.0
        return a

    def sparse_adjacency(self):
        from scipy.sparse import coo_matrix

        ij = self.edge_array
        rows = np.concatenate([ij[:, 0], ij[:, 1]])
        cols = np.concatenate([ij[:, 1], ij[:, 0]])
        data = np.ones(2 * self.m, dtype=np.float64)
        return coo_matrix((data, (rows, cols)), shape=(self.n, self.n)).tocsr()

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]],
                   names: Sequence[str] | None = None) -> "Graph":
        """Validating constructor; rejects self-loops, duplicates, out-of-range ids."""
        norm: set[tuple[int, int]] = set()
        for i, j in edges:
            if i == j:
                raise GraphError(f"self-loop at node {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise GraphError(f"edge ({i}, {j}) outside node range 0..{n - 1}")
            pair = (min(i, j), max(i, j))
            if pair in norm:
                raise GraphError(f"duplicate edge {pair}")
            norm.add(pair)
        return cls(n=n, edges=tuple(sorted(norm)),
                   names=tuple(names) if names is not None else None)

    def canonical_edge_text(self) -> str:
        """Canonical serialization: sorted (min, max) pairs, newline-terminated."""
        return "".join(f"{i} {j}\n" for i, j in self.edges)

    def write_edge_list(self, path) -> None:
        Path(path).write_text(self.canonical_edge_text(), encoding="utf-8")


def _parse_pairs(stream: IO[str]) -> list[tuple[str, str, int]]:
    pairs = []
    for line_no, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListParseError(
                f"expected two whitespace-separated node ids, got {len(tokens)}", line_no)
        pairs.append((tokens[0], tokens[1], line_no))
    return pairs


def _dense_int_ids(tokens: list[str]) -> bool:
    ids = set()
    for t in tokens:
        try:
            v = int(t)
        except ValueError:
            return False
        if str(v) != t:  # forms like "01" must go through the remap path
            return False
        ids.add(v)
    return min(ids) == 0 and max(ids) == len(ids) - 1


def load_edge_list(source: str | Path | IO[str], simplify: bool = False,
                   largest_component: bool = False) -> Graph:
    """Read a whitespace edge list into a :class:`Graph`.

    Node ids may be arbitrary strings; they are remapped to dense 0..n-1 ids
    by first appearance, except when the input already uses exactly the ids
    0..n-1 which are kept verbatim (this makes loading a canonical
    serialization the identity).  Lines starting with ``#`` and blank lines
    are ignored.  With ``simplify``, duplicate edges and self-loops are
    dropped; otherwise they raise.  With ``largest_component``, only the
    largest connected component is kept, re-indexed densely.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            pairs = _parse_pairs(fh)
    else:
        pairs = _parse_pairs(source)

    tokens = [t for u, v, _ in pairs for t in (u, v)]
    if tokens and _dense_int_ids(tokens):
        index = {t: int(t) for t in tokens}
        names = None
    else:
        index = {}
        for t in tokens:
            if t not in index:
                index[t] = len(index)
        names = [None] * len(index)
        for t, i in index.items():
            names[i] = t

    n = len(index)
    seen: set[tuple[int, int]] = set()
    edges: list[tuple[int, int]] = []
    for u, v, line_no in pairs:
        i, j = index[u], index[v]
        if i == j:
            if simplify:
                continue
            raise EdgeListParseError(f"self-loop at node {u!r}", line_no)
        pair = (min(i, j), max(i, j))
        if pair in seen:
            if simplify:
                continue
            raise EdgeListParseError(f"duplicate edge {u!r} {v!r}", line_no)
        seen.add(pair)
        edges.append(pair)

    if n == 0:
        raise EmptyGraphError("empty graph: no edges or nodes in input")
    graph = Graph(n=n, edges=tuple(sorted(edges)),
                  names=tuple(names) if names is not None else None)
    if largest_component:
        graph, _ = _lcc(graph)
    return graph


def largest_component(graph: Graph) -> tuple[Graph, np.ndarray]:
    """Extract the largest connected component, re-indexed densely.

    Returns the component graph and the array of original node ids kept, in
    ascending order (so relative node order is stable).  Ties between equal
    size components go to the one containing the smallest node id.
    """
    comp = component_labels(graph)
    sizes = np.bincount(comp)
    best = int(np.argmax(sizes))  # argmax takes the first max: smallest root id
    keep = np.flatnonzero(comp == best)
    remap = {int(old): new for new, old in enumerate(keep)}
    edges = [(remap[i], remap[j]) for i, j in graph.edges if int(comp[i]) == best]
    names = tuple(graph.names[i] for i in keep) if graph.names is not None else None
    sub = Graph(n=len(keep), edges=tuple(sorted(edges)), names=names)
    return sub, keep


_lcc = largest_component  # alias: the load_edge_list flag shadows the name


def component_labels(graph: Graph) -> np.ndarray:
    """Connected-component id per node; components numbered by smallest member."""
    comp = np.full(graph.n, -1, dtype=np.int64)
    next_id = 0
    for start in range(graph.n):
        if comp[start] >= 0:
            continue
        comp[start] = next_id
        stack = [start]
        while stack:
            u = stack.pop()
            for v in graph.adjacency[u]:
                if comp[v] < 0:
                    comp[v] = next_id
                    stack.append(v)
        next_id += 1
    return comp


@dataclass(frozen=True)
class PlantedPartitionParams:
    """Parameters of the equal-probability block generative model.

    Each node draws its group from ``membership_prior``; each pair connects
    independently with ``p_in`` (same group) or ``p_out`` (different).  The
    assortative convention ``p_out <= p_in`` is validated by default; pass
    ``allow_disassortative=True`` to generate inverted structure.
    """

    k: int
    membership_prior: tuple[float, ...]
    p_in: float
    p_out: float
    n: int
    seed: int
    allow_disassortative: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if len(self.membership_prior) != self.k:
            raise ValueError("membership prior length must equal k")
        if abs(sum(self.membership_prior) - 1.0) > 1e-9:
            raise ValueError("membership prior must sum to 1")
        for p in (self.p_in, self.p_out):
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"edge probability {p} outside [0, 1]")
        if self.p_out > self.p_in and not self.allow_disassortative:
            raise ValueError("p_out > p_in; pass allow_disassortative=True to permit")
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @classmethod
    def uniform(cls, k: int, n: int, p_in: float, p_out: float, seed: int,
                **kw) -> "PlantedPartitionParams":
        return cls(k=k, membership_prior=tuple(1.0 / k for _ in range(k)),
                   p_in=p_in, p_out=p_out, n=n, seed=seed, **kw)


def generate_planted_partition(params: PlantedPartitionParams,
                               largest_component_only: bool = False,
                               ) -> tuple[Graph, Partition]:
    """Sample a graph and its ground-truth partition from the planted model.

    Deterministic given ``params`` (the seed is part of the params).  With
    ``largest_component_only`` the graph and the planted labels are both
    restricted to the largest component and re-indexed.
    """
    if params.n < params.k:
        warnings.warn(f"planted partition with n={params.n} < k={params.k}: "
                      "some groups will be empty", stacklevel=2)
    rng = np.random.default_rng(params.seed)
    labels = rng.choice(params.k, size=params.n, p=np.asarray(params.membership_prior))
    iu, ju = np.triu_indices(params.n, k=1)
    p_edge = np.where(labels[iu] == labels[ju], params.p_in, params.p_out)
    mask = rng.random(iu.shape[0]) < p_edge
    edges = tuple(zip(iu[mask].tolist(), ju[mask].tolist()))
    graph = Graph(n=params.n, edges=edges)
    if largest_component_only:
        graph, keep = largest_component(graph)
        labels = labels[keep]
    return graph, canonicalize(labels.tolist())
