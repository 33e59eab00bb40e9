import numpy as np
import pytest

from commbench.graph import Graph


def make_clique(n: int, offset: int = 0) -> list[tuple[int, int]]:
    return [(i + offset, j + offset) for i in range(n) for j in range(i + 1, n)]


def random_graph(rng: np.random.Generator, n: int, p: float,
                 require_edges: int = 1) -> Graph:
    """Erdos-Renyi draw, retried until it has at least ``require_edges`` edges."""
    while True:
        iu, ju = np.triu_indices(n, k=1)
        mask = rng.random(iu.size) < p
        if mask.sum() >= require_edges:
            return Graph.from_edges(n, list(zip(iu[mask].tolist(), ju[mask].tolist())))


def random_labels(rng: np.random.Generator, n: int, k_max: int) -> list[int]:
    k = int(rng.integers(1, k_max + 1))
    return rng.integers(0, k, size=n).tolist()


@pytest.fixture
def triangle() -> Graph:
    return Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def path4() -> Graph:
    return Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def k4() -> Graph:
    return Graph.from_edges(4, make_clique(4))


@pytest.fixture
def two_k4() -> Graph:
    return Graph.from_edges(8, make_clique(4) + make_clique(4, offset=4))


@pytest.fixture
def two_triangles_bridge() -> Graph:
    # two triangles joined by one bridge edge, M = 7
    return Graph.from_edges(6, [(0, 1), (1, 2), (0, 2),
                                (3, 4), (4, 5), (3, 5), (2, 3)])


@pytest.fixture
def k5_bridge_k5() -> Graph:
    return Graph.from_edges(10, make_clique(5) + make_clique(5, offset=5) + [(4, 5)])


@pytest.fixture
def k8_bridge_k8() -> Graph:
    return Graph.from_edges(16, make_clique(8) + make_clique(8, offset=8) + [(7, 8)])
