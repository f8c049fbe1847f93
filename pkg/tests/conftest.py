import pytest

from qaplon.community import WeightedGraph


@pytest.fixture
def two_triangles() -> WeightedGraph:
    """Two disjoint unit triangles: the canonical modularity ground truth."""
    return WeightedGraph(
        6,
        {
            (0, 1): 1.0,
            (0, 2): 1.0,
            (1, 2): 1.0,
            (3, 4): 1.0,
            (3, 5): 1.0,
            (4, 5): 1.0,
        },
    )


@pytest.fixture
def triangle() -> WeightedGraph:
    return WeightedGraph(3, {(0, 1): 1.0, (0, 2): 1.0, (1, 2): 1.0})


@pytest.fixture
def k4() -> WeightedGraph:
    return WeightedGraph(4, {(i, j): 1.0 for i in range(4) for j in range(i + 1, 4)})
