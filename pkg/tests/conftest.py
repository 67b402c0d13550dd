import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from lipfree import EmbeddedPointSet, FiniteMetricSpace

settings.register_profile(
    "repo", deadline=None, derandomize=True, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_embedded(n, seed, dim=2, p=2.0):
    rng = np.random.default_rng(seed)
    while True:
        X = rng.random((n, dim))
        D = np.linalg.norm(X[:, None] - X[None], ord=p, axis=-1)
        if n < 2 or D[~np.eye(n, dtype=bool)].min() > 1e-3:
            return EmbeddedPointSet(X, p, 0)


@st.composite
def metric_spaces(draw, min_n=2, max_n=7):
    """Euclidean-or-l1 point sets, or a random graph metric (shortest paths)."""
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**31 - 1))
    kind = draw(st.sampled_from(["l2", "l1", "graph"]))
    if kind == "graph":
        rng = np.random.default_rng(seed)
        W = rng.uniform(0.1, 2.0, (n, n))
        W = np.minimum(W, W.T)
        np.fill_diagonal(W, 0.0)
        from scipy.sparse.csgraph import shortest_path
        D = shortest_path(W, directed=False)
        return FiniteMetricSpace([f"g{i}" for i in range(n)], D, 0)
    return random_embedded(n, seed, p=2.0 if kind == "l2" else 1.0).to_metric()


@pytest.fixture
def line3():
    return FiniteMetricSpace(["0", "1/2", "1"], [[0, .5, 1], [.5, 0, .5], [1, .5, 0]], 0)


@pytest.fixture
def two_points():
    return FiniteMetricSpace(["a", "b"], [[0, 1.0], [1.0, 0]], 0)
