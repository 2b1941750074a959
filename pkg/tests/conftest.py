import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from intertwine.discrete import sym_eigendecomposition, transition_operator
from intertwine.graph import builtin_graph

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def setup_graph(g):
    p = transition_operator(g)
    return g, p, sym_eigendecomposition(p, g)


@pytest.fixture
def triangle():
    return setup_graph(builtin_graph("cycle", 3))


@pytest.fixture
def star4():
    return setup_graph(builtin_graph("star", 4))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
