import numpy as np
import pytest
from hypothesis import settings, strategies as st

from congestcut import graph as G

settings.register_profile("repro", derandomize=True)
settings.load_profile("repro")


@st.composite
def multigraphs(draw, min_n=2, max_n=10, max_weight=8, connected=True):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return G.random_multigraph(rng, n, max_weight=max_weight, connected=connected)


@pytest.fixture
def dumbbell():
    return G.dumbbell()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
